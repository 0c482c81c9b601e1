"""Loaders for municipal source files and the persistent geocode cache.

All loaders are conservative: malformed rows are collected into a rejects
report with line numbers instead of aborting the run, and every text file
is read as UTF-8 with lossy replacement (legacy exports carry stray bytes).
"""
from __future__ import annotations

import csv
import io
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from . import geo
from .errors import (
    FileUnreadable,
    HeaderMismatch,
    NotAFeatureCollection,
    StoreUnavailable,
)
from .linkage import normalize_address
from .model import (
    ChildRecord,
    GeoAddress,
    MatchCandidate,
    Parcel,
    PipeMaterial,
    Project,
    ServiceLine,
    StreetSegment,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RejectedRow:
    line_no: int
    reason: str
    raw: str


@dataclass
class LoadResult:
    records: list = field(default_factory=list)
    rejects: list[RejectedRow] = field(default_factory=list)


def _open_text(path):
    # lossy UTF-8 with a warning: legacy municipal exports carry stray bytes
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise FileUnreadable(f"cannot read {path}: {exc}") from exc
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        log.warning("%s: replacing non-UTF-8 bytes during ingest", path)
        text = data.decode("utf-8", errors="replace")
    return io.StringIO(text, newline="")


def _reader(path, required: Sequence[str], aliases: Optional[Mapping[str, str]] = None):
    fh = _open_text(path)
    reader = csv.DictReader(fh)
    names = reader.fieldnames or []
    if aliases:
        names = [aliases.get(n, n) for n in names]
        reader.fieldnames = names
    missing = [col for col in required if col not in names]
    if missing:
        fh.close()
        raise HeaderMismatch(f"{path}: missing columns {missing}, found {names}")
    return fh, reader


def load_students(path, aliases: Optional[Mapping[str, str]] = None) -> LoadResult:
    """Parse the student roll CSV: child_id,grade,address[,age].

    Grade must be an int in 0..12 when present; at least one of grade/age is
    required. Bad rows go to rejects with their line number.
    """
    fh, reader = _reader(path, ("child_id", "grade", "address"), aliases)
    result = LoadResult()
    with fh:
        for row in reader:
            line_no = reader.line_num
            raw = ",".join(str(v) for v in row.values() if v is not None)
            try:
                grade_text = (row.get("grade") or "").strip()
                age_text = (row.get("age") or "").strip()
                grade = int(grade_text) if grade_text else None
                age = float(age_text) if age_text else None
                record = ChildRecord(
                    child_id=(row.get("child_id") or "").strip(),
                    raw_address=(row.get("address") or "").strip(),
                    grade=grade,
                    age_years=age,
                )
                if not record.child_id:
                    raise ValueError("child_id is empty")
                result.records.append(record)
            except (ValueError, TypeError) as exc:
                result.rejects.append(RejectedRow(line_no, str(exc), raw))
    return result


def load_service_lines(path, aliases: Optional[Mapping[str, str]] = None) -> LoadResult:
    """Parse the service-line inventory: parcel_id,public_material,private_material[,lead_probability]."""
    fh, reader = _reader(path, ("parcel_id", "public_material", "private_material"), aliases)
    result = LoadResult()
    with fh:
        for row in reader:
            line_no = reader.line_num
            raw = ",".join(str(v) for v in row.values() if v is not None)
            try:
                parcel_id = (row.get("parcel_id") or "").strip()
                if not parcel_id:
                    raise ValueError("parcel_id is empty")
                try:
                    public = PipeMaterial.parse(row.get("public_material") or "")
                    private = PipeMaterial.parse(row.get("private_material") or "")
                except ValueError:
                    raise ValueError(
                        "UnknownMaterial: "
                        f"{row.get('public_material')!r}/{row.get('private_material')!r}"
                    )
                prob_text = (row.get("lead_probability") or "").strip()
                prob = float(prob_text) if prob_text else None
                result.records.append(
                    ServiceLine(parcel_id, public, private, lead_probability=prob)
                )
            except (ValueError, TypeError) as exc:
                result.rejects.append(RejectedRow(line_no, str(exc), raw))
    return result


@dataclass
class GeoLoadResult:
    segments: list[StreetSegment] = field(default_factory=list)
    parcels: list[Parcel] = field(default_factory=list)
    rejects: list[RejectedRow] = field(default_factory=list)


def load_geo(path) -> GeoLoadResult:
    """Parse a GeoJSON FeatureCollection into segments and/or parcels.

    LineString features with a street-name property become street segments;
    Point/Polygon features with parcel_id and address properties become
    parcels (polygons collapse to their area-weighted centroid). CRS is
    assumed WGS84. Degenerate or incomplete features are rejected.
    """
    with _open_text(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise NotAFeatureCollection(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise NotAFeatureCollection(f"{path}: expected a FeatureCollection")

    result = GeoLoadResult()
    for i, feature in enumerate(doc.get("features") or []):
        props = feature.get("properties") or {}
        geom = feature.get("geometry") or {}
        gtype = geom.get("type")
        try:
            if gtype == "LineString":
                result.segments.append(_segment_from(geom, props, i))
            elif gtype in ("Point", "Polygon"):
                result.parcels.append(_parcel_from(geom, props, gtype))
            else:
                raise ValueError(f"unsupported geometry type {gtype!r}")
        except (ValueError, TypeError, KeyError) as exc:
            result.rejects.append(RejectedRow(i, str(exc), json.dumps(props)))
    return result


def _segment_from(geom, props, index) -> StreetSegment:
    coords = geom.get("coordinates") or []
    points = tuple((float(lat), float(lon)) for lon, lat in coords)
    if len(points) < 2:
        raise ValueError("LineString needs at least two points")
    length = geo.polyline_length_m(points)
    if length <= 0:
        raise ValueError("zero-length centerline")
    name = props.get("street_name") or props.get("name")
    if not name:
        raise ValueError("missing street name property")
    segment_id = str(props.get("segment_id") or f"seg-{index:05d}")
    return StreetSegment(
        segment_id=segment_id,
        polyline=points,
        length_m=length,
        street_name=normalize_address(str(name)).canonical(),
    )


def _parcel_from(geom, props, gtype) -> Parcel:
    parcel_id = props.get("parcel_id")
    if not parcel_id:
        raise ValueError("missing parcel_id property")
    address_text = props.get("address")
    if not address_text:
        raise ValueError("missing address property")
    if gtype == "Point":
        lon, lat = geom["coordinates"]
        centroid = (float(lat), float(lon))
    else:
        ring = [(float(lat), float(lon)) for lon, lat in geom["coordinates"][0]]
        if len(ring) < 4:
            raise ValueError("degenerate polygon ring")
        centroid = geo.shoelace_centroid(ring)
    year = props.get("year_built")
    na = normalize_address(str(address_text))
    address = GeoAddress(
        place_id=f"parcel:{parcel_id}",
        point=centroid,
        street_number=na.street_number or "",
        route=" ".join(na.name_tokens) + (f" {na.suffix}" if na.suffix else ""),
        formatted=str(address_text),
    )
    return Parcel(
        parcel_id=str(parcel_id),
        address=address,
        centroid=centroid,
        year_built=int(year) if year not in (None, "") else None,
    )


# --- writers (round-trip counterparts of the loaders) ---

def write_students(path, children: Iterable[ChildRecord]):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["child_id", "grade", "address", "age"])
        for c in children:
            writer.writerow([
                c.child_id,
                "" if c.grade is None else c.grade,
                c.raw_address,
                "" if c.age_years is None else repr(c.age_years),
            ])


def write_service_lines(path, lines: Iterable[ServiceLine]):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parcel_id", "public_material", "private_material", "lead_probability"])
        for ln in lines:
            writer.writerow([
                ln.parcel_id,
                ln.public_material.value,
                ln.private_material.value,
                "" if ln.lead_probability is None else repr(ln.lead_probability),
            ])


def segment_feature(segment: StreetSegment) -> dict:
    return {
        "type": "Feature",
        "geometry": {
            "type": "LineString",
            "coordinates": [[lon, lat] for lat, lon in segment.polyline],
        },
        "properties": {
            "segment_id": segment.segment_id,
            "street_name": segment.street_name,
            "length_m": segment.length_m,
        },
    }


def write_segments(path, segments: Iterable[StreetSegment]):
    doc = {"type": "FeatureCollection",
           "features": [segment_feature(s) for s in segments]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def write_parcels(path, parcels: Iterable[Parcel]):
    features = []
    for p in parcels:
        features.append({
            "type": "Feature",
            "geometry": {
                "type": "Point",
                "coordinates": [p.centroid[1], p.centroid[0]],
            },
            "properties": {
                "parcel_id": p.parcel_id,
                "address": p.address.formatted,
                **({"year_built": p.year_built} if p.year_built is not None else {}),
            },
        })
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"type": "FeatureCollection", "features": features}, fh)


# --- scored-project CSV (handoff between pipeline stages) ---

SCORED_COLUMNS = [
    "project_id", "street_name", "length_m", "parcel_count",
    "child_count", "lead_line_count", "value_exposure_years", "cost_units",
]


def write_scored_projects(path, projects: Sequence[Project],
                          child_counts: Mapping[str, int]):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCORED_COLUMNS)
        for p in sorted(projects, key=lambda x: x.project_id):
            writer.writerow([
                p.project_id,
                p.segment.street_name,
                repr(p.segment.length_m),
                len(p.parcel_ids),
                child_counts.get(p.project_id, 0),
                p.lead_line_count,
                repr(p.value_exposure_years),
                repr(p.cost_units),
            ])


def load_scored_projects(path) -> tuple[list[Project], dict[str, int]]:
    """Rebuild lightweight projects (stub geometry) from a scored CSV."""
    fh, reader = _reader(path, SCORED_COLUMNS)
    projects: list[Project] = []
    child_counts: dict[str, int] = {}
    with fh:
        for row in reader:
            length = float(row["length_m"])
            segment = StreetSegment(
                segment_id=row["project_id"],
                polyline=((0.0, 0.0), (length / geo.EARTH_RADIUS_M * 57.29577951308232, 0.0)),
                length_m=length,
                street_name=row["street_name"],
            )
            projects.append(Project(
                project_id=row["project_id"],
                segment=segment,
                parcel_ids=frozenset(),
                value_exposure_years=float(row["value_exposure_years"]),
                cost_units=float(row["cost_units"]),
                lead_line_count=int(row["lead_line_count"]),
            ))
            child_counts[row["project_id"]] = int(row["child_count"])
    return projects, child_counts


# --- material pivot (inventory cross-tabulation) ---

def material_pivot(lines: Iterable[ServiceLine]) -> dict[PipeMaterial, dict[PipeMaterial, int]]:
    """Cross-count lines by (private side, public side) material."""
    pivot: dict[PipeMaterial, dict[PipeMaterial, int]] = {}
    for ln in lines:
        row = pivot.setdefault(ln.private_material, {})
        row[ln.public_material] = row.get(ln.public_material, 0) + 1
    return pivot


# --- persistent geocode cache ---

class GeocodeCache:
    """Append-only newline-delimited JSON cache with an in-memory index.

    Survives crashes (append-only) and process restarts (index rebuilt from
    the file on open). Reads are lock-free against the in-memory dict;
    writes are serialized.
    """

    def __init__(self, path):
        self._path = Path(path)
        self._lock = threading.Lock()
        self._index: dict[str, list[MatchCandidate]] = {}
        if self._path.exists():
            self._load()

    def _load(self):
        try:
            with open(self._path, "r", encoding="utf-8", errors="replace") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        entry = json.loads(line)
                        self._index[entry["key"]] = [
                            _candidate_from_json(c) for c in entry["candidates"]
                        ]
                    except (ValueError, KeyError, TypeError):
                        log.warning("skipping corrupt cache line in %s", self._path)
        except OSError as exc:
            raise StoreUnavailable(f"cannot read cache {self._path}: {exc}") from exc

    def get(self, key: str) -> Optional[list[MatchCandidate]]:
        return self._index.get(key)

    def put(self, key: str, candidates: Sequence[MatchCandidate]):
        record = {
            "key": key,
            "fetched_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "candidates": [_candidate_to_json(c) for c in candidates],
        }
        with self._lock:
            try:
                os.makedirs(self._path.parent, exist_ok=True)
                with open(self._path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record) + "\n")
            except OSError as exc:
                raise StoreUnavailable(f"cannot write cache {self._path}: {exc}") from exc
            self._index[key] = list(candidates)

    def __len__(self):
        return len(self._index)


def _candidate_to_json(c: MatchCandidate) -> dict:
    a = c.address
    return {
        "place_id": a.place_id,
        "lat": a.point[0],
        "lon": a.point[1],
        "street_number": a.street_number,
        "route": a.route,
        "locality": a.locality,
        "postal_code": a.postal_code,
        "formatted": a.formatted,
        "probability": c.probability,
    }


def _candidate_from_json(d: Mapping) -> MatchCandidate:
    return MatchCandidate(
        GeoAddress(
            place_id=d["place_id"],
            point=(d["lat"], d["lon"]),
            street_number=d.get("street_number", ""),
            route=d.get("route", ""),
            locality=d.get("locality", ""),
            postal_code=d.get("postal_code", ""),
            formatted=d.get("formatted", ""),
        ),
        d["probability"],
    )


# --- corrections file ---

def load_corrections(path) -> list[tuple[str, str, str]]:
    """Manual-fix CSV: dataset,source_key,place_id."""
    fh, reader = _reader(path, ("dataset", "source_key", "place_id"))
    out = []
    with fh:
        for row in reader:
            out.append((
                (row.get("dataset") or "").strip(),
                (row.get("source_key") or "").strip(),
                (row.get("place_id") or "").strip(),
            ))
    return out
