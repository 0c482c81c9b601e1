"""Address canonicalization and junction-table record linkage.

Free-entry addresses from different municipal datasets are normalized,
geocoded against a pluggable backend, and joined through the geocoded place
id. Three geocoder backends cover the field: an exact table mock, a fuzzy
table mock for noisy data, and a live HTTP client (with a persistent cache
wrapper for offline reruns).
"""
from __future__ import annotations

import logging
import re
import threading
import time
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from difflib import SequenceMatcher
from typing import Collection, Iterable, Mapping, Optional, Sequence

import httpx

from .errors import EmptyAddress, GeocoderUnavailable, UnknownPlaceId
from .model import GeoAddress, MatchCandidate, Parcel

log = logging.getLogger(__name__)

DEFAULT_MATCH_THRESHOLD = 0.85

# Postal-style suffix abbreviations. Every canonical form maps to itself so
# normalization is idempotent. EXT is a modifier, never a suffix on its own:
# "St Ext" stays distinct from "St".
SUFFIXES = {
    "STREET": "ST", "STR": "ST", "ST": "ST",
    "ROAD": "RD", "RD": "RD",
    "AVENUE": "AVE", "AVE": "AVE", "AV": "AVE",
    "DRIVE": "DR", "DR": "DR",
    "LANE": "LN", "LN": "LN",
    "COURT": "CT", "CT": "CT",
    "CIRCLE": "CIR", "CIR": "CIR",
    "BOULEVARD": "BLVD", "BLVD": "BLVD",
    "PLACE": "PL", "PL": "PL",
    "TERRACE": "TER", "TER": "TER",
    "PARKWAY": "PKWY", "PKWY": "PKWY",
    "HIGHWAY": "HWY", "HWY": "HWY",
    "SQUARE": "SQ", "SQ": "SQ",
    "TRAIL": "TRL", "TRL": "TRL",
    "WAY": "WAY",
    "ROW": "ROW",
}
_EXT_WORDS = {"EXT", "EXTENSION"}

_UNIT_RE = re.compile(r"\b(?:APT|APARTMENT|UNIT|STE|SUITE)\b\.?\s*#?\s*([A-Z0-9-]+)")
_HASH_UNIT_RE = re.compile(r"#\s*([A-Z0-9-]+)")
_PUNCT_RE = re.compile(r"[^\w\s#-]")


@dataclass(frozen=True)
class NormalizedAddress:
    """Uppercased tokens with the suffix and unit pulled out.

    ``tokens`` holds the street number and name; anything after the suffix
    (locality, state) is dropped, since linkage operates within one city.
    """

    tokens: tuple[str, ...]
    suffix: Optional[str] = None
    unit: Optional[str] = None

    def canonical(self) -> str:
        parts = list(self.tokens)
        if self.suffix:
            parts.append(self.suffix)
        if self.unit:
            parts.append(f"# {self.unit}")
        return " ".join(parts)

    @property
    def key(self) -> str:
        return self.canonical()

    @property
    def street_number(self) -> Optional[str]:
        if self.tokens and self.tokens[0][:1].isdigit():
            return self.tokens[0]
        return None

    @property
    def name_tokens(self) -> tuple[str, ...]:
        return self.tokens[1:] if self.street_number is not None else self.tokens


def normalize_address(raw: str) -> NormalizedAddress:
    """Canonicalize free-entry address text.

    Uppercases, strips punctuation, extracts unit markers ("#3", "Apt 3"),
    and maps the last suffix word through the postal abbreviation table
    ("Street" -> ST). Idempotent: re-normalizing the canonical rendering
    returns the same result.
    """
    # punctuation first: a stray quote must not hide a unit marker on the
    # first pass only, or idempotence breaks. The '#' form is tried before
    # worded markers so re-parsing the canonical "... # U" rendering never
    # swallows a preceding APT/UNIT token.
    text = _PUNCT_RE.sub(" ", raw.upper().strip())
    unit: Optional[str] = None
    m = _HASH_UNIT_RE.search(text)
    if m is None:
        m = _UNIT_RE.search(text)
    if m:
        unit = m.group(1)
        text = text[: m.start()] + " " + text[m.end():]
    tokens = text.replace("#", " ").split()

    suffix: Optional[str] = None
    suffix_idx: Optional[int] = None
    for i in range(len(tokens) - 1, -1, -1):
        tok = tokens[i]
        if tok in SUFFIXES and tok not in _EXT_WORDS:
            suffix = SUFFIXES[tok]
            suffix_idx = i
            break
    if suffix_idx is not None:
        if suffix_idx + 1 < len(tokens) and tokens[suffix_idx + 1] in _EXT_WORDS:
            suffix = f"{suffix} EXT"
        tokens = tokens[:suffix_idx]

    if not tokens and suffix is None:
        raise EmptyAddress(f"address blank after normalization: {raw!r}")
    return NormalizedAddress(tokens=tuple(tokens), suffix=suffix, unit=unit)


def normalize_street_name(route: str) -> str:
    """Canonical street name ("Maple Street" -> "MAPLE ST") for matching."""
    na = normalize_address(route)
    return na.canonical()


# --- geocoder backends ---

class GeocoderPort(ABC):
    """Maps free text to scored canonical places."""

    @abstractmethod
    def candidates(self, raw: str) -> list[MatchCandidate]:
        """Candidates sorted by descending probability; [] when no match.

        Raises GeocoderUnavailable on transport-level failure.
        """


def geocode(raw: str, geocoder: GeocoderPort) -> list[MatchCandidate]:
    """Normalize then geocode; empty result is a valid no-match."""
    normalize_address(raw)  # raises EmptyAddress on blank input
    found = geocoder.candidates(raw)
    return sorted(found, key=lambda c: (-c.probability, c.address.place_id))


@dataclass(frozen=True)
class _TableEntry:
    number: Optional[str]
    name: tuple[str, ...]
    suffix: Optional[str]
    address: GeoAddress


def _entry_for(address: GeoAddress, key_text: str) -> _TableEntry:
    na = normalize_address(key_text)
    return _TableEntry(na.street_number, na.name_tokens, na.suffix, address)


class TableGeocoder(GeocoderPort):
    """Deterministic exact-match mock backed by a key -> address table."""

    def __init__(self, table: Mapping[str, GeoAddress]):
        # keys are canonicalized so "1 Maple Street" and "1 MAPLE ST" collide
        self._table: dict[str, GeoAddress] = {}
        for key_text, address in table.items():
            self._table[normalize_address(key_text).key] = address

    def candidates(self, raw: str) -> list[MatchCandidate]:
        try:
            key = normalize_address(raw).key
        except EmptyAddress:
            return []
        hit = self._table.get(key)
        return [MatchCandidate(hit, 1.0)] if hit else []

    @classmethod
    def from_parcels(cls, parcels: Iterable[Parcel]) -> "TableGeocoder":
        return cls({_parcel_key(p): p.address for p in parcels})


class FuzzyTableGeocoder(GeocoderPort):
    """Table mock tolerating typos in the street name.

    Street number and suffix are hard gates; the match probability is the
    SequenceMatcher ratio over the street-name tokens, so one-character
    slips score high while cross-street (suffix or number) confusions drop
    out entirely.
    """

    def __init__(self, table: Mapping[str, GeoAddress], top_k: int = 5):
        self._entries = [
            _entry_for(address, key_text) for key_text, address in table.items()
        ]
        self._exact = TableGeocoder(table)
        self._top_k = top_k

    def candidates(self, raw: str) -> list[MatchCandidate]:
        exact = self._exact.candidates(raw)
        if exact:
            return exact
        try:
            na = normalize_address(raw)
        except EmptyAddress:
            return []
        query_name = " ".join(na.name_tokens)
        scored: list[MatchCandidate] = []
        for entry in self._entries:
            if na.street_number != entry.number:
                continue
            if na.suffix is not None and entry.suffix is not None:
                if na.suffix != entry.suffix:
                    continue
            ratio = SequenceMatcher(None, query_name, " ".join(entry.name)).ratio()
            if ratio > 0.0:
                scored.append(MatchCandidate(entry.address, round(ratio, 6)))
        scored.sort(key=lambda c: (-c.probability, c.address.place_id))
        return scored[: self._top_k]

    @classmethod
    def from_parcels(cls, parcels: Iterable[Parcel]) -> "FuzzyTableGeocoder":
        return cls({_parcel_key(p): p.address for p in parcels})


def _parcel_key(parcel: Parcel) -> str:
    addr = parcel.address
    if addr.street_number or addr.route:
        return f"{addr.street_number} {addr.route}".strip()
    return addr.formatted


class CachedGeocoder(GeocoderPort):
    """Read-through cache wrapper; with no inner backend it is cache-only.

    A cached empty candidate list is a remembered no-match; a cold key in
    cache-only mode raises GeocoderUnavailable (offline, cannot answer).
    """

    def __init__(self, cache, inner: Optional[GeocoderPort] = None):
        self._cache = cache
        self._inner = inner

    def candidates(self, raw: str) -> list[MatchCandidate]:
        try:
            key = normalize_address(raw).key
        except EmptyAddress:
            return []
        hit = self._cache.get(key)
        if hit is not None:
            return list(hit)
        if self._inner is None:
            raise GeocoderUnavailable(f"cache-only mode, key not cached: {key!r}")
        found = self._inner.candidates(raw)
        self._cache.put(key, found)
        return found


# Location-quality to match-probability convention for live responses.
_LOCATION_TYPE_PROBABILITY = {
    "ROOFTOP": 1.0,
    "RANGE_INTERPOLATED": 0.8,
    "GEOMETRIC_CENTER": 0.6,
    "APPROXIMATE": 0.4,
}


class LiveGeocoder(GeocoderPort):
    """HTTP client for a commercial geocoding web service.

    Parses the JSON result shape with ``address_components``,
    ``geometry.location`` and ``place_id``; absent fields are tolerated.
    Requests are rate limited per instance.
    """

    def __init__(
        self,
        base_url: str,
        api_key: Optional[str] = None,
        client: Optional[httpx.Client] = None,
        min_interval_s: float = 0.0,
        timeout_s: float = 10.0,
    ):
        self._base_url = base_url
        self._api_key = api_key
        self._client = client or httpx.Client(timeout=timeout_s)
        self._min_interval = min_interval_s
        self._last_request = 0.0
        self._lock = threading.Lock()

    def candidates(self, raw: str) -> list[MatchCandidate]:
        params = {"address": raw}
        if self._api_key:
            params["key"] = self._api_key
        with self._lock:
            wait = self._min_interval - (time.monotonic() - self._last_request)
            if wait > 0:
                time.sleep(wait)
            self._last_request = time.monotonic()
        try:
            resp = self._client.get(self._base_url, params=params)
            resp.raise_for_status()
            payload = resp.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise GeocoderUnavailable(f"geocoding request failed: {exc}") from exc
        results = payload.get("results", payload) if isinstance(payload, dict) else payload
        out = []
        for result in results or []:
            parsed = parse_geocoder_result(result)
            if parsed is not None:
                out.append(parsed)
        return sorted(out, key=lambda c: (-c.probability, c.address.place_id))


def parse_geocoder_result(result: Mapping) -> Optional[MatchCandidate]:
    """One result object -> MatchCandidate; None when unusable."""
    place_id = result.get("place_id")
    geometry = result.get("geometry") or {}
    location = geometry.get("location") or {}
    lat, lng = location.get("lat"), location.get("lng")
    if not place_id or lat is None or lng is None:
        return None
    fields = {"street_number": "", "route": "", "locality": "", "postal_code": ""}
    for component in result.get("address_components") or []:
        types = component.get("types") or []
        for wanted in fields:
            if wanted in types:
                fields[wanted] = component.get("short_name") or component.get(
                    "long_name", ""
                )
    address = GeoAddress(
        place_id=place_id,
        point=(float(lat), float(lng)),
        formatted=result.get("formatted_address", ""),
        **fields,
    )
    quality = geometry.get("location_type", "")
    probability = _LOCATION_TYPE_PROBABILITY.get(quality, 0.5)
    return MatchCandidate(address, probability)


# --- junction table ---

@dataclass(frozen=True)
class JunctionEntry:
    source_dataset: str
    source_key: str
    place_id: str
    probability: float
    provenance: str  # auto | manual

    def __post_init__(self):
        if not (0.0 <= self.probability <= 1.0):
            raise ValueError(f"probability out of [0,1]: {self.probability}")
        if self.provenance not in ("auto", "manual"):
            raise ValueError(f"provenance must be auto/manual: {self.provenance}")


@dataclass(frozen=True)
class UnmatchedRecord:
    source_dataset: str
    source_key: str
    raw_address: str
    reason: str  # no_match | below_threshold | empty_address
    best_place_id: Optional[str] = None
    best_probability: float = 0.0


SourceRecord = tuple[str, str, str]  # (dataset tag, key, raw address text)


def build_junction(
    records: Iterable[SourceRecord],
    geocoder: GeocoderPort,
    threshold: float = DEFAULT_MATCH_THRESHOLD,
    max_workers: int = 1,
) -> tuple[list[JunctionEntry], list[UnmatchedRecord]]:
    """Link each record to its best place when confident enough.

    Records whose best candidate clears ``threshold`` become auto junction
    entries; the rest land on the unmatched list for manual correction.
    Results are keyed then sorted, so completion order (under concurrent
    geocoding) never changes the output.
    """
    if not (0.0 <= threshold <= 1.0):
        raise ValueError(f"threshold out of [0,1]: {threshold}")

    unique: list[SourceRecord] = []
    seen: set[tuple[str, str]] = set()
    for dataset, key, raw in records:
        if (dataset, key) in seen:
            continue
        seen.add((dataset, key))
        unique.append((dataset, key, raw))

    def resolve(record: SourceRecord):
        dataset, key, raw = record
        try:
            found = geocode(raw, geocoder)
        except EmptyAddress:
            return UnmatchedRecord(dataset, key, raw, "empty_address")
        if not found:
            return UnmatchedRecord(dataset, key, raw, "no_match")
        best = found[0]
        if best.probability >= threshold:
            return JunctionEntry(dataset, key, best.address.place_id,
                                 best.probability, "auto")
        return UnmatchedRecord(dataset, key, raw, "below_threshold",
                               best.address.place_id, best.probability)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            resolved = list(pool.map(resolve, unique))
    else:
        resolved = [resolve(r) for r in unique]

    entries = [r for r in resolved if isinstance(r, JunctionEntry)]
    unmatched = [r for r in resolved if isinstance(r, UnmatchedRecord)]
    entries.sort(key=lambda e: (e.source_dataset, e.source_key))
    unmatched.sort(key=lambda u: (u.source_dataset, u.source_key))
    return entries, unmatched


def apply_corrections(
    junction: Sequence[JunctionEntry],
    overrides: Iterable[tuple[str, str, str]],  # (dataset, key, place_id)
    known_place_ids: Collection[str],
) -> list[JunctionEntry]:
    """Apply manual fixes; corrected entries carry probability 1.0.

    Overrides may repair an existing entry or add one for a previously
    unmatched record. Unknown place ids are rejected outright.
    """
    by_key = {(e.source_dataset, e.source_key): e for e in junction}
    for dataset, key, place_id in overrides:
        if place_id not in known_place_ids:
            raise UnknownPlaceId(f"override points at unknown place id {place_id!r}")
        entry = by_key.get((dataset, key))
        if entry is not None:
            by_key[(dataset, key)] = replace(
                entry, place_id=place_id, probability=1.0, provenance="manual"
            )
        else:
            by_key[(dataset, key)] = JunctionEntry(dataset, key, place_id, 1.0, "manual")
    return sorted(by_key.values(), key=lambda e: (e.source_dataset, e.source_key))


def children_by_parcel(
    child_junction: Sequence[JunctionEntry],
    parcel_junction: Sequence[JunctionEntry],
) -> tuple[dict[str, frozenset[str]], list[str]]:
    """Join children to parcels through the shared place id.

    Returns (parcel_id -> child ids, child ids with no parcel at their
    place). A child maps to every parcel linked to the same place.
    """
    parcels_at: dict[str, list[str]] = {}
    for entry in parcel_junction:
        parcels_at.setdefault(entry.place_id, []).append(entry.source_key)

    mapping: dict[str, set[str]] = {}
    orphans: list[str] = []
    for entry in child_junction:
        hosts = parcels_at.get(entry.place_id)
        if not hosts:
            orphans.append(entry.source_key)
            continue
        for parcel_id in hosts:
            mapping.setdefault(parcel_id, set()).add(entry.source_key)
    return (
        {k: frozenset(v) for k, v in sorted(mapping.items())},
        sorted(orphans),
    )
