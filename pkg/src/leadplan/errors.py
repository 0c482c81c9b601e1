"""Exception types shared across the toolkit.

Every error carries a short machine-readable ``code`` so the CLI can emit
one-line parsable failures and the HTTP service can map errors to status
codes without string matching.
"""
from __future__ import annotations


class LeadPlanError(Exception):
    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__doc__ or self.code)


# --- addresses / linkage ---

class EmptyAddress(LeadPlanError):
    """Address text is blank after stripping."""
    code = "empty_address"


class GeocoderUnavailable(LeadPlanError):
    """Geocoding transport failed; distinct from an address with no match."""
    code = "geocoder_unavailable"


class UnknownPlaceId(LeadPlanError):
    """Manual correction references a place id outside the known universe."""
    code = "unknown_place_id"


# --- geometry / partitioning ---

class DegenerateGeometry(LeadPlanError):
    """Zero-length or self-intersecting input geometry."""
    code = "degenerate_geometry"


# --- scoring ---

class GradeOutOfRange(LeadPlanError):
    """School grade outside 0..12."""
    code = "grade_out_of_range"


class NegativeAge(LeadPlanError):
    """Child age below zero."""
    code = "negative_age"


class MissingProbability(LeadPlanError):
    """Probability-based lead policy used on a line without a probability."""
    code = "missing_probability"


# --- prioritization ---

class ZeroCost(LeadPlanError):
    """Project cost must be strictly positive for ratio ranking."""
    code = "zero_cost"


class InstanceTooLarge(LeadPlanError):
    """Exact solver table would exceed the configured memory budget."""
    code = "instance_too_large"


# --- policy simulation ---

class NotEnoughProjects(LeadPlanError):
    """Requested more ordering steps than projects exist."""
    code = "not_enough_projects"


class ZeroTotalValue(LeadPlanError):
    """Cumulative curve undefined when total value is zero."""
    code = "zero_total_value"


class IndexOutOfRange(LeadPlanError):
    """Quantile index outside the curve."""
    code = "index_out_of_range"


class UnknownPolicy(LeadPlanError):
    """Selection policy name not recognized."""
    code = "unknown_policy"


# --- ingest / persistence ---

class FileUnreadable(LeadPlanError):
    """Input file missing or unreadable."""
    code = "file_unreadable"


class HeaderMismatch(LeadPlanError):
    """CSV header lacks required columns."""
    code = "header_mismatch"


class NotAFeatureCollection(LeadPlanError):
    """GeoJSON input is not a FeatureCollection."""
    code = "not_a_feature_collection"


class StoreUnavailable(LeadPlanError):
    """Geocode cache file cannot be read or written."""
    code = "store_unavailable"


# --- service ---

class SnapshotNotReady(LeadPlanError):
    """No validated snapshot is loaded."""
    code = "snapshot_not_ready"


class UnknownProject(LeadPlanError):
    """Cart references a project id not in the snapshot."""
    code = "unknown_project"


class DuplicateId(LeadPlanError):
    """Cart contains a repeated project id."""
    code = "duplicate_id"


class LimitExceeded(LeadPlanError):
    """Request parameter above the configured service limit."""
    code = "limit_exceeded"
