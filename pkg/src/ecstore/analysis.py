"""Availability and storage-overhead arithmetic, plus cost-model calibration."""

import math
import re
from dataclasses import dataclass

from ecstore.errors import ModelError

# Upload timings for whole files vs the same file split in 10 (no encoding),
# serial client: (label, file bytes, pieces, total seconds, seconds per piece).
UPLOAD_TIMINGS = (
    ("small-whole", 756_000, 1, 6.0, 6.0),
    ("small-split", 756_000, 10, 54.0, 5.5),
    ("large-whole", 2_400_000_000, 1, 142.0, 142.0),
    ("large-split", 2_430_000_000, 10, 206.0, 20.0),
)


@dataclass(frozen=True)
class Replication:
    copies: int

    def __post_init__(self):
        if self.copies < 1:
            raise ModelError(f"replication needs at least one copy, got {self.copies}")

    @property
    def overhead(self):
        return float(self.copies)

    @property
    def endpoints_needed(self):
        return self.copies

    @property
    def label(self):
        return f"rep{self.copies}"


@dataclass(frozen=True)
class Erasure:
    k: int
    m: int

    def __post_init__(self):
        if not 1 <= self.k <= self.m:
            raise ModelError(f"erasure scheme needs 1 <= k <= m, got k={self.k} m={self.m}")

    @property
    def overhead(self):
        return self.m / self.k

    @property
    def endpoints_needed(self):
        return self.m

    @property
    def label(self):
        return f"ec{self.k}+{self.m - self.k}"


_SCHEME_RE = re.compile(r"^(?:rep(?P<r>\d+)|ec(?P<k>\d+)\+(?P<c>\d+))$")


def parse_scheme(text):
    """``rep2`` -> Replication(2); ``ec10+5`` -> Erasure(10, 15)."""
    match = _SCHEME_RE.match(text.strip().lower())
    if match is None:
        raise ModelError(f"cannot parse scheme {text!r} (expected repN or ecK+C)")
    if match["r"] is not None:
        return Replication(int(match["r"]))
    k = int(match["k"])
    return Erasure(k, k + int(match["c"]))


@dataclass(frozen=True)
class AvailabilityModel:
    p: float
    scheme: object
    # number of distinct endpoints on offer; None means unlimited
    endpoints: int = None

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ModelError(f"availability p must lie in [0, 1], got {self.p}")
        if self.endpoints is not None and self.scheme.endpoints_needed > self.endpoints:
            raise ModelError(
                f"{self.scheme.label} needs {self.scheme.endpoints_needed} distinct endpoints, "
                f"only {self.endpoints} available")


def file_availability(model):
    """Probability the file can be rebuilt, one chunk or replica per endpoint."""
    p, scheme = model.p, model.scheme
    if isinstance(scheme, Replication):
        return 1.0 - (1.0 - p) ** scheme.copies
    k, m = scheme.k, scheme.m
    return math.fsum(math.comb(m, j) * p**j * (1.0 - p) ** (m - j) for j in range(k, m + 1))


def placement_availability(p, k, plan):
    """Availability when chunks share endpoints as in a :class:`PlacementPlan`.

    Endpoints fail independently; every chunk on a down endpoint is lost.
    """
    if not 0.0 <= p <= 1.0:
        raise ModelError(f"availability p must lie in [0, 1], got {p}")
    counts = [c for c in plan.counts() if c]
    total = sum(counts)
    if k > total:
        raise ModelError(f"plan holds {total} chunks, fewer than k={k}")
    # dist[j] = probability that exactly j chunks are reachable
    dist = [1.0] + [0.0] * total
    for c in counts:
        nxt = [0.0] * (total + 1)
        for j, prob in enumerate(dist):
            if prob:
                nxt[j] += prob * (1.0 - p)
                nxt[j + c] += prob * p
        dist = nxt
    return math.fsum(dist[k:])


@dataclass(frozen=True)
class TableRow:
    scheme: str
    overhead: float
    availability: float


def overhead_resilience_table(p, schemes):
    rows = []
    for scheme in schemes:
        if isinstance(scheme, str):
            scheme = parse_scheme(scheme)
        avail = file_availability(AvailabilityModel(p, scheme))
        rows.append(TableRow(scheme.label, scheme.overhead, avail))
    return sorted(rows, key=lambda r: (r.overhead, -r.availability, r.scheme))


def fit_cost_model(table=UPLOAD_TIMINGS):
    """Solve ``t = latency + size / bandwidth`` through two of the reference timings.

    Uses the small-file per-piece time (latency regime) and the large whole
    file (bandwidth regime). Returns ``(latency_s, bandwidth_Bps)``.
    """
    rows = {r[0]: r for r in table}
    _, small_size, small_pieces, _, small_t = rows["small-split"]
    _, large_size, _, large_t, _ = rows["large-whole"]
    s1, t1 = small_size / small_pieces, small_t
    s2, t2 = large_size, large_t
    bandwidth = (s2 - s1) / (t2 - t1)
    latency = t1 - s1 / bandwidth
    return latency, bandwidth
