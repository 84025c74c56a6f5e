"""Benchmark harness: thread sweeps and whole-vs-split baselines.

Scenarios run on simulated endpoints by default, where every number is
virtual time and the output is a pure function of the scenario and seed.
Local-directory endpoints are also accepted outside acceptance mode; those
runs move real bytes and report wall-clock seconds.

Scenario file (JSON)::

    {"scenarios": [
      {"name": "put-small", "directions": ["put"], "size_bytes": 768000,
       "k": 10, "m": 15, "threads": [1, 2, 3], "repetitions": 1,
       "rng_seed": 1, "baselines": true,
       "endpoints": {"count": 15, "setup_latency": 5.5,
                     "bandwidth": 17500000.0, "failure_probability": 0.0},
       "codec_bandwidth": 10000000.0}
    ]}

``endpoints`` may instead be a list of endpoint descriptors in the endpoint
config format.
"""

import csv
import io
import json
import random
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from ecstore.analysis import UPLOAD_TIMINGS
from ecstore.catalogue import Catalogue
from ecstore.codec import CodingParams
from ecstore.endpoint import (
    BANDWIDTH,
    CODEC_BANDWIDTH,
    LOCAL_DIR,
    SETUP_LATENCY,
    SIMULATED,
    EndpointDescriptor,
    EndpointSet,
)
from ecstore.errors import ConfigError, DownloadFailed, UploadFailed
from ecstore.transfer import GET, PUT, TransferPolicy, get_bytes, put_file, remove_file, simulate_get, simulate_put

CSV_FIELDS = ("direction", "size_bytes", "k", "m", "threads", "rep", "total_s", "avg_chunk_s", "chunks_fetched")


@dataclass(frozen=True)
class BenchScenario:
    name: str
    size_bytes: int
    k: int
    m: int
    threads: tuple = (1,)
    directions: tuple = (PUT, GET)
    repetitions: int = 1
    rng_seed: int = 0
    baselines: bool = False
    endpoints: tuple = field(default=None, repr=False)
    codec_bandwidth: float = CODEC_BANDWIDTH

    def __post_init__(self):
        CodingParams(self.k, self.m)
        if self.repetitions < 1:
            raise ConfigError(f"{self.name}: repetitions must be >= 1")
        if not self.threads or min(self.threads) < 1:
            raise ConfigError(f"{self.name}: thread counts must be >= 1")
        for d in self.directions:
            if d not in (PUT, GET):
                raise ConfigError(f"{self.name}: unknown direction {d!r}")
        if self.endpoints is None:
            object.__setattr__(self, "endpoints", uniform_endpoints(self.m))

    @property
    def simulated(self):
        return all(d.backend == SIMULATED for d in self.endpoints)

    @classmethod
    def from_dict(cls, raw):
        raw = dict(raw)
        eps = raw.pop("endpoints", None)
        if isinstance(eps, dict):
            eps = dict(eps)
            count = eps.pop("count", raw.get("m"))
            eps = uniform_endpoints(count, **eps)
        elif eps is not None:
            eps = tuple(EndpointDescriptor.from_dict(e) for e in eps)
        for key in ("threads", "directions"):
            if key in raw:
                raw[key] = tuple(raw[key])
        try:
            return cls(endpoints=eps, **raw)
        except TypeError as exc:
            raise ConfigError(f"bad scenario {raw.get('name')!r}: {exc}") from None


def uniform_endpoints(count, setup_latency=SETUP_LATENCY, bandwidth=BANDWIDTH,
                      failure_probability=0.0, rng_seed=0):
    return tuple(
        EndpointDescriptor(f"se{i:02d}", SIMULATED, None, setup_latency, float(bandwidth),
                           failure_probability, rng_seed + i)
        for i in range(count)
    )


def _reseed(descriptors, seed):
    return [EndpointDescriptor(**{**d.__dict__, "rng_seed": d.rng_seed + seed}) for d in descriptors]


def _row(report, threads, rep):
    return {
        "direction": report.direction,
        "size_bytes": report.size_bytes,
        "k": report.k,
        "m": report.m,
        "threads": threads,
        "rep": rep,
        "total_s": report.total_s,
        "avg_chunk_s": report.avg_chunk_s,
        "chunks_fetched": report.chunks_fetched if report.direction == GET
        else sum(1 for c in report.chunks if c.status == "ok"),
    }


def _simulated_run(scenario, direction, k, m, threads, rep):
    endpoints = EndpointSet(_reseed(scenario.endpoints, scenario.rng_seed + 1000 * rep),
                            codec_bandwidth=scenario.codec_bandwidth)
    params = CodingParams(k, m)
    policy = TransferPolicy(worker_count=threads)
    if direction == PUT:
        return simulate_put(scenario.size_bytes, params, endpoints, policy)
    try:
        return simulate_get(scenario.size_bytes, params, endpoints, policy)
    except DownloadFailed as exc:
        return exc.report


def _wallclock_run(scenario, direction, k, m, threads, rep):
    rng = random.Random(scenario.rng_seed * 7919 + rep)
    data = rng.randbytes(scenario.size_bytes)
    endpoints = EndpointSet(list(scenario.endpoints), codec_bandwidth=scenario.codec_bandwidth)
    catalogue = Catalogue()
    path = f"/bench/{scenario.name}-{direction}-{k}-{m}-{threads}-{rep}"
    policy = TransferPolicy(worker_count=threads)
    try:
        report = put_file(data, path, CodingParams(k, m), endpoints, catalogue, policy)
    except UploadFailed as exc:
        return exc.report
    try:
        if direction == GET:
            _, report = get_bytes(path, endpoints, catalogue, policy)
    except DownloadFailed as exc:
        report = exc.report
    finally:
        remove_file(path, endpoints, catalogue)
    return report


def run_bench(scenario, acceptance=True):
    """Return CSV rows (dicts) for one scenario.

    In acceptance mode only simulated endpoints are allowed.
    """
    if not scenario.simulated:
        if acceptance:
            raise ConfigError(f"{scenario.name}: acceptance benchmarks need simulated endpoints")
        if any(d.backend != LOCAL_DIR for d in scenario.endpoints):
            raise ConfigError(f"{scenario.name}: cannot mix simulated and local-dir endpoints")
        run = _wallclock_run
    else:
        run = _simulated_run
    rows = []
    for direction in scenario.directions:
        for rep in range(scenario.repetitions):
            if scenario.baselines:
                rows.append(_row(run(scenario, direction, 1, 1, 1, rep), 1, rep))
                if direction == PUT:
                    rows.append(_row(run(scenario, direction, scenario.k, scenario.k, 1, rep), 1, rep))
            for threads in scenario.threads:
                rows.append(_row(run(scenario, direction, scenario.k, scenario.m, threads, rep), threads, rep))
    return rows


def timing_scenarios():
    """Serial uploads of the calibration sizes: whole file (1+0) vs 10 pieces (10+0)."""
    out = []
    for label, size, pieces, _, _ in UPLOAD_TIMINGS:
        out.append(BenchScenario(name=f"timing-{label}", size_bytes=size, k=pieces, m=pieces,
                                 threads=(1,), directions=(PUT,), endpoints=uniform_endpoints(10)))
    return out


def reference_scenarios():
    sweep = tuple(range(1, 16))
    figures = [
        ("put-small", PUT, 768_000),
        ("put-large", PUT, 2_400_000_000),
        ("get-small", GET, 768_000),
        ("get-large", GET, 2_400_000_000),
    ]
    out = timing_scenarios()
    for name, direction, size in figures:
        out.append(BenchScenario(name=name, size_bytes=size, k=10, m=15, threads=sweep,
                                 directions=(direction,), baselines=True, rng_seed=1))
    return out


def load_scenarios(path):
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"scenario file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario file {path}: {exc}") from None
    return [BenchScenario.from_dict(s) for s in raw.get("scenarios", [])]


def format_csv(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({**row, "total_s": f"{row['total_s']:.6f}", "avg_chunk_s": f"{row['avg_chunk_s']:.6f}"})
    return buf.getvalue()


def read_csv(text):
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        rows.append({
            "direction": row["direction"],
            **{key: int(row[key]) for key in ("size_bytes", "k", "m", "threads", "rep", "chunks_fetched")},
            "total_s": float(row["total_s"]),
            "avg_chunk_s": float(row["avg_chunk_s"]),
        })
    return rows


def run_all(scenarios, out_dir=None, plots=True, acceptance=True):
    """Run every scenario; optionally write ``bench.csv`` and figures to ``out_dir``."""
    results = {s.name: run_bench(s, acceptance=acceptance) for s in scenarios}
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        all_rows = [row for rows in results.values() for row in rows]
        (out_dir / "bench.csv").write_text(format_csv(all_rows))
        for name, rows in results.items():
            (out_dir / f"{name}.csv").write_text(format_csv(rows))
        if plots:
            from ecstore import plotting

            by_name = {s.name: s for s in scenarios}
            for name, rows in results.items():
                if len(by_name[name].threads) > 1:
                    plotting.scaling_figure(rows, by_name[name], out_dir / f"{name}.png")
    return results


def scratch_endpoints(count, root=None):
    """Local-directory endpoints under a temporary root, for wall-clock runs."""
    root = Path(root or tempfile.mkdtemp(prefix="ecstore-bench-"))
    return tuple(EndpointDescriptor(f"dir{i:02d}", LOCAL_DIR, str(root / f"dir{i:02d}")) for i in range(count))
