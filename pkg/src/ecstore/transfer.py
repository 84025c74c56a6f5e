"""Put/get pipelines over a work pool of transfer jobs.

``run_pool`` owns the scheduling rules (at most T jobs in flight, retries,
fallback jobs, early stop); an executor decides what "in flight" means.
:class:`ThreadExecutor` runs jobs on real threads and reports wall-clock
times. :class:`VirtualExecutor` runs them one after another on the caller's
thread, placing each job on the virtual timeline of the worker slot that
freed up first, so schedules over simulated endpoints are deterministic.
"""

import heapq
import itertools
import logging
import os
import queue
import tempfile
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from urllib.parse import quote

from ecstore import codec
from ecstore.catalogue import ChunkLocation, FileManifest, normalize_path
from ecstore.codec import HEADER_SIZE, Chunk, CodingParams
from ecstore.errors import (
    AlreadyExistsError,
    ConfigError,
    CorruptionError,
    DownloadFailed,
    ECStoreError,
    FormatError,
    NoAlternativeError,
    NotFoundError,
    UploadFailed,
)
from ecstore.placement import retry_target, round_robin

log = logging.getLogger(__name__)

PUT = "put"
GET = "get"


@dataclass(frozen=True)
class TransferPolicy:
    worker_count: int = 1
    max_retries: int = 0
    early_stop: bool = True
    # fetch every chunk up front and keep the first k to arrive
    dispatch_all: bool = False

    def __post_init__(self):
        if not isinstance(self.worker_count, int) or self.worker_count < 1:
            raise ConfigError(f"worker count must be >= 1, got {self.worker_count}")
        if not isinstance(self.max_retries, int) or self.max_retries < 0:
            raise ConfigError(f"max retries must be >= 0, got {self.max_retries}")


@dataclass
class TransferJob:
    direction: str
    chunk_index: int
    endpoint_id: str
    object_name: str
    attempts_made: int = 0
    planned_endpoint: str = None
    size: int = 0
    payload: bytes = field(default=None, repr=False)


@dataclass
class JobOutcome:
    job: TransferJob
    ok: bool
    start: float
    finish: float
    error: str = None
    data: object = field(default=None, repr=False)
    after_stop: bool = False

    @property
    def elapsed(self):
        return self.finish - self.start


@dataclass
class ChunkOutcome:
    chunk_index: int
    endpoint_id: str
    status: str  # ok | failed | discarded
    attempts: int
    seconds: float


@dataclass
class TransferReport:
    logical_path: str
    direction: str
    size_bytes: int
    k: int
    m: int
    threads_used: int
    clock: str  # virtual | wall
    chunks: list = field(default_factory=list)
    codec_s: float = 0.0
    transfer_s: float = 0.0
    total_s: float = 0.0
    dispatched: int = 0
    chunks_fetched: int = 0
    fast_path: bool = None
    ok: bool = True

    @property
    def avg_chunk_s(self):
        done = [c.seconds for c in self.chunks if c.status == "ok"]
        return sum(done) / len(done) if done else 0.0

    def failed_chunks(self):
        return sorted(c.chunk_index for c in self.chunks if c.status == "failed")

    def to_dict(self):
        out = asdict(self)
        out["avg_chunk_s"] = self.avg_chunk_s
        return out

    def summary(self):
        lines = [
            f"{self.direction} {self.logical_path}: {'ok' if self.ok else 'FAILED'}",
            f"  size={self.size_bytes} k={self.k} m={self.m} threads={self.threads_used}",
            f"  total={self.total_s:.3f}s ({self.clock}) codec={self.codec_s:.3f}s "
            f"transfer={self.transfer_s:.3f}s avg/chunk={self.avg_chunk_s:.3f}s",
            f"  dispatched={self.dispatched}"
            + (f" fetched={self.chunks_fetched}" if self.direction == GET else ""),
        ]
        for c in self.chunks:
            lines.append(f"  chunk {c.chunk_index:>3} {c.status:<9} {c.endpoint_id:<12} "
                         f"attempts={c.attempts} {c.seconds:.3f}s")
        return "\n".join(lines)


def _run_job(execute, job):
    job.attempts_made += 1
    try:
        return True, execute(job), None
    except ECStoreError as exc:
        return False, None, str(exc)


class ThreadExecutor:
    """Runs jobs on up to ``workers`` threads; times are wall-clock seconds."""

    clock = "wall"

    def __init__(self, execute, workers):
        self._execute = execute
        self._pool = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="ecstore")
        self._done = queue.Queue()
        self._t0 = time.perf_counter()

    @property
    def now(self):
        return time.perf_counter() - self._t0

    def submit(self, job):
        def work():
            start = self.now
            try:
                ok, data, error = _run_job(self._execute, job)
            except BaseException as exc:
                self._done.put(exc)
                return
            self._done.put(JobOutcome(job, ok, start, self.now, error, data))

        self._pool.submit(work)

    def next_completed(self):
        item = self._done.get()
        if isinstance(item, BaseException):
            raise item
        return item

    def close(self):
        self._pool.shutdown(wait=True)


class VirtualExecutor:
    """Deterministic executor over a :class:`~ecstore.endpoint.SimClock`.

    A job's cost is whatever its endpoint charges to the clock while it runs.
    Ties in completion time resolve in submission order.
    """

    clock = "virtual"

    def __init__(self, execute, sim_clock):
        self._execute = execute
        self._clock = sim_clock
        self.now = 0.0
        self._t0 = sim_clock.now
        self._heap = []
        self._seq = itertools.count()

    def submit(self, job):
        with self._clock.span() as cost:
            ok, data, error = _run_job(self._execute, job)
        outcome = JobOutcome(job, ok, self.now, self.now + cost[0], error, data)
        heapq.heappush(self._heap, (outcome.finish, next(self._seq), outcome))

    def next_completed(self):
        finish, _, outcome = heapq.heappop(self._heap)
        self.now = finish
        return outcome

    def close(self):
        pass


def run_pool(jobs, policy, executor, *, retarget=None, enough=None, on_exhausted=None):
    """Run ``jobs`` with at most ``policy.worker_count`` in flight.

    ``retarget(job, attempt)`` gives the endpoint for a retry (default: same
    endpoint). ``enough(successes)`` stops further dispatch once true.
    ``on_exhausted(outcome)`` is called when a job has used all its retries and
    returns follow-up jobs, or None to stop dispatching altogether.
    Returns every attempt's outcome in completion order.
    """
    pending = deque(jobs)
    outcomes = []
    successes = []
    inflight = 0
    stopped = False
    try:
        while True:
            while pending and not stopped and inflight < policy.worker_count:
                executor.submit(pending.popleft())
                inflight += 1
            if inflight == 0:
                break
            outcome = executor.next_completed()
            inflight -= 1
            outcomes.append(outcome)
            if stopped:
                outcome.after_stop = True
                continue
            if outcome.ok:
                successes.append(outcome)
                if enough is not None and enough(successes):
                    stopped = True
                continue
            job = outcome.job
            log.debug("chunk %d attempt %d on %s failed: %s", job.chunk_index,
                      job.attempts_made, job.endpoint_id, outcome.error)
            if job.attempts_made <= policy.max_retries:
                try:
                    target = retarget(job, job.attempts_made) if retarget else job.endpoint_id
                except NoAlternativeError:
                    target = None
                if target is not None:
                    pending.append(replace(job, endpoint_id=target))
                    continue
            follow_up = on_exhausted(outcome) if on_exhausted is not None else ()
            if follow_up is None:
                stopped = True
            else:
                pending.extend(follow_up)
    finally:
        executor.close()
    return outcomes


def _executor_for(endpoints, policy, execute):
    if endpoints.simulated:
        return VirtualExecutor(execute, endpoints.clock)
    return ThreadExecutor(execute, policy.worker_count)


def _chunk_outcomes(outcomes, discard_late):
    per_chunk = {}
    for o in outcomes:
        index = o.job.chunk_index
        prev = per_chunk.get(index)
        seconds = o.elapsed + (prev.seconds if prev else 0.0)
        if o.ok:
            status = "discarded" if (o.after_stop and discard_late) else "ok"
        else:
            status = "discarded" if (o.after_stop and discard_late) else "failed"
        per_chunk[index] = ChunkOutcome(index, o.job.endpoint_id, status, o.job.attempts_made, seconds)
    return [per_chunk[i] for i in sorted(per_chunk)]


def remote_name(logical_path, chunk_name):
    """Flat, collision-free object name for a chunk on an endpoint."""
    parent = normalize_path(logical_path).rsplit("/", 1)[0] + "/"
    return quote(parent, safe="") + chunk_name


def _read_source(source):
    if isinstance(source, (bytes, bytearray, memoryview)):
        return bytes(source)
    return Path(source).read_bytes()


class _Stopwatch:
    """Measures a codec step on the clock matching the executor."""

    def __init__(self, endpoints):
        self.endpoints = endpoints
        self.virtual = endpoints.simulated

    def run(self, func, nominal_size):
        if self.virtual:
            result = func()
            cost = self.endpoints.codec_cost(nominal_size) if nominal_size else 0.0
            self.endpoints.clock.charge(cost, "codec")
            return result, cost
        t0 = time.perf_counter()
        result = func()
        return result, time.perf_counter() - t0


def _put(logical_path, params, endpoints, policy, chunks, size, nominal):
    path = normalize_path(logical_path)
    plan = round_robin(params.m, endpoints.vector)
    name = path.rsplit("/", 1)[1]
    length = -(-size // params.k)
    jobs = []
    for index, endpoint_id in plan.assignments:
        chunk_name = codec.chunk_filename(name, codec.ChunkHeader(params.k, params.m, index, length * params.k - size))
        jobs.append(TransferJob(
            PUT, index, endpoint_id, remote_name(path, chunk_name), planned_endpoint=endpoint_id,
            size=HEADER_SIZE + length,
            payload=None if nominal else chunks[index].to_bytes(),
        ))

    def execute(job):
        ep = endpoints[job.endpoint_id]
        if nominal:
            return ep.simulate("store", job.size)
        return ep.store(job.object_name, job.payload)

    def retarget(job, attempt):
        return retry_target((job.chunk_index, job.planned_endpoint), endpoints.vector, attempt)

    executor = _executor_for(endpoints, policy, execute)
    outcomes = run_pool(jobs, policy, executor, retarget=retarget, on_exhausted=lambda o: None)
    return path, outcomes, executor


def _finish_put(report, outcomes, executor, endpoints, t0):
    report.chunks = _chunk_outcomes(outcomes, discard_late=False)
    report.dispatched = len(outcomes)
    report.transfer_s = max((o.finish for o in outcomes), default=0.0)
    if executor.clock == "virtual":
        endpoints.clock.advance_to(t0 + report.codec_s + report.transfer_s)
    report.total_s = report.codec_s + report.transfer_s
    report.ok = all(c.status == "ok" for c in report.chunks) and len(report.chunks) == report.m


def put_file(source, logical_path, params, endpoints, catalogue, policy=TransferPolicy()):
    """Encode locally, upload all m chunks round-robin, then register.

    Any chunk that still fails after its retries aborts the upload: stored
    chunks are deleted (best effort) and nothing is registered.
    """
    path = normalize_path(logical_path)
    if path in catalogue.list_files(path):
        raise AlreadyExistsError(f"{path} is already registered")
    data = _read_source(source)
    stopwatch = _Stopwatch(endpoints)
    t0 = endpoints.clock.now
    chunks, codec_s = stopwatch.run(lambda: codec.encode(data, params),
                                    len(data) if params.m > params.k else 0)
    path, outcomes, executor = _put(path, params, endpoints, policy, chunks, len(data), nominal=False)
    report = TransferReport(path, PUT, len(data), params.k, params.m, policy.worker_count,
                            executor.clock, codec_s=codec_s)
    _finish_put(report, outcomes, executor, endpoints, t0)

    stored = [o.job for o in outcomes if o.ok]
    if not report.ok:
        for job in stored:
            try:
                endpoints[job.endpoint_id].delete(job.object_name)
            except (ECStoreError, OSError) as exc:
                log.warning("cleanup of %s on %s failed: %s", job.object_name, job.endpoint_id, exc)
        failed = report.failed_chunks()
        raise UploadFailed(f"{path}: upload failed for chunks {failed}", failed, report)

    pad = -(-len(data) // params.k) * params.k - len(data)
    manifest = FileManifest(path, params, len(data), pad,
                            tuple(ChunkLocation(j.chunk_index, j.endpoint_id, j.object_name) for j in stored))
    catalogue.register_file(manifest)
    return report


def _get_jobs(manifest, policy):
    k = manifest.params.k
    length = (manifest.original_size + manifest.pad_length) // k
    locations = sorted(manifest.chunk_locations, key=lambda c: (c.chunk_index >= k, c.chunk_index))
    jobs = [TransferJob(GET, loc.chunk_index, loc.endpoint_id, loc.remote_name,
                        planned_endpoint=loc.endpoint_id, size=HEADER_SIZE + length)
            for loc in locations]
    if policy.dispatch_all or not policy.early_stop:
        return jobs, deque()
    return jobs[:k], deque(jobs[k:])


def _validated_chunk(raw, manifest, index):
    try:
        chunk = Chunk.from_bytes(raw)
    except FormatError as exc:
        raise CorruptionError(f"chunk {index}: {exc}") from None
    expected = manifest.header(index)
    length = (manifest.original_size + manifest.pad_length) // manifest.params.k
    if chunk.header != expected or len(chunk.payload) != length:
        raise CorruptionError(f"chunk {index}: header or length disagrees with the catalogue")
    return chunk


def _get(manifest, endpoints, policy, nominal=False):
    k = manifest.params.k
    initial, fallback = _get_jobs(manifest, policy)

    def execute(job):
        ep = endpoints[job.endpoint_id]
        if nominal:
            ep.simulate("fetch", job.size)
            return None
        return _validated_chunk(ep.fetch(job.object_name), manifest, job.chunk_index)

    def on_exhausted(outcome):
        return [fallback.popleft()] if fallback else []

    enough = (lambda s: len(s) >= k) if policy.early_stop else None
    executor = _executor_for(endpoints, policy, execute)
    t0 = endpoints.clock.now
    outcomes = run_pool(initial, policy, executor, enough=enough, on_exhausted=on_exhausted)
    used = [o for o in outcomes if o.ok and not o.after_stop][:k]

    report = TransferReport(manifest.logical_path, GET, manifest.original_size, k, manifest.params.m,
                            policy.worker_count, executor.clock)
    report.chunks = _chunk_outcomes(outcomes, discard_late=True)
    report.dispatched = len(outcomes)
    report.chunks_fetched = len(used)
    if len(used) < k:
        report.ok = False
        report.transfer_s = max((o.finish for o in outcomes), default=0.0)
        report.total_s = report.transfer_s
        if executor.clock == "virtual":
            endpoints.clock.advance_to(t0 + report.total_s)
        failed = report.failed_chunks()
        raise DownloadFailed(
            f"{manifest.logical_path}: only {len(used)} of {k} required chunks retrieved "
            f"(failed chunks {failed})", failed, report)

    report.transfer_s = max(o.finish for o in used)
    if executor.clock == "virtual":
        endpoints.clock.advance_to(t0 + report.transfer_s)
    indices = [o.job.chunk_index for o in used]
    report.fast_path = codec.is_fast_path(indices, k)
    stopwatch = _Stopwatch(endpoints)
    decode_size = 0 if report.fast_path else manifest.original_size
    if nominal:
        data, report.codec_s = stopwatch.run(lambda: None, decode_size)
    else:
        data, report.codec_s = stopwatch.run(lambda: codec.decode([o.data for o in used]), decode_size)
    report.total_s = report.transfer_s + report.codec_s
    return data, report


def get_bytes(logical_path, endpoints, catalogue, policy=TransferPolicy()):
    """Retrieve and decode a file; returns ``(data, report)``."""
    return _get(catalogue.lookup(logical_path), endpoints, policy)


def get_file(logical_path, destination, endpoints, catalogue, policy=TransferPolicy()):
    """Retrieve a file into ``destination`` (written atomically)."""
    data, report = get_bytes(logical_path, endpoints, catalogue, policy)
    destination = Path(destination)
    destination.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=destination.parent, prefix=f".{destination.name}.")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, destination)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return report


def simulate_put(size, params, endpoints, policy=TransferPolicy(), logical_path="/bench/file"):
    """Schedule a put of ``size`` bytes on simulated endpoints without moving data."""
    if not endpoints.simulated:
        raise ConfigError("nominal transfers need simulated endpoints")
    stopwatch = _Stopwatch(endpoints)
    t0 = endpoints.clock.now
    _, codec_s = stopwatch.run(lambda: None, size if params.m > params.k else 0)
    path, outcomes, executor = _put(logical_path, params, endpoints, policy, None, size, nominal=True)
    report = TransferReport(path, PUT, size, params.k, params.m, policy.worker_count,
                            executor.clock, codec_s=codec_s)
    _finish_put(report, outcomes, executor, endpoints, t0)
    return report


def simulate_get(size, params, endpoints, policy=TransferPolicy(), logical_path="/bench/file"):
    """Schedule a get of a round-robin placed file of ``size`` bytes, no data moved."""
    if not endpoints.simulated:
        raise ConfigError("nominal transfers need simulated endpoints")
    path = normalize_path(logical_path)
    plan = round_robin(params.m, endpoints.vector)
    pad = -(-size // params.k) * params.k - size
    manifest = FileManifest(path, params, size, pad, tuple(
        ChunkLocation(i, e, remote_name(path, f"chunk{i}")) for i, e in plan.assignments))
    _, report = _get(manifest, endpoints, policy, nominal=True)
    return report


CHUNK_STATES = ("healthy", "absent", "unreachable", "corrupt-header", "corrupt-payload")


@dataclass
class VerifyReport:
    logical_path: str
    k: int
    m: int
    chunks: dict  # chunk_index -> state

    @property
    def healthy(self):
        return sum(1 for s in self.chunks.values() if s == "healthy")

    @property
    def recoverable(self):
        return self.healthy >= self.k

    def to_dict(self):
        return {"logical_path": self.logical_path, "k": self.k, "m": self.m,
                "chunks": {str(i): s for i, s in sorted(self.chunks.items())},
                "healthy": self.healthy, "recoverable": self.recoverable}


def verify_file(logical_path, endpoints, catalogue):
    """Audit every chunk of a file: present, well-formed and mutually consistent."""
    manifest = catalogue.lookup(logical_path)
    k, m = manifest.params.k, manifest.params.m
    states = {i: "absent" for i in range(m)}
    good = {}
    for loc in manifest.chunk_locations:
        try:
            raw = endpoints[loc.endpoint_id].fetch(loc.remote_name)
        except NotFoundError:
            continue
        except ECStoreError:
            states[loc.chunk_index] = "unreachable"
            continue
        try:
            good[loc.chunk_index] = _validated_chunk(raw, manifest, loc.chunk_index)
            states[loc.chunk_index] = "healthy"
        except CorruptionError:
            states[loc.chunk_index] = "corrupt-header"
    if len(good) >= k:
        # rebuild from a data-first k-subset and compare every other healthy chunk
        basis = sorted(good, key=lambda i: (i >= k, i))[:k]
        data = codec.decode([good[i] for i in basis])
        expected = codec.encode(data, manifest.params)
        for index, chunk in good.items():
            if expected[index].payload != chunk.payload:
                states[index] = "corrupt-payload"
    return VerifyReport(manifest.logical_path, k, m, states)


def remove_file(logical_path, endpoints, catalogue):
    """Unregister a file and delete its chunks; returns names that could not be deleted."""
    manifest = catalogue.unregister(logical_path)
    leftovers = []
    for loc in manifest.chunk_locations:
        try:
            endpoints[loc.endpoint_id].delete(loc.remote_name)
        except NotFoundError:
            pass
        except (ECStoreError, OSError) as exc:
            log.warning("could not delete %s from %s: %s", loc.remote_name, loc.endpoint_id, exc)
            leftovers.append((loc.endpoint_id, loc.remote_name))
    return manifest, leftovers
