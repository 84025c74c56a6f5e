"""Storage endpoints: a local-directory archive and a simulated grid SE.

Both backends have archive semantics: whole objects are stored and fetched,
never partially read. The simulated backend charges virtual time to a shared
:class:`SimClock` using an affine cost model ``setup_latency + size/bandwidth``
and fails operations with a seeded per-endpoint random generator.

Endpoint configuration file (JSON)::

    {
      "version": 1,
      "codec_bandwidth": 10000000.0,
      "endpoints": [
        {"id": "se-a", "backend": "local-dir", "root": "/srv/se-a"},
        {"id": "se-b", "backend": "simulated", "setup_latency": 5.5,
         "bandwidth": 17500000.0, "failure_probability": 0.0, "rng_seed": 7,
         "root": null}
      ]
    }

``bandwidth`` may be the string ``"inf"``. A simulated endpoint with a
``root`` keeps its objects on disk so separate CLI invocations see them;
without one the objects live in memory.
"""

import contextlib
import json
import math
import os
import random
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path

from ecstore.errors import ConfigError, NotFoundError, TransferFailed

CONFIG_VERSION = 1
LOCAL_DIR = "local-dir"
SIMULATED = "simulated"

# Fitted from measured serial upload timings: 5.5 s per channel, 17.5 MB/s.
SETUP_LATENCY = 5.5
BANDWIDTH = 17.5e6
# Virtual encode/decode throughput; not measured, chosen so multi-GB files are
# encode-bound while sub-MB files are latency-bound.
CODEC_BANDWIDTH = 10e6


@dataclass(frozen=True)
class EndpointDescriptor:
    endpoint_id: str
    backend: str = SIMULATED
    root: str = None
    setup_latency: float = SETUP_LATENCY
    bandwidth: float = BANDWIDTH
    failure_probability: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if not self.endpoint_id or not isinstance(self.endpoint_id, str):
            raise ConfigError("endpoint id must be a non-empty string")
        if self.backend not in (LOCAL_DIR, SIMULATED):
            raise ConfigError(f"{self.endpoint_id}: unknown backend {self.backend!r}")
        if self.backend == LOCAL_DIR and not self.root:
            raise ConfigError(f"{self.endpoint_id}: local-dir backend needs a root")
        if not 0.0 <= self.failure_probability <= 1.0:
            raise ConfigError(f"{self.endpoint_id}: failure_probability must be in [0, 1]")
        if self.setup_latency < 0:
            raise ConfigError(f"{self.endpoint_id}: setup_latency must be >= 0")
        if not self.bandwidth > 0:
            raise ConfigError(f"{self.endpoint_id}: bandwidth must be > 0")

    @classmethod
    def from_dict(cls, raw):
        raw = dict(raw)
        try:
            endpoint_id = raw.pop("id")
        except KeyError:
            raise ConfigError(f"endpoint entry without an id: {raw}") from None
        unknown = set(raw) - {"backend", "root", "setup_latency", "bandwidth",
                              "failure_probability", "rng_seed"}
        if unknown:
            raise ConfigError(f"{endpoint_id}: unknown keys {sorted(unknown)}")
        if isinstance(raw.get("bandwidth"), str):
            raw["bandwidth"] = float(raw["bandwidth"])
        return cls(endpoint_id=endpoint_id, **raw)

    def to_dict(self):
        out = {"id": self.endpoint_id, "backend": self.backend, "root": self.root}
        if self.backend == SIMULATED:
            out.update(
                setup_latency=self.setup_latency,
                bandwidth="inf" if math.isinf(self.bandwidth) else self.bandwidth,
                failure_probability=self.failure_probability,
                rng_seed=self.rng_seed,
            )
        return out


class SimClock:
    """Virtual time shared by all simulated endpoints of one run.

    Endpoints call :meth:`charge`; outside a :meth:`span` that advances
    ``now`` directly (a serial schedule). The virtual work pool opens a span
    per job so it can place the job's cost on its own worker timeline.
    """

    def __init__(self):
        self.now = 0.0
        self.trace = []
        self._lock = threading.Lock()
        self._span = None

    def charge(self, seconds, label=""):
        with self._lock:
            self.trace.append((label, seconds))
            if self._span is not None:
                self._span[0] += seconds
            else:
                self.now += seconds

    @contextlib.contextmanager
    def span(self):
        with self._lock:
            if self._span is not None:
                raise RuntimeError("SimClock spans do not nest")
            self._span = cell = [0.0]
        try:
            yield cell
        finally:
            with self._lock:
                self._span = None

    def advance_to(self, t):
        with self._lock:
            if t < self.now:
                raise ValueError(f"virtual time cannot go backwards ({t} < {self.now})")
            self.now = t


def simulated_cost(descriptor, size):
    return descriptor.setup_latency + size / descriptor.bandwidth


def _check_name(name):
    if not name or "/" in name or "\\" in name or name in (".", ".."):
        raise ValueError(f"invalid object name {name!r}")


class LocalDirEndpoint:
    simulated = False

    def __init__(self, descriptor):
        self.descriptor = descriptor
        self.endpoint_id = descriptor.endpoint_id
        self.root = Path(descriptor.root)

    def _path(self, name):
        _check_name(name)
        return self.root / name

    def store(self, name, data):
        path = self._path(name)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".part-")
            try:
                with os.fdopen(fd, "wb") as f:
                    f.write(data)
                os.replace(tmp, path)
            except BaseException:
                with contextlib.suppress(OSError):
                    os.unlink(tmp)
                raise
        except OSError as exc:
            raise TransferFailed(f"{self.endpoint_id}: store {name}: {exc}") from exc
        return len(data)

    def fetch(self, name):
        path = self._path(name)
        try:
            return path.read_bytes()
        except FileNotFoundError:
            raise NotFoundError(f"{self.endpoint_id}: no object {name}") from None
        except OSError as exc:
            raise TransferFailed(f"{self.endpoint_id}: fetch {name}: {exc}") from exc

    def delete(self, name):
        try:
            self._path(name).unlink()
        except FileNotFoundError:
            raise NotFoundError(f"{self.endpoint_id}: no object {name}") from None

    def exists(self, name):
        return self._path(name).is_file()

    def names(self):
        if not self.root.is_dir():
            return []
        return sorted(p.name for p in self.root.iterdir()
                      if p.is_file() and not p.name.startswith(".part-"))


class SimulatedEndpoint:
    """Archive with virtual-time costs and seeded random failures.

    A failed store or fetch charges only the setup latency and leaves no
    object behind. ``delete`` and ``exists`` are catalogue-level operations
    that neither fail nor cost time.
    """

    simulated = True

    def __init__(self, descriptor, clock):
        self.descriptor = descriptor
        self.endpoint_id = descriptor.endpoint_id
        self.clock = clock
        self.rng = random.Random(descriptor.rng_seed)
        self._lock = threading.Lock()
        self._disk = LocalDirEndpoint(descriptor) if descriptor.root else None
        self._objects = {}
        self.operations = 0

    def cost(self, size):
        return simulated_cost(self.descriptor, size)

    def _attempt(self, label):
        with self._lock:
            self.operations += 1
            failed = self.rng.random() < self.descriptor.failure_probability
        if failed:
            self.clock.charge(self.descriptor.setup_latency, f"{self.endpoint_id}:{label}:failed")
            raise TransferFailed(f"{self.endpoint_id}: simulated {label} failure")

    def simulate(self, label, size):
        """Charge one transfer of ``size`` bytes without moving any data."""
        self._attempt(label)
        self.clock.charge(self.cost(size), f"{self.endpoint_id}:{label}")
        return size

    def store(self, name, data):
        _check_name(name)
        self._attempt("store")
        data = bytes(data)
        if self._disk is not None:
            self._disk.store(name, data)
        else:
            with self._lock:
                self._objects[name] = data
        self.clock.charge(self.cost(len(data)), f"{self.endpoint_id}:store")
        return len(data)

    def fetch(self, name):
        _check_name(name)
        self._attempt("fetch")
        if self._disk is not None:
            try:
                data = self._disk.fetch(name)
            except NotFoundError:
                self.clock.charge(self.descriptor.setup_latency, f"{self.endpoint_id}:fetch:missing")
                raise
        else:
            with self._lock:
                data = self._objects.get(name)
            if data is None:
                self.clock.charge(self.descriptor.setup_latency, f"{self.endpoint_id}:fetch:missing")
                raise NotFoundError(f"{self.endpoint_id}: no object {name}")
        self.clock.charge(self.cost(len(data)), f"{self.endpoint_id}:fetch")
        return data

    def delete(self, name):
        _check_name(name)
        if self._disk is not None:
            return self._disk.delete(name)
        with self._lock:
            if self._objects.pop(name, None) is None:
                raise NotFoundError(f"{self.endpoint_id}: no object {name}")

    def exists(self, name):
        _check_name(name)
        if self._disk is not None:
            return self._disk.exists(name)
        with self._lock:
            return name in self._objects

    def names(self):
        if self._disk is not None:
            return self._disk.names()
        with self._lock:
            return sorted(self._objects)


def make_endpoint(descriptor, clock):
    if descriptor.backend == LOCAL_DIR:
        return LocalDirEndpoint(descriptor)
    return SimulatedEndpoint(descriptor, clock)


@dataclass
class EndpointSet:
    """Ordered endpoint vector plus the clock its simulated members share."""

    descriptors: list
    codec_bandwidth: float = CODEC_BANDWIDTH
    clock: SimClock = field(default_factory=SimClock)

    def __post_init__(self):
        ids = [d.endpoint_id for d in self.descriptors]
        if not ids:
            raise ConfigError("no endpoints configured")
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate endpoint ids in {ids}")
        if not self.codec_bandwidth > 0:
            raise ConfigError("codec_bandwidth must be > 0")
        self._by_id = {d.endpoint_id: make_endpoint(d, self.clock) for d in self.descriptors}

    @property
    def vector(self):
        return tuple(d.endpoint_id for d in self.descriptors)

    def __getitem__(self, endpoint_id):
        try:
            return self._by_id[endpoint_id]
        except KeyError:
            raise ConfigError(f"unknown endpoint {endpoint_id!r}") from None

    def __iter__(self):
        return iter(self._by_id.values())

    def __len__(self):
        return len(self._by_id)

    @property
    def simulated(self):
        kinds = {e.simulated for e in self}
        if len(kinds) > 1:
            raise ConfigError("cannot mix simulated and local-dir endpoints in one transfer")
        return kinds.pop()

    def codec_cost(self, size):
        return size / self.codec_bandwidth

    @classmethod
    def from_config(cls, raw, base_dir=None):
        if raw.get("version", CONFIG_VERSION) != CONFIG_VERSION:
            raise ConfigError(f"unsupported endpoint config version {raw.get('version')}")
        descriptors = []
        for entry in raw.get("endpoints", []):
            d = EndpointDescriptor.from_dict(entry)
            if d.root and base_dir is not None and not os.path.isabs(d.root):
                d = EndpointDescriptor(**{**d.__dict__, "root": str(Path(base_dir) / d.root)})
            descriptors.append(d)
        return cls(descriptors, codec_bandwidth=float(raw.get("codec_bandwidth", CODEC_BANDWIDTH)))

    def to_config(self):
        return {
            "version": CONFIG_VERSION,
            "codec_bandwidth": self.codec_bandwidth,
            "endpoints": [d.to_dict() for d in self.descriptors],
        }


def load_endpoints(path):
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"endpoint config {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"endpoint config {path}: {exc}") from None
    return EndpointSet.from_config(raw, base_dir=path.parent)
