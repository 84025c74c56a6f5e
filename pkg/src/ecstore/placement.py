"""Round-robin assignment of chunks to an ordered endpoint vector."""

from collections import defaultdict
from dataclasses import dataclass

from ecstore.errors import ConfigError, NoAlternativeError


def check_vector(endpoints):
    vector = tuple(endpoints)
    if not vector:
        raise ConfigError("endpoint vector is empty")
    if len(set(vector)) != len(vector):
        raise ConfigError(f"duplicate endpoint ids in {list(vector)}")
    return vector


@dataclass(frozen=True)
class PlacementPlan:
    assignments: tuple  # ((chunk_index, endpoint_id), ...) ordered by chunk index
    endpoints: tuple

    def endpoint_for(self, chunk_index):
        return self.assignments[chunk_index][1]

    def by_endpoint(self):
        groups = defaultdict(list)
        for index, endpoint in self.assignments:
            groups[endpoint].append(index)
        return {e: groups.get(e, []) for e in self.endpoints}

    def counts(self):
        return [len(v) for v in self.by_endpoint().values()]


def round_robin(m, endpoints):
    """Chunk i goes to vector position i mod s."""
    vector = check_vector(endpoints)
    if m < 1:
        raise ConfigError(f"chunk count must be >= 1, got {m}")
    s = len(vector)
    return PlacementPlan(tuple((i, vector[i % s]) for i in range(m)), vector)


def retry_target(failed, endpoints, attempt):
    """Endpoint for retry number ``attempt`` of a chunk whose first target failed.

    ``failed`` is ``(chunk_index, endpoint_id)`` naming the originally planned
    endpoint; retries walk forward through the vector from there.
    """
    vector = check_vector(endpoints)
    _, endpoint_id = failed
    if attempt < 1:
        raise ValueError(f"attempt must be >= 1, got {attempt}")
    if len(vector) == 1:
        raise NoAlternativeError(f"no alternative endpoint to {endpoint_id!r}")
    try:
        position = vector.index(endpoint_id)
    except ValueError:
        raise ConfigError(f"endpoint {endpoint_id!r} not in vector") from None
    return vector[(position + attempt) % len(vector)]
