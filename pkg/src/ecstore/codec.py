"""Systematic Reed-Solomon erasure code over GF(256) with zfec-style shares.

The coding matrix is built the same way zfec builds it: Vandermonde rows at
the points 0, 1, a, a^2, ... (a = 2), right-multiplied by the inverse of the
top k x k block so the first k rows become the identity. Chunk payloads are
therefore byte-identical to ``zfec.easyfec.Encoder(k, m).encode(data)``.

On-disk chunk layout (8-byte header, big-endian, then the raw payload)::

    offset  size  field
    0       1     format_version (currently 1)
    1       1     k
    2       1     m
    3       1     chunk_index
    4       4     pad_length
"""

import functools
import math
import re
import struct
from dataclasses import dataclass

import numpy as np

from ecstore import gf
from ecstore.errors import ConfigError, FormatError, InsufficientSharesError

FORMAT_VERSION = 1
MAX_CHUNKS = 255
HEADER = struct.Struct(">BBBBI")
HEADER_SIZE = HEADER.size

_NAME_RE = re.compile(r"(?P<base>.+)\.(?P<index>[0-9]+)_(?P<m>[0-9]+)\.fec", re.DOTALL)


@dataclass(frozen=True)
class CodingParams:
    k: int
    m: int

    def __post_init__(self):
        if not (isinstance(self.k, int) and isinstance(self.m, int)):
            raise ConfigError("k and m must be integers")
        if self.m > MAX_CHUNKS:
            raise ConfigError(f"m={self.m} exceeds the GF(256) limit of {MAX_CHUNKS} chunks")
        if not 1 <= self.k <= self.m:
            raise ConfigError(f"need 1 <= k <= m, got k={self.k} m={self.m}")

    @property
    def coding(self):
        return self.m - self.k


@dataclass(frozen=True)
class ChunkHeader:
    k: int
    m: int
    chunk_index: int
    pad_length: int
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        CodingParams(self.k, self.m)
        if not 0 <= self.chunk_index < self.m:
            raise FormatError(f"chunk index {self.chunk_index} out of range for m={self.m}")
        if not 0 <= self.pad_length < 2**32:
            raise FormatError(f"pad length {self.pad_length} out of range")

    def pack(self):
        return HEADER.pack(self.format_version, self.k, self.m, self.chunk_index, self.pad_length)

    @classmethod
    def unpack(cls, raw):
        if len(raw) < HEADER_SIZE:
            raise FormatError(f"truncated chunk header ({len(raw)} bytes)")
        version, k, m, index, pad = HEADER.unpack_from(raw)
        if version != FORMAT_VERSION:
            raise FormatError(f"unsupported chunk format version {version}")
        try:
            return cls(k=k, m=m, chunk_index=index, pad_length=pad, format_version=version)
        except ConfigError as exc:
            raise FormatError(str(exc)) from exc


@dataclass(frozen=True)
class Chunk:
    header: ChunkHeader
    payload: bytes

    @property
    def index(self):
        return self.header.chunk_index

    def to_bytes(self):
        return self.header.pack() + bytes(self.payload)

    @classmethod
    def from_bytes(cls, raw):
        return cls(ChunkHeader.unpack(raw), bytes(raw[HEADER_SIZE:]))


@functools.lru_cache(maxsize=None)
def _coding_matrix(k, m):
    vandermonde = [[1] + [0] * (k - 1)]
    vandermonde += [[gf.gf_pow(gf.gf_pow(gf.GENERATOR, row), col) for col in range(k)]
                    for row in range(m - 1)]
    top_inv = gf.mat_inv(vandermonde[:k])
    rows = [[int(i == j) for j in range(k)] for i in range(k)]
    rows += gf.mat_mul(vandermonde[k:], top_inv)
    return tuple(tuple(r) for r in rows)


def build_coding_matrix(params):
    """Return the m x k systematic coding matrix as a list of rows."""
    return [list(r) for r in _coding_matrix(params.k, params.m)]


@functools.lru_cache(maxsize=4096)
def _decoding_matrix(k, m, indices):
    rows = _coding_matrix(k, m)
    return tuple(tuple(r) for r in gf.mat_inv([rows[i] for i in indices]))


def encode(data, params):
    """Split ``data`` into k zero-padded slices and append m-k coding chunks."""
    data = bytes(data)
    k, m = params.k, params.m
    length = math.ceil(len(data) / k)
    pad = length * k - len(data)
    padded = np.frombuffer(data + bytes(pad), dtype=np.uint8).reshape(k, length)
    rows = _coding_matrix(k, m)
    chunks = []
    for index in range(m):
        if index < k:
            payload = padded[index].tobytes()
        else:
            payload = gf.combine(rows[index], padded, length).tobytes()
        chunks.append(Chunk(ChunkHeader(k, m, index, pad), payload))
    return chunks


def _check_consistent(chunks):
    if not chunks:
        raise InsufficientSharesError("no chunks supplied")
    first = chunks[0]
    key = (first.header.k, first.header.m, first.header.pad_length, first.header.format_version)
    length = len(first.payload)
    seen = set()
    for c in chunks:
        h = c.header
        if (h.k, h.m, h.pad_length, h.format_version) != key:
            raise FormatError(f"chunk {h.chunk_index} header disagrees with chunk {first.index}")
        if len(c.payload) != length:
            raise FormatError(f"chunk {h.chunk_index} payload length {len(c.payload)} != {length}")
        if h.chunk_index in seen:
            raise FormatError(f"duplicate chunk index {h.chunk_index}")
        seen.add(h.chunk_index)
    k = first.header.k
    if len(chunks) < k:
        raise InsufficientSharesError(f"need {k} chunks to decode, got {len(chunks)}")
    if first.header.pad_length >= k and first.header.pad_length > 0:
        raise FormatError(f"pad length {first.header.pad_length} must be below k={k}")
    return first.header, length


def is_fast_path(indices, k):
    """True when the chosen k indices are exactly the data chunks."""
    return sorted(indices)[:k] == list(range(k))


def decode(chunks):
    """Rebuild the original bytes from any k (or more) distinct chunks."""
    header, length = _check_consistent(list(chunks))
    k, m = header.k, header.m
    # prefer data chunks: each one used is a row that needs no arithmetic
    by_index = {c.index: c for c in sorted(chunks, key=lambda c: c.index)}
    data_present = [i for i in range(k) if i in by_index]
    if len(data_present) == k:
        chosen = [by_index[i] for i in range(k)]
    else:
        extra = [c for c in sorted(chunks, key=lambda c: c.index) if c.index >= k]
        chosen = [by_index[i] for i in data_present] + extra[: k - len(data_present)]

    if all(c.index < k for c in chosen):
        out = b"".join(by_index[i].payload for i in range(k))
    else:
        indices = tuple(c.index for c in chosen)
        inverse = _decoding_matrix(k, m, indices)
        vectors = np.frombuffer(b"".join(c.payload for c in chosen), dtype=np.uint8)
        vectors = vectors.reshape(k, length)
        parts = []
        for i in range(k):
            if i in by_index:
                parts.append(by_index[i].payload)
            else:
                parts.append(gf.combine(inverse[i], vectors, length).tobytes())
        out = b"".join(parts)
    return out[: len(out) - header.pad_length]


def chunk_filename(base, header):
    """Name a share the way the zfec command-line tool does.

    Both numbers are zero-padded to the width of ``m``, e.g.
    ``data.bin.00_10.fec``.
    """
    if not base or "/" in base or "\\" in base:
        raise FormatError(f"invalid chunk base name {base!r}")
    width = len(str(header.m))
    return f"{base}.{header.chunk_index:0{width}d}_{header.m:0{width}d}.fec"


def parse_chunk_filename(name):
    """Inverse of :func:`chunk_filename`; returns ``(base, chunk_index, m)``."""
    match = _NAME_RE.fullmatch(name)
    if match is None or "/" in name:
        raise FormatError(f"{name!r} is not a chunk filename")
    index, m = int(match["index"]), int(match["m"])
    if not 0 <= index < m <= MAX_CHUNKS:
        raise FormatError(f"{name!r} has chunk index {index} out of range for m={m}")
    return match["base"], index, m
