"""Logical namespace of erasure-coded files.

Each stored file is a directory entry carrying the coding metadata; its chunks
are child records named with the zfec share convention. Directory metadata is
authoritative and child names are validated against it on every lookup.

The catalogue persists as one JSON document, replaced atomically on commit::

    {
      "format": "ecstore-catalogue",
      "version": 1,
      "entries": {
        "/data/file.bin": {
          "kind": "directory",
          "metadata": {"EC_SPLIT": "10", "EC_TOTAL": "15", "EC_VERSION": "1",
                       "EC_SIZE": "756000", "EC_PAD": "0"}
        },
        "/data/file.bin/file.bin.00_15.fec": {
          "kind": "chunk",
          "metadata": {"EC_INDEX": "0", "EC_SPLIT": "10", "EC_TOTAL": "15",
                       "EC_VERSION": "1"},
          "endpoint": "se-a",
          "remote_name": "%2Fdata%2Ffile.bin.00_15.fec"
        }
      }
    }
"""

import copy
import json
import os
import posixpath
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path

from ecstore.codec import FORMAT_VERSION, ChunkHeader, CodingParams, chunk_filename, parse_chunk_filename
from ecstore.errors import AlreadyExistsError, ConfigError, CorruptionError, FormatError, NotFoundError

CATALOGUE_FORMAT = "ecstore-catalogue"
CATALOGUE_VERSION = 1

DIRECTORY = "directory"
CHUNK = "chunk"

KEY_SPLIT = "EC_SPLIT"
KEY_TOTAL = "EC_TOTAL"
KEY_VERSION = "EC_VERSION"
KEY_SIZE = "EC_SIZE"
KEY_PAD = "EC_PAD"
KEY_INDEX = "EC_INDEX"
KEY_PREFIX = "EC_"


def normalize_path(logical_path):
    if not isinstance(logical_path, str) or not logical_path.startswith("/"):
        raise ConfigError(f"logical path must be absolute: {logical_path!r}")
    parts = [p for p in logical_path.split("/") if p]
    if not parts or any(p in (".", "..") for p in parts):
        raise ConfigError(f"invalid logical path {logical_path!r}")
    return "/" + "/".join(parts)


@dataclass(frozen=True)
class ChunkLocation:
    chunk_index: int
    endpoint_id: str
    remote_name: str


@dataclass(frozen=True)
class FileManifest:
    logical_path: str
    params: CodingParams
    original_size: int
    pad_length: int
    chunk_locations: tuple

    def __post_init__(self):
        object.__setattr__(self, "logical_path", normalize_path(self.logical_path))
        locations = tuple(sorted((loc if isinstance(loc, ChunkLocation) else ChunkLocation(*loc)
                                  for loc in self.chunk_locations),
                                 key=lambda loc: loc.chunk_index))
        object.__setattr__(self, "chunk_locations", locations)
        indices = [loc.chunk_index for loc in locations]
        if len(set(indices)) != len(indices) or len(indices) > self.params.m:
            raise ConfigError(f"{self.logical_path}: chunk indices must be distinct and at most m")
        if any(not 0 <= i < self.params.m for i in indices):
            raise ConfigError(f"{self.logical_path}: chunk index out of range")
        if self.original_size < 0 or not 0 <= self.pad_length < self.params.k:
            raise ConfigError(f"{self.logical_path}: bad size/padding")
        if (self.original_size + self.pad_length) % self.params.k:
            raise ConfigError(f"{self.logical_path}: size + padding not a multiple of k")

    @property
    def name(self):
        return posixpath.basename(self.logical_path)

    def header(self, chunk_index):
        return ChunkHeader(self.params.k, self.params.m, chunk_index, self.pad_length)

    def chunk_name(self, chunk_index):
        return chunk_filename(self.name, self.header(chunk_index))

    def to_dict(self):
        return {
            "logical_path": self.logical_path,
            "k": self.params.k,
            "m": self.params.m,
            "original_size": self.original_size,
            "pad_length": self.pad_length,
            "chunk_locations": [
                {"chunk_index": c.chunk_index, "endpoint_id": c.endpoint_id, "remote_name": c.remote_name}
                for c in self.chunk_locations
            ],
        }

    @classmethod
    def from_dict(cls, raw):
        return cls(
            raw["logical_path"],
            CodingParams(raw["k"], raw["m"]),
            raw["original_size"],
            raw["pad_length"],
            tuple(ChunkLocation(**c) for c in raw["chunk_locations"]),
        )


def _empty_doc():
    return {"format": CATALOGUE_FORMAT, "version": CATALOGUE_VERSION, "entries": {}}


class Catalogue:
    """File catalogue, in memory or backed by a JSON file.

    Mutations are serialized by one lock and published by swapping in a new
    entries dict, so readers always see a complete snapshot.
    """

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self._entries = {}
        if self.path is not None and self.path.exists():
            self._entries = self._load(self.path)

    @staticmethod
    def _load(path):
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(f"catalogue {path}: {exc}") from None
        if doc.get("format") != CATALOGUE_FORMAT or doc.get("version") != CATALOGUE_VERSION:
            raise FormatError(f"catalogue {path}: unsupported format/version")
        return doc["entries"]

    def reload(self):
        with self._lock:
            self._entries = self._load(self.path) if self.path and self.path.exists() else {}

    def dumps(self):
        doc = _empty_doc()
        doc["entries"] = self._entries
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def _commit(self, entries):
        if self.path is not None:
            doc = _empty_doc()
            doc["entries"] = entries
            text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
            self.path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=f".{self.path.name}.")
            try:
                with os.fdopen(fd, "w") as f:
                    f.write(text)
                    f.flush()
                    os.fsync(f.fileno())
                os.replace(tmp, self.path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
        self._entries = entries

    def register_file(self, manifest):
        path = manifest.logical_path
        k, m = manifest.params.k, manifest.params.m
        common = {KEY_SPLIT: str(k), KEY_TOTAL: str(m), KEY_VERSION: str(FORMAT_VERSION)}
        directory = {
            "kind": DIRECTORY,
            "metadata": {**common, KEY_SIZE: str(manifest.original_size), KEY_PAD: str(manifest.pad_length)},
        }
        with self._lock:
            if any(p == path or p.startswith(path + "/") for p in self._entries):
                raise AlreadyExistsError(f"{path} is already registered")
            if any(path.startswith(p + "/") for p, e in self._entries.items() if e["kind"] == DIRECTORY):
                raise AlreadyExistsError(f"{path} lies inside a registered file")
            entries = dict(self._entries)
            entries[path] = directory
            for loc in manifest.chunk_locations:
                entries[f"{path}/{manifest.chunk_name(loc.chunk_index)}"] = {
                    "kind": CHUNK,
                    "metadata": {KEY_INDEX: str(loc.chunk_index), **common},
                    "endpoint": loc.endpoint_id,
                    "remote_name": loc.remote_name,
                }
            self._commit(entries)
        return copy.deepcopy(directory)

    def entry(self, logical_path):
        entry = self._entries.get(normalize_path(logical_path))
        if entry is None:
            raise NotFoundError(f"{logical_path}: no such entry")
        return copy.deepcopy(entry)

    def lookup(self, logical_path):
        path = normalize_path(logical_path)
        entries = self._entries
        directory = entries.get(path)
        if directory is None or directory["kind"] != DIRECTORY:
            raise NotFoundError(f"{path}: no such file")
        meta = directory["metadata"]
        try:
            k, m = int(meta[KEY_SPLIT]), int(meta[KEY_TOTAL])
            size, pad = int(meta[KEY_SIZE]), int(meta[KEY_PAD])
            version = int(meta[KEY_VERSION])
        except (KeyError, ValueError) as exc:
            raise CorruptionError(f"{path}: bad directory metadata ({exc})") from None
        if version != FORMAT_VERSION:
            raise CorruptionError(f"{path}: unsupported {KEY_VERSION}={version}")
        base = posixpath.basename(path)
        locations = []
        prefix = path + "/"
        for child, entry in sorted(entries.items()):
            if not child.startswith(prefix) or entry["kind"] != CHUNK:
                continue
            name = child[len(prefix):]
            try:
                child_base, index, child_m = parse_chunk_filename(name)
            except FormatError as exc:
                raise CorruptionError(f"{child}: {exc}") from None
            child_meta = entry.get("metadata", {})
            if (child_base != base or child_m != m
                    or child_meta.get(KEY_TOTAL, str(m)) != str(m)
                    or child_meta.get(KEY_SPLIT, str(k)) != str(k)
                    or child_meta.get(KEY_INDEX, str(index)) != str(index)):
                raise CorruptionError(
                    f"{child}: chunk record disagrees with {path} ({KEY_SPLIT}={k}, {KEY_TOTAL}={m})")
            locations.append(ChunkLocation(index, entry["endpoint"], entry["remote_name"]))
        try:
            return FileManifest(path, CodingParams(k, m), size, pad, tuple(locations))
        except ConfigError as exc:
            raise CorruptionError(f"{path}: {exc}") from None

    def list_files(self, prefix=""):
        if prefix and not prefix.startswith("/"):
            prefix = "/" + prefix
        return sorted(p for p, e in self._entries.items()
                      if e["kind"] == DIRECTORY and p.startswith(prefix))

    def unregister(self, logical_path):
        with self._lock:
            manifest = self.lookup(logical_path)
            path = manifest.logical_path
            entries = {p: e for p, e in self._entries.items()
                       if p != path and not p.startswith(path + "/")}
            self._commit(entries)
        return manifest
