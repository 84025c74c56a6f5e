"""Erasure-coded file store striped round-robin across storage endpoints."""

from ecstore.catalogue import Catalogue, FileManifest
from ecstore.codec import Chunk, ChunkHeader, CodingParams, decode, encode
from ecstore.endpoint import EndpointDescriptor, EndpointSet, SimClock
from ecstore.transfer import TransferPolicy, get_file, put_file, verify_file

__version__ = "0.1.0"

__all__ = [
    "Catalogue",
    "Chunk",
    "ChunkHeader",
    "CodingParams",
    "EndpointDescriptor",
    "EndpointSet",
    "FileManifest",
    "SimClock",
    "TransferPolicy",
    "decode",
    "encode",
    "get_file",
    "put_file",
    "verify_file",
]
