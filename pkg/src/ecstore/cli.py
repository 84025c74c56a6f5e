"""Command-line front end: ``ecstore put|get|ls|rm|verify|avail|bench``.

Configuration comes from ``--config FILE`` (or the ``ECSTORE_CONFIG``
environment variable), a JSON document such as::

    {"catalogue": "catalogue.json",
     "endpoints": "endpoints.json",
     "defaults": {"split": 10, "coding": 5, "threads": 1, "retries": 0}}

Relative paths resolve against the config file's directory. ``--catalogue``
and ``--endpoints`` override the file.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from ecstore import analysis, bench
from ecstore.catalogue import Catalogue
from ecstore.codec import CodingParams
from ecstore.endpoint import load_endpoints
from ecstore.errors import (
    AlreadyExistsError,
    ConfigError,
    CorruptionError,
    DownloadFailed,
    ECStoreError,
    FormatError,
    InsufficientSharesError,
    ModelError,
    NotFoundError,
    UploadFailed,
)
from ecstore.transfer import TransferPolicy, get_file, put_file, remove_file, verify_file

JSON_SCHEMA_VERSION = 1
CONFIG_ENV = "ECSTORE_CONFIG"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ENCODE = 3
EXIT_UPLOAD_FAILED = 4
EXIT_DUPLICATE = 5
EXIT_NOT_FOUND = 6
EXIT_DOWNLOAD_FAILED = 7
EXIT_CORRUPT = 8
EXIT_UNRECOVERABLE = 9

# most specific first
_EXIT_CODES = (
    (AlreadyExistsError, EXIT_DUPLICATE),
    (NotFoundError, EXIT_NOT_FOUND),
    (UploadFailed, EXIT_UPLOAD_FAILED),
    (DownloadFailed, EXIT_DOWNLOAD_FAILED),
    (CorruptionError, EXIT_CORRUPT),
    (FormatError, EXIT_ENCODE),
    (InsufficientSharesError, EXIT_ENCODE),
    (ConfigError, EXIT_CONFIG),
    (ModelError, EXIT_CONFIG),
)


def exit_code_for(exc):
    for cls, code in _EXIT_CODES:
        if isinstance(exc, cls):
            return code
    return 1


@dataclass
class CliConfig:
    catalogue: Path = None
    endpoints: Path = None
    split: int = 10
    coding: int = 5
    threads: int = 1
    retries: int = 0

    def __post_init__(self):
        CodingParams(self.split, self.split + self.coding)
        TransferPolicy(self.threads, self.retries)

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path}: {exc}") from None
        defaults = raw.get("defaults", {})
        unknown = set(defaults) - {"split", "coding", "threads", "retries"}
        if unknown:
            raise ConfigError(f"config file {path}: unknown defaults {sorted(unknown)}")

        def resolve(key):
            value = raw.get(key)
            return None if value is None else (path.parent / value)

        return cls(catalogue=resolve("catalogue"), endpoints=resolve("endpoints"), **defaults)


def _config(args):
    source = args.config or os.environ.get(CONFIG_ENV)
    cfg = CliConfig.load(source) if source else CliConfig()
    if args.catalogue:
        cfg.catalogue = Path(args.catalogue)
    if args.endpoints:
        cfg.endpoints = Path(args.endpoints)
    return cfg


def _catalogue(cfg):
    if cfg.catalogue is None:
        raise ConfigError("no catalogue path configured (use --catalogue or a config file)")
    return Catalogue(cfg.catalogue)


def _endpoints(cfg):
    if cfg.endpoints is None:
        raise ConfigError("no endpoint config configured (use --endpoints or a config file)")
    return load_endpoints(cfg.endpoints)


def _policy(args, cfg):
    threads = args.threads if args.threads is not None else cfg.threads
    retries = args.retries if args.retries is not None else cfg.retries
    return TransferPolicy(worker_count=threads, max_retries=retries,
                          dispatch_all=getattr(args, "dispatch_all", False))


def _emit(args, kind, payload, text):
    if args.json:
        print(json.dumps({"schema": f"ecstore.{kind}/{JSON_SCHEMA_VERSION}", **payload}, sort_keys=True))
    else:
        print(text)


def cmd_put(args):
    cfg = _config(args)
    split = args.split if args.split is not None else cfg.split
    coding = args.coding if args.coding is not None else cfg.coding
    params = CodingParams(split, split + coding)
    policy = _policy(args, cfg)
    catalogue, endpoints = _catalogue(cfg), _endpoints(cfg)
    source = Path(args.local_path)
    if not source.is_file():
        raise ConfigError(f"{source}: no such local file")
    report = put_file(source, args.logical_path, params, endpoints, catalogue, policy)
    _emit(args, "report", {"report": report.to_dict()}, report.summary())
    return EXIT_OK


def cmd_get(args):
    cfg = _config(args)
    policy = _policy(args, cfg)
    report = get_file(args.logical_path, args.local_path, _endpoints(cfg), _catalogue(cfg), policy)
    _emit(args, "report", {"report": report.to_dict()}, report.summary())
    return EXIT_OK


def cmd_ls(args):
    catalogue = _catalogue(_config(args))
    paths = catalogue.list_files(args.prefix)
    if args.long or args.json:
        manifests = [catalogue.lookup(p).to_dict() for p in paths]
        text = "\n".join(f"{m['logical_path']}  size={m['original_size']} k={m['k']} m={m['m']} "
                         f"chunks={len(m['chunk_locations'])}" for m in manifests)
        _emit(args, "ls", {"files": manifests}, text)
    elif paths:
        print("\n".join(paths))
    return EXIT_OK


def cmd_rm(args):
    cfg = _config(args)
    manifest, leftovers = remove_file(args.logical_path, _endpoints(cfg), _catalogue(cfg))
    text = f"removed {manifest.logical_path} ({len(manifest.chunk_locations)} chunks)"
    if leftovers:
        text += "\n" + "\n".join(f"  could not delete {e}:{n}" for e, n in leftovers)
    _emit(args, "rm", {"manifest": manifest.to_dict(), "leftovers": [list(x) for x in leftovers]}, text)
    return EXIT_OK


def cmd_verify(args):
    cfg = _config(args)
    report = verify_file(args.logical_path, _endpoints(cfg), _catalogue(cfg))
    lines = [f"{report.logical_path}: {report.healthy}/{report.m} healthy, k={report.k}, "
             f"{'recoverable' if report.recoverable else 'NOT recoverable'}"]
    lines += [f"  chunk {i:>3} {s}" for i, s in sorted(report.chunks.items())]
    _emit(args, "verify", {"verify": report.to_dict()}, "\n".join(lines))
    return EXIT_OK if report.recoverable else EXIT_UNRECOVERABLE


def cmd_avail(args):
    schemes = [s for s in args.schemes.split(",") if s.strip()]
    rows = analysis.overhead_resilience_table(args.p, schemes)
    text = [f"{'scheme':<10} {'overhead':>9} {'availability':>14}"]
    text += [f"{r.scheme:<10} {r.overhead:>9.4f} {r.availability:>14.10f}" for r in rows]
    _emit(args, "avail", {"p": args.p, "rows": [r.__dict__ for r in rows]}, "\n".join(text))
    return EXIT_OK


def cmd_bench(args):
    scenarios = bench.load_scenarios(args.scenario_file) if args.scenario_file else bench.reference_scenarios()
    results = bench.run_all(scenarios, out_dir=args.out, plots=not args.no_plots,
                            acceptance=not args.wallclock)
    rows = [row for rs in results.values() for row in rs]
    if args.json:
        _emit(args, "bench", {"rows": rows}, "")
    else:
        sys.stdout.write(bench.format_csv(rows))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="ecstore", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help=f"config file (default: ${CONFIG_ENV})")
    parser.add_argument("--catalogue", help="catalogue JSON file")
    parser.add_argument("--endpoints", help="endpoint config JSON file")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def transfer_flags(p):
        p.add_argument("--threads", type=int)
        p.add_argument("--retries", type=int)

    p = sub.add_parser("put", help="encode and upload a local file")
    p.add_argument("local_path")
    p.add_argument("logical_path")
    p.add_argument("--split", type=int, help="data chunks k")
    p.add_argument("--coding", type=int, help="extra coding chunks (m = k + coding)")
    transfer_flags(p)
    p.set_defaults(func=cmd_put)

    p = sub.add_parser("get", help="download and decode a file")
    p.add_argument("logical_path")
    p.add_argument("local_path")
    transfer_flags(p)
    p.add_argument("--dispatch-all", action="store_true",
                   help="request every chunk at once and keep the first k to arrive")
    p.set_defaults(func=cmd_get)

    p = sub.add_parser("ls", help="list catalogued files")
    p.add_argument("prefix", nargs="?", default="")
    p.add_argument("-l", "--long", action="store_true")
    p.set_defaults(func=cmd_ls)

    p = sub.add_parser("rm", help="unregister a file and delete its chunks")
    p.add_argument("logical_path")
    p.set_defaults(func=cmd_rm)

    p = sub.add_parser("verify", help="audit the chunks of a file")
    p.add_argument("logical_path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("avail", help="availability vs storage overhead table")
    p.add_argument("--p", type=float, default=0.9, help="per-endpoint availability")
    p.add_argument("--schemes", default="rep1,rep2,rep3,ec10+2,ec10+5,ec4+2",
                   help="comma-separated repN / ecK+C list")
    p.set_defaults(func=cmd_avail)

    p = sub.add_parser("bench", help="run benchmark scenarios on simulated endpoints")
    p.add_argument("scenario_file", nargs="?", help="scenario JSON (default: built-in reference set)")
    p.add_argument("--out", help="directory for bench.csv and figures")
    p.add_argument("--no-plots", action="store_true")
    p.add_argument("--wallclock", action="store_true",
                   help="allow local-dir endpoints and report wall-clock seconds")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ECStoreError as exc:
        code = exit_code_for(exc)
        failed = getattr(exc, "failed_chunks", None)
        if args.json:
            payload = {"schema": f"ecstore.error/{JSON_SCHEMA_VERSION}", "error": type(exc).__name__,
                       "message": str(exc), "exit_code": code}
            if failed is not None:
                payload["failed_chunks"] = failed
            print(json.dumps(payload, sort_keys=True))
        print(f"ecstore: error: {exc}", file=sys.stderr)
        return code
    except OSError as exc:
        print(f"ecstore: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
