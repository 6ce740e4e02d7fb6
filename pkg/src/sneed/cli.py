"""Command-line entry point: ``sneed {catalog,encode,decode,simulate,verify}``.

Errors go to stderr as one JSON line ``{"error": ..., "exit": ..., "message": ...}``
and map to fixed exit codes (see ``EXIT_CODES``).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from importlib import resources
from pathlib import Path

from . import errors
from .code_core import CATALOG, build_code_from_catalog, build_vandermonde_code, catalog_lookup, load_generator
from .field_math import get_field
from .netsim import ADVERSARIES, PLACEMENTS, SCHEMA_VERSION, SimConfig, run_campaign

EXIT_CODES = {
    "error": 1,
    "config": 2,
    "usage": 2,
    "not-found": 3,
    "unrecoverable-pattern": 4,
    "insufficient-shards": 5,
    "io": 6,
    "field-too-small": 7,
    "unsupported-entry": 8,
    "malformed-packet": 9,
    "integrity": 10,
    "schema": 11,
}

log = logging.getLogger("sneed")


class CliError(errors.SneedError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _exit_code(code: str) -> int:
    if code in EXIT_CODES:
        return EXIT_CODES[code]
    if code in {"bad-magic", "unknown-version", "unknown-kind", "truncated", "length-mismatch"}:
        return EXIT_CODES["malformed-packet"]
    if code in {"invalid-field", "singleton-violation"}:
        return EXIT_CODES["config"]
    return EXIT_CODES["error"]


def _fail(code: str, message: str) -> int:
    status = _exit_code(code)
    print(json.dumps({"error": code, "exit": status, "message": message}), file=sys.stderr)
    return status


# --- catalog -------------------------------------------------------------------


def cmd_catalog(args) -> int:
    rows = CATALOG if args.n is None else (catalog_lookup(args.n),)
    sep = args.delimiter
    print(sep.join(["n", "m", "code", "type", "buildable"]))
    for e in rows:
        print(sep.join([str(e.n), str(e.m), e.label, e.type, "yes" if e.buildable else "no"]))
    if args.figure:
        from .plotting import plot_catalog

        plot_catalog(args.figure)
    return 0


# --- encode / decode / verify ----------------------------------------------------


def _code_from_args(args):
    if args.scheme == "binary":
        return build_code_from_catalog(catalog_lookup(args.n))
    if args.scheme == "vandermonde":
        if args.t is None:
            raise CliError("usage", "--t is required for the vandermonde scheme")
        return build_vandermonde_code(args.n, args.t, get_field(args.field_m))
    if args.scheme == "generator":
        if not args.generator:
            raise CliError("usage", "--generator FILE is required for the generator scheme")
        return load_generator(args.generator, d=args.d)
    raise CliError("usage", f"scheme {args.scheme!r} cannot shard files")


def cmd_encode(args) -> int:
    from .shards import encode_file

    code = _code_from_args(args)
    data = Path(args.input).read_bytes()
    manifest = encode_file(data, code, args.out, args.scheme, chunk_size=args.chunk, digest=args.digest)
    print(f"encoded {len(data)} bytes with {code.label} into {code.n} shards in {args.out}")
    return 0 if manifest else 1


def cmd_decode(args) -> int:
    from .shards import decode_dir

    data, erased = decode_dir(args.shards, force=args.force)
    Path(args.out).write_bytes(data)
    print(f"decoded {len(data)} bytes; erased channels: {','.join(map(str, erased)) or 'none'}")
    return 0


def cmd_verify(args) -> int:
    if args.report:
        import jsonschema

        schema = json.loads(resources.files("sneed").joinpath("schemas/report.schema.json").read_text())
        try:
            jsonschema.validate(json.loads(Path(args.report).read_text()), schema)
        except (jsonschema.ValidationError, json.JSONDecodeError) as exc:
            raise CliError("schema", f"report does not validate: {str(exc).splitlines()[0]}") from None
        print(f"{args.report}: valid report (schema v{SCHEMA_VERSION})")
        return 0
    if not args.shards:
        raise CliError("usage", "verify needs a shard directory or --report FILE")
    from .code_core import ErasurePattern
    from .field_math import rank
    from .shards import check_shards, code_from_manifest, read_manifest

    manifest = read_manifest(args.shards)
    code = code_from_manifest(manifest)
    checks = check_shards(args.shards, manifest)
    for c in checks:
        print(f"{c.index}\t{c.status}")
    erased = ErasurePattern(frozenset(c.index - 1 for c in checks if c.status != "ok"))
    survivors = [j for j in range(code.n) if j not in erased.positions]
    solvable = bool(survivors) and rank(code.generator.select_columns(survivors)) == code.k
    within = code.d is None or len(erased) <= code.d - 1
    print(f"erased {len(erased)}; tolerance {code.tolerance}; recoverable {'yes' if solvable else 'no'}")
    if not solvable:
        raise CliError("unrecoverable-pattern", "surviving shards do not determine the file")
    if not within:
        raise CliError("unrecoverable-pattern", "erasures exceed guaranteed tolerance")
    return 0


# --- simulate --------------------------------------------------------------------


def _parse_seeds(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise CliError("usage", f"bad seed list {text!r}") from None


def cmd_simulate(args) -> int:
    seeds = _parse_seeds(args.seeds) if args.seeds else [args.seed]
    base = dict(
        scheme=args.scheme,
        n=args.n,
        t=args.t if args.t is not None else (1 if args.scheme == "rotation" else 0),
        adversary=args.adversary,
        cycles=args.cycles,
        field_m=args.field_m,
        message_len=args.message_len,
        message_file=args.message_file,
        generator_file=args.generator,
        generator_d=args.d,
        placement=args.placement,
        digest=args.digest,
        strict=not args.no_strict,
    )
    configs = [SimConfig(seed=s, **base) for s in seeds]
    for c in configs:
        c.validate()
    reports = run_campaign(configs, jobs=args.jobs)
    for r in reports:
        print(r.summary() + f" seed={r.seed}")
    if args.json:
        if len(reports) == 1:
            text = reports[0].to_json()
        else:
            text = json.dumps({"schema_version": SCHEMA_VERSION, "runs": [r.to_dict() for r in reports]}, indent=2) + "\n"
        if args.json == "-":
            sys.stdout.write(text)
        else:
            Path(args.json).write_text(text)
    if args.figure:
        from .plotting import plot_report

        for r in reports:
            path = Path(args.figure)
            if len(reports) > 1:
                path = path.with_name(f"{path.stem}_seed{r.seed}{path.suffix}")
            plot_report(r, path)
    return 0


# --- parser ----------------------------------------------------------------------


def _add_code_flags(p, with_t=True):
    p.add_argument("--scheme", choices=["binary", "vandermonde", "generator"], default="binary")
    p.add_argument("--n", type=int, default=7, help="number of channels")
    if with_t:
        p.add_argument("--t", type=int, default=None, help="attacked channels to tolerate (vandermonde)")
    p.add_argument("--field-m", type=int, default=8, help="extension degree m of GF(2^m)")
    p.add_argument("--generator", help="generator matrix file")
    p.add_argument("--d", type=int, default=None, help="minimum distance of a --generator code")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sneed", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="list the binary code catalog")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--delimiter", default="\t")
    p.add_argument("--figure", help="also write a capacity plot to this file")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("encode", help="split a file into coded shards")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="output shard directory")
    _add_code_flags(p)
    p.add_argument("--chunk", type=int, default=4096, help="payload bytes per packet")
    p.add_argument("--digest", default="sha256")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="rebuild a file from its shards")
    p.add_argument("shards")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true", help="attempt decoding beyond the guaranteed tolerance")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("verify", help="check a shard directory or validate a JSON report")
    p.add_argument("shards", nargs="?")
    p.add_argument("--report", help="JSON report to validate against the schema")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="run an attack simulation")
    p.add_argument("--scheme", choices=["rotation", "binary", "vandermonde", "generator"], default="rotation")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--adversary", choices=ADVERSARIES, default="modify")
    p.add_argument("--cycles", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", help="comma-separated seeds for a multi-run campaign")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--field-m", type=int, default=8)
    p.add_argument("--message-len", type=int, default=16)
    p.add_argument("--message-file")
    p.add_argument("--generator")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--placement", choices=PLACEMENTS, default="random")
    p.add_argument("--digest", default="sha256")
    p.add_argument("--no-strict", action="store_true", help="allow runs outside the guaranteed envelope")
    p.add_argument("--json", help="write the JSON report here ('-' for stdout)")
    p.add_argument("--figure", help="write a per-cycle figure here")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("SNEED_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except errors.SneedError as exc:
        return _fail(exc.code, str(exc))
    except OSError as exc:
        return _fail("io", str(exc))
    except ValueError as exc:
        return _fail("config", str(exc))


if __name__ == "__main__":
    sys.exit(main())
