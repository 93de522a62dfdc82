"""Command-line front end.

Output is machine-readable by default: a single value per line, JSON for
structured objects, CSV for tables.  ``--pretty`` switches to indented or
labelled output.  Usage errors exit with 2, operational errors with 1.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import bench, transfer
from .magnet import (
    Btih,
    Kzhash,
    MagnetLink,
    Ndn,
    NdnSec,
    Sha1,
    TigerTree,
    UnknownXt,
    parse_magnet,
    parse_xt,
    serialize_magnet,
    serialize_xt,
)
from .ndn import dump_ndn_access, extract_ndn_from_magnet, ndn_to_magnet, parse_ndn_access
from .service import TOKEN_ENV, ServiceConfig, serve
from .store import HandleError, HandleStore, HandleValue, split_pid
from .torrent import compute_infohash, torrent_to_magnet

STORE_ENV = "PIDMAGNET_STORE"
DEFAULT_STORE = "pidmagnet.journal"

_XT_KIND = {Btih: "btih", Sha1: "sha1", TigerTree: "tiger", Kzhash: "kzhash",
            Ndn: "ndn", NdnSec: "ndnsec", UnknownXt: "unknown"}


class CliError(Exception):
    pass


def _read_input(path: str, binary: bool = False):
    if path == "-":
        return sys.stdin.buffer.read() if binary else sys.stdin.read()
    p = Path(path)
    return p.read_bytes() if binary else p.read_text(encoding="utf-8")


def _emit(obj, pretty: bool) -> None:
    print(json.dumps(obj, indent=2 if pretty else None, ensure_ascii=False))


def link_to_json(link: MagnetLink) -> dict:
    return {
        "xt": [{"kind": _XT_KIND[type(xt)], "urn": serialize_xt(xt)} for xt in link.xts],
        "dn": link.display_name,
        "xl": link.exact_length,
        "tr": list(link.trackers),
        "as": list(link.acceptable_sources),
        "kt": list(link.keywords),
        "unknown": [list(p) for p in link.unknown_params],
    }


def link_from_json(obj: dict) -> MagnetLink:
    return MagnetLink(
        xts=tuple(parse_xt(x["urn"] if isinstance(x, dict) else x) for x in obj["xt"]),
        display_name=obj.get("dn"),
        exact_length=obj.get("xl"),
        trackers=tuple(obj.get("tr", ())),
        acceptable_sources=tuple(obj.get("as", ())),
        keywords=tuple(obj.get("kt", ())),
        unknown_params=tuple(tuple(p) for p in obj.get("unknown", ())),
    )


# -- magnet --------------------------------------------------------------------


def cmd_magnet_parse(args) -> None:
    _emit(link_to_json(parse_magnet(args.text)), args.pretty)


def cmd_magnet_make(args) -> None:
    if args.from_json:
        link = link_from_json(json.loads(_read_input(args.from_json)))
    else:
        if not args.xt:
            raise CliError("give at least one --xt or --from-json")
        link = MagnetLink(
            xts=tuple(parse_xt(x) for x in args.xt),
            display_name=args.dn,
            exact_length=args.xl,
            trackers=tuple(args.tr),
            acceptable_sources=tuple(args.as_),
            keywords=tuple(args.kt),
        )
    print(serialize_magnet(link))


# -- torrent -------------------------------------------------------------------


def cmd_torrent_infohash(args) -> None:
    print(compute_infohash(_read_input(args.file, binary=True)).hex())


def cmd_torrent_to_magnet(args) -> None:
    link = torrent_to_magnet(_read_input(args.file, binary=True), include_trackers=args.trackers)
    print(serialize_magnet(link))


# -- ndn -----------------------------------------------------------------------


def cmd_ndn_to_magnet(args) -> None:
    print(serialize_magnet(ndn_to_magnet(parse_ndn_access(_read_input(args.file)))))


def cmd_ndn_from_magnet(args) -> None:
    info = extract_ndn_from_magnet(parse_magnet(args.text))
    text = dump_ndn_access(info)
    print(json.dumps(json.loads(text), indent=2) if args.pretty else text)


# -- pid -----------------------------------------------------------------------


def _store(args) -> HandleStore:
    return HandleStore(args.store or os.environ.get(STORE_ENV) or DEFAULT_STORE)


def _values(args) -> list[HandleValue]:
    values = []
    specs = [("URL", u) for u in args.url or ()] + [("MAGNET", m) for m in args.magnet or ()]
    for item in args.value or ():
        type_name, sep, data = item.partition("=")
        if not sep:
            raise CliError(f"--value expects TYPE=DATA, got {item!r}")
        specs.append((type_name, data))
    for n, (type_name, data) in enumerate(specs, start=args.start_index):
        values.append(HandleValue(n, type_name, data))
    if not values:
        raise CliError("no values given")
    return values


def cmd_pid_register(args) -> None:
    with _store(args) as store:
        store.register_prefix(args.prefix)
    print(args.prefix)


def cmd_pid_create(args) -> None:
    with _store(args) as store:
        record = store.create_handle(args.prefix, args.suffix, _values(args))
    print(record.pid)


def cmd_pid_update(args) -> None:
    with _store(args) as store:
        record = store.update_handle(args.pid, _values(args))
    _emit(record.to_json(), args.pretty)


def cmd_pid_get(args) -> None:
    with _store(args) as store:
        _emit(store.get_handle(args.pid).to_json(), args.pretty)


def cmd_pid_resolve(args) -> None:
    split_pid(args.pid)
    with _store(args) as store:
        if args.type:
            result = store.resolve_typed(args.pid, args.type.upper())
        else:
            result = store.resolve_default(args.pid)
    print(f"{result.kind.value}\t{result.target}" if args.pretty else result.target)


# -- serve ---------------------------------------------------------------------


def cmd_serve(args) -> None:
    config = ServiceConfig.from_env(
        host=args.host,
        port=args.port,
        prefixes=tuple(args.prefix) if args.prefix else None,
        token=args.token,
        store_path=args.store,
    )
    serve(config)


# -- estimate ------------------------------------------------------------------


def _chunk(text: str) -> tuple[float, float]:
    volume, sep, bandwidth = text.partition(":")
    try:
        if not sep:
            raise ValueError
        return float(volume), float(bandwidth)
    except ValueError:
        raise argparse.ArgumentTypeError(f"chunk must be VOLUME:BANDWIDTH, got {text!r}") from None


def cmd_estimate(args) -> None:
    plan = transfer.ChunkPlan(tuple(args.chunk))
    if args.mode == "parallel":
        value = transfer.estimate_parallel(args.tr, args.tb, plan).duration
    elif args.mode == "serial":
        value = transfer.estimate_serial(args.tr, plan).duration
    else:
        value = transfer.compare(args.tr, args.tb, plan)
    print(f"{args.mode}: {value!r} s" if args.pretty else repr(value))


# -- stats / bench ---------------------------------------------------------------


def cmd_stats_lengths(args) -> None:
    if args.file == "-":
        stats = bench.length_stats(bench.read_lines(sys.stdin))
    else:
        with open(args.file, encoding="utf-8") as fh:
            stats = bench.length_stats(bench.read_lines(fh))
    if args.pretty:
        for name, value in vars(stats).items():
            print(f"{name:>7}  {value}")
    else:
        sys.stdout.write(bench.stats_csv(stats))


def _sizes(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s]
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers: {text!r}") from None


def cmd_bench_latency(args) -> None:
    if args.endpoint:
        target = args.endpoint
    elif args.store:
        target = HandleStore(args.store, fsync=False)
    else:
        target = HandleStore()
    points = bench.latency_benchmark(
        target, args.sizes, args.trials,
        token=args.token or os.environ.get(TOKEN_ENV), prefix=args.prefix,
    )
    out = bench.latency_csv(points)
    if args.out:
        Path(args.out).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pidmagnet", description=__doc__.splitlines()[0])
    parser.add_argument("--pretty", action="store_true", help="human-oriented output")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def group(name, help):
        p = sub.add_parser(name, help=help)
        return p.add_subparsers(dest="action", required=True)

    magnet = group("magnet", "parse and build magnet links")
    p = magnet.add_parser("parse", help="print a magnet link as JSON")
    p.add_argument("text")
    p.set_defaults(func=cmd_magnet_parse)
    p = magnet.add_parser("make", help="build a magnet link")
    p.add_argument("--xt", action="append", default=[], help="exact topic URN (repeatable)")
    p.add_argument("--dn")
    p.add_argument("--xl", type=int)
    p.add_argument("--tr", action="append", default=[])
    p.add_argument("--as", dest="as_", action="append", default=[])
    p.add_argument("--kt", action="append", default=[])
    p.add_argument("--from-json", metavar="FILE", help="JSON as printed by 'magnet parse' ('-' for stdin)")
    p.set_defaults(func=cmd_magnet_make)

    torrent = group("torrent", "torrent metainfo files")
    p = torrent.add_parser("infohash", help="print the infohash as hex")
    p.add_argument("file")
    p.set_defaults(func=cmd_torrent_infohash)
    p = torrent.add_parser("to-magnet", help="convert a torrent to a magnet link")
    p.add_argument("file")
    p.add_argument("--trackers", action="store_true", help="keep tracker URLs")
    p.set_defaults(func=cmd_torrent_to_magnet)

    ndn = group("ndn", "NDN access information")
    p = ndn.add_parser("to-magnet", help="NDN access JSON to magnet link")
    p.add_argument("file", help="container file, '-' for stdin")
    p.set_defaults(func=cmd_ndn_to_magnet)
    p = ndn.add_parser("from-magnet", help="magnet link to NDN access JSON")
    p.add_argument("text")
    p.set_defaults(func=cmd_ndn_from_magnet)

    pid = group("pid", "manage PIDs in a local store")

    def pid_parser(name, help, func):
        p = pid.add_parser(name, help=help)
        p.add_argument("--store", help=f"journal path (default ${STORE_ENV} or {DEFAULT_STORE})")
        p.set_defaults(func=func)
        return p

    def value_args(p):
        p.add_argument("--url", action="append")
        p.add_argument("--magnet", action="append")
        p.add_argument("--value", action="append", metavar="TYPE=DATA")
        p.add_argument("--start-index", type=int, default=1, help="index of the first value")

    p = pid_parser("register", "serve a prefix from this store", cmd_pid_register)
    p.add_argument("prefix")
    p = pid_parser("create", "create a PID", cmd_pid_create)
    p.add_argument("prefix")
    p.add_argument("--suffix", help="omit to mint a random one")
    value_args(p)
    p = pid_parser("update", "replace or add values", cmd_pid_update)
    p.add_argument("pid")
    value_args(p)
    p = pid_parser("get", "print a record as JSON", cmd_pid_get)
    p.add_argument("pid")
    p = pid_parser("resolve", "print the resolution target", cmd_pid_resolve)
    p.add_argument("pid")
    p.add_argument("--type", choices=["URL", "MAGNET", "url", "magnet"])

    p = sub.add_parser("serve", help="run the HTTP resolver")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--prefix", action="append", help="prefix to serve (repeatable)")
    p.add_argument("--token", help=f"bearer token for mutations (default ${TOKEN_ENV})")
    p.add_argument("--store", help="journal path; in-memory when omitted")
    p.set_defaults(func=cmd_serve)

    estimate = group("estimate", "transfer duration model")
    for mode in ("parallel", "serial", "compare"):
        p = estimate.add_parser(mode)
        p.add_argument("--tr", type=float, default=0.0, help="resolution time [s]")
        if mode != "serial":
            p.add_argument("--tb", type=float, default=0.0, help="bootstrap time [s]")
        p.add_argument("--chunk", type=_chunk, action="append", required=True,
                       metavar="VOLUME:BANDWIDTH", help="bytes and bytes/s (repeatable)")
        p.set_defaults(func=cmd_estimate, mode=mode)

    stats = group("stats", "string statistics")
    p = stats.add_parser("lengths", help="box statistics of line lengths")
    p.add_argument("file", help="newline-delimited strings, '-' for stdin")
    p.set_defaults(func=cmd_stats_lengths)

    benchg = group("bench", "benchmarks")
    p = benchg.add_parser("latency", help="resolution time against value size")
    p.add_argument("--sizes", type=_sizes, default=[2**k for k in range(5, 16)])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--endpoint", help="resolver base URL; in-process store when omitted")
    p.add_argument("--store", help="journal for the in-process store")
    p.add_argument("--token")
    p.add_argument("--prefix", default=bench.BENCH_PREFIX)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_bench_latency)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except (CliError, ValueError, HandleError, OSError, RuntimeError) as exc:
        print(f"pidmagnet: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
