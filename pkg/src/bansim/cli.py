"""Command-line front end: run scenarios, sweep efficiency curves, build and
parse frames, print the rate table.

Every subcommand is a thin wrapper over a library call; nothing is computed
here that the library does not already expose. All numeric output uses fixed
decimal formatting with a '.' separator so equal inputs give byte-equal
output on any machine.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import sys
from pathlib import Path

import numpy as np

from bansim.efficiency import sweep, sweep_configs, write_efficiency_csv
from bansim.errors import BansimError, ConfigError
from bansim.phy.bitfields import bits_to_bytes, bytes_to_bits
from bansim.phy.ppdu import MAC_HEADER_LEN, build_ppdu, frame_airtime_us, hexdump, parse_ppdu
from bansim.phy.rates import (
    Band,
    hbc_config,
    load_rate_table,
    nb_config,
    uwb_config,
    write_rate_csv,
)
from bansim.sim.kernel import run_to_files
from bansim.sim.scenario import load_scenario


# ------------------------------------------------------------------ helpers


def _phy_config(args):
    """PhyConfig from the shared --phy/--band/--rate/--channel/--center flags."""
    if args.phy == "nb":
        return nb_config(Band(args.band), args.rate)
    if args.phy == "uwb":
        return uwb_config(args.channel)
    return hbc_config(args.center)


def _add_phy_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--phy", choices=["nb", "uwb", "hbc"], default="nb")
    parser.add_argument(
        "--band",
        default="2400-2483.5",
        help="narrowband band name, e.g. 402-405 (MHz)",
    )
    parser.add_argument("--rate", choices=["low", "high"], default="high",
                        help="narrowband payload rate tier")
    parser.add_argument("--channel", type=int, default=2, help="ultra-wideband channel number")
    parser.add_argument("--center", type=int, default=16, help="body-coupled center frequency, MHz")


def _out_handle(path):
    """Writable handle for --out, standard output when the flag is absent."""
    if path is None:
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _parse_payloads(spec: str) -> list[int]:
    """Payload list from '10,50,100' / '1:255' / '1:255:5' (inclusive ends)."""
    out: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            pieces = part.split(":")
            if len(pieces) not in (2, 3):
                raise ConfigError(f"bad payload range {part!r}")
            start, stop = int(pieces[0]), int(pieces[1])
            step = int(pieces[2]) if len(pieces) == 3 else 1
            if step <= 0 or stop < start:
                raise ConfigError(f"bad payload range {part!r}")
            out.extend(range(start, stop + 1, step))
        else:
            out.append(int(part))
    if not out:
        raise ConfigError(f"no payload sizes in {spec!r}")
    return out


def _seeded_path(path, seed: int, multi: bool):
    """Per-seed output name: stats.csv -> stats.s7.csv when sweeping seeds."""
    if path is None or not multi:
        return path
    p = Path(path)
    return str(p.with_name(f"{p.stem}.s{seed}{p.suffix}"))


# ------------------------------------------------------------------ simulate


def _run_one(task):
    scenario, stats_path, trace_path = task
    stats = run_to_files(scenario, stats_path, trace_path)
    return stats


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    seeds = args.seed if args.seed is not None else [scenario.run.seed]
    multi = len(seeds) > 1
    tasks = []
    for seed in seeds:
        sc = dataclasses.replace(scenario, run=dataclasses.replace(scenario.run, seed=seed))
        stats_path = _seeded_path(args.out or sc.run.stats_out, seed, multi)
        trace_path = _seeded_path(args.trace or sc.run.trace_out, seed, multi)
        tasks.append((sc, stats_path, trace_path))

    if args.sweep_parallel and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.sweep_parallel) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(task) for task in tasks]

    for (sc, stats_path, trace_path), stats in zip(tasks, results):
        if stats_path is None:
            # No file target anywhere: the stats CSV is the standard output.
            from bansim.sim.stats import write_stats_csv

            write_stats_csv(stats, sys.stdout)
            continue
        line = (
            f"seed={sc.run.seed} elapsed_us={stats.elapsed_us} offered={stats.offered}"
            f" delivered={stats.delivered} failed={stats.failed}"
            f" collided={stats.collided} efficiency={stats.efficiency:.6f}"
            f" stats={stats_path}"
        )
        if trace_path:
            line += f" trace={trace_path}"
        print(line)
    return 0


# ---------------------------------------------------------------- efficiency


def cmd_efficiency(args) -> int:
    configs = sweep_configs()
    if args.band:
        configs = [(label, cfg) for label, cfg in configs if label.startswith(args.band)]
        if not configs:
            raise ConfigError(f"no rate-table configuration matches band {args.band!r}")
    payloads = _parse_payloads(args.payloads)
    points = sweep(configs, payloads)
    fh, own = _out_handle(args.out)
    try:
        if args.format == "csv":
            write_efficiency_csv(points, fh)
        else:
            print(f"{'configuration':<26} {'kbps':>7} {'payload':>7} {'efficiency':>10}", file=fh)
            for pt in points:
                print(
                    f"{pt.band:<26} {pt.rate_kbps:>7.1f} {pt.payload_bytes:>7d}"
                    f" {pt.efficiency:>10.4f}",
                    file=fh,
                )
    finally:
        if own:
            fh.close()
    return 0


# --------------------------------------------------------------------- frame


def _print_frame_fields(ppdu, cfg, fh) -> None:
    print(f"phy={cfg.kind.value}", file=fh)
    for f in dataclasses.fields(ppdu.header):
        print(f"{f.name}={getattr(ppdu.header, f.name)}", file=fh)
    print(f"mac_header={ppdu.mac_header.hex()}", file=fh)
    print(f"body={ppdu.body.hex()}", file=fh)
    print(f"fcs=0x{ppdu.fcs:04X}", file=fh)
    print(f"airtime_us={frame_airtime_us(cfg, len(ppdu.body)):.3f}", file=fh)


def cmd_frame_build(args) -> int:
    cfg = _phy_config(args)
    mac_header = bytes.fromhex(args.mac_header)
    if len(mac_header) != MAC_HEADER_LEN:
        raise ConfigError(f"--mac-header must be {MAC_HEADER_LEN} bytes of hex")
    if args.body is not None:
        body = bytes.fromhex(args.body)
    else:
        body = bytes(i % 256 for i in range(args.body_len))
    ppdu = build_ppdu(cfg, mac_header, body)
    fh, own = _out_handle(args.out)
    try:
        print(hexdump(ppdu, cfg), file=fh)
        _print_frame_fields(ppdu, cfg, fh)
        image = bits_to_bytes(
            np.concatenate(
                [ppdu.bits, np.zeros((-len(ppdu.bits)) % 8, dtype=np.uint8)]
            )
        )
        print(f"image={image.hex()} bits={len(ppdu.bits)}", file=fh)
    finally:
        if own:
            fh.close()
    return 0


def cmd_frame_parse(args) -> int:
    cfg = _phy_config(args)
    image = bytes.fromhex(args.image)
    bits = bytes_to_bits(image)
    if args.bits is not None:
        if args.bits > len(bits):
            raise ConfigError(f"--bits {args.bits} exceeds the {len(bits)} bits supplied")
        bits = bits[: args.bits]
    ppdu = parse_ppdu(bits, cfg)
    fh, own = _out_handle(args.out)
    try:
        _print_frame_fields(ppdu, cfg, fh)
    finally:
        if own:
            fh.close()
    return 0


# --------------------------------------------------------------------- rates


def cmd_rates(args) -> int:
    rows = load_rate_table()
    fh, own = _out_handle(args.out)
    try:
        if args.format == "csv":
            write_rate_csv(rows, fh)
        else:
            print(
                f"{'band':<14} {'part':<7} {'modulation':<11} {'sym ksps':>8}"
                f" {'fec':>6} {'spread':>6} {'kbps':>7}",
                file=fh,
            )
            for row in rows:
                n, k = row.fec
                print(
                    f"{row.band.value:<14} {row.component:<7} {row.modulation.value:<11}"
                    f" {row.config.symbol_rate:>8g} {f'{n}/{k}':>6} {row.spreading:>6d}"
                    f" {row.rate_kbps:>7.1f}",
                    file=fh,
                )
    finally:
        if own:
            fh.close()
    return 0


# -------------------------------------------------------------------- parser


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bansim",
        description="Body area network MAC/PHY simulator and frame toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario file")
    p_sim.add_argument("scenario", help="scenario file path")
    p_sim.add_argument(
        "--seed", type=int, nargs="+", default=None,
        help="override the scenario seed; several values run independent sweeps",
    )
    p_sim.add_argument("--out", default=None, help="stats CSV path")
    p_sim.add_argument("--trace", default=None, help="event trace path")
    p_sim.add_argument(
        "--sweep-parallel", type=int, default=0, metavar="N",
        help="run a multi-seed sweep in N worker processes",
    )
    p_sim.set_defaults(func=cmd_simulate)

    p_eff = sub.add_parser("efficiency", help="analytic efficiency sweep")
    p_eff.add_argument("--payloads", default="1:255",
                       help="payload bytes: list and a:b[:step] ranges, e.g. 10,50,100:255:5")
    p_eff.add_argument("--band", default=None, help="restrict to one band (prefix match)")
    p_eff.add_argument("--format", choices=["csv", "table"], default="csv")
    p_eff.add_argument("--out", default=None)
    p_eff.set_defaults(func=cmd_efficiency)

    p_frame = sub.add_parser("frame", help="build or parse a frame bit image")
    frame_sub = p_frame.add_subparsers(dest="frame_command", required=True)

    p_build = frame_sub.add_parser("build", help="assemble a frame and dump it")
    _add_phy_flags(p_build)
    p_build.add_argument("--mac-header", default="00" * MAC_HEADER_LEN,
                         help=f"{MAC_HEADER_LEN} bytes of hex")
    body_group = p_build.add_mutually_exclusive_group()
    body_group.add_argument("--body", default=None, help="frame body as hex")
    body_group.add_argument("--body-len", type=int, default=0,
                            help="generate a counting-pattern body of this many bytes")
    p_build.add_argument("--out", default=None)
    p_build.set_defaults(func=cmd_frame_build)

    p_parse = frame_sub.add_parser("parse", help="decode a frame bit image")
    _add_phy_flags(p_parse)
    p_parse.add_argument("image", help="frame bit image as hex (from `frame build`)")
    p_parse.add_argument("--bits", type=int, default=None,
                         help="exact bit count of the image (strips hex padding)")
    p_parse.add_argument("--out", default=None)
    p_parse.set_defaults(func=cmd_frame_parse)

    p_rates = sub.add_parser("rates", help="print the information data rate table")
    p_rates.add_argument("--format", choices=["csv", "table"], default="table")
    p_rates.add_argument("--out", default=None)
    p_rates.set_defaults(func=cmd_rates)

    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except BansimError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
