"""Command-line surface: budget, reconstruct, recommend, simulate, sweep, uplink.

Every run resolves all of its parameters up front into a manifest that is
echoed as '#' comment lines at the top of each output, so results are
reproducible from the output alone.

Exit codes: 0 success; 2 usage error; 3 data/validation error; 4 tolerance
exceeded.
"""

from __future__ import annotations

import argparse
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .core_types import (
    BW_HZ_VALUES,
    SF_VALUES,
    CodingRate,
    LinkParams,
    RadioConfig,
    SignalSample,
    format_decimal,
    hz_to_khz_str,
    khz_str_to_hz,
)
from .dataset import (
    CAMPAIGN_FREQ_HZ,
    CAMPAIGN_TX_POWER_DBM,
    load_bundled_measurements,
    load_expected_grid,
    load_measurements,
    lookup,
    reconstruct_excess_loss,
)
from .link_budget import loss_breakdown
from .phy_model import FrameParams
from .recommender import SelectionConstraints, recommend_sf_bw, select_cr
from .tdma_sim import (
    NodeSpec,
    build_schedule,
    default_slot_duration,
    drop_model_from_table,
    format_sync_word,
    parse_sync_word,
    run_simulation,
    parse_report,
    serialize_report,
)
from .uplink_bridge import DryRunTransport, HttpTransport, bridge_sim_report, iso_utc

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_TOLERANCE = 4

BUNDLED_FIXTURE = "bundled:field_measurements.csv"
BUNDLED_EXPECTED = "bundled:excess_loss_expected.csv"

SWEEP_METRICS = ("rssi", "snr", "loss", "esp", "path_loss", "fsl", "excess")


class UsageError(ValueError):
    """Argument combination error detected after argparse."""


def _loss_pct_arg(text: str) -> float:
    value = float(text)
    if not 0 <= value <= 100:
        raise argparse.ArgumentTypeError(f"loss percentage {value} outside [0, 100]")
    return value


def _khz_arg(text: str) -> float:
    try:
        return khz_str_to_hz(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _cr_arg(text: str) -> CodingRate:
    try:
        return CodingRate.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _seed_arg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be a non-negative integer")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive value, got {text}")
    return value


def _iso8601_arg(text: str) -> datetime:
    try:
        moment = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed ISO-8601 timestamp {text!r}") from None
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return moment


def _manifest_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_decimal(value)
    return str(value)


@dataclass(frozen=True)
class RunManifest:
    """Fully resolved run parameters, echoed at the top of every output."""

    subcommand: str
    params: dict

    def lines(self) -> list[str]:
        pairs = " ".join(
            f"{key}={_manifest_value(value)}" for key, value in self.params.items()
        )
        return [f"# manifest {self.subcommand} {pairs}"]


def _manifest_lines(subcommand: str, params: dict) -> list[str]:
    return RunManifest(subcommand, params).lines()


@contextmanager
def _open_output(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as handle:
            yield handle


def _load_fixture(path: str | None):
    """Returns (table, display name) for --fixture (None = bundled)."""
    if path is None:
        return load_bundled_measurements(), BUNDLED_FIXTURE
    return load_measurements(path), path


def _parse_cell(text: str) -> tuple[int, float]:
    pairs = {}
    for item in text.split(","):
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"malformed --cell item {item!r}; expected sf=<int>,bw_khz=<decimal>")
        pairs[key.strip()] = value.strip()
    if set(pairs) != {"sf", "bw_khz"}:
        raise UsageError("--cell must supply exactly sf=<int>,bw_khz=<decimal>")
    return int(pairs["sf"]), khz_str_to_hz(pairs["bw_khz"])


def _link_params(args) -> LinkParams:
    return LinkParams(distance_m=args.d, gt_dbi=args.gt, gr_dbi=args.gr, c_mps=args.c)


def _add_globals(parser: argparse.ArgumentParser, *, tolerance_default: float = 0.05) -> None:
    parser.add_argument("--fixture", metavar="PATH", default=None,
                        help="measurement CSV (default: the bundled field measurements)")
    parser.add_argument("--seed", type=_seed_arg, default=0, help="run seed (default 0)")
    parser.add_argument("--output", metavar="PATH", default=None,
                        help="output file (default: stdout)")
    parser.add_argument("--tolerance", type=_positive_float, default=tolerance_default,
                        metavar="DB", help=f"comparison tolerance in dB (default {tolerance_default})")


def _add_link_constant_flags(parser: argparse.ArgumentParser, *, required: bool = False) -> None:
    defaults = {
        "pt": None if required else CAMPAIGN_TX_POWER_DBM,
        "gt": None if required else 5.15,
        "gr": None if required else 5.15,
        "d": None if required else 5000.0,
        "f": None if required else float(CAMPAIGN_FREQ_HZ),
    }
    parser.add_argument("--pt", type=float, required=required, default=defaults["pt"],
                        help="transmit power in dBm")
    parser.add_argument("--gt", type=float, required=required, default=defaults["gt"],
                        help="transmitter antenna gain in dBi")
    parser.add_argument("--gr", type=float, required=required, default=defaults["gr"],
                        help="receiver antenna gain in dBi")
    parser.add_argument("--d", type=_positive_float, required=required, default=defaults["d"],
                        help="link distance in meters")
    parser.add_argument("--f", type=_positive_float, required=required, default=defaults["f"],
                        help="carrier frequency in Hz")
    parser.add_argument("--c", type=_positive_float, default=3.0e8,
                        help="propagation speed in m/s (default 3e8)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loralink",
        description="LoRa link-quality toolkit",
        epilog="Exit codes: 0 success, 2 usage error, 3 data/validation error, "
               "4 tolerance exceeded.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_budget = sub.add_parser("budget", help="link-budget breakdown for one sample")
    p_budget.add_argument("--rssi", type=float, default=None, help="measured RSSI in dBm")
    p_budget.add_argument("--snr", type=float, default=None, help="measured SNR in dB")
    p_budget.add_argument("--cell", default=None, metavar="SPEC",
                          help="fixture cell reference, e.g. sf=7,bw_khz=10.4")
    _add_link_constant_flags(p_budget, required=True)
    _add_globals(p_budget)
    p_budget.set_defaults(func=cmd_budget)

    p_recon = sub.add_parser("reconstruct",
                             help="rebuild the excess-loss grid and compare to the expected grid")
    p_recon.add_argument("--expected", metavar="PATH", default=None,
                         help="expected grid CSV (default: bundled)")
    _add_link_constant_flags(p_recon)
    _add_globals(p_recon)
    p_recon.set_defaults(func=cmd_reconstruct)

    p_rec = sub.add_parser("recommend", help="select (SF, BW, CR) from a measurement table")
    p_rec.add_argument("--max-loss", type=_loss_pct_arg, default=0.0,
                       help="hard packet-loss ceiling in percent (default 0)")
    p_rec.add_argument("--min-bw-khz", type=_khz_arg, default=62500.0, dest="min_bw_hz",
                       metavar="KHZ", help="minimum admissible bandwidth (default 62.5)")
    p_rec.add_argument("--order", default=",".join(SelectionConstraints().tie_break_order),
                       help="comma-separated ranking metrics (snr, excess_loss, rssi)")
    p_rec.add_argument("--top", type=int, default=5, help="runner-up rows to print (default 5)")
    _add_link_constant_flags(p_rec)
    _add_globals(p_rec)
    p_rec.set_defaults(func=cmd_recommend)

    p_sim = sub.add_parser("simulate", help="run the deterministic TDMA uplink simulation")
    p_sim.add_argument("--nodes", type=int, default=2, help="number of sensor nodes (default 2)")
    p_sim.add_argument("--sf", type=int, default=8, help="spreading factor for all nodes (default 8)")
    p_sim.add_argument("--bw-khz", type=_khz_arg, default=62500.0, dest="bw_hz",
                       metavar="KHZ", help="bandwidth for all nodes (default 62.5)")
    p_sim.add_argument("--cr", type=_cr_arg, default=CodingRate(4, 8),
                       help="coding rate for all nodes (default 4/8)")
    p_sim.add_argument("--payload-bytes", type=int, default=2, help="frame payload size (default 2)")
    p_sim.add_argument("--preamble", type=int, default=8, help="preamble symbols (default 8)")
    p_sim.add_argument("--pt", type=float, default=CAMPAIGN_TX_POWER_DBM,
                       help="transmit power in dBm (default 20)")
    p_sim.add_argument("--f", type=_positive_float, default=float(CAMPAIGN_FREQ_HZ),
                       help="carrier frequency in Hz (default 433e6)")
    p_sim.add_argument("--slot-s", type=_positive_float, default=None,
                       help="slot duration in seconds (default: 2x airtime, ms-rounded)")
    p_sim.add_argument("--guard-s", type=float, default=0.01,
                       help="guard time between slots in seconds (default 0.01)")
    p_sim.add_argument("--duration-s", type=_positive_float, required=True,
                       help="virtual simulation duration in seconds")
    p_sim.add_argument("--frames-per-slot", type=int, default=1,
                       help="frames per transmission opportunity (default 1)")
    p_sim.add_argument("--handshake-s", type=float, default=0.0,
                       help="fixed connection-establishment latency per slot (default 0)")
    p_sim.add_argument("--drop", default=None, metavar="P[,P...]",
                       help="per-node drop probabilities (single value broadcasts)")
    p_sim.add_argument("--drop-from-fixture", default=None, metavar="PATH",
                       help="derive drop probabilities from a measurement CSV "
                            "('bundled' for the packaged fixture)")
    p_sim.add_argument("--uplink-log", default=None, metavar="PATH",
                       help="also write a dry-run uplink log for received packets")
    _add_globals(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="emit a metric for every (SF, BW) grid cell as CSV")
    p_sweep.add_argument("--metric", required=True, choices=SWEEP_METRICS)
    _add_link_constant_flags(p_sweep)
    _add_globals(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_up = sub.add_parser("uplink", help="bridge a simulation report to channel updates")
    p_up.add_argument("--report", required=True, metavar="PATH",
                      help="serialized simulation report")
    p_up.add_argument("--map", action="append", default=None, metavar="SYNC=KEY:FIELD",
                      help="map a sync word to an api key and field index (repeatable)")
    p_up.add_argument("--epoch", type=_iso8601_arg, default=_iso8601_arg("1970-01-01T00:00:00Z"),
                      help="wall-clock instant of virtual time zero (default Unix epoch)")
    p_up.add_argument("--real", action="store_true",
                      help="actually send over HTTP (requires UPLINK_API_KEY)")
    p_up.add_argument("--min-spacing-s", type=float, default=None,
                      help="minimum spacing between sends (default 0 dry-run, 15 real)")
    _add_globals(p_up)
    p_up.set_defaults(func=cmd_uplink)

    return parser


def cmd_budget(args) -> int:
    use_cell = args.cell is not None
    use_sample = args.rssi is not None or args.snr is not None
    if use_cell == use_sample:
        raise UsageError("supply either --rssi and --snr, or --cell (not both)")
    if use_sample and (args.rssi is None or args.snr is None):
        missing = "--snr" if args.snr is None else "--rssi"
        raise UsageError(f"missing {missing} (both --rssi and --snr are required)")

    fixture_name = BUNDLED_FIXTURE if args.fixture is None else args.fixture
    # sf/bw don't enter the budget chain (only pt and frequency do); the
    # placeholder below carries them when no fixture cell pins real ones
    sf, bw_hz = 7, 125000
    if use_cell:
        table, fixture_name = _load_fixture(args.fixture)
        sf, bw_hz = _parse_cell(args.cell)
        record = lookup(table, sf, bw_hz)
        if record.rssi_dbm is None:
            raise UsageError(f"cell {args.cell} has no rssi_dbm value")
        rssi, snr = record.rssi_dbm, record.snr_db
    else:
        rssi, snr = args.rssi, args.snr

    params = _link_params(args)
    config = RadioConfig(sf=sf, bw_hz=bw_hz, cr=CodingRate(4, 8),
                         tx_power_dbm=args.pt, freq_hz=args.f)
    breakdown = loss_breakdown(params, config, SignalSample(rssi, snr))

    manifest = _manifest_lines("budget", {
        "rssi_dbm": rssi, "snr_db": snr, "pt_dbm": args.pt, "gt_dbi": args.gt,
        "gr_dbi": args.gr, "distance_m": args.d, "freq_hz": args.f, "c_mps": args.c,
        "cell": args.cell or "-", "fixture": fixture_name if use_cell else "-",
        "seed": args.seed, "output": args.output or "-",
    })
    with _open_output(args.output) as out:
        for line in manifest:
            print(line, file=out)
        print(f"esp_dbm={breakdown.esp_dbm:.3f}", file=out)
        print(f"path_loss_db={breakdown.path_loss_db:.3f}", file=out)
        print(f"fsl_db={breakdown.fsl_db:.3f}", file=out)
        print(f"excess_db={breakdown.excess_db:.3f}", file=out)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    table, fixture_name = _load_fixture(args.fixture)
    expected_name = BUNDLED_EXPECTED if args.expected is None else args.expected
    expected = load_expected_grid(args.expected)
    params = _link_params(args)
    grid = reconstruct_excess_loss(table, params, args.pt, freq_hz=args.f)

    worst = (0.0, None)
    for i, bw_hz in enumerate(BW_HZ_VALUES):
        for j, sf in enumerate(SF_VALUES):
            deviation = abs(grid[i][j] - expected[i][j])
            if deviation > worst[0]:
                worst = (deviation, (sf, bw_hz))
    max_dev, worst_cell = worst
    verdict = "PASS" if max_dev <= args.tolerance else "FAIL"

    manifest = _manifest_lines("reconstruct", {
        "fixture": fixture_name, "expected": expected_name, "pt_dbm": args.pt,
        "gt_dbi": args.gt, "gr_dbi": args.gr, "distance_m": args.d, "freq_hz": args.f,
        "c_mps": args.c, "tolerance_db": args.tolerance, "seed": args.seed,
        "output": args.output or "-",
    })
    with _open_output(args.output) as out:
        for line in manifest:
            print(line, file=out)
        print("bw_khz," + ",".join(f"sf{sf}" for sf in SF_VALUES), file=out)
        for i, bw_hz in enumerate(BW_HZ_VALUES):
            cells = ",".join(f"{value:.3f}" for value in grid[i])
            print(f"{hz_to_khz_str(bw_hz)},{cells}", file=out)
        cell_name = f"sf={worst_cell[0]},bw_khz={hz_to_khz_str(worst_cell[1])}"
        print(f"# max_deviation_db={max_dev:.6f} cell={cell_name} "
              f"tolerance_db={format_decimal(args.tolerance)} verdict={verdict}", file=out)
    return EXIT_OK if verdict == "PASS" else EXIT_TOLERANCE


def cmd_recommend(args) -> int:
    table, fixture_name = _load_fixture(args.fixture)
    order = tuple(metric.strip() for metric in args.order.split(",") if metric.strip())
    constraints = SelectionConstraints(
        max_loss_pct=args.max_loss, min_bw_hz=args.min_bw_hz, tie_break_order=order
    )
    params = _link_params(args)
    rec = recommend_sf_bw(table, params, args.pt, constraints)
    cr, cr_basis = select_cr(table, rec.sf, rec.bw_hz)

    manifest = _manifest_lines("recommend", {
        "fixture": fixture_name, "max_loss_pct": args.max_loss,
        "min_bw_khz": hz_to_khz_str(args.min_bw_hz), "order": ",".join(order),
        "pt_dbm": args.pt, "gt_dbi": args.gt, "gr_dbi": args.gr, "distance_m": args.d,
        "freq_hz": args.f, "c_mps": args.c, "seed": args.seed, "output": args.output or "-",
    })
    with _open_output(args.output) as out:
        for line in manifest:
            print(line, file=out)
        print(f"sf={rec.sf} bw_khz={hz_to_khz_str(rec.bw_hz)} cr={cr}", file=out)
        print(f"rssi_dbm={format_decimal(rec.rssi_dbm)} snr_db={format_decimal(rec.snr_db)} "
              f"loss_pct={format_decimal(rec.loss_pct)} excess_db={rec.excess_db:.3f}", file=out)
        if cr_basis is not None:
            print(f"cr_basis=sweep@sf={cr_basis[0]},bw_khz={hz_to_khz_str(cr_basis[1])}", file=out)
        else:
            print("cr_basis=winner-row", file=out)
        for rank, cell in enumerate(rec.runners_up[: args.top], start=2):
            print(f"rank={rank} sf={cell.sf} bw_khz={hz_to_khz_str(cell.bw_hz)} "
                  f"snr_db={format_decimal(cell.snr_db)} excess_db={cell.excess_db:.3f} "
                  f"rssi_dbm={format_decimal(cell.rssi_dbm)} "
                  f"loss_pct={format_decimal(cell.loss_pct)}", file=out)
    return EXIT_OK


def _simulate_drop_model(args, nodes) -> tuple[dict[int, float], str]:
    if args.drop is not None and args.drop_from_fixture is not None:
        raise UsageError("--drop and --drop-from-fixture are mutually exclusive")
    if args.drop_from_fixture is not None:
        source = None if args.drop_from_fixture == "bundled" else args.drop_from_fixture
        table, name = _load_fixture(source)
        return {n.sync_word: drop_model_from_table(table, n) for n in nodes}, f"fixture:{name}"
    text = args.drop if args.drop is not None else "0"
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError:
        raise UsageError(f"malformed --drop list {text!r}") from None
    if len(values) == 1:
        values = values * len(nodes)
    if len(values) != len(nodes):
        raise UsageError(f"--drop supplies {len(values)} value(s) for {len(nodes)} node(s)")
    if any(not 0 <= v <= 1 for v in values):
        raise UsageError("--drop probabilities must lie in [0, 1]")
    return {n.sync_word: v for n, v in zip(nodes, values)}, text


def cmd_simulate(args) -> int:
    if args.nodes < 1:
        raise UsageError("--nodes must be >= 1")
    if args.payload_bytes < 0 or args.preamble < 0:
        raise UsageError("--payload-bytes and --preamble must be >= 0")
    config = RadioConfig(sf=args.sf, bw_hz=args.bw_hz, cr=args.cr,
                         tx_power_dbm=args.pt, freq_hz=args.f)
    frame = FrameParams(payload_bytes=args.payload_bytes, preamble_symbols=args.preamble)
    nodes = [NodeSpec(sync_word=0xA001 + i, config=config, frame=frame)
             for i in range(args.nodes)]
    slot_s = args.slot_s if args.slot_s is not None else default_slot_duration(nodes)
    schedule = build_schedule(nodes, slot_s, args.guard_s)
    drop_model, drop_name = _simulate_drop_model(args, nodes)
    report = run_simulation(
        nodes, schedule, drop_model, args.duration_s, args.seed,
        frames_per_slot=args.frames_per_slot, handshake_s=args.handshake_s,
    )

    manifest = _manifest_lines("simulate", {
        "nodes": args.nodes, "sync_words": ",".join(format_sync_word(n.sync_word) for n in nodes),
        "sf": args.sf, "bw_khz": hz_to_khz_str(args.bw_hz), "cr": args.cr,
        "payload_bytes": args.payload_bytes, "preamble": args.preamble,
        "slot_s": slot_s, "guard_s": args.guard_s, "duration_s": args.duration_s,
        "frames_per_slot": args.frames_per_slot, "handshake_s": args.handshake_s,
        "drop": drop_name, "seed": args.seed, "output": args.output or "-",
        "uplink_log": args.uplink_log or "-",
    })
    serialized = serialize_report(report)
    with _open_output(args.output) as out:
        for line in manifest:
            print(line, file=out)
        out.write(serialized)
    if args.output not in (None, "-"):
        # keep the summary visible on stdout when the report goes to a file
        for line in manifest:
            print(line)
        for sync, stats in report.stats:
            print(f"node {format_sync_word(sync)} sent={stats.packets_sent} "
                  f"received={stats.packets_received} lost={stats.packets_lost} "
                  f"loss_pct={format_decimal(stats.measured_loss_pct)}")

    if args.uplink_log is not None:
        if args.nodes > 8:
            raise UsageError("--uplink-log supports at most 8 nodes (one channel field each)")
        key_map = {node.sync_word: ("DRYRUN", i + 1) for i, node in enumerate(nodes)}
        updates = bridge_sim_report(report, key_map)
        with _open_output(args.uplink_log) as out:
            for line in manifest:
                print(line, file=out)
            transport = DryRunTransport(write=out.write)
            for update in updates:
                transport.send(update)
    return EXIT_OK


def cmd_sweep(args) -> int:
    table, fixture_name = _load_fixture(args.fixture)
    params = _link_params(args)
    derived = args.metric in ("esp", "path_loss", "fsl", "excess")

    manifest = _manifest_lines("sweep", {
        "metric": args.metric, "fixture": fixture_name, "pt_dbm": args.pt,
        "gt_dbi": args.gt, "gr_dbi": args.gr, "distance_m": args.d, "freq_hz": args.f,
        "c_mps": args.c, "seed": args.seed, "output": args.output or "-",
    })
    with _open_output(args.output) as out:
        for line in manifest:
            print(line, file=out)
        print(f"sf,bw_khz,{args.metric}", file=out)
        for bw_hz in BW_HZ_VALUES:
            for sf in SF_VALUES:
                record = lookup(table, sf, bw_hz)
                if args.metric == "rssi":
                    value = format_decimal(record.rssi_dbm)
                elif args.metric == "snr":
                    value = format_decimal(record.snr_db)
                elif args.metric == "loss":
                    value = format_decimal(record.loss_pct)
                else:
                    if record.rssi_dbm is None:
                        raise UsageError(
                            f"cell sf={sf}, bw_khz={hz_to_khz_str(bw_hz)} has no rssi_dbm"
                        )
                    config = RadioConfig(sf=sf, bw_hz=bw_hz, cr=record.effective_cr,
                                         tx_power_dbm=args.pt, freq_hz=args.f)
                    breakdown = loss_breakdown(params, config,
                                               SignalSample(record.rssi_dbm, record.snr_db))
                    value = {
                        "esp": f"{breakdown.esp_dbm:.3f}",
                        "path_loss": f"{breakdown.path_loss_db:.3f}",
                        "fsl": f"{breakdown.fsl_db:.3f}",
                        "excess": f"{breakdown.excess_db:.3f}",
                    }[args.metric]
                print(f"{sf},{hz_to_khz_str(bw_hz)},{value}", file=out)
    return EXIT_OK


def _parse_key_map(items, report) -> dict[int, tuple[str, int]]:
    if not items:
        mapping = {}
        for i, (sync, _stats) in enumerate(report.stats):
            if i >= 8:
                raise UsageError("default mapping supports at most 8 nodes; pass --map")
            mapping[sync] = ("DRYRUN", i + 1)
        return mapping
    mapping = {}
    for item in items:
        try:
            sync_text, _, rest = item.partition("=")
            key, _, field_text = rest.rpartition(":")
            sync = parse_sync_word(sync_text.strip())
            field_index = int(field_text)
        except ValueError as exc:
            raise UsageError(f"malformed --map item {item!r}: {exc}") from None
        if not key:
            raise UsageError(f"malformed --map item {item!r}; expected SYNC=KEY:FIELD")
        mapping[sync] = (key, field_index)
    return mapping


def cmd_uplink(args) -> int:
    text = Path(args.report).read_text(encoding="utf-8")
    report = parse_report(text)
    key_map = _parse_key_map(args.map, report)
    updates = bridge_sim_report(report, key_map, epoch=args.epoch)
    spacing = args.min_spacing_s
    manifest = _manifest_lines("uplink", {
        "report": args.report,
        "map": ";".join(f"{format_sync_word(s)}={k}:{f}" for s, (k, f) in key_map.items()),
        "epoch": iso_utc(args.epoch),
        "real": args.real, "min_spacing_s": spacing if spacing is not None else
        (15.0 if args.real else 0.0),
        "seed": args.seed, "output": args.output or "-",
    })
    with _open_output(args.output) as out:
        for line in manifest:
            print(line, file=out)
        if args.real:
            transport = HttpTransport(min_spacing_s=spacing if spacing is not None else 15.0)
            for update in updates:
                body = transport.send(update)
                print(f"sent field update, response: {body}", file=out)
        else:
            transport = DryRunTransport(write=out.write,
                                        min_spacing_s=spacing if spacing is not None else 0.0)
            for update in updates:
                transport.send(update)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, LookupError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
