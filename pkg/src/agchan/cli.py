"""Command-line surface.

Subcommands: simulate (forward synthesis to a trace CSV), extract (inverse
pipeline to a JSON report), evaluate (single path-loss numbers), roundtrip
(synthesize, extract and print a parameter-recovery table) and plotdata
(plottable CSV columns plus a rendered PNG from a report).

Exit codes: 0 success, 1 usage error, 2 data or fit error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .extraction import FitError, FitMode, analyze_trace, local_mean
from .geometry import LosState, link_distances, los_mask
from .presets import PRESETS, get_preset
from .propagation import Frequency, fspl, pl_3gpp_uma, pl_altitude_model, PathLossParams
from .stochastic import Family
from .synthesis import FlightConfig, synthesize_flight
from . import tracefile
from .tracefile import ConfigError


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="agchan", description=__doc__)
    parser.add_argument("--version", action="version", version=f"agchan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    preset_names = sorted(PRESETS) + ["custom"]

    p = sub.add_parser("simulate", help="synthesize a flight trace CSV")
    p.add_argument("--config", type=Path, help="key = value flight/scenario config file")
    p.add_argument("--preset", choices=preset_names, default="paper-1ghz")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", type=Path, required=True, help="output trace CSV")

    p = sub.add_parser("extract", help="run the inverse pipeline on a trace")
    p.add_argument("--trace", type=Path, required=True)
    p.add_argument("--scenario", type=Path, help="scenario config overriding the trace metadata")
    p.add_argument("--mode", choices=["free", "fixed"], default="free")
    p.add_argument("--report", type=Path, required=True, help="output report JSON")

    p = sub.add_parser("evaluate", help="evaluate one path-loss model")
    p.add_argument("--model", choices=["fspl", "3gpp", "paper"], required=True)
    p.add_argument("--d-km", type=float, help="fspl: distance in km")
    p.add_argument("--f-mhz", type=float, help="fspl: frequency in MHz")
    p.add_argument("--d3d-m", type=float, help="3gpp/paper: 3-D distance in m")
    p.add_argument("--f-ghz", type=float, help="3gpp/paper: frequency in GHz")
    p.add_argument("--alt-m", type=float, help="UAV altitude in m")
    p.add_argument("--cond", choices=["los", "nlos"], default="los")
    p.add_argument("--preset", choices=sorted(PRESETS), default="paper-1ghz", help="paper model parameter set")
    p.add_argument("--d2d-m", type=float, help="3gpp LOS: horizontal distance for the applicability check")
    p.add_argument("--h-tx-m", type=float, help="3gpp LOS applicability: Tx height")
    p.add_argument("--h-rx-m", type=float, help="3gpp LOS applicability: Rx height")
    p.add_argument("--strict", action="store_true", help="fail outside the model applicability range")

    p = sub.add_parser("roundtrip", help="synthesize, extract, and print parameter recovery")
    p.add_argument("--config", type=Path)
    p.add_argument("--preset", choices=preset_names, default="paper-1ghz")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=1, help="independent seeds (seed, seed+1, ...)")
    p.add_argument("--mode", choices=["free", "fixed"], default="free")
    p.add_argument("--deterministic", action="store_true",
                   help="zero shadowing and unit fading envelope (exact-recovery check)")

    p = sub.add_parser("plotdata", help="emit plottable CSV columns and a PNG from a report")
    p.add_argument("--report", type=Path, required=True)
    p.add_argument("--what", choices=["pdf", "cdf", "pathloss"], required=True)
    p.add_argument("--out", type=Path, required=True, help="output CSV; a PNG lands next to it")
    p.add_argument("--no-fig", action="store_true", help="skip the PNG")

    return parser


def _load_config(path: Path | None) -> tuple[FlightConfig, dict[str, str]]:
    if path is None:
        return FlightConfig(), {}
    kv = tracefile.parse_kv(path.read_text())
    cfg = tracefile.flight_config_from_kv(kv)
    return cfg, kv


def _resolve_channel(preset_name: str, cfg: FlightConfig, kv: dict[str, str]):
    """Channel parameters for simulate/roundtrip; presets pin the frequency."""
    if preset_name == "custom":
        pl, shadowing, fading = tracefile.channel_from_kv(kv)
        return cfg, pl, shadowing, fading
    if kv & tracefile._CHANNEL_KEYS if isinstance(kv, set) else set(kv) & tracefile._CHANNEL_KEYS:
        raise ConfigError("channel keys in the config require --preset custom")
    preset = get_preset(preset_name)
    return replace(cfg, freq=preset.freq), preset.pathloss, preset.shadowing, preset.fading


def _cmd_simulate(args) -> int:
    cfg, kv = _load_config(args.config)
    cfg, pl, shadowing, fading = _resolve_channel(args.preset, cfg, kv)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    trace = synthesize_flight(cfg, pl, shadowing, fading)
    tracefile.write_trace(trace, args.out)
    print(f"wrote {len(trace)} samples to {args.out}")
    return 0


def _cmd_extract(args) -> int:
    scenario = tracefile.load_scenario(args.scenario) if args.scenario else None
    text = args.trace.read_text()
    trace = tracefile.trace_from_csv(text, scenario)
    mode = FitMode.FREE_INTERCEPTS if args.mode == "free" else FitMode.FIXED_INTERCEPTS
    doc = tracefile.build_report_doc(
        trace, mode,
        provenance={"source": str(args.trace), "source_sha256": tracefile.sha256_text(text)},
    )
    Path(args.report).write_text(tracefile.doc_to_json(doc))
    print(f"wrote report to {args.report}")
    return 0


def _require(args, names: list[str]) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise ConfigError(f"--model {args.model} requires " + ", ".join(f"--{n}" for n in missing))


def _cmd_evaluate(args) -> int:
    if args.model == "fspl":
        _require(args, ["d-km", "f-mhz"])
        value = fspl(args.d_km, args.f_mhz)
    elif args.model == "3gpp":
        _require(args, ["d3d-m", "f-ghz"])
        cond = LosState.LOS if args.cond == "los" else LosState.NLOS
        if cond is LosState.NLOS:
            _require(args, ["alt-m"])
        value = pl_3gpp_uma(
            args.d3d_m, args.f_ghz, args.alt_m, cond,
            d2d_m=args.d2d_m, h_tx_m=args.h_tx_m, h_rx_m=args.h_rx_m, strict=args.strict,
        )
    else:
        _require(args, ["d3d-m", "alt-m"])
        preset = get_preset(args.preset)
        f_ghz = args.f_ghz if args.f_ghz is not None else preset.freq.ghz
        cond = LosState.LOS if args.cond == "los" else LosState.NLOS
        value = pl_altitude_model(args.d3d_m, f_ghz, args.alt_m, cond, preset.pathloss)
    print(f"{value:.2f}")
    return 0


def _cmd_roundtrip(args) -> int:
    cfg, kv = _load_config(args.config)
    cfg, pl, shadowing, fading = _resolve_channel(args.preset, cfg, kv)
    mode = FitMode.FREE_INTERCEPTS if args.mode == "free" else FitMode.FIXED_INTERCEPTS
    if args.deterministic:
        from .stochastic import ShadowingParams
        shadowing = {c: ShadowingParams(sigma_db=0.0) for c in (LosState.LOS, LosState.NLOS)}
        fading = None
    if args.repeats < 1:
        raise ConfigError("--repeats must be >= 1")

    rows: dict[str, list[float]] = {}
    rank_top = 0
    for i in range(args.repeats):
        trace = synthesize_flight(replace(cfg, seed=args.seed + i), pl, shadowing, fading)
        report = analyze_trace(trace, mode)
        rec = report.pathloss.params
        rows.setdefault("intercept_los_db", []).append(rec.intercept_los_db)
        rows.setdefault("intercept_nlos_db", []).append(rec.intercept_nlos_db)
        rows.setdefault("n_los", []).append(rec.n_los)
        rows.setdefault("n_nlos", []).append(rec.n_nlos)
        if fading is not None:
            for cond, label in ((LosState.LOS, "los"), (LosState.NLOS, "nlos")):
                crep = report.condition(cond)
                if crep is None:
                    continue
                rows.setdefault(f"sigma_{label}_db", []).append(crep.shadowing.params.sigma_db)
                ll_fit = next((f for f in crep.fading if f.family is Family.LOG_LOGISTIC), None)
                if ll_fit is not None:
                    rows.setdefault(f"ll_beta_{label}", []).append(ll_fit.dist.beta)
            nlos_rep = report.condition(LosState.NLOS)
            if nlos_rep is not None and nlos_rep.fading[0].family is Family.LOG_LOGISTIC:
                rank_top += 1

    generator = {
        "intercept_los_db": pl.intercept_los_db,
        "intercept_nlos_db": pl.intercept_nlos_db,
        "n_los": pl.n_los,
        "n_nlos": pl.n_nlos,
    }
    if fading is not None:
        for cond, label in ((LosState.LOS, "los"), (LosState.NLOS, "nlos")):
            generator[f"sigma_{label}_db"] = shadowing[cond].sigma_db
            generator[f"ll_beta_{label}"] = fading[cond].beta

    print(f"{'parameter':<20} {'generator':>12} {'recovered':>12} {'rel_error':>12}")
    for name, gen in generator.items():
        if name not in rows:
            continue
        rec = float(np.median(rows[name]))
        err = abs(rec - gen) / abs(gen) if gen != 0 else abs(rec - gen)
        print(f"{name:<20} {gen:>12.6g} {rec:>12.6g} {err:>12.3e}")
    if fading is not None:
        print(f"log-logistic top-ranked (NLOS): {rank_top}/{args.repeats} seeds")
    return 0


_FIT_COLUMN_ORDER = [f.value for f in Family]


def _pathloss_columns(doc: dict) -> dict[str, np.ndarray]:
    emp = doc["empirical"]
    scen_kv = {k: str(v) for k, v in emp["scenario"].items()}
    scenario = tracefile.scenario_from_kv(scen_kv)
    alt = np.asarray(emp["pathloss"]["altitude_m"])
    f_ghz = emp["freq_hz"] / 1e9
    d3d = np.hypot(scenario.horizontal_distance_m, scenario.gs_height_m - alt)
    params = PathLossParams(**doc["pathloss"]["params"])
    is_los = los_mask(scenario, alt)
    fit = np.empty_like(alt)
    uma = np.empty_like(alt)
    for cond, mask in ((LosState.LOS, is_los), (LosState.NLOS, ~is_los)):
        if not np.any(mask):
            continue
        fit[mask] = pl_altitude_model(d3d[mask], f_ghz, alt[mask], cond, params)
        uma[mask] = pl_3gpp_uma(d3d[mask], f_ghz, alt[mask], cond)
    return {
        "altitude_m": alt,
        "loss_db": np.asarray(emp["pathloss"]["loss_db"]),
        "trend_db": np.asarray(emp["pathloss"]["trend_db"]),
        "fit_db": fit,
        "fspl_db": fspl(d3d / 1000.0, np.full_like(alt, emp["freq_hz"] / 1e6)),
        "uma_db": uma,
    }


def _distribution_blocks(doc: dict, what: str) -> dict[str, dict[str, np.ndarray]]:
    blocks: dict[str, dict[str, np.ndarray]] = {}
    for cond, emp in sorted(doc["empirical"]["conditions"].items()):
        fits = doc["conditions"][cond]
        if what == "pdf":
            x = np.asarray(emp["sf_bin_centers_db"])
            mean = fits["shadowing"]["mean_db"]
            sigma = fits["shadowing"]["sigma_db"]
            if sigma > 0:
                fitted = np.exp(-0.5 * ((x - mean) / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))
            else:
                fitted = np.zeros_like(x)
            blocks[cond] = {"x": x, "empirical": np.asarray(emp["sf_density"]), "fitted": fitted}
        else:
            x = np.asarray(emp["ff_ecdf_x"])
            block = {"x": x, "empirical": np.asarray(emp["ff_ecdf_p"])}
            for entry in fits["fading"]:
                dist = tracefile.dist_from_dict(entry)
                block[f"fitted_{entry['family']}"] = dist.cdf(x)
            blocks[cond] = block
    return blocks


def _write_columns_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.6f}" if isinstance(v, float) else str(v) for v in row) + "\n")


def _cmd_plotdata(args) -> int:
    doc = tracefile.read_report(args.report)
    if "empirical" not in doc:
        raise ConfigError("report lacks the empirical section; regenerate it with `agchan extract`")
    fig_path = args.out.with_suffix(".png")

    if args.what == "pathloss":
        cols = _pathloss_columns(doc)
        header = ["altitude_m", "loss_db", "trend_db", "fit_db", "fspl_db", "uma_db"]
        rows = zip(*(map(float, cols[h]) for h in header))
        _write_columns_csv(args.out, header, rows)
        if not args.no_fig:
            from . import plots
            plots.render_pathloss(cols, fig_path)
    else:
        blocks = _distribution_blocks(doc, args.what)
        if args.what == "pdf":
            header = ["condition", "x", "empirical", "fitted"]
        else:
            families = [f"fitted_{name}" for name in _FIT_COLUMN_ORDER
                        if any(f"fitted_{name}" in b for b in blocks.values())]
            header = ["condition", "x", "empirical"] + families
        rows = []
        for cond, block in sorted(blocks.items()):
            for i in range(len(block["x"])):
                row = [cond] + [float(block[h][i]) if h in block else float("nan")
                                for h in header[1:]]
                rows.append(row)
        _write_columns_csv(args.out, header, rows)
        if not args.no_fig:
            from . import plots
            if args.what == "pdf":
                plots.render_pdf(blocks, fig_path)
            else:
                plots.render_cdf(blocks, fig_path)

    made = [str(args.out)] if args.no_fig else [str(args.out), str(fig_path)]
    print("wrote " + " and ".join(made))
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "extract": _cmd_extract,
    "evaluate": _cmd_evaluate,
    "roundtrip": _cmd_roundtrip,
    "plotdata": _cmd_plotdata,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, FitError, ValueError, OSError) as exc:
        print(f"agchan: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
