"""Command-line entry point.

Subcommands::

    simulate           one run per policy and seed at the base settings
    sweep              the cross product of the configured sweep axes
    pack-debug         pack an item list onto one canvas, print it, draw an SVG
    validate-profile   report shape violations of an accuracy profile
    gen-trace          write a synthetic ground-truth trace as CSV

``simulate`` and ``sweep`` write ``metrics.csv`` (or ``metrics.json``),
``uncertainty.csv`` and ``schedule.json`` into the output directory, plus
PNG figures unless ``--no-plots`` is given.

Exit codes: 0 success, 1 invalid result (profile violations, infeasible
packing), 2 missing or malformed input, 3 infeasible schedule.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

from .accuracy import ProfileError, load_profile, synthetic_profile, validate_profile
from .core import ConfigError, HorizonConfig, ResizePolicy
from .packing import GENERAL, QUANTIZED, Infeasible, PackItem, pack
from .scheduler import validate_schedule
from .sim import (METRIC_COLUMNS, POLICIES, LatencyModel, ScheduleInfeasible, SimSetup,
                  TraceError, drop_frames, evaluate, generate_trace, read_trace,
                  resource_model, run_episode, write_trace)

log = logging.getLogger("canvasched")

CELL_COLUMNS = ("policy", "seed", "frame_period", "horizon_len", "drop_ratio")
METRICS_HEADER = CELL_COLUMNS + METRIC_COLUMNS + ("invalid_schedules", "warnings")
UNCERTAINTY_HEADER = CELL_COLUMNS + ("frame", "time", "track", "gt_id", "weight",
                                     "last_inspect", "last_accuracy", "value")
SWEEP_AXES = ("frame_period", "horizon_len", "drop_ratio")

_SIM_KEYS = {"candidate_sides", "mode", "budget_scale", "count_search", "motion_noise",
             "motion_bias", "snap_noise", "detector_threshold", "coverage", "iou_floor",
             "bucket_side", "track_patience"}


class InputError(Exception):
    """Missing or malformed input; maps to exit code 2."""


@dataclass
class ExperimentConfig:
    trace: dict
    policies: list[str]
    seeds: list[int]
    horizon: HorizonConfig
    resize: ResizePolicy
    latency: LatencyModel
    profile_path: Path | None = None
    sim: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    criticality: dict | None = None
    out: Path = Path("results")
    workers: int = 1


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _build(cls, data: dict, what: str):
    allowed = {f.name for f in fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise InputError(f"{what}: unknown keys {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{what}: {exc}") from None


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse a JSON experiment config; relative paths resolve against its folder."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise InputError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: top level must be an object")
    base = path.parent

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    trace = dict(data.get("trace", {"synthetic": {}}))
    if "path" in trace:
        trace["path"] = resolve(trace["path"])
        if not trace["path"].is_file():
            raise InputError(f"trace file not found: {trace['path']}")
    elif "synthetic" not in trace:
        raise InputError("trace: expected 'path' or 'synthetic'")
    profile_path = data.get("profile")
    if profile_path is not None:
        profile_path = resolve(profile_path)
        if not profile_path.is_file():
            raise InputError(f"profile file not found: {profile_path}")
        try:
            load_profile(profile_path)
        except (ProfileError, json.JSONDecodeError) as exc:
            raise InputError(f"{profile_path}: {exc}") from None
    policies = list(data.get("policies", ["CSRAP"]))
    seeds = [int(s) for s in data.get("seeds", [0])]
    sim = dict(data.get("sim", {}))
    sweep = {k: list(v) for k, v in data.get("sweep", {}).items()}
    if set(sim) - _SIM_KEYS:
        raise InputError(f"sim: unknown keys {sorted(set(sim) - _SIM_KEYS)}")
    if set(sweep) - set(SWEEP_AXES):
        raise InputError(f"sweep: unknown axes {sorted(set(sweep) - set(SWEEP_AXES))}")
    cfg = ExperimentConfig(
        trace=trace, policies=policies, seeds=seeds,
        horizon=_build(HorizonConfig, data.get("horizon", {}), "horizon"),
        resize=_build(ResizePolicy, data.get("resize", {}), "resize"),
        latency=_build(LatencyModel, data.get("latency", {}), "latency"),
        profile_path=profile_path, sim=sim, sweep=sweep,
        criticality=data.get("criticality"),
        out=resolve(data.get("out", "results")),
        workers=int(data.get("workers", 1)))
    check_config(cfg)
    return cfg


def check_config(cfg: ExperimentConfig) -> None:
    if not cfg.policies:
        raise InputError("at least one policy is required")
    if not cfg.seeds:
        raise InputError("at least one seed is required")
    bad = [p for p in cfg.policies if p not in POLICIES]
    if bad:
        raise InputError(f"unknown policies {bad}; choose from {', '.join(POLICIES)}")
    if cfg.sim.get("mode", GENERAL) not in (GENERAL, QUANTIZED):
        raise InputError(f"sim.mode must be '{GENERAL}' or '{QUANTIZED}'")


@dataclass(frozen=True)
class Cell:
    index: int
    policy: str
    seed: int
    frame_period: float
    horizon_len: int
    drop_ratio: float

    def key(self) -> tuple:
        return (self.policy, self.seed, self.frame_period, self.horizon_len, self.drop_ratio)


def cells_for(cfg: ExperimentConfig, sweep: bool) -> list[Cell]:
    axes = {"frame_period": [cfg.horizon.frame_period],
            "horizon_len": [cfg.horizon.horizon_len],
            "drop_ratio": [0.0]}
    if sweep:
        for k, v in cfg.sweep.items():
            if not v:
                raise InputError(f"sweep axis {k} is empty")
            axes[k] = v
    out = []
    for i, (P, H, d, pol, s) in enumerate(itertools.product(
            axes["frame_period"], axes["horizon_len"], axes["drop_ratio"],
            cfg.policies, cfg.seeds)):
        out.append(Cell(i, pol, int(s), float(P), int(H), float(d)))
    return out


def _trace_for(cfg: ExperimentConfig, cell: Cell):
    if "path" in cfg.trace:
        t = read_trace(cfg.trace["path"], cell.frame_period,
                       cfg.trace.get("width", 1920.0), cfg.trace.get("height", 1280.0))
    else:
        params = dict(cfg.trace["synthetic"])
        params.setdefault("seed", cell.seed)
        t = generate_trace(frame_period=cell.frame_period, **params)
    return t


def run_cell(cfg: ExperimentConfig, cell: Cell) -> dict:
    """One episode; returns plain data so results cross process boundaries."""
    profile = load_profile(cfg.profile_path) if cfg.profile_path else synthetic_profile()
    sim = dict(cfg.sim)
    if "candidate_sides" in sim:
        sim["candidate_sides"] = tuple(sim["candidate_sides"])
    setup = SimSetup(profile=profile, resize=cfg.resize, latency=cfg.latency, **sim)
    hz = HorizonConfig(cell.horizon_len, cell.frame_period, cfg.horizon.min_frequency,
                       cfg.horizon.quantum)
    truth = _trace_for(cfg, cell)
    seen = drop_frames(truth, cell.drop_ratio, cell.seed, hz.horizon_len)
    res = run_episode(seen, cell.policy, setup, hz, cell.seed)
    m = evaluate(res, truth, cfg.criticality)
    rm = resource_model(setup.latency, hz, setup.budget_scale)
    invalid = 0
    schedules = []
    for anchor, s in res.schedules:
        problems = validate_schedule(s, rm, hz)
        invalid += bool(problems)
        schedules.append({"anchor": anchor, "problems": problems, **s.to_json()})
    base = [cell.policy, cell.seed, cell.frame_period, cell.horizon_len, cell.drop_ratio]
    row = base + [getattr(m, c) for c in METRIC_COLUMNS] + [invalid, len(res.warnings)]
    urows = [base + [u.frame, u.time, u.track, u.gt_id, u.weight, u.last_inspect,
                     u.last_accuracy, u.value] for u in res.uncertainty]
    return {"index": cell.index, "row": row, "uncertainty": urows,
            "schedules": {"cell": dict(zip(CELL_COLUMNS, base)), "horizons": schedules}}


def _run_cell_args(args):
    return run_cell(*args)


def run_experiment(cfg: ExperimentConfig, sweep: bool = False, fmt: str = "csv",
                   plots: bool = True) -> list[dict]:
    cells = cells_for(cfg, sweep)
    if cfg.workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_run_cell_args, [(cfg, c) for c in cells]))
    else:
        results = [run_cell(cfg, c) for c in cells]
    results.sort(key=lambda r: r["index"])
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    rows = [dict(zip(METRICS_HEADER, r["row"])) for r in results]
    if fmt == "json":
        (out / "metrics.json").write_text(json.dumps(rows, indent=2) + "\n")
    else:
        with open(out / "metrics.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(METRICS_HEADER)
            for r in results:
                w.writerow([_fmt(v) for v in r["row"]])
    with open(out / "uncertainty.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(UNCERTAINTY_HEADER)
        for r in results:
            for u in r["uncertainty"]:
                w.writerow([_fmt(v) for v in u])
    (out / "schedule.json").write_text(
        json.dumps([r["schedules"] for r in results], indent=1, default=str) + "\n")
    if plots:
        from .report import render_figures
        render_figures(rows, [u for r in results for u in r["uncertainty"]], out)
    return rows


# -- subcommands -----------------------------------------------------------

def _split(text: str | None, conv):
    if text is None:
        return None
    try:
        return [conv(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_run(args, sweep: bool) -> int:
    cfg = load_config(args.config)
    if args.policy:
        cfg.policies = _split(args.policy, str.strip)
    if args.seed:
        cfg.seeds = _split(args.seed, int)
    if args.out:
        cfg.out = Path(args.out)
    if args.workers:
        cfg.workers = args.workers
    check_config(cfg)
    rows = run_experiment(cfg, sweep, args.format, not args.no_plots)
    print(f"{len(rows)} cells written to {cfg.out}")
    return 0


def _read_items(path: Path) -> list[PackItem]:
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise InputError(f"items file not found: {path}") from None
    try:
        if path.suffix.lower() == ".json":
            raw = json.loads(text)
            return [PackItem(d["id"], int(d["width"]), int(d["height"]),
                             bool(d.get("rotatable", True))) for d in raw]
        rows = list(csv.DictReader(text.splitlines()))
        return [PackItem(r["id"], int(r["width"]), int(r["height"])) for r in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: malformed item list: {exc}") from None


def layout_svg(layout, scale: float = 1.0) -> str:
    s = layout.side * scale
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{s:g}" height="{s:g}" '
             f'viewBox="0 0 {layout.side} {layout.side}">',
             f'<rect x="0" y="0" width="{layout.side}" height="{layout.side}" '
             'fill="white" stroke="black"/>']
    for p in layout.placements:
        r = p.rect
        parts.append(f'<rect x="{r.x_min:g}" y="{r.y_min:g}" width="{r.width:g}" '
                     f'height="{r.height:g}" fill="#9ecae1" stroke="#08519c"/>')
        parts.append(f'<text x="{r.x_min + 2:g}" y="{r.y_min + 10:g}" font-size="9">'
                     f'{p.id}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_pack_debug(args) -> int:
    items = _read_items(Path(args.items))
    try:
        layout = pack(items, args.canvas, args.mode, args.quantum)
    except Infeasible as exc:
        print(f"infeasible: {exc} (items {exc.total_area:g} px², canvas {exc.canvas_area:g} px²)"
              if exc.canvas_area else f"infeasible: {exc}")
        return 1
    except ValueError as exc:
        raise InputError(str(exc)) from None
    print(f"canvas {layout.side}x{layout.side}, {len(layout.placements)} items, "
          f"used {layout.used_area:g}/{layout.canvas_area} px²")
    for p in layout.placements:
        r = p.rect
        print(f"{p.id}\t{r.x_min:g}\t{r.y_min:g}\t{r.width:g}\t{r.height:g}"
              f"\t{'rotated' if p.rotated else ''}".rstrip())
    svg = Path(args.svg) if args.svg else Path(args.items).with_suffix(".svg")
    svg.write_text(layout_svg(layout))
    print(f"svg written to {svg}")
    return 0


def cmd_validate_profile(args) -> int:
    try:
        p = load_profile(args.profile)
    except FileNotFoundError:
        raise InputError(f"profile file not found: {args.profile}") from None
    except (ProfileError, json.JSONDecodeError) as exc:
        raise InputError(f"{args.profile}: {exc}") from None
    problems = validate_profile(p)
    for v in problems:
        print(f"{v.kind}\tbin {v.bin_index}\tratio {v.ratio_index}\t{v.detail}")
    if problems:
        print(f"{len(problems)} violations")
        return 1
    print("profile ok")
    return 0


def cmd_gen_trace(args) -> int:
    t = generate_trace(args.objects, args.frames, args.period, args.seed,
                       spawn_rate=args.spawn_rate, despawn_rate=args.despawn_rate)
    write_trace(t, args.out)
    print(f"{args.frames} frames written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="canvasched", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("simulate", "run policies at the base settings"),
                        ("sweep", "run the cross product of sweep axes")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True)
        p.add_argument("--policy", help="comma-separated policy names")
        p.add_argument("--seed", help="comma-separated seeds")
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--workers", type=int)
        p.add_argument("--no-plots", action="store_true")
    p = sub.add_parser("pack-debug", help="pack items onto one canvas")
    p.add_argument("items", help="JSON list or CSV (id,width,height)")
    p.add_argument("--canvas", type=float, required=True, help="canvas area in px²")
    p.add_argument("--mode", choices=(GENERAL, QUANTIZED), default=GENERAL)
    p.add_argument("--quantum", type=int, default=1)
    p.add_argument("--svg")
    p = sub.add_parser("validate-profile", help="check an accuracy profile")
    p.add_argument("profile")
    p = sub.add_parser("gen-trace", help="write a synthetic trace CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--objects", type=int, default=20)
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--period", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spawn-rate", type=float, default=0.0)
    p.add_argument("--despawn-rate", type=float, default=0.0)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command in ("simulate", "sweep"):
            return cmd_run(args, args.command == "sweep")
        if args.command == "pack-debug":
            return cmd_pack_debug(args)
        if args.command == "validate-profile":
            return cmd_validate_profile(args)
        return cmd_gen_trace(args)
    except (InputError, TraceError, ProfileError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ScheduleInfeasible as exc:
        print(f"error: infeasible schedule: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
