"""PNG figures rendered next to the CSV reports."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .cli import CELL_COLUMNS  # noqa: E402


def _mean_by(rows: list[dict], keys: tuple[str, ...], metric: str) -> dict:
    acc = defaultdict(list)
    for r in rows:
        acc[tuple(r[k] for k in keys)].append(float(r[metric]))
    return {k: float(np.mean(v)) for k, v in acc.items()}


def policy_summary(rows: list[dict], path: Path) -> Path:
    """Bar chart of mean DR and mean episode max-U per policy."""
    policies = list(dict.fromkeys(r["policy"] for r in rows))
    dr = _mean_by(rows, ("policy",), "dr")
    mu = _mean_by(rows, ("policy",), "max_u")
    fig, (a, b) = plt.subplots(1, 2, figsize=(9, 3.5))
    x = np.arange(len(policies))
    a.bar(x, [dr[(p,)] for p in policies], color="#4c72b0")
    a.set_xticks(x, policies)
    a.set_ylabel("detection recall")
    a.set_ylim(0, 1)
    b.bar(x, [mu[(p,)] for p in policies], color="#dd8452")
    b.set_xticks(x, policies)
    b.set_ylabel("max weighted uncertainty")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def sweep_axis(rows: list[dict], axis: str, path: Path) -> Path:
    """Mean DR and max-U against one sweep axis, one line per policy."""
    policies = list(dict.fromkeys(r["policy"] for r in rows))
    values = sorted({r[axis] for r in rows})
    fig, (a, b) = plt.subplots(1, 2, figsize=(9, 3.5))
    for metric, ax, label in (("dr", a, "detection recall"), ("max_u", b, "max weighted uncertainty")):
        means = _mean_by(rows, ("policy", axis), metric)
        for p in policies:
            ys = [means.get((p, v), np.nan) for v in values]
            ax.plot(values, ys, marker="o", label=p)
        ax.set_xlabel(axis)
        ax.set_ylabel(label)
    a.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def uncertainty_trace(urows: list[list], path: Path) -> Path:
    """Per-frame maximum uncertainty for the first cell of each policy."""
    first = {}
    series = defaultdict(dict)
    n = len(CELL_COLUMNS)
    for u in urows:
        cell = tuple(u[:n])
        first.setdefault(cell[0], cell)
        if first[cell[0]] != cell:
            continue
        frame, value = u[n], u[n + 7]
        series[cell[0]][frame] = max(value, series[cell[0]].get(frame, 0.0))
    fig, ax = plt.subplots(figsize=(9, 3.5))
    for policy, s in series.items():
        frames = sorted(s)
        ax.plot(frames, [s[f] for f in frames], label=policy, linewidth=1)
    ax.set_xlabel("frame")
    ax.set_ylabel("max weighted uncertainty")
    if series:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_figures(rows: list[dict], urows: list[list], out: Path) -> list[Path]:
    out = Path(out)
    made = []
    if rows:
        made.append(policy_summary(rows, out / "policies.png"))
        for axis in ("frame_period", "horizon_len", "drop_ratio"):
            if len({r[axis] for r in rows}) > 1:
                made.append(sweep_axis(rows, axis, out / f"sweep_{axis}.png"))
    if urows:
        made.append(uncertainty_trace(urows, out / "uncertainty.png"))
    return made
