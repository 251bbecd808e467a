"""Verdicts, JSON reports, CSV tables and minimal SVG line charts."""

from __future__ import annotations

import html
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np

SCHEMA_VERSION = 1


def _plain(obj):
    """Recursively convert numpy scalars/arrays and tuples to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return repr(x)
        return x
    return obj


@dataclass
class Verdict:
    name: str
    params: dict
    statistic: float
    threshold: float
    passed: bool
    witness: Any = None
    comparison: str = ">="

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "params": _plain(self.params),
            "statistic": _plain(self.statistic),
            "threshold": _plain(self.threshold),
            "comparison": self.comparison,
            "pass": bool(self.passed),
        }
        if self.witness is not None:
            out["witness"] = _plain(self.witness)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Verdict":
        return cls(
            d["name"], d["params"], d["statistic"], d["threshold"], d["pass"],
            d.get("witness"), d.get("comparison", ">="),
        )


def at_least(name, params, statistic, threshold, witness=None) -> Verdict:
    return Verdict(name, params, statistic, threshold, bool(statistic >= threshold), witness, ">=")


def below(name, params, statistic, threshold, witness=None) -> Verdict:
    return Verdict(name, params, statistic, threshold, bool(statistic < threshold), witness, "<")


def at_most(name, params, statistic, threshold, witness=None) -> Verdict:
    return Verdict(name, params, statistic, threshold, bool(statistic <= threshold), witness, "<=")


@dataclass
class ExperimentReport:
    command: str
    config: dict
    seed_ledger: dict
    checks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    statistics: dict = field(default_factory=dict)
    wall_ms: int = 0
    tool_version: str = ""
    schema_version: int = SCHEMA_VERSION

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "tool_version": self.tool_version,
            "command": self.command,
            "config": _plain(self.config),
            "seed_ledger": _plain(self.seed_ledger),
            "checks": [c.to_dict() for c in self.checks],
            "statistics": _plain(self.statistics),
            "artifacts": list(self.artifacts),
            "wall_ms": int(self.wall_ms),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(
            command=d["command"],
            config=d["config"],
            seed_ledger=d["seed_ledger"],
            checks=[Verdict.from_dict(c) for c in d["checks"]],
            artifacts=list(d["artifacts"]),
            statistics=d.get("statistics", {}),
            wall_ms=d["wall_ms"],
            tool_version=d.get("tool_version", ""),
            schema_version=d["schema_version"],
        )

    @classmethod
    def read(cls, path) -> "ExperimentReport":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def write_csv(path, header, rows) -> None:
    """Write numeric rows with 17 significant digits."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def svg_line_chart(path, series, title="", xlabel="", ylabel="", logx=False, logy=False,
                   width=640, height=420) -> None:
    """Write a line chart with axes and ticks.

    ``series`` is a list of ``(label, xs, ys)``; non-finite points are skipped.
    """
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    left, right, top, bottom = 70, 20, 40, 55
    pw, ph = width - left - right, height - top - bottom

    def tx(v):
        return math.log10(v) if logx else v

    def ty(v):
        return math.log10(v) if logy else v

    pts = []
    for label, xs, ys in series:
        keep = []
        for x, y in zip(xs, ys):
            x, y = float(x), float(y)
            if not (math.isfinite(x) and math.isfinite(y)):
                continue
            if (logx and x <= 0) or (logy and y <= 0):
                continue
            keep.append((tx(x), ty(y)))
        pts.append((label, keep))
    allx = [p[0] for _, k in pts for p in k] or [0.0, 1.0]
    ally = [p[1] for _, k in pts for p in k] or [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(v):
        return left + (v - x0) / (x1 - x0) * pw

    def py(v):
        return top + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{html.escape(title)}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for i in range(6):
        xv = x0 + (x1 - x0) * i / 5
        yv = y0 + (y1 - y0) * i / 5
        xl = f"1e{xv:.2g}" if logx else f"{xv:.3g}"
        yl = f"1e{yv:.2g}" if logy else f"{yv:.3g}"
        out.append(f'<line x1="{px(xv):.1f}" y1="{top + ph}" x2="{px(xv):.1f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(xv):.1f}" y="{top + ph + 18}" text-anchor="middle">{xl}</text>')
        out.append(f'<line x1="{left - 5}" y1="{py(yv):.1f}" x2="{left}" y2="{py(yv):.1f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py(yv) + 4:.1f}" text-anchor="end">{yl}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{html.escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2:.1f})">{html.escape(ylabel)}</text>'
    )
    for n, (label, keep) in enumerate(pts):
        color = colors[n % len(colors)]
        if keep:
            coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in keep)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
            for x, y in keep:
                out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.5" fill="{color}"/>')
        ly = top + 14 * (n + 1)
        out.append(f'<text x="{left + pw - 5}" y="{ly}" text-anchor="end" fill="{color}">{html.escape(label)}</text>')
    out.append("</svg>")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
