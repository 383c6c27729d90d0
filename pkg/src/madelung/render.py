"""Static SVG figures from a scenario run directory.

Self-contained vector output with fixed float formatting, so identical
inputs give byte-identical files. Soft-superoscillation regions shade
light gray, hard regions dark gray.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass

import numpy as np

RENDER_KINDS = ("streamlines", "densities", "potential_landscape", "vortex")
SHADINGS = ("qka", "qrkc")

SOFT_GRAY = "#d4d4d4"
HARD_GRAY = "#8a8a8a"

_STYLE = (
    "rect.soft{fill:%s;stroke:none}rect.hard{fill:%s;stroke:none}"
    "polyline{fill:none;stroke:#1a1a1a;stroke-width:1.2}"
    "polyline.curve{stroke:#1a1a1a}polyline.fit{stroke:#666666;stroke-dasharray:5 3}"
    "line.axis{stroke:#333333;stroke-width:1}line.level{stroke:#777777;stroke-dasharray:4 3}"
    "circle.pt{fill:#1a1a1a;stroke:none}"
    "text{font-family:monospace;font-size:11px;fill:#333333}"
) % (SOFT_GRAY, HARD_GRAY)


@dataclass(frozen=True)
class RenderSpec:
    """What to draw and how to shade it."""

    kind: str
    shading: str = "qka"
    x_range: tuple | None = None
    y_range: tuple | None = None
    width: int = 720
    height: int = 520

    def __post_init__(self):
        if self.kind not in RENDER_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; choose from {RENDER_KINDS}")
        if self.shading not in SHADINGS:
            raise ValueError(f"unknown shading {self.shading!r}; choose from {SHADINGS}")


def _fmt(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _read_csv_columns(path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    head, data = rows[0], rows[1:]
    cols = {name: np.array([r[i] for r in data], dtype=float)
            for i, name in enumerate(head)}
    return cols


def _svg(spec: RenderSpec, body: list) -> str:
    w, h = spec.width, spec.height
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f"<style>{_STYLE}</style>",
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>',
    ]
    parts.extend(body)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


class _Frame:
    """Maps data coordinates onto the pixel box (y grows upward in data)."""

    PAD = 42

    def __init__(self, spec: RenderSpec, x0, x1, y0, y1):
        if x1 <= x0:
            x0, x1 = x0 - 0.5, x0 + 0.5
        if y1 <= y0:
            y0, y1 = y0 - 0.5, y0 + 0.5
        self.x0, self.x1, self.y0, self.y1 = x0, x1, y0, y1
        self.px0, self.px1 = self.PAD, spec.width - self.PAD
        self.py0, self.py1 = spec.height - self.PAD, self.PAD

    def x(self, v):
        return self.px0 + (v - self.x0) / (self.x1 - self.x0) * (self.px1 - self.px0)

    def y(self, v):
        return self.py0 + (v - self.y0) / (self.y1 - self.y0) * (self.py1 - self.py0)

    def axes(self, xlabel: str, ylabel: str) -> list:
        out = [
            f'<line class="axis" x1="{_fmt(self.px0)}" y1="{_fmt(self.py0)}" '
            f'x2="{_fmt(self.px1)}" y2="{_fmt(self.py0)}"/>',
            f'<line class="axis" x1="{_fmt(self.px0)}" y1="{_fmt(self.py0)}" '
            f'x2="{_fmt(self.px0)}" y2="{_fmt(self.py1)}"/>',
            f'<text x="{_fmt(self.px1 - 4)}" y="{_fmt(self.py0 + 26)}" '
            f'text-anchor="end">{xlabel}</text>',
            f'<text x="{_fmt(self.px0 - 30)}" y="{_fmt(self.py1 - 8)}">{ylabel}</text>',
        ]
        for v, label in ((self.x0, _fmt(self.x0)), (self.x1, _fmt(self.x1))):
            out.append(f'<text x="{_fmt(self.x(v))}" y="{_fmt(self.py0 + 14)}" '
                       f'text-anchor="middle">{label}</text>')
        for v in (self.y0, self.y1):
            out.append(f'<text x="{_fmt(self.px0 - 4)}" y="{_fmt(self.y(v) + 4)}" '
                       f'text-anchor="end">{_fmt(v)}</text>')
        return out


def _runs_of(flags: np.ndarray):
    idx = np.where(flags)[0]
    if idx.size == 0:
        return []
    groups = np.split(idx, np.where(np.diff(idx) > 1)[0] + 1)
    return [(g[0], g[-1]) for g in groups]


def _mask_rects(fr: _Frame, x, flags, y_top, y_bot, cls: str) -> list:
    out = []
    for a, b in _runs_of(flags):
        x_left, x_right = fr.x(x[a]), fr.x(x[b])
        if x_right - x_left < 0.05:
            continue
        out.append(
            f'<rect class="{cls}" x="{_fmt(x_left)}" y="{_fmt(y_top)}" '
            f'width="{_fmt(x_right - x_left)}" height="{_fmt(y_bot - y_top)}"/>'
        )
    return out


def _load_manifest(run_dir):
    with open(os.path.join(run_dir, "manifest.json")) as fh:
        return json.load(fh)


def _frame_masks(run_dir, manifest, shading):
    """Per frame: (t, x, soft flags, hard flags) honoring the valid column."""
    soft_col, hard_col = f"soft_{shading}", f"hard_{shading}"
    frames = []
    for rec in manifest["files"]["frames"]:
        cols = _read_csv_columns(os.path.join(run_dir, rec["masks"]))
        valid = cols["valid"] > 0.5
        frames.append((rec["t"], cols["x"],
                       (cols[soft_col] > 0.5) & valid,
                       (cols[hard_col] > 0.5) & valid))
    if not frames:
        raise ValueError("run has no mask frames to shade")
    return frames


def _shading_bands(fr: _Frame, frames, band_edges) -> list:
    body = []
    for (t, x, soft, hard), (lo, hi) in zip(frames, band_edges):
        y_top, y_bot = fr.y(hi), fr.y(lo)
        body.extend(_mask_rects(fr, x, soft, y_top, y_bot, "soft"))
        body.extend(_mask_rects(fr, x, hard, y_top, y_bot, "hard"))
    return body


def _render_streamlines(run_dir, manifest, spec: RenderSpec) -> str:
    if "streamlines" not in manifest["files"]:
        raise ValueError("run has no streamline table; this kind needs a 1D run")
    frames = _frame_masks(run_dir, manifest, spec.shading)
    lines = _read_csv_columns(os.path.join(run_dir, manifest["files"]["streamlines"]))
    x_all = frames[0][1]
    x0, x1 = spec.x_range or (float(x_all[0]), float(x_all[-1]))
    times = [t for t, *_ in frames]
    t0, t1 = spec.y_range or (times[0], times[-1] if len(times) > 1 else times[0] + 1.0)
    fr = _Frame(spec, x0, x1, t0, t1)

    mids = list(times)
    edges = []
    for j, t in enumerate(mids):
        lo = mids[j - 1] / 2.0 + t / 2.0 if j > 0 else t - (mids[1] - t) / 2.0 if len(mids) > 1 else t - 0.5
        hi = mids[j + 1] / 2.0 + t / 2.0 if j < len(mids) - 1 else t + (t - mids[-2]) / 2.0 if len(mids) > 1 else t + 0.5
        edges.append((lo, hi))
    body = _shading_bands(fr, frames, edges)

    seeds = sorted(set(lines["seed_q"]))
    for q in seeds:
        sel = lines["seed_q"] == q
        ts, xs = lines["t"][sel], lines["x"][sel]
        order = np.argsort(ts)
        pts = " ".join(f"{_fmt(fr.x(xi))},{_fmt(fr.y(ti))}"
                       for ti, xi in zip(ts[order], xs[order]))
        body.append(f'<polyline class="curve" points="{pts}"/>')
    body.extend(fr.axes("x", "t"))
    return _svg(spec, body)


def _render_densities(run_dir, manifest, spec: RenderSpec) -> str:
    if "streamlines" not in manifest["files"]:
        raise ValueError("run has no 1D frames; this kind needs a 1D run")
    frames = _frame_masks(run_dir, manifest, spec.shading)
    recs = manifest["files"]["frames"]
    rhos = []
    for rec in recs:
        cols = _read_csv_columns(os.path.join(run_dir, rec["fields"]))
        rhos.append(cols["rho"])
    rho_max = max(float(r.max()) for r in rhos)
    x_all = frames[0][1]
    x0, x1 = spec.x_range or (float(x_all[0]), float(x_all[-1]))
    n = len(frames)
    fr = _Frame(spec, x0, x1, 0.0, float(n))
    body = []
    for j, ((t, x, soft, hard), rho) in enumerate(zip(frames, rhos)):
        base, top = float(j), float(j + 0.92)
        body.extend(_mask_rects(fr, x, soft, fr.y(top), fr.y(base), "soft"))
        body.extend(_mask_rects(fr, x, hard, fr.y(top), fr.y(base), "hard"))
        lane = rho / rho_max * 0.92 + j
        pts = " ".join(f"{_fmt(fr.x(xi))},{_fmt(fr.y(vi))}"
                       for xi, vi in zip(x[::4], lane[::4]))
        body.append(f'<polyline class="curve" points="{pts}"/>')
        body.append(f'<text x="{_fmt(fr.px1 + 4)}" y="{_fmt(fr.y(base) - 2)}">'
                    f't={_fmt(t)}</text>')
    body.extend(fr.axes("x", "frame"))
    return _svg(spec, body)


def _render_potential(run_dir, manifest, spec: RenderSpec) -> str:
    recs = manifest["files"]["frames"]
    if not recs:
        raise ValueError("run has no field frames")
    cols = _read_csv_columns(os.path.join(run_dir, recs[0]["fields"]))
    if "y" in cols:
        raise ValueError("potential landscape needs a 1D run")
    x, U = cols["x"], cols["U"]
    e_plus = float(manifest["derived"]["band_limits"][0])
    levels = [e for e in manifest["derived"]["energies"] if e <= e_plus * 1.05]
    u_cap = max(e_plus * 1.6, float(np.percentile(U, 95)))
    u_lo = min(0.0, float(U.min()))
    x0, x1 = spec.x_range or (float(x[0]), float(x[-1]))
    fr = _Frame(spec, x0, x1, u_lo, u_cap)
    body = []
    # classically forbidden band at the band-limit energy
    body.extend(_mask_rects(fr, x, U > e_plus, fr.py1, fr.py0, "hard"))
    clip = np.minimum(U, u_cap * 1.02)
    pts = " ".join(f"{_fmt(fr.x(xi))},{_fmt(fr.y(vi))}" for xi, vi in zip(x[::2], clip[::2]))
    body.append(f'<polyline class="curve" points="{pts}"/>')
    for e in levels:
        body.append(f'<line class="level" x1="{_fmt(fr.px0)}" y1="{_fmt(fr.y(e))}" '
                    f'x2="{_fmt(fr.px1)}" y2="{_fmt(fr.y(e))}"/>')
    body.append(f'<line class="axis" x1="{_fmt(fr.px0)}" y1="{_fmt(fr.y(e_plus))}" '
                f'x2="{_fmt(fr.px1)}" y2="{_fmt(fr.y(e_plus))}"/>')
    body.append(f'<text x="{_fmt(fr.px1 - 4)}" y="{_fmt(fr.y(e_plus) - 4)}" '
                f'text-anchor="end">E+={_fmt(e_plus)}</text>')
    body.extend(fr.axes("x", "U"))
    return _svg(spec, body)


def _render_vortex(run_dir, manifest, spec: RenderSpec) -> str:
    path = os.path.join(run_dir, manifest["files"].get("vortex_profile", ""))
    if not manifest["files"].get("vortex_profile") or not os.path.exists(path):
        raise ValueError("run has no vortex profile; this kind needs the 2D run")
    cols = _read_csv_columns(path)
    r, ka = cols["r"], cols["K_a"]
    lr, lk = np.log10(r), np.log10(ka)
    fr = _Frame(spec, float(lr.min()), float(lr.max()),
                float(lk.min()) - 0.1, float(lk.max()) + 0.1)
    v = manifest["derived"]["vortex"]
    z, p = v["fit_Z"], v["fit_exponent"]
    body = []
    fit = math.log10(z / 2.0) + p * lr
    pts = " ".join(f"{_fmt(fr.x(a))},{_fmt(fr.y(b))}" for a, b in zip(lr, fit))
    body.append(f'<polyline class="fit" points="{pts}"/>')
    for a, b in zip(lr, lk):
        body.append(f'<circle class="pt" cx="{_fmt(fr.x(a))}" cy="{_fmt(fr.y(b))}" r="2.5"/>')
    body.append(f'<text x="{_fmt(fr.px0 + 8)}" y="{_fmt(fr.py1 + 14)}">'
                f'slope={_fmt(p)} Z={_fmt(z)}</text>')
    body.extend(fr.axes("log10 r", "log10 K_a"))
    return _svg(spec, body)


_RENDERERS = {
    "streamlines": _render_streamlines,
    "densities": _render_densities,
    "potential_landscape": _render_potential,
    "vortex": _render_vortex,
}


def render_run(run_dir, spec: RenderSpec, out_path) -> str:
    """Draw one figure from a completed run directory; returns out_path."""
    manifest = _load_manifest(run_dir)
    text = _RENDERERS[spec.kind](run_dir, manifest, spec)
    with open(out_path, "w") as fh:
        fh.write(text)
    return str(out_path)


def shaded_area(svg_path) -> dict:
    """Total drawn area per shading class, from the rect elements."""
    import re

    with open(svg_path) as fh:
        text = fh.read()
    areas = {"soft": 0.0, "hard": 0.0}
    pat = re.compile(r'<rect class="(soft|hard)"[^>]*width="([0-9.]+)"[^>]*height="([0-9.]+)"')
    for cls, w, h in pat.findall(text):
        areas[cls] += float(w) * float(h)
    return areas


def default_figures(run_dir, shading: str = "qka") -> list:
    """The stock figure set for a run: written next to the manifest."""
    manifest = _load_manifest(run_dir)
    outs = []
    if manifest["name"] == "vortex_2d":
        kinds = ["vortex"]
    else:
        kinds = ["streamlines", "densities", "potential_landscape"]
    for kind in kinds:
        out = os.path.join(run_dir, f"{kind}.svg")
        render_run(run_dir, RenderSpec(kind=kind, shading=shading), out)
        outs.append(out)
    return outs
