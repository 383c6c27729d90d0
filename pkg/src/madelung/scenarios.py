"""Preset scenarios: the stock well / oscillator / double-well / pulse /
vortex configurations, transmission measurement, and 50/50 beam-splitter
tuning, with deterministic file bundles per run."""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .energy import classify_superoscillation, decompose, decomposition_to_csv, masks_to_csv
from .flow import (
    circulation,
    find_nodes,
    integrate_loop_2d,
    integrate_streamline,
    loop_seeds_on_axis,
    loops_to_csv,
    node_events_to_json,
    save_node_events,
    seed_quantiles,
    streamlines_to_csv,
    vortex_profile,
    vortex_profile_to_csv,
)
from .grids import Grid1D, Grid2D, ScalarField
from .spectral import (
    EigenBasis,
    Harmonic,
    InfiniteWell,
    QuarticDoubleWell,
    WellWithBarrier,
    eigenbasis,
    product_basis_2d,
    snapped_barrier_width,
)
from .states import (
    Superposition,
    WavepacketSpec,
    band_limit,
    cap_modes,
    equal_two_mode,
    evaluate,
    project_field,
    project_gaussian,
    superposition,
)

SCENARIOS = (
    "well_superposition",
    "well_barrier_superposition",
    "ho_eigenstates",
    "ho_superposition",
    "quartic_eigenstates",
    "quartic_superposition",
    "reflection_pulse",
    "mzi_1d",
    "vortex_2d",
)

# stock geometry in natural units (hbar = m = unit length = 1)
WELL_HALF_WIDTH = 1.0
BARRIER_HEIGHT = 15.0
BARRIER_WIDTH = 0.2
OMEGA = 10.0
HO_HALF_SPAN = 3.0
QUARTIC_HALF_SPAN = 1.25
REFLECT_HALF_WIDTH = 0.5
MZI_HALF_WIDTH = 2.0
MEASURE_TIME = 1.0 / 30.0
MZI_SPAN = 0.1
REFLECT_SPAN = 0.04
VORTEX_PAIRS = ((1, 2), (2, 1))
BARRIER_CLEARANCE = 1e-4


@dataclass(frozen=True)
class ScenarioConfig:
    """Resolved run parameters; defaults carry the stock values."""

    name: str
    grid_n: int
    modes: int
    frames: int = 64
    streamlines: int = 9
    eta: float = 1e-3
    tol: float = 0.01
    packet_center: float | None = None
    packet_momentum: float | None = None
    packet_width: float | None = None
    band_cap: int | None = None
    barrier_height: float | None = None
    barrier_width: float | None = None
    wide_barrier: bool = False
    write_fields: bool = True

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.name!r}; choose from {SCENARIOS}")
        if self.grid_n < 3:
            raise ValueError("grid_n must be at least 3")
        if self.frames < 1 or self.modes < 1 or self.streamlines < 1:
            raise ValueError("frames, modes, and streamlines must be positive")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")


_DEFAULTS = {
    "well_superposition": dict(grid_n=2001, modes=4),
    "well_barrier_superposition": dict(
        grid_n=2001, modes=6, barrier_height=BARRIER_HEIGHT, barrier_width=BARRIER_WIDTH
    ),
    "ho_eigenstates": dict(grid_n=2001, modes=4, frames=2),
    "ho_superposition": dict(grid_n=2001, modes=4),
    "quartic_eigenstates": dict(grid_n=2001, modes=6, frames=2),
    "quartic_superposition": dict(grid_n=2001, modes=6),
    "reflection_pulse": dict(
        grid_n=2001, modes=40, packet_center=0.0, packet_momentum=25.0,
        packet_width=0.08, band_cap=18,
    ),
    "mzi_1d": dict(
        grid_n=2001, modes=140, packet_center=-1.0, packet_momentum=60.0,
        packet_width=0.23, band_cap=89,
        barrier_width=MZI_HALF_WIDTH * 2.0 / 4.0 / 50.0,
    ),
    "vortex_2d": dict(grid_n=161, modes=2, frames=1, streamlines=4),
}


def default_config(name: str, **overrides) -> ScenarioConfig:
    if name not in _DEFAULTS:
        raise ValueError(f"unknown scenario {name!r}; choose from {SCENARIOS}")
    fields = dict(_DEFAULTS[name])
    fields.update(overrides)
    return ScenarioConfig(name=name, **fields)


# --------------------------------------------------------------- config I/O

_BOOL_WORDS = {"true": True, "false": False, "yes": True, "no": False}


def config_to_text(c: ScenarioConfig) -> str:
    lines = []
    for f in dataclasses.fields(ScenarioConfig):
        v = getattr(c, f.name)
        if v is None:
            v = "none"
        elif isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = f"{v!r}"
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def config_from_text(text: str) -> ScenarioConfig:
    pairs = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line (want key = value): {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        pairs[key] = val
    if "name" not in pairs:
        raise ValueError("config missing the scenario name")
    known = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
    unknown = set(pairs) - set(known)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    out = {}
    for key, val in pairs.items():
        if val.lower() == "none":
            out[key] = None
        elif key in ("name",):
            out[key] = val
        elif key in ("wide_barrier", "write_fields"):
            if val.lower() not in _BOOL_WORDS:
                raise ValueError(f"bad boolean for {key}: {val!r}")
            out[key] = _BOOL_WORDS[val.lower()]
        elif key in ("grid_n", "modes", "frames", "streamlines", "band_cap"):
            out[key] = int(val)
        else:
            out[key] = float(val)
    name = out.pop("name")
    fields = dict(_DEFAULTS[name]) if name in _DEFAULTS else {}
    fields.update(out)
    return ScenarioConfig(name=name, **fields)


def load_config(path) -> ScenarioConfig:
    with open(path) as fh:
        return config_from_text(fh.read())


def save_config(c: ScenarioConfig, path):
    with open(path, "w") as fh:
        fh.write(config_to_text(c))


# ------------------------------------------------------------- measurement


def transmission(s: Superposition, x_split: float, t_measure: float) -> float:
    """Probability beyond x_split once the packet has cleared the barrier.

    Requires the barrier region to hold under 1e-4 probability at the
    measurement time (the split halves must have separated).
    """
    g = s.grid
    if g.ndim != 1:
        raise ValueError("transmission is a 1D measurement")
    rho = np.abs(evaluate(s, float(t_measure)).values) ** 2
    total = np.trapezoid(rho, g.x)
    pot = s.basis.potential
    if isinstance(pot, WellWithBarrier):
        half = 0.5 * pot.barrier_width
        lo, hi = -half, half
    else:
        lo, hi = x_split - 2 * g.h, x_split + 2 * g.h
    sel = (g.x >= lo) & (g.x <= hi)
    p_bar = float(np.trapezoid(rho[sel], g.x[sel]) / total)
    if p_bar >= BARRIER_CLEARANCE:
        raise ValueError(
            f"packet has not cleared the barrier: region [{lo:g}, {hi:g}] holds "
            f"probability {p_bar:.3e} at t = {t_measure:g}"
        )
    beyond = g.x >= x_split
    return float(np.trapezoid(rho[beyond], g.x[beyond]) / total)


@dataclass(frozen=True)
class SplitterGeometry:
    """Barrier-well layout probed by the tuner."""

    grid: Grid1D
    modes: int
    barrier_width: float
    half_width: float = MZI_HALF_WIDTH
    x_split: float = 0.0
    t_measure: float = MEASURE_TIME
    band_cap: int | None = 89
    eta: float = 1e-3


@dataclass(frozen=True)
class TuningResult:
    U0_star: float
    transmission: float
    iterations: int
    bracket: tuple
    history: tuple

    def __post_init__(self):
        if not np.isfinite(self.transmission):
            raise ValueError("transmission not finite")


def _launch_state(geo: SplitterGeometry, packet: WavepacketSpec) -> Superposition:
    free = eigenbasis(InfiniteWell(geo.half_width), geo.grid, geo.modes)
    sp = project_gaussian(free, packet, eta=geo.eta)
    if geo.band_cap is not None:
        sp = cap_modes(sp, geo.band_cap)
    return sp


def _splitter_transmission(geo: SplitterGeometry, launch: Superposition,
                           u0: float) -> float:
    pot = WellWithBarrier(geo.half_width, float(u0), geo.barrier_width)
    basis = eigenbasis(pot, geo.grid, geo.modes)
    s = project_field(basis, evaluate(launch, 0.0).values, eta=geo.eta)
    return transmission(s, geo.x_split, geo.t_measure)


def tune_beam_splitter(geometry: SplitterGeometry, packet: WavepacketSpec,
                       tol: float = 0.01,
                       probe_range: tuple = (250.0, 16000.0),
                       max_bisect: int = 30) -> TuningResult:
    """Bisect the barrier height until the packet splits 50/50.

    Each probe re-solves the barrier-well eigenbasis and re-projects the
    packet. A geometric ladder over probe_range first verifies a bracket
    with T(low) > 0.5 > T(high) and that T is decreasing across the probes.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    launch = _launch_state(geometry, packet)
    history = []

    def probe(u0: float) -> float:
        t = _splitter_transmission(geometry, launch, u0)
        history.append((float(u0), float(t)))
        return t

    lo, hi = probe_range
    ladder = [lo]
    while ladder[-1] < hi:
        ladder.append(min(ladder[-1] * 2.0, hi))
    pairs = []
    for u0 in ladder:
        t = probe(u0)
        if abs(t - 0.5) < tol:
            return TuningResult(float(u0), t, 0, (float(u0), float(u0)),
                                tuple(history))
        pairs.append((u0, t))
        if len(pairs) >= 2 and pairs[-1][1] > pairs[-2][1] + 1e-3:
            raise ValueError(
                f"transmission not decreasing across probes: {pairs}"
            )
        if len(pairs) >= 2 and pairs[-2][1] > 0.5 > pairs[-1][1]:
            break
    else:
        raise ValueError(
            f"no bracket with T(low) > 0.5 > T(high) in {probe_range}; "
            f"probed (U0, T) pairs: {history}"
        )

    b_lo, b_hi = pairs[-2][0], pairs[-1][0]
    t_mid = None
    for it in range(1, max_bisect + 1):
        mid = 0.5 * (b_lo + b_hi)
        t_mid = probe(mid)
        if abs(t_mid - 0.5) < tol:
            return TuningResult(float(mid), float(t_mid), it,
                                (float(b_lo), float(b_hi)), tuple(history))
        if t_mid > 0.5:
            b_lo = mid
        else:
            b_hi = mid
    raise ValueError(
        f"bisection did not reach |T - 0.5| < {tol} in {max_bisect} steps; "
        f"last bracket ({b_lo}, {b_hi}), last T {t_mid}"
    )


# ------------------------------------------------------------ construction


@dataclass
class ScenarioBundle:
    """In-memory scenario products: basis, states, and timing."""

    config: ScenarioConfig
    basis: EigenBasis
    states: list
    labels: list
    frame_times: np.ndarray
    frame_states: list
    span: tuple
    period: float | None
    tuning: TuningResult | None
    extras: dict


def _barrier_width_for(c: ScenarioConfig) -> float:
    if c.wide_barrier:
        # alternate reading: one fiftieth of the full well width
        return MZI_HALF_WIDTH * 2.0 / 50.0
    if c.barrier_width is not None:
        return c.barrier_width
    return MZI_HALF_WIDTH * 2.0 / 4.0 / 50.0


def build_scenario(c: ScenarioConfig) -> ScenarioBundle:
    """Construct the basis and state(s) for a config, tuning the splitter
    height when the config leaves it open."""
    name = c.name
    extras: dict = {}
    tuning = None
    period = None

    if name == "vortex_2d":
        axis = Grid1D(0.0, 1.0, c.grid_n)
        grid2 = Grid2D(axis, axis)
        basis = product_basis_2d(list(VORTEX_PAIRS), grid2)
        state = superposition(
            basis, [0, 1], np.array([1.0, 1.0j]) / math.sqrt(2.0)
        )
        span = (0.0, 0.05)
        return ScenarioBundle(c, basis, [state], ["state"],
                              np.array([0.0]), [0], span, None, None, extras)

    if name in ("well_superposition", "well_barrier_superposition",
                "ho_superposition", "ho_eigenstates",
                "quartic_superposition", "quartic_eigenstates"):
        if name.startswith("well"):
            grid = Grid1D(-WELL_HALF_WIDTH, WELL_HALF_WIDTH, c.grid_n)
            if name == "well_barrier_superposition":
                pot = WellWithBarrier(
                    WELL_HALF_WIDTH,
                    c.barrier_height if c.barrier_height is not None else BARRIER_HEIGHT,
                    c.barrier_width if c.barrier_width is not None else BARRIER_WIDTH,
                )
                extras["barrier"] = {
                    "height": pot.barrier_height,
                    "width": pot.barrier_width,
                    "width_on_grid": snapped_barrier_width(pot, grid),
                }
            else:
                pot = InfiniteWell(WELL_HALF_WIDTH)
        elif name.startswith("ho"):
            grid = Grid1D(-HO_HALF_SPAN, HO_HALF_SPAN, c.grid_n)
            pot = Harmonic(OMEGA)
        else:
            grid = Grid1D(-QUARTIC_HALF_SPAN, QUARTIC_HALF_SPAN, c.grid_n)
            pot = QuarticDoubleWell()
        basis = eigenbasis(pot, grid, c.modes)
        period = 2.0 * math.pi / (basis.energies[1] - basis.energies[0])
        if name.endswith("eigenstates"):
            states = [superposition(basis, [0], [1.0]),
                      superposition(basis, [1], [1.0])]
            labels = ["mode_0", "mode_1"]
            frame_times = np.zeros(len(states))
            frame_states = list(range(len(states)))
        else:
            states = [equal_two_mode(basis, 0, 1)]
            labels = ["state"]
            frame_times = np.arange(c.frames) * (period / c.frames)
            frame_states = [0] * c.frames
        return ScenarioBundle(c, basis, states, labels, frame_times,
                              frame_states, (0.0, period), period, None, extras)

    packet = WavepacketSpec(c.packet_center, c.packet_momentum, c.packet_width)

    if name == "reflection_pulse":
        grid = Grid1D(-REFLECT_HALF_WIDTH, REFLECT_HALF_WIDTH, c.grid_n)
        basis = eigenbasis(InfiniteWell(REFLECT_HALF_WIDTH), grid, c.modes)
        state = project_gaussian(basis, packet, eta=c.eta)
        if c.band_cap is not None:
            state = cap_modes(state, c.band_cap)
        extras["band"] = {
            "truncation_index": int(state.meta["truncation_index"]),
            "band_limit": band_limit(state),
        }
        span = (0.0, REFLECT_SPAN)
        frame_times = np.arange(c.frames) * (span[1] / c.frames)
        return ScenarioBundle(c, basis, [state], ["state"], frame_times,
                              [0] * c.frames, span, None, None, extras)

    # mzi_1d: band-limited launch in the free well, then re-projection onto
    # the barrier well at the (tuned or given) height
    grid = Grid1D(-MZI_HALF_WIDTH, MZI_HALF_WIDTH, c.grid_n)
    width = _barrier_width_for(c)
    geo = SplitterGeometry(grid, c.modes, width, MZI_HALF_WIDTH,
                           band_cap=c.band_cap, eta=c.eta)
    launch = _launch_state(geo, packet)
    if c.barrier_height is None:
        tuning = tune_beam_splitter(geo, packet, tol=c.tol)
        u0 = tuning.U0_star
    else:
        u0 = c.barrier_height
    pot = WellWithBarrier(MZI_HALF_WIDTH, float(u0), width)
    basis = eigenbasis(pot, grid, c.modes)
    state = project_field(basis, evaluate(launch, 0.0).values, eta=c.eta)
    extras["barrier"] = {
        "height": float(u0),
        "width": width,
        "width_on_grid": snapped_barrier_width(pot, grid),
        "width_rule": "full_width/50" if c.wide_barrier else "unit_length/50",
    }
    extras["band"] = {
        "launch_truncation_index": int(launch.meta["truncation_index"]),
        "truncation_index": int(state.meta["truncation_index"]),
        "band_limit": band_limit(state),
    }
    span = (0.0, MZI_SPAN)
    frame_times = np.arange(c.frames) * (span[1] / c.frames)
    return ScenarioBundle(c, basis, [state], ["state"], frame_times,
                          [0] * c.frames, span, None, tuning, extras)


# -------------------------------------------------------------- run bundle


def _round_trip_report(state: Superposition, t_end: float) -> dict:
    # the recombined packet exits a single port; for a symmetric lossless
    # barrier at 50/50 with equal arms that port is the far side (the
    # launch-port amplitude t^2 + r^2 vanishes), so the fraction is
    # reported per port rather than asserted for a particular side
    g = state.grid
    rho = np.abs(evaluate(state, t_end).values) ** 2
    total = np.trapezoid(rho, g.x)
    launch = g.x <= 0.0
    p_launch = float(np.trapezoid(rho[launch], g.x[launch]) / total)
    return {
        "t": float(t_end),
        "launch_side_probability": p_launch,
        "far_side_probability": 1.0 - p_launch,
        "recombination_fraction": max(p_launch, 1.0 - p_launch),
        "exit_port": "launch" if p_launch >= 0.5 else "far",
    }


def run_scenario(c: ScenarioConfig, out_dir) -> dict:
    """Execute a scenario and write its deterministic bundle under out_dir:
    manifest.json, config.txt, per-frame field and mask CSVs, streamlines
    (or 2D loops), node events, and the vortex profile where applicable.
    Returns the manifest."""
    b = build_scenario(c)
    os.makedirs(out_dir, exist_ok=True)
    frames_dir = os.path.join(out_dir, "frames")
    os.makedirs(frames_dir, exist_ok=True)

    files: dict = {"config": "config.txt", "frames": []}
    save_config(c, os.path.join(out_dir, "config.txt"))

    decomps = []
    for i, (t, si) in enumerate(zip(b.frame_times, b.frame_states)):
        d = decompose(b.states[si], float(t))
        decomps.append(d)
        if c.write_fields:
            dname = f"frames/decomp_{i:04d}.csv"
            mname = f"frames/masks_{i:04d}.csv"
            decomposition_to_csv(d, os.path.join(out_dir, dname))
            masks_to_csv(classify_superoscillation(d), os.path.join(out_dir, mname))
            files["frames"].append({"index": i, "t": float(t),
                                    "state": b.labels[si],
                                    "fields": dname, "masks": mname})

    derived: dict = {
        "energies": [float(e) for e in b.basis.energies[: min(b.basis.k, 12)]],
        "span": [float(b.span[0]), float(b.span[1])],
        "frame_times": [float(t) for t in b.frame_times],
        "band_limits": [float(band_limit(s)) for s in b.states],
    }
    if b.period is not None:
        derived["period"] = float(b.period)
    derived.update(b.extras)

    if c.name == "vortex_2d":
        state = b.states[0]
        seeds = loop_seeds_on_axis(state, c.streamlines, 0.5)
        te = np.linspace(0.0, 0.5, 129)
        loops = []
        for q, y0 in zip(
            np.arange(1, c.streamlines + 1) / (c.streamlines + 1.0), seeds
        ):
            loops.append(integrate_loop_2d(state, (0.5, y0), (0.0, 0.5),
                                           t_eval=te, seed_quantile=q))
        loops_to_csv(loops, os.path.join(out_dir, "loops.csv"))
        files["loops"] = "loops.csv"

        events = find_nodes(state, b.span, nt=9)
        save_node_events(events, os.path.join(out_dir, "nodes.json"))
        files["nodes"] = "nodes.json"
        derived["node_events"] = node_events_to_json(events)

        h = max(state.grid.grid_x.h, state.grid.grid_y.h)
        profile = vortex_profile(state, (0.5, 0.5), 0.1, 10)
        vortex_profile_to_csv(profile, os.path.join(out_dir, "vortex_profile.csv"))
        files["vortex_profile"] = "vortex_profile.csv"
        derived["vortex"] = {
            "fit_exponent": float(profile.fit_exponent),
            "fit_Z": float(profile.fit_Z),
            "stencil_floor": 2.0 * h,
            "circulation_along_swirl": float(
                circulation(state, (0.5, 0.5), 0.1, orientation=-1)
            ),
            "circulation_counterclockwise": float(
                circulation(state, (0.5, 0.5), 0.1, orientation=1)
            ),
        }
    else:
        state = b.states[0]
        t_eval = np.asarray(b.frame_times, dtype=float)
        if t_eval.size < 2 or not (np.diff(t_eval) > 0).all():
            t_eval = np.linspace(b.span[0], b.span[1], 33)
        rho0 = ScalarField(
            state.grid, np.abs(evaluate(state, b.span[0]).values) ** 2
        )
        seeds = seed_quantiles(rho0, c.streamlines)
        qs = np.arange(1, c.streamlines + 1) / (c.streamlines + 1.0)
        lines = [
            integrate_streamline(state, x0, b.span, t_eval=t_eval, seed_quantile=q)
            for q, x0 in zip(qs, seeds)
        ]
        streamlines_to_csv(lines, os.path.join(out_dir, "streamlines.csv"))
        files["streamlines"] = "streamlines.csv"
        derived["streamline_flags"] = [
            {"seed_q": ln.seed_quantile, "t_flag": ln.t_flag}
            for ln in lines if ln.flagged
        ]

        node_source = b.states[-1]
        if b.period is not None:
            # one period shifted off t = 0 so both generic events (phase
            # pi and 2 pi) sit strictly inside the window
            window = (b.period / 16.0, b.period * 17.0 / 16.0)
        else:
            window = b.span
        events = find_nodes(node_source, window)
        save_node_events(events, os.path.join(out_dir, "nodes.json"))
        files["nodes"] = "nodes.json"
        derived["node_events"] = node_events_to_json(events)

    if b.tuning is not None:
        derived["tuning"] = {
            "U0_star": b.tuning.U0_star,
            "transmission": b.tuning.transmission,
            "iterations": b.tuning.iterations,
            "bracket": list(b.tuning.bracket),
            "history": [[u, t] for u, t in b.tuning.history],
        }
    if c.name == "mzi_1d":
        derived["round_trip"] = _round_trip_report(b.states[0], b.span[1])

    manifest = {"name": c.name, "config": dataclasses.asdict(c),
                "derived": derived, "files": files}
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return manifest
