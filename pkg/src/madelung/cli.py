"""Command-line front end: scenarios, field exports, tuning, SVG figures.

Thin shell over the library modules; every subcommand maps onto public
functions, prints one line per artifact written, exits 0 on success and
nonzero with a JSON error object on stderr otherwise.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import render as rd
from . import scenarios as sc
from .energy import classify_superoscillation, decompose, decomposition_to_csv, mask_area, masks_to_csv
from .flow import save_node_events, streamlines_to_csv, vortex_profile, vortex_profile_to_csv, circulation
from .grids import field_to_csv
from .spectral import eigenbasis, save_basis
from .states import evaluate


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _emit_error(kind: str, message: str):
    print(json.dumps({"error": kind, "message": str(message)}), file=sys.stderr)


def _config_from_args(args) -> sc.ScenarioConfig:
    if getattr(args, "config", None):
        c = sc.load_config(args.config)
        if getattr(args, "name", None) and args.name != c.name:
            raise ValueError(f"--name {args.name} conflicts with config name {c.name}")
    else:
        if not getattr(args, "name", None):
            raise ValueError("need --name or --config")
        c = sc.default_config(args.name)
    overrides = {}
    for flag, key in (("grid_n", "grid_n"), ("frames", "frames"), ("eta", "eta"),
                      ("tol", "tol"), ("streamlines", "streamlines"),
                      ("wide_barrier", "wide_barrier"),
                      ("barrier_height", "barrier_height")):
        v = getattr(args, flag, None)
        if v is not None and v is not False:
            overrides[key] = v
    if overrides:
        c = sc.default_config(c.name, **{**_asdict_no_name(c), **overrides})
    return c


def _asdict_no_name(c: sc.ScenarioConfig) -> dict:
    import dataclasses

    d = dataclasses.asdict(c)
    d.pop("name")
    return d


def _say(path):
    print(f"wrote {path}")


def _cmd_eigen(args) -> int:
    c = _config_from_args(args)
    b = sc.build_scenario(c)
    if b.basis.grid.ndim != 1:
        raise ValueError("eigen export covers 1D scenarios")
    os.makedirs(args.out, exist_ok=True)
    save_basis(b.basis, args.out)
    _say(os.path.join(args.out, "basis.json"))
    for i, e in enumerate(b.basis.energies):
        print(f"E_{i} = {e:.12g}")
    return 0


def _cmd_evolve(args) -> int:
    c = _config_from_args(args)
    b = sc.build_scenario(c)
    os.makedirs(args.out, exist_ok=True)
    s = b.states[0]
    for j, t in enumerate(np.asarray(b.frame_times, dtype=float)):
        f = evaluate(s, float(t))
        path = os.path.join(args.out, f"psi_{j:04d}.csv")
        field_to_csv(f, path)
        _say(path)
    return 0


def _cmd_fields(args) -> int:
    c = _config_from_args(args)
    b = sc.build_scenario(c)
    os.makedirs(args.out, exist_ok=True)
    d = decompose(b.states[0], args.t)
    p1 = os.path.join(args.out, "decomposition.csv")
    decomposition_to_csv(d, p1)
    _say(p1)
    p2 = os.path.join(args.out, "masks.csv")
    masks_to_csv(classify_superoscillation(d), p2)
    _say(p2)
    return 0


def _cmd_streamlines(args) -> int:
    c = _config_from_args(args)
    b = sc.build_scenario(c)
    os.makedirs(args.out, exist_ok=True)
    from .flow import integrate_streamline, seed_quantiles
    from .grids import ScalarField

    s = b.states[0]
    rho0 = ScalarField(s.grid, np.abs(evaluate(s, b.span[0]).values) ** 2)
    seeds = seed_quantiles(rho0, c.streamlines)
    qs = np.arange(1, c.streamlines + 1) / (c.streamlines + 1.0)
    te = np.linspace(b.span[0], b.span[1], 65)
    lines = [integrate_streamline(s, x0, b.span, t_eval=te, seed_quantile=q)
             for q, x0 in zip(qs, seeds)]
    path = os.path.join(args.out, "streamlines.csv")
    streamlines_to_csv(lines, path)
    _say(path)
    return 0


def _cmd_classify(args) -> int:
    c = _config_from_args(args)
    b = sc.build_scenario(c)
    os.makedirs(args.out, exist_ok=True)
    d = decompose(b.states[0], args.t)
    m = classify_superoscillation(d)
    path = os.path.join(args.out, "masks.csv")
    masks_to_csv(m, path)
    _say(path)
    print(f"area soft_qka = {mask_area(d.grid, m.soft_qka):.6g}  "
          f"soft_qrkc = {mask_area(d.grid, m.soft_qrkc):.6g}  "
          f"hard_qka = {mask_area(d.grid, m.hard_qka):.6g}  "
          f"hard_qrkc = {mask_area(d.grid, m.hard_qrkc):.6g}")
    return 0


def _cmd_vortex(args) -> int:
    c = _config_from_args(args) if (args.name or args.config) else sc.default_config("vortex_2d")
    if c.name != "vortex_2d":
        raise ValueError("vortex analysis needs the vortex_2d scenario")
    b = sc.build_scenario(c)
    os.makedirs(args.out, exist_ok=True)
    s = b.states[0]
    prof = vortex_profile(s, (0.5, 0.5), 0.1, 10)
    path = os.path.join(args.out, "vortex_profile.csv")
    vortex_profile_to_csv(prof, path)
    _say(path)
    circ = circulation(s, (0.5, 0.5), 0.1, orientation=-1)
    print(f"fit_exponent = {prof.fit_exponent:.4f}  fit_Z = {prof.fit_Z:.4f}  "
          f"circulation = {circ:.6f}")
    return 0


def _cmd_tune(args) -> int:
    name = args.scenario or "mzi_1d"
    c = sc.default_config(name, tol=args.tol) if args.tol else sc.default_config(name)
    if c.name != "mzi_1d":
        raise ValueError("tuning applies to the mzi_1d scenario")
    from .grids import Grid1D
    from .states import WavepacketSpec

    grid = Grid1D(-sc.MZI_HALF_WIDTH, sc.MZI_HALF_WIDTH, c.grid_n)
    geo = sc.SplitterGeometry(grid, c.modes, sc._barrier_width_for(c),
                              band_cap=c.band_cap, eta=c.eta)
    packet = WavepacketSpec(c.packet_center, c.packet_momentum, c.packet_width)
    r = sc.tune_beam_splitter(geo, packet, tol=c.tol)
    print(f"U0* = {r.U0_star:.6g}  T = {r.transmission:.6f}  "
          f"probes = {len(r.history)}  bisections = {r.iterations}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "tuning.json")
        with open(path, "w") as fh:
            json.dump({"U0_star": r.U0_star, "transmission": r.transmission,
                       "iterations": r.iterations, "bracket": list(r.bracket),
                       "history": [[u, t] for u, t in r.history]},
                      fh, indent=1, sort_keys=True)
            fh.write("\n")
        _say(path)
    return 0


def _cmd_scenario(args) -> int:
    c = _config_from_args(args)
    manifest = sc.run_scenario(c, args.out)
    _say(os.path.join(args.out, "manifest.json"))
    for rec in manifest["files"]["frames"]:
        _say(os.path.join(args.out, rec["fields"]))
    for key in ("streamlines", "loops", "nodes", "vortex_profile"):
        if key in manifest["files"]:
            _say(os.path.join(args.out, manifest["files"][key]))
    for fig in rd.default_figures(args.out, shading=args.shading or "qka"):
        _say(fig)
    return 0


def _cmd_render(args) -> int:
    spec = rd.RenderSpec(kind=args.kind, shading=args.shading or "qka")
    out = args.out or os.path.join(args.run, f"{args.kind}_{spec.shading}.svg")
    rd.render_run(args.run, spec, out)
    _say(out)
    return 0


def _add_common(p, t_flag=False):
    p.add_argument("--name", help="scenario name")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--grid-n", dest="grid_n", type=int)
    p.add_argument("--frames", type=int)
    p.add_argument("--streamlines", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--barrier-height", dest="barrier_height", type=float)
    p.add_argument("--wide-barrier", dest="wide_barrier", action="store_true", default=None)
    if t_flag:
        p.add_argument("--t", type=float, default=0.0, help="evaluation time")


def build_parser() -> _Parser:
    ap = _Parser(prog="madelung", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigen", help="solve and export an eigenbasis")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_eigen)

    p = sub.add_parser("evolve", help="wavefunction frames over the scenario span")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_evolve)

    p = sub.add_parser("fields", help="energy ledger and masks at one time")
    _add_common(p, t_flag=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_fields)

    p = sub.add_parser("streamlines", help="fluid streamlines over the scenario span")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_streamlines)

    p = sub.add_parser("classify", help="superoscillation masks and areas at one time")
    _add_common(p, t_flag=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_classify)

    p = sub.add_parser("vortex", help="vortex profile and circulation")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_vortex)

    p = sub.add_parser("tune", help="tune the splitter barrier height to 50/50")
    p.add_argument("--scenario", default="mzi_1d")
    p.add_argument("--tol", type=float, default=0.01)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_tune)

    p = sub.add_parser("scenario", help="full deterministic run bundle plus figures")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--shading", choices=rd.SHADINGS)
    p.set_defaults(fn=_cmd_scenario)

    p = sub.add_parser("render", help="draw one SVG figure from a run directory")
    p.add_argument("--run", required=True, help="completed run directory")
    p.add_argument("--kind", required=True, choices=rd.RENDER_KINDS)
    p.add_argument("--shading", choices=rd.SHADINGS)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_render)

    return ap


def run_cli(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        return args.fn(args)
    except _UsageError as exc:
        _emit_error("usage", str(exc))
        return 2
    except (ValueError, OSError, KeyError) as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 1


def main():  # console entry point
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
