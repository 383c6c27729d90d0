"""Polar decomposition of the wavefunction and the full energy ledger.

Splits psi = R e^{iS} into density and phase-derivative fields without ever
unwrapping S, assembles per-particle and density forms of each energy term,
and classifies superoscillation in both the (Q, K_a) and (Q_r, K_c)
pictures.  Natural units hbar = m = 1 throughout.
"""

from dataclasses import dataclass

import numpy as np

from .grids import (
    ComplexField,
    Grid1D,
    ScalarField,
    gradient,
    gradient2d,
    laplacian,
)
from .states import Superposition, evaluate, time_derivative

__all__ = [
    "EPS_NODE",
    "EQ_TOL",
    "MadelungFields",
    "EnergyDecomposition",
    "SuperoscillationMask",
    "polar_fields",
    "energy_decomposition",
    "classify_superoscillation",
    "hj_residual",
    "continuity_residual",
    "decompose",
    "mask_area",
    "decomposition_to_csv",
    "masks_to_csv",
]

# relative density floor below which phase derivatives are unreliable
EPS_NODE = 1e-10
# equality band for classification: boundary points are not superoscillatory
EQ_TOL = 1e-12
# outermost grid points dropped from valid sets (hard-wall stencil pollution)
EDGE_PAD = 2


def _interior_mask(shape) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    if len(shape) == 1:
        mask[EDGE_PAD:-EDGE_PAD] = True
    else:
        mask[EDGE_PAD:-EDGE_PAD, EDGE_PAD:-EDGE_PAD] = True
    return mask


@dataclass
class MadelungFields:
    """Hydrodynamic form of a wavefunction snapshot.

    grad_S is a tuple of one (1D) or two (2D) component fields; v_a equals
    grad_S in natural units.  node_mask marks points where the density is
    large enough for phase derivatives to be meaningful and which sit away
    from the domain edges.
    """

    psi: ComplexField
    dpsidt: ComplexField
    rho: ScalarField
    R: ScalarField
    grad_S: tuple
    dSdt: ScalarField
    node_mask: np.ndarray

    @property
    def grid(self):
        return self.psi.grid

    @property
    def v_a(self) -> tuple:
        return self.grad_S


@dataclass
class EnergyDecomposition:
    """Per-particle energy fields, their density forms, and the band limit.

    Densities equal rho times the per-particle field; where an undivided
    form exists (q = -R lap(R)/2, k_s = |grad R|^2/2, q_r = -lap(rho)/4,
    e_p from the raw phase-derivative numerator, u = rho U) the density is
    built from it directly and keeps the full-grid mask, so integral
    identities are free of node-mask bias.  k_a and k_c genuinely diverge
    at nodes and stay node-masked.  Per-particle forms are the divided
    fields, masked wherever division by rho is unreliable.
    """

    Q: ScalarField
    K_a: ScalarField
    K_s: ScalarField
    Q_r: ScalarField
    K_c: ScalarField
    E_p: ScalarField
    K_cl: ScalarField
    U: ScalarField
    q: ScalarField
    k_a: ScalarField
    k_s: ScalarField
    q_r: ScalarField
    k_c: ScalarField
    e_p: ScalarField
    u: ScalarField
    rho: ScalarField
    E_plus: float

    @property
    def grid(self):
        return self.Q.grid

    @property
    def valid(self) -> np.ndarray:
        return self.Q.mask


@dataclass
class SuperoscillationMask:
    """Six boolean classifications on the grid.

    soft/hard in the (Q, K_a) picture, soft/hard in the (q_r, k_c) density
    picture, and the two classically forbidden indicators.  Points outside
    valid are never flagged.
    """

    grid: object
    soft_qka: np.ndarray
    hard_qka: np.ndarray
    soft_qrkc: np.ndarray
    hard_qrkc: np.ndarray
    forbidden_global: np.ndarray
    forbidden_local: np.ndarray
    valid: np.ndarray


def polar_fields(psi: ComplexField, dpsidt: ComplexField) -> MadelungFields:
    """Decompose a snapshot into density and phase-derivative fields.

    grad_S = Im(conj(psi) grad psi)/rho and dS/dt = Im(conj(psi) dpsi/dt)/rho
    are evaluated only where rho >= EPS_NODE * max(rho) and away from the
    outermost EDGE_PAD points; elsewhere they are zeroed and masked.
    """
    if psi.grid is not dpsidt.grid and psi.grid != dpsidt.grid:
        raise ValueError("psi and dpsidt must share a grid")
    rho_vals = np.abs(psi.values) ** 2
    peak = rho_vals.max()
    if peak == 0.0:
        raise ValueError("wavefunction is identically zero")
    node_mask = (rho_vals >= EPS_NODE * peak) & _interior_mask(rho_vals.shape)

    grid = psi.grid
    full = np.ones_like(node_mask)
    rho = ScalarField(grid, rho_vals, full.copy())
    R = ScalarField(grid, np.sqrt(rho_vals), full.copy())

    if grid.ndim == 1:
        dpsi = (gradient(ComplexField(grid, psi.values, full.copy())),)
    else:
        dpsi = gradient2d(ComplexField(grid, psi.values, full.copy()))

    grad_S = []
    for comp in dpsi:
        num = np.imag(np.conj(psi.values) * comp.values)
        vals = np.zeros_like(rho_vals)
        np.divide(num, rho_vals, out=vals, where=node_mask)
        grad_S.append(ScalarField(grid, vals, node_mask.copy()))

    num_t = np.imag(np.conj(psi.values) * dpsidt.values)
    dSdt_vals = np.zeros_like(rho_vals)
    np.divide(num_t, rho_vals, out=dSdt_vals, where=node_mask)
    dSdt = ScalarField(grid, dSdt_vals, node_mask.copy())

    return MadelungFields(psi, dpsidt, rho, R, tuple(grad_S), dSdt, node_mask)


def _divided(grid, num: np.ndarray, den: np.ndarray, mask: np.ndarray) -> ScalarField:
    vals = np.zeros_like(num)
    np.divide(num, den, out=vals, where=mask)
    return ScalarField(grid, vals, mask.copy())


def energy_decomposition(f: MadelungFields, U: ScalarField, E_plus: float) -> EnergyDecomposition:
    """Assemble the complete energy ledger from hydrodynamic fields.

    Q = -lap(R)/(2R), K_a = |grad S|^2/2, K_s = |grad R|^2/(2R^2),
    Q_r = -lap(rho)/(4 rho), K_c = K_a + K_s, E_p = -dS/dt, K_cl = E_p - U.
    Densities are rho times the per-particle forms; the q_r density comes
    straight from the Laplacian of rho with no division.
    """
    grid = f.grid
    mask = f.node_mask
    rho_vals = f.rho.values

    # undivided densities first: exact forms valid on the whole grid
    lap_R = laplacian(f.R)
    q_vals = -0.5 * f.R.values * lap_R.values
    q = ScalarField(grid, q_vals, lap_R.mask.copy())

    lap_rho = laplacian(f.rho)
    q_r = ScalarField(grid, -0.25 * lap_rho.values, lap_rho.mask.copy())

    ep_vals = -np.imag(np.conj(f.psi.values) * f.dpsidt.values)
    e_p_density = ScalarField(grid, ep_vals, np.ones_like(mask))

    u = ScalarField(grid, rho_vals * U.values, U.mask.copy())

    # kinetic densities: 0.5|grad psi|^2 is smooth across density zeros
    # (|grad R|^2 is not: R kinks at the nodes of real states), so k_c is
    # built undivided from it; the advective part subtracts off to give
    # k_s.  Cauchy-Schwarz makes that difference nonnegative pointwise
    # even in the discrete fields, up to rounding, which is clipped.
    full = np.ones_like(mask)
    if grid.ndim == 1:
        grads_psi = (gradient(ComplexField(grid, f.psi.values, full.copy())),)
    else:
        grads_psi = gradient2d(ComplexField(grid, f.psi.values, full.copy()))
    kc_vals = np.zeros_like(rho_vals)
    for comp in grads_psi:
        kc_vals = kc_vals + 0.5 * np.abs(comp.values) ** 2

    ka_vals = np.zeros_like(rho_vals)
    for comp in f.grad_S:
        ka_vals = ka_vals + 0.5 * comp.values**2
    ka_density = np.where(mask, rho_vals * ka_vals, 0.0)
    k_a = ScalarField(grid, ka_density, mask.copy())

    ks_density = np.maximum(kc_vals - ka_density, 0.0)
    k_s = ScalarField(grid, ks_density, full.copy())
    k_c = ScalarField(grid, ka_density + ks_density, full.copy())

    # per-particle forms: divide by rho, masked near nodes and edges
    Q = _divided(grid, q_vals, rho_vals, mask & q.mask)
    K_s = _divided(grid, ks_density, rho_vals, mask)
    Q_r = _divided(grid, q_r.values, rho_vals, mask & q_r.mask)
    K_a = ScalarField(grid, np.where(mask, ka_vals, 0.0), mask.copy())

    kc_mask = K_a.mask & K_s.mask
    K_c = ScalarField(grid, np.where(kc_mask, K_a.values + K_s.values, 0.0), kc_mask)

    E_p = ScalarField(grid, -f.dSdt.values, f.dSdt.mask.copy())
    kcl_mask = E_p.mask & U.mask
    K_cl = ScalarField(grid, np.where(kcl_mask, E_p.values - U.values, 0.0), kcl_mask)

    return EnergyDecomposition(
        Q=Q, K_a=K_a, K_s=K_s, Q_r=Q_r, K_c=K_c, E_p=E_p, K_cl=K_cl,
        U=ScalarField(grid, U.values.copy(), U.mask.copy()),
        q=q, k_a=k_a, k_s=k_s, q_r=q_r, k_c=k_c,
        e_p=e_p_density, u=u,
        rho=ScalarField(grid, rho_vals.copy(), f.rho.mask.copy()),
        E_plus=float(E_plus),
    )


def classify_superoscillation(d: EnergyDecomposition) -> SuperoscillationMask:
    """Flag the six superoscillation classes.

    Strict inequalities with an EQ_TOL band: points within EQ_TOL of a
    class boundary are left unflagged.  Soft/hard in the density picture
    use the q_r and k_c density fields directly.
    """
    valid = d.Q.mask & d.K_a.mask & d.K_s.mask & d.E_p.mask
    head = d.E_plus - d.U.values

    soft_qka = valid & (d.Q.values < -EQ_TOL)
    hard_qka = valid & (d.K_a.values - head > EQ_TOL)
    soft_qrkc = valid & (d.q_r.values < -EQ_TOL)
    hard_qrkc = valid & (d.k_c.values - (d.rho.values * d.E_plus - d.u.values) > EQ_TOL)
    forbidden_global = valid & (head < -EQ_TOL)
    forbidden_local = valid & (d.K_cl.values < -EQ_TOL)

    return SuperoscillationMask(
        grid=d.grid, soft_qka=soft_qka, hard_qka=hard_qka,
        soft_qrkc=soft_qrkc, hard_qrkc=hard_qrkc,
        forbidden_global=forbidden_global, forbidden_local=forbidden_local,
        valid=valid,
    )


def hj_residual(d: EnergyDecomposition) -> ScalarField:
    """Hamilton-Jacobi balance K_a + Q + U - E_p; zero in the continuum."""
    mask = d.K_a.mask & d.Q.mask & d.U.mask & d.E_p.mask
    vals = np.where(mask, d.K_a.values + d.Q.values + d.U.values - d.E_p.values, 0.0)
    return ScalarField(d.grid, vals, mask)


def continuity_residual(s: Superposition, t: float, dt: float) -> ScalarField:
    """Mass balance d(rho)/dt + div(rho v_a) at time t.

    The time derivative is a centered difference over dt; the divergence
    uses the grid stencils, so the residual carries O(dt^2) + O(h^2).
    """
    psi = evaluate(s, t)
    f = polar_fields(psi, time_derivative(s, t))
    rho_p = np.abs(evaluate(s, t + dt).values) ** 2
    rho_m = np.abs(evaluate(s, t - dt).values) ** 2
    drho = (rho_p - rho_m) / (2.0 * dt)

    grid = f.grid
    if grid.ndim == 1:
        flux = ScalarField(grid, f.rho.values * f.grad_S[0].values, f.grad_S[0].mask.copy())
        div = gradient(flux)
        vals = np.where(div.mask, drho + div.values, 0.0)
        return ScalarField(grid, vals, div.mask)
    fx = ScalarField(grid, f.rho.values * f.grad_S[0].values, f.grad_S[0].mask.copy())
    fy = ScalarField(grid, f.rho.values * f.grad_S[1].values, f.grad_S[1].mask.copy())
    dx = gradient2d(fx)[0]
    dy = gradient2d(fy)[1]
    mask = dx.mask & dy.mask
    vals = np.where(mask, drho + dx.values + dy.values, 0.0)
    return ScalarField(grid, vals, mask)


def decompose(s: Superposition, t: float, U: ScalarField = None,
              E_plus: float = None) -> EnergyDecomposition:
    """Evaluate a superposition at time t and build its energy ledger.

    U defaults to the basis potential sampled on the basis grid (zero for
    bases without one); E_plus defaults to the state's band limit.
    """
    from .spectral import sample_potential
    from .states import band_limit

    grid = s.grid
    if U is None:
        pot = s.basis.potential
        if pot is None:
            U = ScalarField(grid, np.zeros(grid.shape if grid.ndim == 2 else grid.n),
                            np.ones(grid.shape if grid.ndim == 2 else grid.n, dtype=bool))
        else:
            U = sample_potential(pot, grid)
    if E_plus is None:
        E_plus = band_limit(s)
    f = polar_fields(evaluate(s, t), time_derivative(s, t))
    return energy_decomposition(f, U, E_plus)


def mask_area(grid, flags: np.ndarray) -> float:
    """Total length (1D) or area (2D) of the flagged cells."""
    if isinstance(grid, Grid1D):
        return float(flags.sum()) * grid.h
    return float(flags.sum()) * grid.grid_x.h * grid.grid_y.h


def ledger_integrals(d: EnergyDecomposition) -> dict:
    """Integrals of the density-form ledger entries over the grid.

    Uses uniform (trapezoid) weights: the density forms are built from the
    same difference operators as the Hamiltonian, and those operators
    telescope exactly under uniform weights, so identities like
    int q_r = 0 hold to rounding even when the potential has steps.
    Higher-order panel rules weight neighbouring points unequally, lose
    the telescoping, and stall near O(h) on densities with curvature
    jumps.
    """
    g = d.grid
    if isinstance(g, Grid1D):
        w = np.full(g.n, g.h)
        w[0] = w[-1] = 0.5 * g.h
    else:
        wx = np.full(g.grid_x.n, g.grid_x.h)
        wx[0] = wx[-1] = 0.5 * g.grid_x.h
        wy = np.full(g.grid_y.n, g.grid_y.h)
        wy[0] = wy[-1] = 0.5 * g.grid_y.h
        w = np.outer(wx, wy)
    out = {}
    for name in ("q", "k_a", "k_s", "q_r", "k_c", "e_p", "u"):
        out[name] = float(np.sum(w * getattr(d, name).values))
    return out


def _coord_columns(grid):
    if grid.ndim == 1:
        return ("x",), (grid.x,)
    X, Y = grid.mesh()
    return ("x", "y"), (X.ravel(), Y.ravel())


_DECOMP_COLS = ("Q", "K_a", "K_s", "Q_r", "K_c", "E_p", "K_cl", "U",
                "q", "k_a", "k_s", "q_r", "k_c", "e_p", "u", "rho")


def decomposition_to_csv(d: EnergyDecomposition, path: str):
    """One row per grid point: coordinates, every ledger field, valid flag."""
    import csv

    names, coords = _coord_columns(d.grid)
    fields = [getattr(d, c) for c in _DECOMP_COLS]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(names) + list(_DECOMP_COLS) + ["valid"])
        cols = [c for c in coords] + [f.values.ravel() for f in fields]
        valid = d.valid.ravel()
        for i in range(len(cols[0])):
            w.writerow([f"{c[i]:.17g}" for c in cols] + [int(valid[i])])


_MASK_COLS = ("soft_qka", "hard_qka", "soft_qrkc", "hard_qrkc",
              "forbidden_global", "forbidden_local")


def masks_to_csv(m: SuperoscillationMask, path: str):
    """One row per grid point: coordinates, six 0/1 flags, valid flag."""
    import csv

    names, coords = _coord_columns(m.grid)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(names) + list(_MASK_COLS) + ["valid"])
        flags = [getattr(m, c).ravel() for c in _MASK_COLS]
        valid = m.valid.ravel()
        for i in range(len(valid)):
            w.writerow([f"{c[i]:.17g}" for c in coords]
                       + [int(fl[i]) for fl in flags] + [int(valid[i])])
