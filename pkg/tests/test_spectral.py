"""Eigenproblem tests: analytic oracles, convergence orders, caching."""

import math

import numpy as np
import pytest

from madelung.grids import Grid1D, Grid2D, integrate, quadrature
from madelung.spectral import (
    EigenBasis,
    Harmonic,
    InfiniteWell,
    QuarticDoubleWell,
    SymTridiag,
    Tabulated,
    WellWithBarrier,
    analytic_harmonic,
    analytic_infinite_well,
    build_hamiltonian,
    eigenbasis,
    load_basis,
    product_basis_2d,
    sample_potential,
    save_basis,
    snapped_barrier_width,
    solve_eigen,
)
from madelung.grids import ScalarField

E1_WELL = math.pi**2 / 8.0  # ground state of the half-width-1 hard well

# Frozen double-well eigenvalues from the n=2001/n=4001 FD solves on
# [-1.25, 1.25] (Richardson-consistent to ~1e-5); used as regression pins.
QUARTIC_E0 = 8.7567
QUARTIC_E1 = 10.7090


class TestPotentials:
    def test_well_zero_inside(self):
        g = Grid1D(-1.0, 1.0, 201)
        u = sample_potential(InfiniteWell(1.0), g)
        assert np.all(u.values == 0.0)

    def test_barrier_heights(self):
        g = Grid1D(-1.0, 1.0, 2001)
        u = sample_potential(WellWithBarrier(1.0, 15.0, 0.2), g)
        inside = np.abs(g.x) < 0.1 - 1e-12
        outside = np.abs(g.x) > 0.1 + 1e-12
        assert np.all(u.values[inside] == 15.0)
        assert np.all(u.values[outside] == 0.0)

    def test_barrier_snap_width(self):
        g = Grid1D(-1.0, 1.0, 2001)
        assert snapped_barrier_width(WellWithBarrier(1.0, 15.0, 0.2), g) == pytest.approx(0.2)
        # a width that does not land on grid points gets snapped
        w = snapped_barrier_width(WellWithBarrier(1.0, 15.0, 0.0013), g)
        assert w == pytest.approx(0.002, abs=1e-12)

    def test_quartic_shape(self):
        g = Grid1D(-1.25, 1.25, 501)
        u = sample_potential(QuarticDoubleWell(), g)
        x = g.x
        assert u.values[np.argmin(np.abs(x))] == pytest.approx(15.0)
        assert u.values[np.argmin(np.abs(x - 0.5))] == pytest.approx(0.0, abs=1e-12)
        assert u.values[np.argmin(np.abs(x + 0.5))] == pytest.approx(0.0, abs=1e-12)

    def test_tabulated_gauge_shift(self):
        # constant potential shifts all eigenvalues by the constant
        g = Grid1D(-1.0, 1.0, 801)
        base = solve_eigen(build_hamiltonian(InfiniteWell(1.0), g), 3, g)
        shifted_pot = Tabulated(ScalarField(g, np.full(g.n, 2.5)))
        shifted = solve_eigen(build_hamiltonian(shifted_pot, g), 3, g)
        assert np.allclose(shifted.energies - base.energies, 2.5, atol=1e-9)


class TestHamiltonian:
    def test_stencil_entries(self):
        g = Grid1D(0.0, 4.0, 5)  # h = 1
        H = build_hamiltonian(InfiniteWell(2.0), Grid1D(-2.0, 2.0, 5))
        assert np.allclose(H.diagonal, 1.0)
        assert np.allclose(H.offdiag, -0.5)
        assert len(H.diagonal) == 3

    def test_barrier_diagonal_bump(self):
        g = Grid1D(-1.0, 1.0, 2001)
        H0 = build_hamiltonian(InfiniteWell(1.0), g)
        Hb = build_hamiltonian(WellWithBarrier(1.0, 15.0, 0.2), g)
        bump = Hb.diagonal - H0.diagonal
        inner = np.abs(g.x[1:-1]) < 0.1 - 1e-12
        assert np.all(bump[inner] == 15.0)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            SymTridiag(np.ones(5), np.ones(5))


class TestAnalyticBases:
    def test_well_energies(self):
        g = Grid1D(-1.0, 1.0, 2001)
        e1, psi1 = analytic_infinite_well(1, 1.0, g)
        e2, _ = analytic_infinite_well(2, 1.0, g)
        assert e1 == pytest.approx(E1_WELL, rel=1e-14)
        assert e2 == pytest.approx(4.0 * E1_WELL, rel=1e-14)
        assert integrate(ScalarField(g, psi1.values**2)) == pytest.approx(1.0, abs=1e-10)

    def test_well_sign_convention(self):
        g = Grid1D(-1.0, 1.0, 501)
        for n in range(1, 5):
            _, psi = analytic_infinite_well(n, 1.0, g)
            lead = psi.values[np.abs(psi.values) > 1e-8 * np.abs(psi.values).max()][0]
            assert lead > 0

    def test_well_wrong_grid(self):
        with pytest.raises(ValueError):
            analytic_infinite_well(1, 1.0, Grid1D(-0.9, 1.0, 101))

    def test_harmonic_energies_and_parity(self):
        g = Grid1D(-3.0, 3.0, 2001)
        e0, psi0 = analytic_harmonic(0, 10.0, g)
        e1, psi1 = analytic_harmonic(1, 10.0, g)
        assert e0 == pytest.approx(5.0)
        assert e1 == pytest.approx(15.0)
        assert np.allclose(psi0.values, psi0.values[::-1], atol=1e-13)
        assert np.allclose(psi1.values, -psi1.values[::-1], atol=1e-13)

    def test_harmonic_narrow_grid_rejected(self):
        with pytest.raises(ValueError, match="narrow"):
            analytic_harmonic(0, 10.0, Grid1D(-2.0, 2.0, 801))

    def test_harmonic_orthonormal_high_mode(self):
        g = Grid1D(-4.0, 4.0, 4001)
        _, psi5 = analytic_harmonic(5, 10.0, g)
        _, psi3 = analytic_harmonic(3, 10.0, g)
        assert quadrature(g, psi5.values**2) == pytest.approx(1.0, abs=1e-9)
        assert abs(quadrature(g, psi5.values * psi3.values)) < 1e-9


class TestSolveEigen:
    def test_well_against_analytic(self):
        # acceptance-grade: n=2001, k=4, 0.1 percent
        g = Grid1D(-1.0, 1.0, 2001)
        basis = solve_eigen(build_hamiltonian(InfiniteWell(1.0), g), 4, g)
        for n in range(1, 5):
            expect = n**2 * E1_WELL
            assert basis.energies[n - 1] == pytest.approx(expect, rel=1e-3)

    def test_harmonic_against_analytic(self):
        g = Grid1D(-2.0, 2.0, 2001)
        basis = solve_eigen(build_hamiltonian(Harmonic(10.0), g), 3, g)
        for n in range(3):
            assert basis.energies[n] == pytest.approx((n + 0.5) * 10.0, rel=1e-3)

    def test_eigenvalue_refinement_order(self):
        # halving h scales the E_1 error by ~1/4
        errs = []
        for n in (1001, 2001):
            g = Grid1D(-1.0, 1.0, n)
            basis = solve_eigen(build_hamiltonian(InfiniteWell(1.0), g), 1, g)
            errs.append(abs(basis.energies[0] - E1_WELL))
        assert 3.5 < errs[0] / errs[1] < 4.5

    def test_residual_bound(self):
        g = Grid1D(-1.0, 1.0, 2001)
        H = build_hamiltonian(WellWithBarrier(1.0, 15.0, 0.2), g)
        basis = solve_eigen(H, 2, g)
        for j in range(2):
            psi = basis.states[j].values[1:-1]
            Hpsi = H.diagonal * psi
            Hpsi[:-1] += H.offdiag * psi[1:]
            Hpsi[1:] += H.offdiag * psi[:-1]
            r = np.abs(Hpsi - basis.energies[j] * psi).max()
            assert r <= 1e-8 * np.abs(psi).max()

    def test_variational_consistency(self):
        g = Grid1D(-1.0, 1.0, 1501)
        H = build_hamiltonian(WellWithBarrier(1.0, 15.0, 0.2), g)
        basis = solve_eigen(H, 2, g)
        for j in range(2):
            v = basis.states[j].values[1:-1]
            Hv = H.diagonal * v
            Hv[:-1] += H.offdiag * v[1:]
            Hv[1:] += H.offdiag * v[:-1]
            rayleigh = (v @ Hv) / (v @ v)
            assert rayleigh == pytest.approx(basis.energies[j], rel=1e-8)

    def test_quartic_doublet(self):
        g = Grid1D(-1.25, 1.25, 2001)
        basis = solve_eigen(build_hamiltonian(QuarticDoubleWell(), g), 2, g)
        e0, e1 = basis.energies
        assert e0 == pytest.approx(QUARTIC_E0, abs=2e-3)
        assert e1 == pytest.approx(QUARTIC_E1, abs=2e-3)
        assert e0 < e1 < 15.0
        # near-degenerate doublet: splitting well under both the ground
        # energy and the gap to the next level (~12.3)
        assert e1 - e0 < 0.25 * e0
        # definite parity: ground even, first excited odd
        psi0, psi1 = basis.states[0].values, basis.states[1].values
        assert np.abs(psi0 - psi0[::-1]).max() < 1e-6 * np.abs(psi0).max()
        assert np.abs(psi1 + psi1[::-1]).max() < 1e-6 * np.abs(psi1).max()

    def test_quartic_domain_truncation(self):
        # widening the solve domain moves E_0, E_1 by < 1e-6
        e_narrow = solve_eigen(
            build_hamiltonian(QuarticDoubleWell(), Grid1D(-1.25, 1.25, 2001)),
            2,
            Grid1D(-1.25, 1.25, 2001),
        ).energies
        e_wide = solve_eigen(
            build_hamiltonian(QuarticDoubleWell(), Grid1D(-1.5, 1.5, 2401)),
            2,
            Grid1D(-1.5, 1.5, 2401),
        ).energies
        # compare on matched h (2401 points over 3.0 keeps h = 1.25e-3)
        assert abs(e_wide[0] - e_narrow[0]) < 1e-6
        assert abs(e_wide[1] - e_narrow[1]) < 1e-6

    def test_k_too_large(self):
        g = Grid1D(-1.0, 1.0, 11)
        H = build_hamiltonian(InfiniteWell(1.0), g)
        with pytest.raises(ValueError):
            solve_eigen(H, 9, g)


class TestBasisFactory:
    def test_analytic_dispatch(self):
        g = Grid1D(-1.0, 1.0, 801)
        basis = eigenbasis(InfiniteWell(1.0), g, 3)
        assert basis.meta["method"] == "analytic_well"
        assert basis.energies[2] == pytest.approx(9.0 * E1_WELL, rel=1e-14)

    def test_numeric_dispatch(self):
        g = Grid1D(-1.0, 1.0, 801)
        basis = eigenbasis(WellWithBarrier(1.0, 15.0, 0.2), g, 2)
        assert basis.meta["method"] == "fd_tridiag"
        assert "snapped_barrier_width" in basis.meta

    def test_orthonormality_validation(self):
        g = Grid1D(-2.0, 2.0, 1001)
        basis = eigenbasis(WellWithBarrier(2.0, 2700.0, 0.02), g, 6)
        basis.validate()  # raises on violation

    def test_cache_round_trip(self, tmp_path):
        g = Grid1D(-1.0, 1.0, 601)
        pot = WellWithBarrier(1.0, 15.0, 0.2)
        fresh = eigenbasis(pot, g, 2, cache_dir=str(tmp_path))
        cached = eigenbasis(pot, g, 2, cache_dir=str(tmp_path))
        assert np.array_equal(fresh.energies, cached.energies)
        for a, b in zip(fresh.states, cached.states):
            assert np.array_equal(a.values, b.values)

    def test_cache_env_var(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MADELUNG_CACHE_DIR", str(tmp_path))
        g = Grid1D(-1.0, 1.0, 301)
        eigenbasis(QuarticDoubleWell(), Grid1D(-1.25, 1.25, 301), 1)
        assert any(tmp_path.iterdir())

    def test_save_load_direct(self, tmp_path):
        g = Grid1D(-1.0, 1.0, 301)
        basis = eigenbasis(InfiniteWell(1.0), g, 2)
        save_basis(basis, str(tmp_path / "b"))
        back = load_basis(str(tmp_path / "b"))
        assert np.array_equal(back.energies, basis.energies)
        assert np.array_equal(back.states_matrix(), basis.states_matrix())


class TestProduct2D:
    def test_vortex_pair_degenerate(self):
        g1 = Grid1D(0.0, 1.0, 201)
        basis = product_basis_2d([(1, 2), (2, 1)], Grid2D(g1, g1))
        assert basis.energies[0] == pytest.approx(2.5 * math.pi**2, rel=1e-13)
        assert basis.energies[1] == basis.energies[0]

    def test_product_norm(self):
        g1 = Grid1D(0.0, 1.0, 301)
        basis = product_basis_2d([(1, 2)], Grid2D(g1, g1))
        rho = ScalarField(basis.grid, basis.states[0].values ** 2)
        assert integrate(rho) == pytest.approx(1.0, abs=1e-10)
