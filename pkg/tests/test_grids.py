"""Grid, quadrature, and stencil tests against analytic oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from madelung.grids import (
    ComplexField,
    Grid1D,
    Grid2D,
    ScalarField,
    field_from_csv,
    field_to_csv,
    gradient,
    gradient2d,
    integrate,
    integrate_masked,
    laplacian,
)


def make_field(fn, grid):
    return ScalarField(grid, fn(grid.x))


class TestGrid:
    def test_spacing(self):
        g = Grid1D(-1.0, 1.0, 201)
        assert g.h == pytest.approx(0.01)
        assert len(g.x) == 201
        assert g.x[0] == -1.0 and g.x[-1] == 1.0

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            Grid1D(0.0, 1.0, 2)

    def test_reversed_bounds(self):
        with pytest.raises(ValueError):
            Grid1D(1.0, 0.0, 11)

    def test_nonfinite_unmasked_rejected(self):
        g = Grid1D(0.0, 1.0, 11)
        vals = np.zeros(11)
        vals[4] = np.nan
        with pytest.raises(ValueError, match="index"):
            ScalarField(g, vals)

    def test_nonfinite_masked_allowed(self):
        g = Grid1D(0.0, 1.0, 11)
        vals = np.zeros(11)
        vals[4] = np.inf
        mask = np.ones(11, bool)
        mask[4] = False
        ScalarField(g, vals, mask)  # no raise


class TestIntegrate:
    def test_constant_exact(self):
        # f = 1 on [0,1] integrates to exactly 1 for any rule.
        g = Grid1D(0.0, 1.0, 101)
        assert integrate(make_field(np.ones_like, g)) == pytest.approx(1.0, abs=1e-15)

    def test_sin_squared(self):
        # Analytic antiderivative: int sin^2(pi x) dx over [0,1] = 1/2.
        g = Grid1D(0.0, 1.0, 101)
        f = make_field(lambda x: np.sin(np.pi * x) ** 2, g)
        assert integrate(f) == pytest.approx(0.5, abs=1e-8)

    def test_even_point_count_trapezoid(self):
        g = Grid1D(0.0, 1.0, 100)
        f = make_field(lambda x: x, g)
        assert integrate(f) == pytest.approx(0.5, abs=1e-12)

    def test_normalized_mode(self):
        g = Grid1D(-1.0, 1.0, 2001)
        f = make_field(lambda x: np.sin(np.pi * (x + 1.0)) ** 2, g)  # |psi_2|^2
        assert integrate(f) == pytest.approx(1.0, abs=1e-10)

    def test_masked_points_rejected(self):
        g = Grid1D(0.0, 1.0, 11)
        mask = np.ones(11, bool)
        mask[0] = False
        f = ScalarField(g, np.ones(11), mask)
        with pytest.raises(ValueError, match="masked"):
            integrate(f)
        assert integrate_masked(f) < 1.0

    def test_2d_separable(self):
        gx = Grid1D(0.0, 1.0, 101)
        g2 = Grid2D(gx, gx)
        X, Y = g2.mesh()
        f = ScalarField(g2, np.sin(np.pi * X) ** 2 * np.sin(np.pi * Y) ** 2)
        assert integrate(f) == pytest.approx(0.25, abs=1e-8)


class TestGradient:
    def test_quadratic_exact_interior(self):
        g = Grid1D(-1.0, 1.0, 201)
        out = gradient(make_field(lambda x: x**2, g))
        assert np.allclose(out.values[1:-1], 2.0 * g.x[1:-1], atol=1e-12)
        # one-sided edges are exact for quadratics too
        assert out.values[0] == pytest.approx(-2.0, abs=1e-10)
        assert out.values[-1] == pytest.approx(2.0, abs=1e-10)

    def test_constant_zero(self):
        g = Grid1D(0.0, 2.0, 51)
        out = gradient(make_field(np.ones_like, g))
        assert np.allclose(out.values, 0.0, atol=1e-13)

    def test_convergence_order(self):
        # halving h must quarter the max error for sin(5x)
        errs = []
        for n in (201, 401):
            g = Grid1D(0.0, 2.0, n)
            out = gradient(make_field(lambda x: np.sin(5.0 * x), g))
            errs.append(np.abs(out.values - 5.0 * np.cos(5.0 * g.x)).max())
        ratio = errs[0] / errs[1]
        assert 3.3 < ratio < 4.7

    def test_complex_field(self):
        g = Grid1D(0.0, 1.0, 801)
        k = 7.0
        f = ComplexField(g, np.exp(1j * k * g.x))
        out = gradient(f)
        assert np.allclose(out.values, 1j * k * f.values, atol=3e-4)

    def test_mask_propagates_to_neighbors(self):
        g = Grid1D(0.0, 1.0, 21)
        mask = np.ones(21, bool)
        mask[10] = False
        out = gradient(ScalarField(g, np.zeros(21), mask))
        assert not out.mask[9] and not out.mask[10] and not out.mask[11]
        assert out.mask[8] and out.mask[12]


class TestLaplacian:
    def test_quadratic_exact(self):
        g = Grid1D(-1.0, 1.0, 201)
        out = laplacian(make_field(lambda x: x**2, g))
        assert np.allclose(out.values[1:-1], 2.0, atol=1e-9)
        # edge stencil exact through cubics
        assert out.values[0] == pytest.approx(2.0, abs=1e-7)

    def test_constant_zero(self):
        g = Grid1D(0.0, 1.0, 33)
        out = laplacian(make_field(np.ones_like, g))
        assert np.allclose(out.values, 0.0, atol=1e-10)

    def test_convergence_order(self):
        errs = []
        for n in (201, 401):
            g = Grid1D(0.0, 2.0, n)
            out = laplacian(make_field(lambda x: np.sin(5.0 * x), g))
            errs.append(np.abs(out.values + 25.0 * np.sin(5.0 * g.x)).max())
        ratio = errs[0] / errs[1]
        assert 3.3 < ratio < 4.7

    def test_2d_separable_mode(self):
        gx = Grid1D(0.0, 1.0, 201)
        g2 = Grid2D(gx, gx)
        X, Y = g2.mesh()
        f = ScalarField(g2, np.sin(np.pi * X) * np.sin(2.0 * np.pi * Y))
        out = laplacian(f)
        expect = -5.0 * np.pi**2 * f.values
        err = np.abs(out.values - expect).max()
        assert err < 5e-3 * np.abs(expect).max()

    def test_mask_edge_span(self):
        # a masked point near the boundary disables the one-sided stencil
        g = Grid1D(0.0, 1.0, 21)
        mask = np.ones(21, bool)
        mask[3] = False
        out = laplacian(ScalarField(g, np.zeros(21), mask))
        assert not out.mask[0]  # 5-point edge stencil touches index 3
        assert not out.mask[2] and not out.mask[4]
        assert out.mask[6]


class TestIdentities:
    def test_fundamental_theorem(self):
        # integrate(gradient(f)) = f(b) - f(a) within O(h^2)
        for n in (401, 801):
            g = Grid1D(0.0, 1.5, n)
            f = make_field(lambda x: np.exp(x) * np.sin(3.0 * x), g)
            got = integrate(gradient(f))
            expect = f.values[-1] - f.values[0]
            assert got == pytest.approx(expect, abs=20.0 * g.h**2)

    def test_product_rule_residual_order(self):
        # laplacian(R^2) vs 2 R laplacian(R) + 2 |grad R|^2 converges O(h^2)
        errs = []
        for n in (201, 401):
            g = Grid1D(0.0, 2.0, n)
            R = make_field(lambda x: 1.5 + np.sin(4.0 * x), g)
            lhs = laplacian(ScalarField(g, R.values**2))
            gr = gradient(R)
            rhs = 2.0 * R.values * laplacian(R).values + 2.0 * gr.values**2
            errs.append(np.abs(lhs.values - rhs).max())
        assert errs[0] / errs[1] > 3.0

    @given(
        a=st.floats(-2.0, 2.0),
        b=st.floats(-3.0, 3.0),
        k=st.floats(0.5, 6.0),
    )
    @settings(max_examples=25, deadline=None)
    def test_linearity(self, a, b, k):
        g = Grid1D(0.0, 1.0, 101)
        f1 = make_field(lambda x: np.sin(k * x), g)
        f2 = make_field(lambda x: np.cos(2.0 * x), g)
        combo = ScalarField(g, a * f1.values + b * f2.values)
        direct = gradient(combo).values
        parts = a * gradient(f1).values + b * gradient(f2).values
        assert np.allclose(direct, parts, atol=1e-9 * (1 + abs(a) + abs(b)))


class TestCsvRoundTrip:
    def test_1d_complex(self, tmp_path):
        g = Grid1D(-1.0, 1.0, 51)
        mask = np.ones(51, bool)
        mask[7] = False
        f = ComplexField(g, np.exp(1j * 3.0 * g.x), mask)
        p = tmp_path / "f.csv"
        field_to_csv(f, str(p))
        back = field_from_csv(str(p))
        assert np.array_equal(back.mask, f.mask)
        assert np.allclose(back.values, f.values, atol=0, rtol=0)
        assert back.grid.n == 51

    def test_2d_real(self, tmp_path):
        g2 = Grid2D(Grid1D(0.0, 1.0, 11), Grid1D(0.0, 2.0, 13))
        X, Y = g2.mesh()
        f = ScalarField(g2, X + 2.0 * Y)
        p = tmp_path / "f2.csv"
        field_to_csv(f, str(p))
        back = field_from_csv(str(p))
        assert back.grid.shape == (11, 13)
        assert np.allclose(back.values, f.values, atol=0, rtol=0)
