import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from madelung.flow import (
    NodeEvent,
    Streamline,
    circulation,
    cumulative_probability,
    find_nodes,
    integrate_streamline,
    node_events_to_json,
    quantile_position,
    save_node_events,
    seed_quantiles,
    streamline_bundle,
    streamlines_to_csv,
    vortex_profile,
    vortex_profile_to_csv,
)
from madelung.grids import Grid1D, Grid2D, ScalarField
from madelung.spectral import Harmonic, InfiniteWell, eigenbasis, product_basis_2d
from madelung.states import equal_two_mode, evaluate, evaluate_at, evaluate_at_2d, superposition

E1 = math.pi**2 / 8.0
PERIOD = 2.0 * math.pi / (3.0 * E1)
OMEGA = 10.0


@pytest.fixture(scope="module")
def well_basis():
    return eigenbasis(InfiniteWell(1.0), Grid1D(-1.0, 1.0, 2001), 4)


@pytest.fixture(scope="module")
def two_mode(well_basis):
    return equal_two_mode(well_basis, 0, 1)


@pytest.fixture(scope="module")
def ho_basis():
    return eigenbasis(Harmonic(OMEGA), Grid1D(-3.0, 3.0, 4001), 4)


@pytest.fixture(scope="module")
def vortex_state():
    n = 161
    g2 = Grid2D(Grid1D(0.0, 1.0, n), Grid1D(0.0, 1.0, n))
    basis = product_basis_2d([(1, 2), (2, 1)], g2)
    return superposition(basis, [0, 1], np.array([1.0, 1.0j]) / math.sqrt(2.0))


class TestSeeding:
    def test_uniform_density(self):
        g = Grid1D(0.0, 1.0, 2001)
        seeds = seed_quantiles(ScalarField(g, np.ones(g.n)), 3)
        assert np.allclose(seeds, [0.25, 0.5, 0.75], atol=1e-6)

    def test_symmetric_middle_seed(self, ho_basis):
        s = superposition(ho_basis, [0], [1.0])
        rho = ScalarField(ho_basis.grid, np.abs(evaluate(s, 0.0).values) ** 2)
        seeds = seed_quantiles(rho, 5)
        assert abs(seeds[2]) < ho_basis.grid.h

    def test_gaussian_seeds_match_cdf_inversion(self, ho_basis):
        # ground-state density is a normal law; invert its CDF directly
        s = superposition(ho_basis, [0], [1.0])
        rho = ScalarField(ho_basis.grid, np.abs(evaluate(s, 0.0).values) ** 2)
        seeds = seed_quantiles(rho, 2)
        sigma = math.sqrt(1.0 / (2.0 * OMEGA))
        oracle = norm.ppf([1.0 / 3.0, 2.0 / 3.0], scale=sigma)
        assert np.abs(seeds - oracle).max() < 1e-5

    def test_count_must_be_positive(self, ho_basis):
        s = superposition(ho_basis, [0], [1.0])
        rho = ScalarField(ho_basis.grid, np.abs(evaluate(s, 0.0).values) ** 2)
        with pytest.raises(ValueError, match="at least 1"):
            seed_quantiles(rho, 0)


class TestStreamlines:
    def test_eigenstate_is_static(self, ho_basis):
        s = superposition(ho_basis, [0], [1.0])
        ln = integrate_streamline(s, 0.3, (0.0, 0.5))
        assert not ln.flagged
        assert np.abs(ln.x - 0.3).max() < 1e-7

    def test_two_mode_periodicity(self, two_mode):
        ln = integrate_streamline(two_mode, -0.4, (0.0, PERIOD))
        assert abs(ln.x[-1] - ln.x[0]) < 1e-3

    def test_quantile_transport(self, two_mode):
        te = np.linspace(0.0, PERIOD, 33)
        ln = integrate_streamline(two_mode, -0.4, (0.0, PERIOD), t_eval=te)
        devs = [
            abs(cumulative_probability(two_mode, xv, tv) - ln.seed_quantile)
            for tv, xv in zip(ln.t, ln.x)
        ]
        assert max(devs) < 1e-3

    def test_streamline_matches_quantile_route(self, two_mode):
        q = 0.3
        x0 = quantile_position(two_mode, q, 0.0)
        te = np.linspace(0.0, PERIOD, 17)
        ln = integrate_streamline(two_mode, x0, (0.0, PERIOD), t_eval=te)
        devs = [
            abs(quantile_position(two_mode, q, tv) - xv)
            for tv, xv in zip(ln.t, ln.x)
        ]
        assert max(devs) < 1e-3

    def test_bundle_never_crosses(self, two_mode):
        te = np.linspace(0.0, PERIOD, 33)
        lines = streamline_bundle(two_mode, 5, (0.0, PERIOD), t_eval=te)
        assert [ln.seed_quantile for ln in lines] == sorted(
            ln.seed_quantile for ln in lines
        )
        X = np.stack([ln.x for ln in lines])
        assert (np.diff(X, axis=0) > 0).all()

    def test_pause_when_node_arrives(self, well_basis):
        # two even modes: the center trajectory sits still while the central
        # density rho(0, t) ~ sin^2(delta t / 2) sweeps through zero
        s = superposition(well_basis, [0, 2], np.array([1.0, 1.0]) / math.sqrt(2.0))
        delta = math.pi**2
        t_node = 2.0 * math.pi / delta
        ln = integrate_streamline(s, 0.0, (math.pi / delta, t_node + 0.05))
        assert ln.flagged
        assert abs(ln.t_flag - t_node) < 1e-4
        assert (ln.t <= ln.t_flag).all()

    def test_masked_start_rejected(self, well_basis):
        mode2 = superposition(well_basis, [1], [1.0])
        with pytest.raises(ValueError, match="masked"):
            integrate_streamline(mode2, -1.0, (0.0, 1.0))  # wall
        with pytest.raises(ValueError, match="masked"):
            integrate_streamline(mode2, 0.0, (0.0, 1.0))  # node point

    def test_strictly_increasing_times_enforced(self):
        with pytest.raises(ValueError, match="increasing"):
            Streamline(0.5, np.array([0.0, 0.0]), np.array([0.1, 0.2]))

    def test_two_dimensional_state_rejected(self, vortex_state):
        with pytest.raises(ValueError, match="1D"):
            integrate_streamline(vortex_state, 0.4, (0.0, 0.1))


class TestQuantilePosition:
    def test_symmetric_median_at_center(self, ho_basis):
        s = superposition(ho_basis, [0], [1.0])
        assert abs(quantile_position(s, 0.5, 0.0)) < 1e-6

    def test_eigenstate_static_quantiles(self, ho_basis):
        s = superposition(ho_basis, [2], [1.0])
        x0 = quantile_position(s, 0.3, 0.0)
        assert abs(quantile_position(s, 0.3, 1.7) - x0) < 1e-9

    @settings(max_examples=25, deadline=None)
    @given(
        q1=st.floats(0.05, 0.95),
        q2=st.floats(0.05, 0.95),
    )
    def test_positions_monotone_in_quantile(self, ho_basis, q1, q2):
        if abs(q1 - q2) < 1e-3:
            return
        lo, hi = sorted((q1, q2))
        s = superposition(ho_basis, [0, 2], np.array([0.8, 0.6j]))
        t = 0.37
        assert quantile_position(s, lo, t) < quantile_position(s, hi, t)


class TestNodeEvents:
    def test_stationary_node_line_degenerate(self, well_basis):
        mode2 = superposition(well_basis, [1], [1.0])
        events = find_nodes(mode2, (0.0, PERIOD))
        assert len(events) == 1
        e = events[0]
        assert e.degenerate and not e.refined
        assert abs(e.x_star) < well_basis.grid.h

    def test_two_mode_pair_matches_closed_form(self, two_mode):
        # in-window zeros of psi_1 +/- psi_2: cos(u) = ±1/2 at u = pi(x+1)/2,
        # giving (x, t) = (-1/3, T/2) and (+1/3, T)
        events = find_nodes(two_mode, (PERIOD / 8.0, PERIOD * 9.0 / 8.0))
        assert len(events) == 2
        assert all(e.refined and not e.degenerate for e in events)
        first, second = events
        assert abs(first.x_star + 1.0 / 3.0) < 1e-6
        assert abs(first.t_star - PERIOD / 2.0) < 1e-6
        assert abs(second.x_star - 1.0 / 3.0) < 1e-6
        assert abs(second.t_star - PERIOD) < 1e-6
        # mirror pair, half a period apart
        assert abs(first.x_star + second.x_star) < 1e-6
        assert abs((second.t_star - first.t_star) - PERIOD / 2.0) < 1e-6

    def test_refined_events_meet_amplitude_floor(self, two_mode):
        events = find_nodes(two_mode, (PERIOD / 8.0, PERIOD * 9.0 / 8.0))
        amp_scale = np.abs(evaluate(two_mode, 0.0).values).max()
        for e in events:
            assert abs(evaluate_at(two_mode, e.x_star, e.t_star)) < 1e-8 * amp_scale

    def test_vortex_node_persistent_at_center(self, vortex_state):
        events = find_nodes(vortex_state, (0.0, 0.1), nt=9)
        assert len(events) == 1
        e = events[0]
        assert e.refined and e.degenerate
        x, y = e.x_star
        assert abs(x - 0.5) < 1e-9 and abs(y - 0.5) < 1e-9

    def test_bad_window_rejected(self, two_mode):
        with pytest.raises(ValueError, match="increasing"):
            find_nodes(two_mode, (1.0, 0.5))
        with pytest.raises(ValueError, match="domain"):
            find_nodes(two_mode, (0.0, 1.0), x_window=(-2.0, 0.5))


class TestVortexProfile:
    def test_inverse_square_exponent(self, vortex_state):
        p = vortex_profile(vortex_state, (0.5, 0.5), 0.1, 10)
        assert abs(p.fit_exponent + 2.0) < 0.05

    def test_orbital_speed_scales_as_inverse_radius(self, vortex_state):
        # winding one: |v_a| r = sqrt(Z) = 1
        p = vortex_profile(vortex_state, (0.5, 0.5), 0.1, 10)
        assert np.abs(p.speed_mean * p.radii - 1.0).max() < 0.05
        assert 0.85 < p.fit_Z < 1.10

    def test_total_energy_on_profile(self, vortex_state):
        # Q + K_a + U = E with U = 0 inside the box and E = 5 pi^2 / 2; the
        # residual is set by stencil error near the 2h floor, so compare to
        # the profile scale there and absolutely further out
        p = vortex_profile(vortex_state, (0.5, 0.5), 0.1, 10)
        E = 2.5 * math.pi**2
        resid = np.abs(p.Q_mean + p.Ka_mean - E)
        assert (resid / p.Ka_mean.max()).max() < 0.02
        assert resid[p.radii > 0.05].max() < 0.5

    def test_radii_respect_stencil_floor(self, vortex_state):
        p = vortex_profile(vortex_state, (0.5, 0.5), 0.1, 10)
        h = max(vortex_state.grid.grid_x.h, vortex_state.grid.grid_y.h)
        assert p.radii.min() >= 2 * h
        assert (np.diff(p.radii) > 0).all()

    def test_radius_beyond_boundary_rejected(self, vortex_state):
        with pytest.raises(ValueError, match="boundary"):
            vortex_profile(vortex_state, (0.5, 0.5), 0.6, 10)


class TestCirculation:
    def test_one_quantum_around_the_core(self, vortex_state):
        # the swirl runs clockwise: +2 pi along the flow, -2 pi against it
        along = circulation(vortex_state, (0.5, 0.5), 0.1, orientation=-1)
        against = circulation(vortex_state, (0.5, 0.5), 0.1, orientation=1)
        assert abs(along - 2.0 * math.pi) < 1e-3
        assert abs(against + 2.0 * math.pi) < 1e-3

    def test_zero_without_enclosed_node(self, vortex_state):
        loop = circulation(vortex_state, (0.25, 0.30), 0.05)
        assert abs(loop) < 1e-3


class TestExports:
    def test_streamline_csv(self, two_mode, tmp_path):
        te = np.linspace(0.0, PERIOD / 4.0, 9)
        lines = streamline_bundle(two_mode, 3, (0.0, PERIOD / 4.0), t_eval=te)
        path = tmp_path / "lines.csv"
        streamlines_to_csv(lines, path)
        rows = path.read_text().strip().split("\n")
        assert rows[0] == "seed_q,t,x"
        assert len(rows) == 1 + sum(ln.t.size for ln in lines)

    def test_node_event_json(self, two_mode, tmp_path):
        events = find_nodes(two_mode, (PERIOD / 8.0, PERIOD * 9.0 / 8.0))
        docs = node_events_to_json(events)
        assert {"t", "x", "refined", "degenerate", "residual"} <= set(docs[0])
        path = tmp_path / "events.json"
        save_node_events(events, path)
        assert json.loads(path.read_text()) == docs

    def test_vortex_profile_csv(self, vortex_state, tmp_path):
        p = vortex_profile(vortex_state, (0.5, 0.5), 0.1, 10)
        path = tmp_path / "profile.csv"
        vortex_profile_to_csv(p, path)
        rows = path.read_text().strip().split("\n")
        assert rows[0] == "r,Q,K_a,speed"
        assert len(rows) == 1 + p.radii.size
