import math

import numpy as np
import pytest

import bergmanflow as bf
from bergmanflow.flow import default_degree_schedule, evaluate_log_kappa


def _disc_constants(m_max):
    """Closed-form constants a_m with kappa_m = a_m (1-|z|^2)^{-2m} on the disc."""
    a = [1.0 / (2 * math.pi)]
    for m in range(1, m_max):
        a.append(a[-1] * (2 * m + 1) / (2 * math.pi))
    return a


def test_first_kernel_closed_form(unit_disc, disc_grid):
    state = bf.init_state(unit_disc, disc_grid)
    assert state.m == 1
    for r in (0.0, 0.4, 0.8, 0.95):
        val = math.exp(evaluate_log_kappa(state, np.array([r]))[0])
        assert val == pytest.approx(1 / (2 * math.pi * (1 - r**2) ** 2), rel=1e-10)


def test_step_advances_twist(unit_disc, disc_grid):
    state = bf.init_state(unit_disc, disc_grid)
    nxt = bf.step(state)
    assert nxt.m == 2
    assert nxt.log_kappa.twist == 2
    assert len(nxt.history) == 2
    assert nxt.history[-1].degree == nxt.gram.basis.degree


def test_iterates_match_recursion(unit_disc, disc_grid):
    a = _disc_constants(10)
    state = bf.init_state(unit_disc, disc_grid)
    for m in range(1, 11):
        for r in (0.0, 0.5, 0.9):
            val = math.exp(evaluate_log_kappa(state, np.array([r]))[0])
            exact = a[m - 1] * (1 - r**2) ** (-2 * m)
            assert val == pytest.approx(exact, rel=1e-8), (m, r)
        if m < 10:
            state = bf.step(state)


def test_boundary_continuation_exact_on_disc(unit_disc, disc_grid):
    # near the boundary the series is untrustworthy but the profile
    # continuation is exact for the disc
    a = _disc_constants(20)
    state = bf.init_state(unit_disc, disc_grid)
    for _ in range(19):
        state = bf.step(state)
    r = 0.999
    val = evaluate_log_kappa(state, np.array([r]))[0]
    exact = math.log(a[19]) - 40 * math.log(1 - r**2)
    assert val == pytest.approx(exact, rel=1e-10)


def test_normalized_values(unit_disc, disc_grid):
    state = bf.init_state(unit_disc, disc_grid)
    state = bf.step(state)
    nk = bf.normalized(state)
    assert nk.m == 2
    expected = (state.log_kappa.log_values - math.log(2.0)) / 2.0
    assert np.allclose(nk.log_values, expected)


def test_run_report_structure(unit_disc, disc_grid):
    target = bf.ke_disc(1.0, disc_grid.radial_nodes)
    report = bf.run(unit_disc, disc_grid, 8, target=target, compact_radius=0.8)
    assert [s.m for s in report.steps] == list(range(1, 9))
    es = [s.e_sup for s in report.steps]
    assert all(b < a for a, b in zip(es, es[1:]))
    assert np.isfinite(report.rate_coefficient)


def test_run_band_window(annulus, annulus_grid):
    target = bf.ke_annulus(0.5, 1.0, annulus_grid.radial_nodes)
    report = bf.run(annulus, annulus_grid, 3, target=target, compact_radius=(0.6, 0.85))
    assert report.steps[-1].e_sup < report.steps[0].e_sup


def test_run_requires_target(unit_disc, disc_grid):
    with pytest.raises(ValueError):
        bf.run(unit_disc, disc_grid, 3)


def test_sandwich_diagnostic(unit_disc, disc_grid):
    target = bf.ke_disc(1.0, disc_grid.radial_nodes)
    report = bf.run(unit_disc, disc_grid, 5, target=target, compact_radius=0.8)
    sw = bf.sandwich_diagnostic(report)
    assert len(sw.m) == 5
    assert np.all(sw.upper_margin >= 0) and np.all(sw.lower_margin >= 0)
    assert np.all(np.maximum(sw.upper_margin, sw.lower_margin)
                  == pytest.approx([s.e_sup for s in report.steps]))


def test_default_degree_schedules(unit_disc, annulus):
    assert default_degree_schedule(unit_disc)(10) == 120
    assert default_degree_schedule(annulus)(10) == 260


def test_evaluate_at_origin(unit_disc, disc_grid):
    state = bf.init_state(unit_disc, disc_grid)
    val = evaluate_log_kappa(state, np.array([0.0]))[0]
    assert math.exp(val) == pytest.approx(1 / (2 * math.pi), rel=1e-10)
