import math

import numpy as np
import pytest

import bergmanflow as bf
from bergmanflow.engine import (
    GramConditionError,
    LogDensityField,
    assemble_gram,
    extremal_check,
    field_to_csv,
    kernel_diagonal,
    laurent_basis,
    monomial_basis,
    weighted_disc_kernel_closed_form,
)


def _unit_radial_weight(grid):
    return LogDensityField.constant(0, grid.radial_nodes.astype(complex), 0.0, radial=True)


def test_monomial_basis_counts():
    assert len(monomial_basis(1, 1, 10)) == 11
    assert len(monomial_basis(2, 1, 3)) == 10  # C(3+2, 2)
    b = laurent_basis(1, 5)
    assert len(b) == 11
    assert b.laurent and b.exponents[0] == (-5,)


def test_basis_evaluate():
    b = monomial_basis(1, 1, 3)
    z = np.array([2.0 + 0j])
    assert np.allclose(b.evaluate(z), [1, 2, 4, 8])
    l2 = b.evaluate_log_abs2(np.array([0.0 + 0j]))
    assert l2[0] == 0.0 and np.all(np.isneginf(l2[1:]))


def test_assemble_gram_twist_mismatch(disc_grid):
    w = _unit_radial_weight(disc_grid)  # twist 0
    with pytest.raises(ValueError):
        assemble_gram(monomial_basis(1, 2, 5), w, disc_grid)


def test_radial_gram_matches_moments(disc_grid):
    # unweighted: G_kk = 2 * 2 pi integral_0^1 r^{2k+1} dr = 2 pi / (k+1)
    gram = assemble_gram(monomial_basis(1, 1, 8), _unit_radial_weight(disc_grid), disc_grid)
    for k in range(9):
        assert math.exp(gram.log_diag[k]) == pytest.approx(2 * math.pi / (k + 1), rel=1e-12)


def test_kernel_diagonal_closed_form(disc_grid):
    gram = assemble_gram(monomial_basis(1, 1, 60), _unit_radial_weight(disc_grid), disc_grid)
    for r in (0.0, 0.3, 0.6, 0.8):
        val = math.exp(kernel_diagonal(gram, np.array([r])).log_values[0])
        # Lambda doubles Lebesgue, halving the kernel density
        assert val == pytest.approx(weighted_disc_kernel_closed_form(0.0, r, scale=2.0), rel=1e-9)


def test_weighted_closed_form_validation():
    with pytest.raises(ValueError):
        weighted_disc_kernel_closed_form(-1.0, 0.0)
    with pytest.raises(ValueError):
        weighted_disc_kernel_closed_form(0.0, 1.0)
    with pytest.raises(ValueError):
        weighted_disc_kernel_closed_form(0.0, 0.5, scale=0.0)


def test_general_path_matches_radial(unit_disc):
    grid = bf.build_radial_grid(unit_disc, radial_panels=24, points_per_panel=8, angular_count=32)
    basis = monomial_basis(1, 1, 20)
    radial = assemble_gram(basis, _unit_radial_weight(grid), grid)
    general = assemble_gram(basis, LogDensityField.constant(0, grid.nodes, 0.0), grid)
    assert radial.circular and not general.circular
    z = np.array([[0.5 + 0.3j]])
    k_r = kernel_diagonal(radial, np.array([abs(z[0, 0])])).log_values[0]
    k_g = kernel_diagonal(general, z).log_values[0]
    assert k_g == pytest.approx(k_r, abs=1e-7)


def test_general_path_rotation_invariance(unit_disc):
    grid = bf.build_radial_grid(unit_disc, radial_panels=24, points_per_panel=8, angular_count=32)
    gram = assemble_gram(monomial_basis(1, 1, 20), LogDensityField.constant(0, grid.nodes, 0.0), grid)
    z = np.array([0.5 + 0.3j])
    rot = np.exp(2j * np.pi / 32)  # grid symmetry subgroup
    k1 = kernel_diagonal(gram, z[None, :]).log_values[0]
    k2 = kernel_diagonal(gram, (rot * z)[None, :]).log_values[0]
    assert abs(k1 - k2) < 1e-9


def test_general_path_exterior_point_rejected(unit_disc):
    grid = bf.build_radial_grid(unit_disc, radial_panels=24, points_per_panel=8, angular_count=32)
    gram = assemble_gram(monomial_basis(1, 1, 5), LogDensityField.constant(0, grid.nodes, 0.0), grid)
    with pytest.raises(ValueError):
        kernel_diagonal(gram, np.array([[1.5 + 0j]]))


def test_ball_kernel_at_origin():
    ball = bf.make_ball(2, 1.0)
    grid = bf.build_tensor_grid(ball, 16)
    gram = assemble_gram(monomial_basis(2, 1, 4), LogDensityField.constant(0, grid.nodes, 0.0), grid)
    k0 = math.exp(kernel_diagonal(gram, np.zeros((1, 2), complex)).log_values[0])
    # Lebesgue kernel n!/pi^n at the origin, divided by 2^n for Lambda
    assert k0 == pytest.approx(2.0 / math.pi**2 / 4.0, rel=2e-2)


def test_condition_guard_raises(unit_disc):
    grid = bf.build_tensor_grid(unit_disc, 40)
    # measure concentrated near z = 1 makes the monomials nearly collinear
    w = LogDensityField(0, grid.nodes, -30.0 * grid.nodes[:, 0].real)
    with pytest.raises(GramConditionError) as exc:
        assemble_gram(monomial_basis(1, 1, 25), w, grid)
    assert exc.value.condition_estimate > 1e12


def test_extremal_property_radial(disc_grid):
    gram = assemble_gram(monomial_basis(1, 1, 40), _unit_radial_weight(disc_grid), disc_grid)
    rep = extremal_check(gram, 0.4 + 0.2j, trials=500, rng=np.random.default_rng(0))
    assert rep.max_ratio <= 1.0 + 1e-10
    assert rep.optimal_ratio == pytest.approx(1.0, abs=1e-10)


def test_extremal_property_general(unit_disc):
    grid = bf.build_radial_grid(unit_disc, radial_panels=24, points_per_panel=8, angular_count=32)
    gram = assemble_gram(monomial_basis(1, 1, 15), LogDensityField.constant(0, grid.nodes, 0.0), grid)
    rep = extremal_check(gram, np.array([0.4 + 0.2j]), trials=300, rng=np.random.default_rng(1))
    assert rep.max_ratio <= 1.0 + 1e-10
    assert rep.optimal_ratio == pytest.approx(1.0, abs=1e-10)


def test_field_to_csv(tmp_path):
    fld = LogDensityField(1, np.array([0.1 + 0j, 0.2 + 0j]), np.array([1.5, -2.5]))
    path = tmp_path / "field.csv"
    field_to_csv(fld, path, header_comment="test")
    lines = path.read_text().splitlines()
    assert lines[0] == "# test"
    assert lines[1] == "node_re1,node_im1,log_value"
    assert len(lines) == 4
