"""Composite-connection sector: block algebra, insertion identities, couplings.

Random analytic gauge data (trig-polynomial su(2), abelian and column
fields) exercises the identities away from any geometric special case;
the projective-plane chart then pins the flat model, where every block
of the composite curvature vanishes and the field equations hold on
the whole coupling plane 3 lam - mu + 4 nu = 0.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from akgeo.forms import MatrixForm, residual, scalar_identity
from akgeo.frames import (
    AbelianField,
    ColumnField,
    FlatFrame,
    Su2Field,
    frame_field,
    sample_points,
)
from akgeo.gauge import (
    CanonicalAbelian,
    InsertionParams,
    Su3Data,
    block_residual,
    canonical_connection,
    coeffs_from_pqrs,
    connection_curvature,
    constant_gauge_transform,
    covariant_d,
    curvature_blocks,
    direct_el_matrix,
    el_identity_residual,
    el_residuals_connection,
    el_residuals_geometric,
    expansion_identity_residual,
    gamma_action_density,
    general_action_density,
    general_expansion_residual,
    geometric_abelian,
    kahler_einstein_check,
    metric_lagrangian_density,
    model_lagrangian,
    model_metric_residual,
    su2_field_curvature,
)
from akgeo.geometry import curvature, extract_u2, solve_levi_civita
from akgeo.jets import DIM

C_GRID = (-2.0, 0.0, 0.5, 2.0)


def analytic_data(seed, x=None):
    rng = np.random.default_rng(seed)
    if x is None:
        x = rng.uniform(0.0, 2 * np.pi, size=DIM)
    return Su3Data(
        Su2Field.seeded(seed).at(x, 2),
        AbelianField.seeded(seed + 1).at(x, 2),
        ColumnField.seeded(seed + 2, amplitude=0.5).at(x, 2),
    )


def canonical_cp2(pt_seed=0, n=3):
    ff = frame_field("cp2")
    for x in sample_points("cp2", n, seed=pt_seed):
        uc = ff.at(x, 2)
        u2 = extract_u2(solve_levi_civita(uc.coframe()))
        yield x, uc, u2, canonical_connection(uc, u2)


# -- assembly and blocks -------------------------------------------------------


def test_assembled_connection_is_traceless_antihermitian():
    data = analytic_data(0)
    cal_a = data.assemble()
    assert cal_a.trace().max_abs() < 1e-13
    assert (cal_a + cal_a.dagger()).max_abs() < 1e-13


def test_curvature_blocks_match_assembled_curvature():
    for seed in (0, 1, 2):
        data = analytic_data(seed)
        assert block_residual(data) < 1e-12
        blocks = curvature_blocks(data)
        full = connection_curvature(data.assemble())
        assert (blocks.assemble() - full).max_abs() < 1e-12


def test_curvature_blocks_vanish_on_projective_plane():
    # the flat model: all three blocks of the composite curvature are zero
    for _, _, _, data in canonical_cp2():
        blocks = curvature_blocks(data)
        assert blocks.matrix2.max_abs() < 1e-10
        assert blocks.column.max_abs() < 1e-10
        assert blocks.scalar.max_abs() < 1e-10


# -- coupling algebra -----------------------------------------------------------


def test_unit_insertion_gives_zero_couplings_exactly():
    assert coeffs_from_pqrs(1, 1, 1, 1) == (0.0, 0.0, 0.0)
    lam, mu, nu = coeffs_from_pqrs(1, 1, 1, 2)
    assert (lam, mu, nu) == (-1.0, 1.0, 1.0)
    assert 3 * lam - mu + 4 * nu == 0.0
    assert InsertionParams.from_c(2.0).coeffs == (lam, mu, nu)


@given(
    st.tuples(*[st.floats(-10, 10) for _ in range(4)]),
)
@settings(max_examples=200, deadline=None)
def test_couplings_always_lie_on_the_plane(pqrs):
    lam, mu, nu = coeffs_from_pqrs(*pqrs)
    assert abs(3 * lam - mu + 4 * nu) < 1e-11


def test_coupling_plane_over_seeded_draws():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        lam, mu, nu = coeffs_from_pqrs(*rng.uniform(-5, 5, size=4))
        assert abs(3 * lam - mu + 4 * nu) < 1e-12


# -- insertion expansion ----------------------------------------------------------


def test_action_density_is_real():
    data = analytic_data(3)
    for c in C_GRID:
        dens = gamma_action_density(data, c)
        assert np.abs(dens.v.imag).max() < 1e-10


@pytest.mark.parametrize("c", C_GRID)
def test_expansion_identity_on_gamma_insertions(c):
    for seed in (3, 4):
        assert expansion_identity_residual(analytic_data(seed), c) < 1e-10


@given(st.tuples(*[st.floats(-3, 3) for _ in range(4)]))
@settings(max_examples=40, deadline=None)
def test_expansion_identity_on_general_insertions(pqrs):
    assert general_expansion_residual(analytic_data(5), *pqrs) < 1e-9


def test_general_density_reduces_to_gamma_density():
    data = analytic_data(6)
    for c in C_GRID:
        dens = general_action_density(data, 1.0, 1.0, 1.0, c)
        assert (dens - gamma_action_density(data, c)).max_abs() < 1e-13


# -- direct field equations --------------------------------------------------------


@pytest.mark.parametrize("c", C_GRID)
def test_direct_el_matches_block_form(c):
    for seed in (7, 8):
        assert el_identity_residual(analytic_data(seed), c) < 1e-10


def test_direct_el_vanishes_at_unit_insertion():
    assert direct_el_matrix(analytic_data(9), 1.0).max_abs() < 1e-13


# -- connection-level field equations ------------------------------------------------


def on_plane_triples(seed, n=4):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        lam, nu = rng.uniform(-2, 2, size=2)
        yield lam, 3 * lam + 4 * nu, nu


def test_field_equations_hold_on_plane_on_projective_plane():
    for _, _, _, data in canonical_cp2(n=2):
        for lam, mu, nu in on_plane_triples(12):
            r_adj, r_psi = el_residuals_connection(data, lam, mu, nu)
            assert r_adj < 1e-9
            assert r_psi < 1e-9


def test_field_equations_fail_off_plane():
    for _, _, _, data in canonical_cp2(n=1):
        r_adj, r_psi = el_residuals_connection(data, 1.0, 1.0, 1.0)
        assert r_adj < 1e-9  # coupling-independent part still holds
        assert r_psi > 1e-3


# -- flat-model certification ----------------------------------------------------


def test_kahler_einstein_check_passes_on_projective_plane():
    for _, uc, _, _ in canonical_cp2(n=4):
        res = kahler_einstein_check(uc)
        assert res["res_ida_omega"] < 1e-9
        assert res["res_F_Sigma"] < 1e-9
        assert res["res_T"] < 1e-9


def test_kahler_einstein_check_fails_on_flat_frame():
    # flat space is not the flat model: i da and F cannot reach omega and Sigma
    uc = FlatFrame().at(np.zeros(DIM), 2)
    res = kahler_einstein_check(uc)
    assert abs(res["res_ida_omega"] - 0.5) < 1e-12
    assert abs(res["res_F_Sigma"] - 0.5) < 1e-12
    assert res["res_T"] < 1e-14


def test_geometric_abelian_is_twice_canonical_scale():
    for _, uc, u2, data in canonical_cp2(n=1):
        assert (geometric_abelian(u2) - 2.0 * data.a).max_abs() < 1e-14


# -- metric form of the density -----------------------------------------------------


def test_model_density_equals_metric_density():
    cases = [
        ("random", lambda ff: AbelianField.seeded(31)),
        ("cp2", lambda ff: CanonicalAbelian(ff)),
        ("s2xr2", lambda ff: AbelianField.zero()),
    ]
    for name, mk_a in cases:
        ff = frame_field(name, seed=19)
        a_field = mk_a(ff)
        for x in sample_points(name, 2, seed=23):
            uc = ff.at(x, 2)
            a = a_field.at(x, 2)
            for lam, mu in [(1.0, 4.0), (0.7, 2.5), (-1.3, 3.0)]:
                assert model_metric_residual(uc, a, lam, mu) < 1e-9


def test_metric_density_rejects_degenerate_coupling():
    uc = FlatFrame().at(np.zeros(DIM), 2)
    cof = uc.coframe()
    R = curvature(solve_levi_civita(cof))
    with pytest.raises(ValueError):
        metric_lagrangian_density(cof, R, AbelianField.zero().at(np.zeros(DIM)), 0.0, 3.0)


# -- metric-variable field equations ---------------------------------------------


def test_geometric_field_equations_on_flat_frame():
    ff, a_field = FlatFrame(), AbelianField.zero()
    x = np.zeros(DIM)
    res3 = el_residuals_geometric(ff, a_field, x, mu_t=3.0)
    for key in ("r_ric20", "r_da20", "r_domega", "j_defect", "r_mainfeq"):
        assert res3[key] < 1e-12
    assert res3["grad_s"] < 1e-8
    # at mu_t = 4 the main equation fails by exactly the norm of omega
    res4 = el_residuals_geometric(ff, a_field, x, mu_t=4.0)
    assert abs(res4["r_mainfeq"] - 1.0) < 1e-8


def test_geometric_field_equations_on_projective_plane():
    ff = frame_field("cp2")
    a_field = CanonicalAbelian(ff)
    for x in sample_points("cp2", 2, seed=29):
        for mu_t in (2.0, 3.7):
            res = el_residuals_geometric(ff, a_field, x, mu_t=mu_t)
            assert res["j_defect"] < 1e-8
            for key in ("r_ric20", "r_da20", "r_domega", "r_mainfeq"):
                assert res[key] < 1e-8
            assert res["grad_s"] < 1e-6


def test_geometric_field_equations_gate_on_j_defect():
    ff = frame_field("random", seed=3)
    x = sample_points("random", 1, seed=3)[0]
    res = el_residuals_geometric(ff, AbelianField.zero(), x, mu_t=3.0)
    assert res["j_defect"] > 1e-6
    assert res["r_mainfeq"] is None


# -- gauge invariance -----------------------------------------------------------


def random_unitary(seed):
    rng = np.random.default_rng(seed)
    G = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    U, _ = np.linalg.qr(G)
    return U


def test_constant_gauge_transform_preserves_densities():
    data = analytic_data(10)
    for useed in (0, 1):
        U = random_unitary(useed)
        moved = constant_gauge_transform(data, U)
        assert block_residual(moved) < 1e-12
        for c in (0.5, 2.0):
            assert (gamma_action_density(moved, c)
                    - gamma_action_density(data, c)).max_abs() < 1e-11
        assert (model_lagrangian(moved, 1.0, 2.0, -0.25)
                - model_lagrangian(data, 1.0, 2.0, -0.25)).max_abs() < 1e-11


def test_constant_gauge_transform_moves_blocks_covariantly():
    data = analytic_data(11)
    U = random_unitary(5)
    det = complex(np.linalg.det(U))
    moved = constant_gauge_transform(data, U)
    b, bm = curvature_blocks(data), curvature_blocks(moved)
    Uf = MatrixForm.const(U, depth=bm.matrix2.depth)
    assert (bm.matrix2 - Uf.wedge(b.matrix2).wedge(Uf.dagger())).max_abs() < 1e-12
    assert (bm.column - det * Uf.wedge(b.column)).max_abs() < 1e-12
    assert (bm.scalar - b.scalar).max_abs() < 1e-13


def test_trace_cyclicity_of_coupling_term():
    # Tr(F psi psi^dagger) = -psi^dagger F psi: the sign the couplings rely on
    data = analytic_data(12)
    F = su2_field_curvature(data.A)
    lhs = F.wedge(data.psi).wedge(data.psi.dagger()).trace()
    rhs = data.psi.dagger().wedge(F).wedge(data.psi)
    assert (lhs + rhs).max_abs() < 1e-13
