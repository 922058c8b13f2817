from fractions import Fraction

import numpy as np
import pytest

from conftest import random_bianchi
from curv4 import (
    ADAPTED_IDENTITY,
    CurvatureOperator,
    FrameRotation,
    NonKahlerError,
    bianchi_defect,
    build_const_hol_sec,
    build_surface_product,
    c_system_solve,
    coeffs_in_frame,
    conjugate,
    cp2_example_frame,
    distinct_index_residual,
    exact_determinant,
    exact_nullspace,
    extend_to_bivectors,
    frame_search,
    from_unitary_frame,
    identity_operator,
    kaehler_residuals,
    random_rotation,
    ricci,
    ricciflat_nullspace,
    run_obstruction_suite,
    scalar_sign_check,
    selfdual_classify,
    so4_exp,
)
from curv4.obstructions import (
    RELATION_ROWS,
    REDUCED_SKEW_ROWS,
    VERDICT_CONFORMALLY_FLAT,
    VERDICT_FLAT,
    VERDICT_INCONCLUSIVE,
    VERDICT_SPECIAL_FRAME,
    VERDICT_VIOLATION,
    skew_from_params,
)

S3 = 1.0 / np.sqrt(3.0)


def taylor_expm(k, terms=60):
    out = np.eye(4)
    term = np.eye(4)
    for n in range(1, terms):
        term = term @ k / n
        out = out + term
    return out


# --- SO(4) parameterization -----------------------------------------------------

def test_so4_exp_matches_series(rng):
    for _ in range(30):
        theta = rng.uniform(-1.0, 1.0, 6)
        k = skew_from_params(theta)
        np.testing.assert_allclose(k, -k.T, atol=0)
        np.testing.assert_allclose(so4_exp(theta), taylor_expm(k), atol=1e-12)


def test_so4_exp_is_rotation(rng):
    assert np.array_equal(so4_exp(np.zeros(6)), np.eye(4))
    for _ in range(20):
        q = so4_exp(rng.uniform(-4, 4, 6))
        np.testing.assert_allclose(q.T @ q, np.eye(4), atol=1e-13)
        assert np.linalg.det(q) == pytest.approx(1.0, abs=1e-12)


def test_skew_generators_span():
    gens = np.array([skew_from_params(np.eye(6)[a]) for a in range(6)])
    assert np.linalg.matrix_rank(gens.reshape(6, 16)) == 6


# --- distinct-index residual ------------------------------------------------------

def test_distinct_residual_zero_operator(rng):
    zero = CurvatureOperator(np.zeros((6, 6)))
    assert distinct_index_residual(zero, random_rotation(rng)) == 0.0


def test_distinct_residual_unitary_frame_value():
    # components c/2, c/4, -c/4 give (1/4 + 1/16 + 1/16) c^2 = 0.375 at c=1
    op = build_const_hol_sec(1.0)
    assert distinct_index_residual(op, FrameRotation.identity()) == pytest.approx(
        0.375, abs=1e-15
    )


def test_distinct_residual_cp2_frame():
    for c in (1.0, 2.0):
        op = build_const_hol_sec(c)
        assert distinct_index_residual(op, cp2_example_frame()) <= 1e-18


def test_first_bianchi_couples_components(rng):
    # with the Bianchi identity the three components are linearly dependent
    # in every frame
    for _ in range(10):
        op = random_bianchi(rng)
        q = random_rotation(rng)
        rc = conjugate(op, q)
        combo = (
            rc.component(1, 2, 3, 4)
            - rc.component(1, 3, 2, 4)
            + rc.component(1, 4, 2, 3)
        )
        assert abs(combo) <= 1e-10


def test_star_component_is_a_frame_invariant_floor(rng):
    # the star operator keeps residual 3 in every frame, so the search on it
    # must come back inconclusive instead of claiming success
    from curv4 import star_operator

    star = star_operator()
    for _ in range(10):
        assert distinct_index_residual(star, random_rotation(rng)) == pytest.approx(
            3.0, abs=1e-12
        )
    result = frame_search(star, restarts=4, seed=0)
    assert not result.conclusive
    assert result.residual == pytest.approx(3.0, abs=1e-9)


def test_generic_bianchi_operators_admit_distinct_free_frames():
    # both Weyl blocks rotate independently and can be given zero diagonal,
    # so the search succeeds on every operator satisfying the Bianchi
    # identity; the obstruction content lives in which frames qualify
    for k in range(5):
        op = random_bianchi(np.random.default_rng(100 + k))
        result = frame_search(op, restarts=32, seed=0)
        assert result.conclusive, f"sample {k} stuck at {result.residual:.3e}"


# --- the explicit example frame ---------------------------------------------------

def test_cp2_frame_is_exact():
    q = cp2_example_frame().matrix
    np.testing.assert_allclose(np.linalg.norm(q, axis=0), 1.0, atol=1e-15)
    np.testing.assert_allclose(np.linalg.norm(q, axis=1), 1.0, atol=1e-15)
    assert np.linalg.det(q) == pytest.approx(1.0, abs=1e-15)
    coeffs = coeffs_in_frame(from_unitary_frame(), cp2_example_frame())
    np.testing.assert_allclose(coeffs.as_array(), [S3, S3, S3], atol=1e-15)


# --- frame search -----------------------------------------------------------------

def test_frame_search_zero_operator():
    zero = CurvatureOperator(np.zeros((6, 6)))
    result = frame_search(zero, restarts=4, seed=1)
    assert result.residual == 0.0
    assert result.restart_index == 0
    assert result.conclusive


def test_frame_search_recovers_special_frame():
    op = build_const_hol_sec(1.0)
    result = frame_search(op, restarts=32, seed=0)
    assert result.conclusive
    assert result.residual <= 1e-12
    coeffs = coeffs_in_frame(from_unitary_frame(), result.frame)
    squares = sorted(v * v for v in coeffs.as_array())
    np.testing.assert_allclose(squares, [1 / 3, 1 / 3, 1 / 3], atol=1e-6)


def test_frame_search_deterministic():
    op = build_const_hol_sec(1.0)
    r1 = frame_search(op, restarts=8, seed=3)
    r2 = frame_search(op, restarts=8, seed=3)
    assert np.array_equal(r1.frame.matrix, r2.frame.matrix)
    assert r1.residual == r2.residual
    assert r1.restart_index == r2.restart_index


def test_frame_search_surface_product():
    op, _ = build_surface_product(1.0, -1.0)
    # the splitting frame itself carries no distinct-index components
    assert distinct_index_residual(op, FrameRotation.identity()) == 0.0
    result = frame_search(op, restarts=8, seed=0)
    assert result.conclusive
    assert result.residual <= 1e-12


def test_frame_search_rejects_bad_restarts():
    with pytest.raises(ValueError):
        frame_search(identity_operator(), restarts=0)


# --- scalar sign relations ---------------------------------------------------------

def test_scalar_sign_cp2():
    op = build_const_hol_sec(1.0)
    report = scalar_sign_check(op, from_unitary_frame(), cp2_example_frame())
    np.testing.assert_allclose(report.pair_sums, [1.0, 1.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(report.predicted, [1.0, 1.0, 1.0], atol=1e-12)
    assert report.scalar == pytest.approx(6.0)
    assert report.common_sign == 1
    assert report.ok


def test_scalar_sign_surface_product():
    op, j = build_surface_product(1.0, -1.0)
    report = scalar_sign_check(op, j, FrameRotation.identity())
    np.testing.assert_allclose(report.pair_sums, 0.0, atol=1e-14)
    assert report.common_sign == 0
    assert report.ok


def test_scalar_sign_zero_operator():
    zero = CurvatureOperator(np.zeros((6, 6)))
    report = scalar_sign_check(zero, from_unitary_frame(), FrameRotation.identity())
    assert report.common_sign == 0
    assert report.ok


def test_scalar_sign_rejects_bad_frame():
    op = build_const_hol_sec(1.0)
    with pytest.raises(ValueError, match="distinct-index"):
        scalar_sign_check(op, from_unitary_frame(), FrameRotation.identity())


# --- self-dual classification -------------------------------------------------------

def test_selfdual_classify_special_frame():
    op = build_const_hol_sec(1.0)
    report = selfdual_classify(op, from_unitary_frame(), cp2_example_frame())
    assert report.verdict == VERDICT_SPECIAL_FRAME
    np.testing.assert_allclose(np.abs(report.coefficients), S3, atol=1e-12)
    assert report.cases is not None and len(report.cases) == 16


def test_selfdual_classify_conformally_flat():
    op, j = build_surface_product(1.0, -1.0)
    report = selfdual_classify(op, j, FrameRotation.identity())
    assert report.verdict == VERDICT_CONFORMALLY_FLAT


def test_selfdual_classify_preconditions():
    op = build_const_hol_sec(1.0)
    with pytest.raises(ValueError, match="distinct-index"):
        selfdual_classify(op, from_unitary_frame(), FrameRotation.identity())
    not_selfdual, j = build_surface_product(1.0, 1.0)
    with pytest.raises(ValueError, match="self-dual"):
        selfdual_classify(not_selfdual, j, FrameRotation.identity())


def test_selfdual_classify_violation_branch():
    # a deliberately loose tolerance lets a slightly wrong frame through the
    # preconditions; the coefficient test must then flag the contradiction
    op = build_const_hol_sec(1.0)
    wiggle = so4_exp(np.array([0.08, -0.03, 0.05, 0.02, -0.06, 0.04]))
    q = FrameRotation(cp2_example_frame().matrix @ wiggle)
    report = selfdual_classify(
        op, from_unitary_frame(), q, tol=0.5, coeff_tol=1e-12
    )
    assert report.verdict == VERDICT_VIOLATION


# --- exact c-system ------------------------------------------------------------------

def test_relation_matrix_determinant():
    assert exact_determinant(RELATION_ROWS) == Fraction(-9)


def test_reduced_skew_kernel():
    basis = exact_nullspace(REDUCED_SKEW_ROWS, 3)
    assert basis == [(Fraction(1), Fraction(1), Fraction(1))]


def test_c_system_all_cases():
    cases = c_system_solve()
    assert len(cases) == 16
    by_flags = {case.relation_active: case for case in cases}
    assert by_flags[(True, True, True, True)].nullspace == ()
    assert by_flags[(False, False, False, False)].nullspace == ()
    line = by_flags[(False, True, True, True)].nullspace
    assert line == ((Fraction(0), Fraction(1), Fraction(1), Fraction(1)),)
    for case in cases:
        for vec in case.nullspace:
            assert all(isinstance(x, Fraction) for x in vec)
            for row in case.rows:
                assert sum(r * v for r, v in zip(row, vec)) == 0


# --- Ricci-flat constraint nullspace --------------------------------------------------

def offdiagonal_asd_operator(w12, w13, w23):
    w = np.zeros((6, 6))
    w[3, 4] = w[4, 3] = w12
    w[3, 5] = w[5, 3] = w13
    w[4, 5] = w[5, 4] = w23
    return CurvatureOperator(ADAPTED_IDENTITY @ w @ ADAPTED_IDENTITY.T)


def test_offdiagonal_family_satisfies_all_constraints():
    # the reason the constraint nullspace is not zero: operators supported
    # on the anti-self-dual block with zero diagonal there pass every
    # constraint family exactly
    op = offdiagonal_asd_operator(1.0, 0.7, -0.3)
    assert op.norm() > 1.0
    np.testing.assert_array_equal(ricci(op), np.zeros((4, 4)))
    assert bianchi_defect(op) == 0.0
    lines = kaehler_residuals(op, from_unitary_frame(), FrameRotation.identity())
    np.testing.assert_array_equal(lines, np.zeros(12))
    jext = extend_to_bivectors(from_unitary_frame())
    np.testing.assert_array_equal(op.matrix @ jext, op.matrix)
    np.testing.assert_array_equal(jext @ op.matrix, op.matrix)
    assert op.component(1, 2, 3, 4) == 0.0
    assert op.component(1, 3, 2, 4) == 0.0
    assert op.component(1, 4, 2, 3) == 0.0


def test_ricciflat_nullspace_dimensions(rng):
    # generic triples leave exactly the 3-parameter off-diagonal family;
    # triples with a vanishing coefficient gain one more dimension because
    # the twelve displayed conditions degenerate there
    assert ricciflat_nullspace((S3, S3, S3)).dimension == 3
    assert ricciflat_nullspace((1.0, 0.0, 0.0)).dimension == 4
    for _ in range(20):
        v = rng.standard_normal(3)
        v /= np.linalg.norm(v)
        assert ricciflat_nullspace(tuple(v)).dimension == 3


def test_ricciflat_nullspace_basis_members_satisfy_constraints():
    cert = ricciflat_nullspace((S3, S3, S3))
    assert len(cert.basis) == cert.dimension
    for op in cert.basis:
        assert op.norm() > 0.5
        assert np.max(np.abs(ricci(op))) <= 1e-12
        assert abs(bianchi_defect(op)) <= 1e-12
        assert abs(op.component(1, 2, 3, 4)) <= 1e-12
        assert abs(op.component(1, 3, 2, 4)) <= 1e-12
        assert abs(op.component(1, 4, 2, 3)) <= 1e-12


def test_ricciflat_control_reopens_space():
    full = ricciflat_nullspace((1.0, 0.0, 0.0))
    control = ricciflat_nullspace((1.0, 0.0, 0.0), include_distinct_index=False)
    assert control.dimension > full.dimension
    assert control.dimension > 0


def test_ricciflat_dimension_stable_under_rank_tolerance(rng):
    for _ in range(20):
        v = rng.standard_normal(3)
        v /= np.linalg.norm(v)
        dims = {
            ricciflat_nullspace(tuple(v), rank_tol=t).dimension
            for t in (1e-12, 1e-10, 1e-8)
        }
        assert len(dims) == 1


def test_ricciflat_rejects_non_unit_triple():
    with pytest.raises(ValueError):
        ricciflat_nullspace((1.0, 1.0, 0.0))


# --- end-to-end suite -----------------------------------------------------------------

def test_suite_const_hol_sec():
    report = run_obstruction_suite(build_const_hol_sec(1.0))
    assert report.verdict == VERDICT_SPECIAL_FRAME
    squares = sorted(v * v for v in report.coefficients)
    np.testing.assert_allclose(squares, [1 / 3, 1 / 3, 1 / 3], atol=1e-6)
    assert report.residuals["distinct_index_residual"] <= 1e-12


def test_suite_zero_operator():
    report = run_obstruction_suite(CurvatureOperator(np.zeros((6, 6))))
    assert report.verdict == VERDICT_FLAT


def test_suite_surface_product():
    op, j = build_surface_product(1.0, -1.0)
    report = run_obstruction_suite(op, j)
    assert report.verdict == VERDICT_CONFORMALLY_FLAT


def test_suite_non_kahler_input_is_inconclusive():
    report = run_obstruction_suite(identity_operator())
    assert report.verdict == VERDICT_INCONCLUSIVE


def test_suite_uncovered_kahler_operator_is_inconclusive():
    # Kaehler but neither self-dual nor Ricci-flat: outside the covered cases
    op, j = build_surface_product(1.0, -2.0)
    report = run_obstruction_suite(op, j)
    assert report.verdict == VERDICT_INCONCLUSIVE
    assert any("neither self-dual nor Ricci-flat" in note for note in report.notes)


def test_suite_ricci_flat_family_reports_dimension():
    # a Ricci-flat Kaehler operator always admits a distinct-index-free
    # frame (rotate the anti-self-dual block to zero diagonal), so the suite
    # finds one and attaches the constraint-nullspace dimension instead of
    # claiming an obstruction
    op = offdiagonal_asd_operator(1.0, 0.4, 0.0)
    report = run_obstruction_suite(op)
    assert report.verdict == VERDICT_INCONCLUSIVE
    assert report.residuals["distinct_index_residual"] <= 1e-10
    assert report.residuals["ricciflat_nullspace_dimension"] == 3


def test_suite_report_serializes():
    report = run_obstruction_suite(build_const_hol_sec(1.0))
    doc = report.to_dict()
    assert doc["verdict"] == VERDICT_SPECIAL_FRAME
    assert len(doc["cases"]) == 16
    assert len(doc["frame"]) == 4
    assert set(doc["residuals"]) >= {"distinct_index_residual", "kaehler_identity_max"}


def test_non_kahler_residual_exceeds_tolerance_reported():
    with pytest.raises(NonKahlerError):
        scalar_sign_check(
            identity_operator(), from_unitary_frame(), FrameRotation.identity()
        )
