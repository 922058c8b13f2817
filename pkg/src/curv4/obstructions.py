"""Executable obstructions to frames arising from orthogonal coordinates.

A frame coming from orthogonal coordinates forces R_ijkl = 0 whenever all
four indices are distinct.  This module searches SO(4) for such frames,
checks the scalar-curvature sign relations a Kaehler operator must then
satisfy, classifies self-dual Kaehler operators (either scalar-flat and
conformally flat, or all structure coefficients squared equal 1/3), solves
the exact linear systems on the logarithmic derivative constants c_1..c_4
arising in the special frame, and certifies the Ricci-flat obstruction as
a finite-dimensional nullspace computation.

Numerical searches never claim nonexistence: a residual stuck above
tolerance is reported as "inconclusive".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from .bivectors import FrameRotation, induced_map, random_rotation
from .kahler import (
    KahlerCoeffs,
    NonKahlerError,
    _identity_lines,
    coeffs_in_frame,
    from_unitary_frame,
    kaehler_residuals,
)
from .operators import (
    CurvatureOperator,
    bianchi_defect,
    conjugate,
    decompose,
    ricci,
    scalar_curvature,
)

VERDICT_FLAT = "flat"
VERDICT_CONFORMALLY_FLAT = "conformally-flat-branch"
VERDICT_SPECIAL_FRAME = "special-frame-branch"
VERDICT_VIOLATION = "violation"
VERDICT_INCONCLUSIVE = "inconclusive"


# ---------------------------------------------------------------------------
# SO(4) parameterization: exp of a skew matrix, split into the two isoclinic
# (left/right quaternion) factors, each a two-term closed form.

_GENERATORS = np.array(
    [
        [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]],
        [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]],
        [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]],
        [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]],
        [[0, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]],
        [[0, 0, 0, -1], [0, 0, 1, 0], [0, -1, 0, 0], [1, 0, 0, 0]],
    ],
    dtype=float,
)
_GENERATORS.flags.writeable = False
_EYE4 = np.eye(4)


def _iso_exp(v, gens):
    # (v . gens)^2 = -|v|^2 Id, so the exponential closes after two terms
    n = float(np.linalg.norm(v))
    k = np.tensordot(v, gens, axes=1)
    return np.cos(n) * _EYE4 + np.sinc(n / np.pi) * k


def so4_exp(theta):
    """exp of the skew 4x4 matrix with the given six parameters."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (6,):
        raise ValueError("expected six skew parameters")
    return _iso_exp(theta[:3], _GENERATORS[:3]) @ _iso_exp(theta[3:], _GENERATORS[3:])


def skew_from_params(theta):
    """The skew matrix sum theta_a G_a itself (so4_exp(theta) = exp of it)."""
    return np.tensordot(np.asarray(theta, dtype=float), _GENERATORS, axes=1)


# ---------------------------------------------------------------------------
# Distinct-index residual and its minimization over SO(4).


def _residual_raw(m, qmat):
    l = induced_map(qmat)
    r1234 = l[:, 0] @ m @ l[:, 5]
    r1324 = l[:, 1] @ m @ l[:, 4]
    r1423 = l[:, 2] @ m @ l[:, 3]
    return float(r1234 * r1234 + r1324 * r1324 + r1423 * r1423)


def distinct_index_residual(r_op, q: FrameRotation):
    """Sum of squares of the three distinct-index components in the rotated
    frame; zero exactly when the frame satisfies the necessary condition for
    orthogonal coordinates.

    The alternating sum R_1234 - R_1324 + R_1423 equals three times the
    Bianchi defect in every frame, so the residual can never drop below
    3 beta^2 for an operator with star component beta; for operators
    satisfying the Bianchi identity the two effective degrees of freedom
    can always be zeroed in some frame (the two Weyl blocks rotate
    independently, and a traceless symmetric matrix can always be rotated
    to have zero diagonal).  The information carried by the condition is
    therefore *which* frames achieve it, not whether one exists.
    """
    return _residual_raw(r_op.matrix, q.matrix)


@dataclass(frozen=True)
class FrameSearchResult:
    frame: FrameRotation
    residual: float
    restart_index: int
    conclusive: bool


def _descend(m, q, max_iterations):
    """Gradient descent with backtracking on the six skew parameters,
    composed onto the incumbent frame; central differences, fixed h."""
    h = 1e-6
    step = 1.0
    val = _residual_raw(m, q)
    grad = np.empty(6)
    probe = np.zeros(6)
    for _ in range(max_iterations):
        if val <= 1e-28:
            break
        for a in range(6):
            probe[:] = 0.0
            probe[a] = h
            fp = _residual_raw(m, q @ so4_exp(probe))
            probe[a] = -h
            fm = _residual_raw(m, q @ so4_exp(probe))
            grad[a] = (fp - fm) / (2.0 * h)
        gn2 = float(grad @ grad)
        if gn2 == 0.0:
            break
        alpha = step
        for _ in range(45):
            cand = q @ so4_exp(-alpha * grad)
            cval = _residual_raw(m, cand)
            if cval <= val - 1e-4 * alpha * gn2:
                break
            alpha *= 0.5
        else:
            break  # within finite-difference noise of a local minimum
        q, val = cand, cval
        step = min(alpha * 2.0, 1e4)
    return q, val


def frame_search(r_op, restarts=32, seed=0, tol=1e-10, max_iterations=300):
    """Multi-start minimization of the distinct-index residual over SO(4).

    Deterministic for fixed (operator, restarts, seed).  The returned
    residual is compared against ``tol`` scaled by the squared operator
    norm; failure to reach it means "inconclusive", never nonexistence.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    scale = max(1.0, r_op.norm())
    m = r_op.matrix / scale
    rng = np.random.default_rng(seed)
    best_val = np.inf
    best_q = _EYE4
    best_index = -1
    for index in range(restarts):
        q0 = random_rotation(rng).matrix
        q, val = _descend(m, q0, max_iterations)
        if val < best_val:
            best_val, best_q, best_index = val, q, index
        if best_val <= 1e-28:
            break
    residual = best_val * scale * scale
    return FrameSearchResult(
        frame=FrameRotation(best_q),
        residual=float(residual),
        restart_index=best_index,
        conclusive=bool(residual <= tol * max(1.0, scale * scale)),
    )


def cp2_example_frame():
    """The explicit frame in which every distinct-index component of the
    constant-holomorphic-curvature operator vanishes; its structure
    coefficients are (1/sqrt3, 1/sqrt3, 1/sqrt3)."""
    s2, s3, s6 = np.sqrt(2.0), np.sqrt(3.0), np.sqrt(6.0)
    q = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0 / s3, 1.0 / s3, 1.0 / s3],
            [0.0, 1.0 / s2, -1.0 / s2, 0.0],
            [0.0, 1.0 / s6, 1.0 / s6, -s2 / s3],
        ]
    )
    return FrameRotation(q)


# ---------------------------------------------------------------------------
# Scalar-sign relations and the self-dual classification.


@dataclass(frozen=True)
class ScalarSignReport:
    pair_sums: tuple
    predicted: tuple
    max_deviation: float
    scalar: float
    common_sign: int
    ok: bool


def scalar_sign_check(r_op, structure, q: FrameRotation, tol=1e-9):
    """In a Kaehler frame with vanishing distinct-index components the three
    pair sums R_1212+R_3434, R_1313+R_2424, R_1414+R_2323 equal (r/2) a_1j^2,
    hence share the sign of the scalar curvature."""
    scale = max(1.0, r_op.norm())
    lines = kaehler_residuals(r_op, structure, q)
    if float(np.max(np.abs(lines))) > tol * scale:
        raise NonKahlerError("operator does not satisfy the Kaehler conditions")
    if np.sqrt(distinct_index_residual(r_op, q)) > tol * scale:
        raise ValueError("frame carries distinct-index curvature components")
    rc = conjugate(r_op, q)
    c = rc.component
    sums = (
        c(1, 2, 1, 2) + c(3, 4, 3, 4),
        c(1, 3, 1, 3) + c(2, 4, 2, 4),
        c(1, 4, 1, 4) + c(2, 3, 2, 3),
    )
    r = scalar_curvature(r_op)
    coeffs = coeffs_in_frame(structure, q)
    predicted = tuple((r / 2.0) * a1j**2 for a1j in coeffs.as_array())
    deviation = max(abs(s - p) for s, p in zip(sums, predicted))
    common_sign = 0 if abs(r) <= tol * scale else (1 if r > 0 else -1)
    return ScalarSignReport(
        pair_sums=tuple(float(s) for s in sums),
        predicted=tuple(float(p) for p in predicted),
        max_deviation=float(deviation),
        scalar=float(r),
        common_sign=common_sign,
        ok=bool(deviation <= 1e-8 * scale),
    )


@dataclass(frozen=True)
class ObstructionReport:
    verdict: str
    residuals: dict
    tolerance: float
    frame: np.ndarray | None = None
    coefficients: tuple | None = None
    cases: tuple | None = None
    notes: tuple = ()

    def to_dict(self):
        doc = {
            "verdict": self.verdict,
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "tolerance": float(self.tolerance),
        }
        if self.frame is not None:
            doc["frame"] = [[float(v) for v in row] for row in self.frame]
        if self.coefficients is not None:
            doc["coefficients"] = [float(v) for v in self.coefficients]
        if self.cases is not None:
            doc["cases"] = [case_summary(c) for c in self.cases]
        if self.notes:
            doc["notes"] = list(self.notes)
        return doc


def selfdual_classify(r_op, structure, q: FrameRotation, tol=1e-9, coeff_tol=None):
    """Classify a self-dual Kaehler operator given a distinct-index-free frame.

    Either the scalar curvature vanishes (and with it the whole self-dual
    Weyl part: conformally flat branch) or every structure coefficient
    squared equals 1/3 (special frame branch, with the exact c-system
    analysis attached).  Any other outcome contradicts the block form and
    is flagged as a violation.

    ``coeff_tol`` bounds |a_1j^2 - 1/3| separately, since coefficients
    recovered from a numerical frame search carry roughly the square root
    of the residual's accuracy.
    """
    scale = max(1.0, r_op.norm())
    if coeff_tol is None:
        coeff_tol = max(tol, 1e-6)
    dec = decompose(r_op)
    if dec.weyl_minus.norm() > tol * scale:
        raise ValueError("operator is not self-dual (anti-self-dual Weyl part present)")
    lines = kaehler_residuals(r_op, structure, q)
    if float(np.max(np.abs(lines))) > tol * scale:
        raise NonKahlerError("operator does not satisfy the Kaehler conditions")
    dres = distinct_index_residual(r_op, q)
    if np.sqrt(dres) > tol * scale:
        raise ValueError("frame carries distinct-index curvature components")

    coeffs = coeffs_in_frame(structure, q)
    residuals = {
        "weyl_minus_norm": dec.weyl_minus.norm(),
        "weyl_plus_norm": dec.weyl_plus.norm(),
        "kaehler_identity_max": float(np.max(np.abs(lines))),
        "distinct_index_residual": dres,
        "scalar_curvature": dec.r,
    }
    if abs(dec.r) <= tol * scale:
        if dec.weyl_plus.norm() <= 10.0 * tol * scale:
            return ObstructionReport(
                verdict=VERDICT_CONFORMALLY_FLAT,
                residuals=residuals,
                tolerance=tol,
                frame=q.matrix,
                coefficients=tuple(coeffs.as_array()),
            )
        return ObstructionReport(
            verdict=VERDICT_VIOLATION,
            residuals=residuals,
            tolerance=tol,
            frame=q.matrix,
            coefficients=tuple(coeffs.as_array()),
            notes=("scalar curvature vanishes but the self-dual Weyl part does not",),
        )
    coeff_defect = float(np.max(np.abs(coeffs.as_array() ** 2 - 1.0 / 3.0)))
    residuals["coefficient_defect"] = coeff_defect
    if coeff_defect <= coeff_tol:
        return ObstructionReport(
            verdict=VERDICT_SPECIAL_FRAME,
            residuals=residuals,
            tolerance=tol,
            frame=q.matrix,
            coefficients=tuple(coeffs.as_array()),
            cases=c_system_solve(),
        )
    return ObstructionReport(
        verdict=VERDICT_VIOLATION,
        residuals=residuals,
        tolerance=tol,
        frame=q.matrix,
        coefficients=tuple(coeffs.as_array()),
        notes=(
            "nonzero scalar curvature with structure coefficients away from "
            "1/sqrt(3) contradicts the vanishing of the anti-self-dual block",
        ),
    )


# ---------------------------------------------------------------------------
# Exact linear algebra on the c-system.

RELATION_ROWS = (
    (Fraction(0), Fraction(1), Fraction(1), Fraction(1)),
    (Fraction(1), Fraction(0), Fraction(1), Fraction(-1)),
    (Fraction(1), Fraction(-1), Fraction(0), Fraction(1)),
    (Fraction(1), Fraction(1), Fraction(-1), Fraction(0)),
)

REDUCED_SKEW_ROWS = (
    (Fraction(0), Fraction(1), Fraction(-1)),
    (Fraction(-1), Fraction(0), Fraction(1)),
    (Fraction(1), Fraction(-1), Fraction(0)),
)


def exact_determinant(rows):
    rows = [list(r) for r in rows]
    n = len(rows)
    if n == 1:
        return rows[0][0]
    det = Fraction(0)
    for c in range(n):
        if rows[0][c] == 0:
            continue
        minor = [r[:c] + r[c + 1:] for r in rows[1:]]
        det += (-1) ** c * rows[0][c] * exact_determinant(minor)
    return det


def _primitive(vec):
    den = 1
    for x in vec:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in vec]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g:
        ints = [x // g for x in ints]
    lead = next((x for x in ints if x != 0), 1)
    if lead < 0:
        ints = [-x for x in ints]
    return tuple(Fraction(x) for x in ints)


def exact_nullspace(rows, n):
    """Basis of the rational nullspace as primitive integer vectors."""
    m = [[Fraction(v) for v in row] for row in rows]
    pivots = []
    r = 0
    for c in range(n):
        pivot_row = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        pv = m[r][c]
        m[r] = [v / pv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    basis = []
    for free_col in (c for c in range(n) if c not in pivots):
        vec = [Fraction(0)] * n
        vec[free_col] = Fraction(1)
        for row_idx, pivot_col in enumerate(pivots):
            vec[pivot_col] = -m[row_idx][free_col]
        basis.append(_primitive(vec))
    return basis


@dataclass(frozen=True)
class CSystemCase:
    """One of the 16 cases: per index either its relation row is imposed or
    the constant c_j itself is set to zero."""

    relation_active: tuple
    rows: tuple
    nullspace: tuple


def _unit_row(j):
    return tuple(Fraction(1 if k == j else 0) for k in range(4))


def c_system_solve():
    """Solve all 16 exact case systems on (c_1, .., c_4).

    With all four relations active the matrix has determinant -9 and only
    the zero solution.  Dropping relation j in favor of c_j = 0 can leave a
    line of solutions: the displayed reduced 3x3 system is skew with kernel
    spanned by (1, 1, 1), so e.g. c_1 = 0 admits (0, t, t, t).  The solution
    sets are reported verbatim.
    """
    cases = []
    for bits in itertools.product((True, False), repeat=4):
        rows = tuple(
            RELATION_ROWS[j] if bits[j] else _unit_row(j) for j in range(4)
        )
        cases.append(
            CSystemCase(
                relation_active=bits,
                rows=rows,
                nullspace=tuple(exact_nullspace(rows, 4)),
            )
        )
    return tuple(cases)


def case_summary(case: CSystemCase):
    return {
        "relation_active": list(case.relation_active),
        "nullspace_dimension": len(case.nullspace),
        "nullspace_basis": [[str(x) for x in vec] for vec in case.nullspace],
    }


# ---------------------------------------------------------------------------
# Ricci-flat obstruction as a nullspace computation.

_SYM_SLOTS = tuple((a, b) for a in range(6) for b in range(a, 6))


def _sym_basis():
    mats = []
    for a, b in _SYM_SLOTS:
        e = np.zeros((6, 6))
        e[a, b] = e[b, a] = 1.0
        mats.append(e)
    return tuple(mats)


_SYM_BASIS = _sym_basis()


@dataclass(frozen=True)
class NullspaceCertificate:
    dimension: int
    singular_values: np.ndarray
    basis: tuple
    constraint_count: int
    rank_tolerance: float


def ricciflat_nullspace(coeffs, rank_tol=1e-10, include_distinct_index=True):
    """Dimension (and basis) of the space of symmetric operators satisfying
    the first Bianchi identity, the twelve Kaehler conditions for the given
    unit coefficient triple, Ricci flatness, and (optionally) the vanishing
    of the three distinct-index components.

    The computed dimension is 3 for generic unit triples and 4 when a
    coefficient vanishes (there the twelve displayed conditions are weaker
    than the operator conditions RJ = JR = R).  The surviving family is
    genuine, not numerical: a Ricci-flat Kaehler operator is a traceless
    symmetric form on the anti-self-dual subspace, the distinct-index
    constraints only kill its diagonal in the adapted basis, and a zero
    diagonal never forces a symmetric matrix to vanish.  Dropping the
    distinct-index family reopens the space further
    (``include_distinct_index=False`` is the control run).
    """
    if isinstance(coeffs, KahlerCoeffs):
        triple = coeffs
    else:
        vals = tuple(float(v) for v in coeffs)
        if len(vals) != 3:
            raise ValueError("expected a coefficient triple")
        triple = KahlerCoeffs(*vals)  # raises for non-unit triples
    columns = []
    for e in _SYM_BASIS:
        op = CurvatureOperator(e)
        rho = ricci(op)
        rows = [bianchi_defect(op)]
        rows.extend(_identity_lines(op, triple))
        rows.extend(rho[a, b] for a in range(4) for b in range(a, 4))
        if include_distinct_index:
            rows.append(op.component(1, 2, 3, 4))
            rows.append(op.component(1, 3, 2, 4))
            rows.append(op.component(1, 4, 2, 3))
        columns.append(rows)
    constraints = np.array(columns, dtype=float).T
    _, sv, vt = np.linalg.svd(constraints)
    rank = int(np.sum(sv > rank_tol * sv[0]))
    dimension = len(_SYM_SLOTS) - rank
    basis = []
    for vec in vt[rank:]:
        mat = np.zeros((6, 6))
        for (a, b), weight in zip(_SYM_SLOTS, vec):
            mat[a, b] = mat[b, a] = weight
        basis.append(CurvatureOperator(mat))
    return NullspaceCertificate(
        dimension=dimension,
        singular_values=sv,
        basis=tuple(basis),
        constraint_count=constraints.shape[0],
        rank_tolerance=float(rank_tol),
    )


# ---------------------------------------------------------------------------
# End-to-end pipeline.


def run_obstruction_suite(r_op, structure=None, tolerance=1e-9, restarts=32, seed=0):
    """frame search -> Kaehler residuals -> scalar-sign relations -> the
    branch the operator belongs to (self-dual classification or Ricci-flat
    certificate), aggregated into one report.

    Verdicts: "flat" (zero operator), "conformally-flat-branch" or
    "special-frame-branch" (self-dual classification), "violation"
    (numerically inconsistent certificates), "inconclusive" (no qualifying
    frame found, or the covered theorems do not apply).
    """
    structure = structure if structure is not None else from_unitary_frame()
    scale = max(1.0, r_op.norm())
    residuals = {"operator_norm": r_op.norm()}
    if r_op.norm() <= tolerance:
        return ObstructionReport(
            verdict=VERDICT_FLAT, residuals=residuals, tolerance=tolerance
        )

    search = frame_search(r_op, restarts=restarts, seed=seed, tol=1e-10)
    residuals["distinct_index_residual"] = search.residual
    q = search.frame
    if not search.conclusive:
        notes = ["no frame with vanishing distinct-index components was found"]
        if float(np.linalg.norm(ricci(r_op))) <= tolerance * scale:
            try:
                cert = ricciflat_nullspace(coeffs_in_frame(structure, q).as_array())
                residuals["ricciflat_nullspace_dimension"] = cert.dimension
                notes.append(
                    "operator is Ricci-flat; the constraint nullspace at the "
                    f"best-frame coefficients has dimension {cert.dimension}"
                )
            except ValueError:
                pass
        return ObstructionReport(
            verdict=VERDICT_INCONCLUSIVE,
            residuals=residuals,
            tolerance=tolerance,
            frame=q.matrix,
            notes=tuple(notes),
        )

    lines = kaehler_residuals(r_op, structure, q)
    residuals["kaehler_identity_max"] = float(np.max(np.abs(lines)))
    if residuals["kaehler_identity_max"] > tolerance * scale:
        return ObstructionReport(
            verdict=VERDICT_INCONCLUSIVE,
            residuals=residuals,
            tolerance=tolerance,
            frame=q.matrix,
            notes=("operator is not Kaehler for the supplied structure",),
        )

    sign_report = scalar_sign_check(r_op, structure, q, tol=tolerance)
    residuals["scalar_relation_deviation"] = sign_report.max_deviation

    dec = decompose(r_op)
    if dec.weyl_minus.norm() <= tolerance * scale:
        report = selfdual_classify(r_op, structure, q, tol=tolerance)
        merged = dict(report.residuals)
        merged.update(residuals)
        return ObstructionReport(
            verdict=report.verdict,
            residuals=merged,
            tolerance=tolerance,
            frame=report.frame,
            coefficients=report.coefficients,
            cases=report.cases,
            notes=report.notes,
        )
    if float(np.linalg.norm(ricci(r_op))) <= tolerance * scale:
        cert = ricciflat_nullspace(coeffs_in_frame(structure, q).as_array())
        residuals["ricciflat_nullspace_dimension"] = cert.dimension
        if cert.dimension == 0:
            return ObstructionReport(
                verdict=VERDICT_VIOLATION,
                residuals=residuals,
                tolerance=tolerance,
                frame=q.matrix,
                notes=(
                    "a qualifying frame was found for a nonzero Ricci-flat "
                    "Kaehler operator, but the exact constraint space is zero",
                ),
            )
        return ObstructionReport(
            verdict=VERDICT_INCONCLUSIVE,
            residuals=residuals,
            tolerance=tolerance,
            frame=q.matrix,
        )
    return ObstructionReport(
        verdict=VERDICT_INCONCLUSIVE,
        residuals=residuals,
        tolerance=tolerance,
        frame=q.matrix,
        coefficients=tuple(coeffs_in_frame(structure, q).as_array()),
        notes=("operator is neither self-dual nor Ricci-flat; not covered",),
    )
