"""Symmetric curvature operators on Lambda^2(R^4) and their invariant split.

An algebraic curvature operator is a symmetric 6x6 matrix acting on
bivector coefficients; components are read off through

    R_ijkl = <R(e_i ^ e_j), e_k ^ e_l>.

Sign convention: R_ijij is the sectional curvature of the (e_i, e_j)
plane, so the identity operator models the round metric (r = 12) and
positively curved spaces have positive scalar curvature.

Any symmetric operator splits into five mutually orthogonal pieces:
a scalar multiple of the identity, the image of the traceless Ricci
tensor, self-dual and anti-self-dual Weyl blocks, and a multiple of
the Hodge star (the part a realizable curvature tensor cannot have).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bivectors import (
    ADAPTED_IDENTITY,
    HODGE_MATRIX,
    LEX_PAIRS,
    FrameRotation,
    _unit_sign,
    adapted_matrix,
    induced_rotation,
    pair_slot,
)

SYMMETRY_TOL = 1e-12


class CurvatureOperator:
    """Symmetric operator on Lambda^2(R^4) in the lexicographic basis."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        if m.shape != (6, 6):
            raise ValueError("a curvature operator is a 6x6 matrix")
        scale = max(1.0, float(np.max(np.abs(m))))
        defect = float(np.max(np.abs(m - m.T)))
        if defect > SYMMETRY_TOL * scale:
            raise ValueError(f"matrix is not symmetric (defect {defect:.3e})")
        m = 0.5 * (m + m.T)
        m.flags.writeable = False
        self.matrix = m

    def component(self, i, j, k, l):
        """R_ijkl with the full index symmetries; zero for a repeated pair."""
        if i == j or k == l:
            return 0.0
        a, sa = pair_slot(i, j)
        b, sb = pair_slot(k, l)
        return float(sa * sb * self.matrix[b, a])

    def norm(self):
        return float(np.linalg.norm(self.matrix))

    def inner(self, other):
        return float(np.sum(self.matrix * other.matrix))

    def __add__(self, other):
        return CurvatureOperator(self.matrix + other.matrix)

    def __sub__(self, other):
        return CurvatureOperator(self.matrix - other.matrix)

    def __mul__(self, scalar):
        return CurvatureOperator(self.matrix * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return CurvatureOperator(-self.matrix)

    def __repr__(self):
        return f"CurvatureOperator({self.matrix.tolist()})"


def identity_operator():
    return CurvatureOperator(np.eye(6))


def star_operator():
    return CurvatureOperator(HODGE_MATRIX)


def from_components(components):
    """Build an operator from (i, j, k, l, value) entries.

    Indices are 1-based with i != j and k != l.  Entries related by the
    index symmetries (antisymmetry in each pair, pair exchange) must agree;
    unspecified components are zero.
    """
    m = np.zeros((6, 6))
    seen = np.zeros((6, 6), dtype=bool)
    for entry in components:
        i, j, k, l, value = entry
        for idx in (i, j, k, l):
            if idx not in (1, 2, 3, 4):
                raise ValueError(f"indices must lie in 1..4, got {entry!r}")
        if i == j or k == l:
            raise ValueError(f"index pairs must be non-degenerate, got {entry!r}")
        a, sa = pair_slot(i, j)
        b, sb = pair_slot(k, l)
        v = sa * sb * float(value)
        for row, col in {(b, a), (a, b)}:
            if seen[row, col] and abs(m[row, col] - v) > 1e-12 * max(
                1.0, abs(v), abs(m[row, col])
            ):
                raise ValueError(
                    f"component R_{i}{j}{k}{l}={value} conflicts with a "
                    f"symmetry-related entry already set to {sa * sb * m[row, col]}"
                )
            m[row, col] = v
            seen[row, col] = True
    return CurvatureOperator(m)


def ricci(r_op):
    """Ricci contraction rho(R)_ab = sum_i R_aibi, a symmetric 4x4 matrix.

    The sum is frame independent; it is evaluated in the standard basis.
    """
    rho = np.zeros((4, 4))
    for a in range(1, 5):
        for b in range(a, 5):
            total = 0.0
            for i in range(1, 5):
                total += r_op.component(a, i, b, i)
            rho[a - 1, b - 1] = rho[b - 1, a - 1] = total
    return rho


def scalar_curvature(r_op):
    """Scalar curvature r = 2 tr(R) = tr(rho(R))."""
    return 2.0 * float(np.trace(r_op.matrix))


def bianchi_defect(r_op):
    """The single independent component of the first-Bianchi map in
    dimension 4: R_1234 + R_2314 + R_3124.

    It vanishes exactly when R is Frobenius-orthogonal to the Hodge star;
    both computations are carried out and must agree.
    """
    by_components = (
        r_op.component(1, 2, 3, 4)
        + r_op.component(2, 3, 1, 4)
        + r_op.component(3, 1, 2, 4)
    )
    by_star = 0.5 * float(np.sum(r_op.matrix * HODGE_MATRIX))
    if abs(by_components - by_star) > 1e-10 * max(1.0, r_op.norm()):
        raise AssertionError(
            "component sum and star pairing disagree on the Bianchi defect"
        )
    return by_components


def s_map(t):
    """Right inverse of the Ricci contraction (n = 4).

    Built from the defining four-vector formula

        s(T)_(u1,u2) u3 = (1/2) (<u1,u3> T u2 - <u2,u3> T u1
                                 + <T u1,u3> u2 - <T u2,u3> u1)
                          - (tr T / 6) (<u1,u3> u2 - <u2,u3> u1)

    evaluated on basis pairs.  On an eigenbasis of T this reduces to the
    diagonal action (lam_i + lam_j - tr T / 3)/2 on e_i^e_j, which tests
    use as an independent oracle.
    """
    t = np.asarray(t, dtype=float)
    if t.shape != (4, 4):
        raise ValueError("s_map expects a 4x4 matrix")
    if np.max(np.abs(t - t.T)) > 1e-9 * max(1.0, float(np.max(np.abs(t)))):
        raise ValueError("s_map expects a symmetric matrix")
    tr = float(np.trace(t))
    eye = np.eye(4)
    m = np.empty((6, 6))
    for col, (i, j) in enumerate(LEX_PAIRS):
        u1, u2 = eye[i - 1], eye[j - 1]
        tu1, tu2 = t @ u1, t @ u2
        for row, (k, l) in enumerate(LEX_PAIRS):
            u3, u4 = eye[k - 1], eye[l - 1]
            val = 0.5 * (
                (u1 @ u3) * (tu2 @ u4)
                - (u2 @ u3) * (tu1 @ u4)
                + (tu1 @ u3) * (u2 @ u4)
                - (tu2 @ u3) * (u1 @ u4)
            )
            val -= (tr / 6.0) * ((u1 @ u3) * (u2 @ u4) - (u2 @ u3) * (u1 @ u4))
            m[row, col] = val
    return CurvatureOperator(m)


@dataclass(frozen=True)
class Decomposition:
    """The five orthogonal pieces of a symmetric operator, plus r.

    scalar_part + traceless_ricci_part + weyl_plus + weyl_minus +
    bianchi_part reproduces the input; bianchi_part is the multiple of the
    Hodge star a realizable curvature tensor cannot carry.
    """

    scalar_part: CurvatureOperator
    traceless_ricci_part: CurvatureOperator
    weyl_plus: CurvatureOperator
    weyl_minus: CurvatureOperator
    bianchi_part: CurvatureOperator
    r: float

    def parts(self):
        return (
            self.scalar_part,
            self.traceless_ricci_part,
            self.weyl_plus,
            self.weyl_minus,
            self.bianchi_part,
        )


def decompose(r_op):
    """Split an arbitrary symmetric operator into its five invariant pieces.

    Inputs violating the Bianchi identity are allowed: their star component
    is removed first (bianchi_part), then the Weyl halves are read off the
    diagonal blocks of what remains in the adapted basis.
    """
    m = r_op.matrix
    beta = float(np.sum(m * HODGE_MATRIX)) / 6.0
    bianchi = beta * HODGE_MATRIX
    r = scalar_curvature(r_op)
    scalar = (r / 12.0) * np.eye(6)
    ric0 = s_map(ricci(r_op) - (r / 4.0) * np.eye(4)).matrix
    remainder = m - bianchi - scalar - ric0
    rem_ad = ADAPTED_IDENTITY.T @ remainder @ ADAPTED_IDENTITY
    wp_ad = np.zeros((6, 6))
    wp_ad[:3, :3] = rem_ad[:3, :3]
    wm_ad = np.zeros((6, 6))
    wm_ad[3:, 3:] = rem_ad[3:, 3:]
    weyl_plus = ADAPTED_IDENTITY @ wp_ad @ ADAPTED_IDENTITY.T
    weyl_minus = ADAPTED_IDENTITY @ wm_ad @ ADAPTED_IDENTITY.T
    return Decomposition(
        scalar_part=CurvatureOperator(scalar),
        traceless_ricci_part=CurvatureOperator(ric0),
        weyl_plus=CurvatureOperator(weyl_plus),
        weyl_minus=CurvatureOperator(weyl_minus),
        bianchi_part=CurvatureOperator(bianchi),
        r=r,
    )


def conjugate(r_op, q: FrameRotation):
    """Components of the same abstract operator in the rotated frame f = Qe."""
    l = induced_rotation(q)
    return CurvatureOperator(l.T @ r_op.matrix @ l)


def adapted_form(r_op, q: FrameRotation):
    """The 6x6 matrix of R in the adapted basis of the rotated frame."""
    a = adapted_matrix(q)
    return a.T @ r_op.matrix @ a


def weyl_block(r_op, sign, q: FrameRotation):
    """3x3 block of W^sign(R) + (r/12) Id in the adapted basis of q.

    The star component is removed first so the blocks agree entrywise with
    the component formulas, e.g. the (1,1) entry of the + block is
    (R_1212 + R_3434 + 2 R_1234)/2 in the rotated frame.
    """
    s = _unit_sign(sign)
    beta = float(np.sum(r_op.matrix * HODGE_MATRIX)) / 6.0
    reduced = CurvatureOperator(r_op.matrix - beta * HODGE_MATRIX)
    ad = adapted_form(reduced, q)
    return ad[:3, :3] if s > 0 else ad[3:, 3:]


def operator_to_dict(r_op):
    return {"basis": "lex12-34", "matrix": [[float(v) for v in row] for row in r_op.matrix]}


def operator_from_dict(doc):
    """Parse the two serialized forms: a full matrix or a component list."""
    if not isinstance(doc, dict):
        raise ValueError("operator document must be a JSON object")
    if "matrix" in doc:
        if doc.get("basis", "lex12-34") != "lex12-34":
            raise ValueError(f"unknown basis {doc.get('basis')!r}")
        return CurvatureOperator(np.array(doc["matrix"], dtype=float))
    if "components" in doc:
        entries = []
        for item in doc["components"]:
            ijkl = item.get("ijkl")
            if not (isinstance(ijkl, (list, tuple)) and len(ijkl) == 4):
                raise ValueError(f"component entry needs a 4-index 'ijkl', got {item!r}")
            entries.append((*ijkl, float(item["value"])))
        return from_components(entries)
    raise ValueError("operator document needs a 'matrix' or a 'components' key")
