"""Diagonal metrics g = a1^2 dx1^2 + ... + a4^2 dx4^2 as symbolic scale
functions, with curvature in the associated orthonormal frame and an
independent coordinate-Christoffel route for verification.

The associated frame is e_i = (1/a_i) d/dx_i.  Frame derivatives
e_i(f) = (1/a_i) df/dx_i are expanded symbolically before any number is
produced, so the second derivatives entering the curvature formulas carry
no finite-difference error and the two curvature routes can be compared
at the 1e-8 level.

Scale functions live on the closed node set {constant, variable, +, *,
integer power, exp, reciprocal, square root}; exact differentiation stays
inside the set (derivatives of square roots only introduce half-integer
powers, i.e. compositions of sqrt and reciprocal).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp

from .bivectors import LEX_PAIRS
from .operators import CurvatureOperator

COORDS = sp.symbols("x1 x2 x3 x4")
_COORD_BY_NAME = {str(s): s for s in COORDS}

MIN_SCALE = 1e-12


class ParseError(ValueError):
    """Syntax error in a scale-function expression, with a 1-based column."""

    def __init__(self, message, position):
        super().__init__(f"column {position}: {message}")
        self.position = position


class MetricDomainError(ValueError):
    """A scale function is not positive at the requested point."""


_TOKEN_RE = re.compile(
    r"(?P<number>\d+\.\d*|\.\d+|\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()])"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos + 1)
        tokens.append((m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _Parser:
    """Recursive descent for the documented grammar.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' ['-'] INTEGER)?
    atom   := NUMBER | x1..x4 | ('exp' | 'sqrt') '(' expr ')' | '(' expr ')'
    """

    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.k = 0

    def _peek(self):
        return self.tokens[self.k]

    def _next(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def parse(self):
        expr = self.expression()
        kind, text, pos = self._peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", pos)
        return expr

    def expression(self):
        node = self.term()
        while self._peek()[0] == "op" and self._peek()[1] in "+-":
            op = self._next()[1]
            rhs = self.term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def term(self):
        node = self.unary()
        while self._peek()[0] == "op" and self._peek()[1] in "*/":
            op = self._next()[1]
            rhs = self.unary()
            node = node * rhs if op == "*" else node / rhs
        return node

    def unary(self):
        kind, text, _ = self._peek()
        if kind == "op" and text in "+-":
            self._next()
            inner = self.unary()
            return inner if text == "+" else -inner
        return self.power()

    def power(self):
        base = self.atom()
        if self._peek()[0] == "op" and self._peek()[1] == "^":
            self._next()
            sign = 1
            kind, text, pos = self._peek()
            if kind == "op" and text == "-":
                sign = -1
                self._next()
                kind, text, pos = self._peek()
            if kind != "number" or not text.isdigit():
                raise ParseError("exponent must be an integer literal", pos)
            self._next()
            base = base ** (sign * int(text))
        return base

    def atom(self):
        kind, text, pos = self._next()
        if kind == "number":
            return sp.Rational(text)
        if kind == "name":
            if text in _COORD_BY_NAME:
                return _COORD_BY_NAME[text]
            if text in ("exp", "sqrt"):
                kind2, text2, pos2 = self._next()
                if not (kind2 == "op" and text2 == "("):
                    raise ParseError(f"{text} needs a parenthesized argument", pos2)
                arg = self.expression()
                kind3, text3, pos3 = self._next()
                if not (kind3 == "op" and text3 == ")"):
                    raise ParseError("missing closing parenthesis", pos3)
                return sp.exp(arg) if text == "exp" else sp.sqrt(arg)
            raise ParseError(f"unknown identifier {text!r}", pos)
        if kind == "op" and text == "(":
            inner = self.expression()
            kind2, text2, pos2 = self._next()
            if not (kind2 == "op" and text2 == ")"):
                raise ParseError("missing closing parenthesis", pos2)
            return inner
        if kind == "end":
            raise ParseError("unexpected end of expression", pos)
        raise ParseError(f"unexpected {text!r}", pos)


def parse_expression(text):
    """Parse the documented grammar into a sympy expression."""
    if not isinstance(text, str):
        raise ParseError("expression must be a string", 1)
    return _Parser(text).parse()


def _validate_expr(expr):
    for node in sp.preorder_traversal(expr):
        if isinstance(node, sp.Symbol):
            if node not in COORDS:
                raise ValueError(f"unknown variable {node}")
        elif isinstance(node, (sp.Number, sp.NumberSymbol)):
            continue
        elif isinstance(node, (sp.Add, sp.Mul)):
            continue
        elif isinstance(node, sp.Pow):
            exponent = node.exp
            if not (exponent.is_Rational and exponent.q in (1, 2)):
                raise ValueError(f"unsupported exponent {exponent}")
        elif isinstance(node, sp.exp):
            continue
        else:
            raise ValueError(f"unsupported node {type(node).__name__}")


class ScalarField:
    """Scalar function of x1..x4 on the restricted symbolic node set."""

    __slots__ = ("expr",)

    def __init__(self, source):
        if isinstance(source, ScalarField):
            expr = source.expr
        elif isinstance(source, str):
            expr = parse_expression(source)
        else:
            expr = sp.sympify(source, strict=isinstance(source, (int, float)))
        _validate_expr(expr)
        self.expr = expr

    def diff(self, index):
        """Exact derivative with respect to x_index (1-based)."""
        return ScalarField(sp.diff(self.expr, COORDS[index - 1]))

    def __call__(self, point):
        point = _check_point(point)
        return float(self.expr.evalf(subs=dict(zip(COORDS, point))))

    def __repr__(self):
        return f"ScalarField({self.expr})"


def parse_scalar_field(text):
    return ScalarField(text)


def _check_point(point):
    p = tuple(float(v) for v in point)
    if len(p) != 4 or not all(np.isfinite(p)):
        raise ValueError(f"a point has four finite coordinates, got {point!r}")
    return p


class DiagonalMetric:
    """Four positive scale functions a1..a4 of x1..x4."""

    __slots__ = ("scales", "domain_note")

    def __init__(self, a1, a2, a3, a4, domain_note=""):
        self.scales = tuple(ScalarField(a) for a in (a1, a2, a3, a4))
        self.domain_note = str(domain_note)

    @property
    def key(self):
        return tuple(f.expr for f in self.scales)

    def scale_values(self, point):
        """Values of a1..a4 at the point; rejects nonpositive scales."""
        point = _check_point(point)
        vals = np.array(_scales_fn(self.key)(*point), dtype=float).reshape(4)
        if not np.all(np.isfinite(vals)) or np.any(vals <= MIN_SCALE):
            raise MetricDomainError(
                f"scale functions must be positive at {point}; got {vals.tolist()}"
            )
        return vals

    def __repr__(self):
        return f"DiagonalMetric{tuple(str(f.expr) for f in self.scales)}"


def metric_from_dict(doc):
    """Parse {"a1": "...", ..., "a4": "..."} plus an optional "J_field"
    carrying pointwise structure coefficients a12, a13, a14."""
    if not isinstance(doc, dict):
        raise ValueError("metric document must be a JSON object")
    scales = []
    for name in ("a1", "a2", "a3", "a4"):
        if name not in doc:
            raise ValueError(f"metric document is missing {name!r}")
        scales.append(ScalarField(str(doc[name])))
    metric = DiagonalMetric(*scales, domain_note=doc.get("domain_note", ""))
    j_field = None
    if "J_field" in doc:
        jdoc = doc["J_field"]
        for name in ("a12", "a13", "a14"):
            if name not in jdoc:
                raise ValueError(f"J_field is missing {name!r}")
        j_field = JField(str(jdoc["a12"]), str(jdoc["a13"]), str(jdoc["a14"]))
    return metric, j_field


def metric_to_dict(metric: DiagonalMetric):
    doc = {f"a{i + 1}": str(metric.scales[i].expr) for i in range(4)}
    if metric.domain_note:
        doc["domain_note"] = metric.domain_note
    return doc


class JField:
    """Pointwise structure coefficients (a12, a13, a14) with unit norm."""

    __slots__ = ("fields",)

    def __init__(self, a12, a13, a14):
        self.fields = tuple(ScalarField(c) for c in (a12, a13, a14))

    @property
    def key(self):
        return tuple(f.expr for f in self.fields)

    def values(self, point):
        point = _check_point(point)
        vals = np.array(_jfield_fn(self.key)(*point), dtype=float).reshape(3)
        if abs(float(vals @ vals) - 1.0) > 1e-10:
            raise ValueError(
                f"structure coefficients must have unit norm at {point}; got {vals.tolist()}"
            )
        return vals


@lru_cache(maxsize=None)
def _scales_fn(key):
    return sp.lambdify(COORDS, sp.Matrix(list(key)), "numpy")


@lru_cache(maxsize=None)
def _jfield_fn(key):
    return sp.lambdify(COORDS, sp.Matrix(list(key)), "numpy")


def _fd(a, expr, i):
    """Frame derivative e_i(expr) = (1/a_i) d expr / dx_i, symbolically."""
    return sp.diff(expr, COORDS[i - 1]) / a[i - 1]


@lru_cache(maxsize=None)
def _gamma_exprs(key):
    """Connection table gamma[i][j][k] = <nabla_{e_i} e_j, e_k>.

    For i != j the derivative lies along e_i with coefficient e_j(a_i)/a_i;
    the diagonal entries spread over the other directions with the opposite
    sign, which makes the table skew in its last two slots.
    """
    a = list(key)
    zero = sp.Integer(0)
    gamma = [[[zero for _ in range(5)] for _ in range(5)] for _ in range(5)]
    for i in range(1, 5):
        for j in range(1, 5):
            if i == j:
                for k in range(1, 5):
                    if k != i:
                        gamma[i][i][k] = -_fd(a, a[i - 1], k) / a[i - 1]
            else:
                gamma[i][j][i] = _fd(a, a[i - 1], j) / a[i - 1]
    return gamma


@lru_cache(maxsize=None)
def _gamma_fn(key):
    g = _gamma_exprs(key)
    flat = [g[i][j][k] for i in range(1, 5) for j in range(1, 5) for k in range(1, 5)]
    return sp.lambdify(COORDS, sp.Matrix(flat), "numpy")


def connection_coeffs(metric: DiagonalMetric, point):
    """Table gamma[i, j, k] = <nabla_{e_i} e_j, e_k> at the point (0-based
    array indices for 1-based frame labels)."""
    point = _check_point(point)
    metric.scale_values(point)
    vals = np.array(_gamma_fn(metric.key)(*point), dtype=float).reshape(4, 4, 4)
    return vals


@lru_cache(maxsize=None)
def _frame_curvature_exprs(key):
    """All 36 operator entries from the orthogonal-coordinate curvature
    formulas, each triangle assembled from its own column's expressions.

    Pair symmetry R_ijkl = R_klij is *not* imposed here; it holds as an
    identity of the formulas and is checked numerically downstream.
    """
    a = list(key)
    cache = {}

    def E(expr, i):
        k2 = (expr, i)
        if k2 not in cache:
            cache[k2] = _fd(a, expr, i)
        return cache[k2]

    def diag(i, j):
        # R_ijij: second frame derivatives of each scale along the other
        # direction plus the cross-derivative correction over l != i, j
        ai, aj = a[i - 1], a[j - 1]
        term = -E(E(aj, i), i) / aj - E(E(ai, j), j) / ai
        for l in range(1, 5):
            if l not in (i, j):
                term -= E(ai, l) * E(aj, l) / (ai * aj)
        return term

    def edge(i, j, l):
        # R_ijil for l not in {i, j}
        ai, aj = a[i - 1], a[j - 1]
        return -E(E(ai, l), j) / ai + E(ai, j) * E(aj, l) / (ai * aj)

    def hess(idx, j, k):
        # (1/a_idx) * Hessian of a_idx on (e_j, e_k); the connection term
        # subtracts (nabla_{e_j} e_k)(a_idx) with j != k
        ax, aj = a[idx - 1], a[j - 1]
        return (E(E(ax, k), j) - (E(aj, k) / aj) * E(ax, j)) / ax

    def comp(i, j, k, l):
        if (i, j) == (k, l):
            return diag(i, j)
        if not ({i, j} & {k, l}):
            return sp.Integer(0)
        if k == i:
            return edge(i, j, l)
        if k == j:
            return -edge(j, i, l)
        if l == i:
            return hess(i, j, k)
        if l == j:
            return -hess(j, i, k)
        raise AssertionError("unreachable index pattern")

    rows = []
    for (k, l) in LEX_PAIRS:
        rows.append([comp(i, j, k, l) for (i, j) in LEX_PAIRS])
    return sp.ImmutableMatrix(rows)


@lru_cache(maxsize=None)
def _frame_curvature_fn(key):
    return sp.lambdify(COORDS, _frame_curvature_exprs(key), "numpy")


def frame_curvature_raw(metric: DiagonalMetric, point):
    """The un-symmetrized 6x6 assembled from the frame formulas; the gap
    between it and its transpose is a consistency diagnostic."""
    point = _check_point(point)
    metric.scale_values(point)
    return np.array(_frame_curvature_fn(metric.key)(*point), dtype=float)


def curvature_at(metric: DiagonalMetric, point):
    """Curvature operator of the metric in the associated frame at a point.

    Components with four distinct indices are structural zeros of the
    formulas.  The two independently assembled triangles must agree
    (pair symmetry) before the symmetrized operator is returned.
    """
    raw = frame_curvature_raw(metric, point)
    scale = max(1.0, float(np.max(np.abs(raw))))
    defect = float(np.max(np.abs(raw - raw.T)))
    if defect > 1e-9 * scale:
        raise AssertionError(
            f"pair-symmetry defect {defect:.3e} at {tuple(point)}; the frame "
            "formulas are inconsistent here"
        )
    return CurvatureOperator(0.5 * (raw + raw.T))


@lru_cache(maxsize=None)
def _coordinate_curvature_exprs(key):
    """Independent route: coordinate Christoffel symbols of g = diag(a_i^2),
    the coordinate curvature tensor, conversion to the associated frame, and
    the sign flip into the convention where R_ijij is sectional curvature."""
    a = list(key)
    x = COORDS
    g = [ai**2 for ai in a]
    ginv = [1 / gi for gi in g]

    gamma = [[[None] * 4 for _ in range(4)] for _ in range(4)]
    for k in range(4):
        for i in range(4):
            for j in range(4):
                term = sp.Integer(0)
                if k == j:
                    term += sp.diff(g[k], x[i])
                if k == i:
                    term += sp.diff(g[k], x[j])
                if i == j:
                    term -= sp.diff(g[i], x[k])
                gamma[k][i][j] = ginv[k] * term / 2

    def riemann_low(i, j, k, l):
        # <R(d_i, d_j) d_k, d_l> with R(X, Y) = [nabla_X, nabla_Y] on
        # coordinate fields (their bracket vanishes)
        term = sp.diff(gamma[l][j][k], x[i]) - sp.diff(gamma[l][i][k], x[j])
        for s in range(4):
            term += gamma[s][j][k] * gamma[l][i][s] - gamma[s][i][k] * gamma[l][j][s]
        return g[l] * term

    rows = []
    for (k, l) in LEX_PAIRS:
        row = []
        for (i, j) in LEX_PAIRS:
            ii, jj, kk, ll = i - 1, j - 1, k - 1, l - 1
            row.append(-riemann_low(ii, jj, kk, ll) / (a[ii] * a[jj] * a[kk] * a[ll]))
        rows.append(row)
    return sp.ImmutableMatrix(rows)


@lru_cache(maxsize=None)
def _coordinate_curvature_fn(key):
    return sp.lambdify(COORDS, _coordinate_curvature_exprs(key), "numpy")


def christoffel_oracle(metric: DiagonalMetric, point):
    """Curvature operator computed through coordinate Christoffel symbols.

    Used only to verify :func:`curvature_at`; the two routes share nothing
    beyond exact symbolic differentiation of the scale functions.
    """
    point = _check_point(point)
    metric.scale_values(point)
    raw = np.array(_coordinate_curvature_fn(metric.key)(*point), dtype=float)
    return CurvatureOperator(0.5 * (raw + raw.T))


@lru_cache(maxsize=None)
def _nabla_j_exprs(metric_key, j_key):
    a = list(metric_key)
    j12, j13, j14 = j_key

    def E(expr, i):
        return _fd(a, expr, i)

    lines = [
        a[0] * E(j12, 1) - (j14 * E(a[0], 3) - j13 * E(a[0], 4)),
        a[0] * E(j13, 1) - (-j14 * E(a[0], 2) + j12 * E(a[0], 4)),
        a[0] * E(j14, 1) - (j13 * E(a[0], 2) - j12 * E(a[0], 3)),
        a[1] * E(j12, 2) - (-j13 * E(a[1], 3) - j14 * E(a[1], 4)),
        a[1] * E(j13, 2) - (j14 * E(a[1], 1) + j12 * E(a[1], 3)),
        a[1] * E(j14, 2) - (-j13 * E(a[1], 1) + j12 * E(a[1], 4)),
        a[2] * E(j12, 3) - (j13 * E(a[2], 2) - j14 * E(a[2], 1)),
        a[2] * E(j13, 3) - (-j12 * E(a[2], 2) - j14 * E(a[2], 4)),
        a[2] * E(j14, 3) - (j13 * E(a[2], 4) + j12 * E(a[2], 1)),
        a[3] * E(j12, 4) - (j14 * E(a[3], 2) + j13 * E(a[3], 1)),
        a[3] * E(j13, 4) - (j14 * E(a[3], 3) - j12 * E(a[3], 1)),
        a[3] * E(j14, 4) - (-j12 * E(a[3], 2) - j13 * E(a[3], 3)),
    ]
    return sp.ImmutableMatrix(lines)


@lru_cache(maxsize=None)
def _nabla_j_fn(metric_key, j_key):
    return sp.lambdify(COORDS, _nabla_j_exprs(metric_key, j_key), "numpy")


def nabla_J_residuals(metric: DiagonalMetric, j_field: JField, point):
    """Residuals of the twelve derivative equations a parallel pointwise
    structure must satisfy over an orthogonal chart (four derivative
    directions times three coefficients); a Kaehler pair zeroes all of them."""
    point = _check_point(point)
    metric.scale_values(point)
    j_field.values(point)
    vals = np.array(_nabla_j_fn(metric.key, j_field.key)(*point), dtype=float)
    return vals.reshape(12)


_CROSS_LABELS = (
    "e3(a1)", "e4(a1)", "e3(a2)", "e4(a2)",
    "e1(a3)", "e2(a3)", "e1(a4)", "e2(a4)",
)


@lru_cache(maxsize=None)
def _cross_derivative_fn(key):
    a = list(key)
    exprs = [
        _fd(a, a[0], 3), _fd(a, a[0], 4), _fd(a, a[1], 3), _fd(a, a[1], 4),
        _fd(a, a[2], 1), _fd(a, a[2], 2), _fd(a, a[3], 1), _fd(a, a[3], 2),
    ]
    return sp.lambdify(COORDS, sp.Matrix(exprs), "numpy")


@dataclass(frozen=True)
class UnitaryProductReport:
    """Cross-derivative residuals deciding whether a frame paired as
    (e1, e2), (e3, e4) splits the metric into a product of surfaces."""

    residuals: dict
    tolerance: float
    is_product: bool
    failed: tuple


def unitary_product_check(metric: DiagonalMetric, point, tol=1e-10):
    """Check that a1, a2 only depend on (x1, x2) and a3, a4 on (x3, x4) at
    the point, through the eight frame cross-derivatives."""
    point = _check_point(point)
    metric.scale_values(point)
    vals = np.array(_cross_derivative_fn(metric.key)(*point), dtype=float).reshape(8)
    residuals = dict(zip(_CROSS_LABELS, (float(v) for v in vals)))
    failed = tuple(name for name, v in residuals.items() if abs(v) > tol)
    return UnitaryProductReport(
        residuals=residuals,
        tolerance=float(tol),
        is_product=not failed,
        failed=failed,
    )
