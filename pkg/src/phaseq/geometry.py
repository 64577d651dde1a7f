"""Symplectic charts, almost complex structures and integrability checks.

Conventions: a chart on R^{2n} orders coordinates as (q1..qn, p1..pn).  The
symplectic form is the matrix of omega = sum_l dp_l ^ dq_l in that basis,
which has blocks [[0, -I], [I, 0]]; the standard complex structure maps
d/dq_l to d/dp_l and equals the same matrix.  Rotated structures are built
by conjugating the standard one with exp(theta(x) K) for a quadratic-form
generator K in sp(2n, R), so omega-compatibility holds pointwise for every
angle expression while integrability generally does not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .errors import EvalError
from .expr import Expression, parse

__all__ = [
    "AlmostComplexStructure",
    "Chart",
    "CompatibilityCheck",
    "GridSpec",
    "IntegrabilityCheck",
    "StructureCheck",
    "VectorField",
    "check_acs",
    "check_compatibility",
    "lie_bracket",
    "nijenhuis",
    "nijenhuis_pair",
    "omega_matrix",
    "rotation_generator",
    "standard_complex_structure",
]

_MAX_GRID_POINTS = 2_000_000


def omega_matrix(n: int) -> np.ndarray:
    """Matrix of the symplectic form in (q; p) block order."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])


def standard_complex_structure(n: int) -> np.ndarray:
    """Multiplication by i on q + ip, as a real 2n x 2n matrix."""
    return omega_matrix(n)


@dataclass(frozen=True)
class GridSpec:
    """Uniform per-axis sampling window."""

    low: float = -1.0
    high: float = 1.0
    count: int = 9

    def axis(self) -> np.ndarray:
        if self.count < 2:
            raise ValueError("grid count must be at least 2")
        if not self.high > self.low:
            raise ValueError("grid needs high > low")
        return np.linspace(self.low, self.high, self.count)


@dataclass(frozen=True)
class Chart:
    """A flat chart on R^{2n} with its sampling grid."""

    n: int
    grid: GridSpec = field(default_factory=GridSpec)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one mode")

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f"q{l}" for l in range(1, self.n + 1)) + tuple(
            f"p{l}" for l in range(1, self.n + 1)
        )

    def sample_points(self) -> np.ndarray:
        """Full tensor grid as an (N, 2n) array, C-ordered and deterministic."""
        axis = self.grid.axis()
        if len(axis) ** self.dim > _MAX_GRID_POINTS:
            raise ValueError("sample grid too large")
        mesh = np.meshgrid(*([axis] * self.dim), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def compile(self, source: str | Expression) -> Expression:
        if isinstance(source, Expression):
            if source.variables != self.names:
                raise ValueError("expression bound to different coordinates")
            return source
        return parse(source, self.names)


@dataclass(frozen=True)
class VectorField:
    """Real vector field given by one component expression per coordinate."""

    components: tuple[Expression, ...]

    @classmethod
    def from_sources(cls, chart: Chart, sources: Sequence[str]) -> "VectorField":
        if len(sources) != chart.dim:
            raise ValueError(f"need {chart.dim} components")
        return cls(tuple(chart.compile(s) for s in sources))

    @classmethod
    def basis(cls, chart: Chart, index: int) -> "VectorField":
        """Constant coordinate field along the ``index``-th direction."""
        if not 0 <= index < chart.dim:
            raise ValueError(f"index must lie in [0, {chart.dim})")
        return cls.from_sources(
            chart, tuple("1" if k == index else "0" for k in range(chart.dim))
        )


def rotation_generator(n: int, axis) -> np.ndarray:
    """Generator K in sp(2n, R) selected by an axis spec.

    ``axis`` is either a pair of 1-based coordinate indices (a, b), giving
    K = Omega * sym(E_ab) (the Hamiltonian generator of the quadratic form
    x_a x_b; not J-commuting in general), or one of the strings
    ``"global_phase"`` / ``"mode_phase:l"`` for unitary-subgroup generators
    that commute with the standard structure.
    """
    omega = omega_matrix(n)
    dim = 2 * n
    if isinstance(axis, str):
        if axis == "global_phase":
            return omega.copy()
        if axis.startswith("mode_phase:"):
            l = int(axis.split(":", 1)[1])
            if not 1 <= l <= n:
                raise ValueError(f"mode index out of range: {l}")
            sym = np.zeros((dim, dim))
            sym[l - 1, l - 1] = 1.0
            sym[n + l - 1, n + l - 1] = 1.0
            return omega @ sym
        raise ValueError(f"unknown axis spec {axis!r}")
    a, b = axis
    if not (1 <= a <= dim and 1 <= b <= dim):
        raise ValueError(f"axis indices must lie in 1..{dim}")
    sym = np.zeros((dim, dim))
    sym[a - 1, b - 1] += 0.5
    sym[b - 1, a - 1] += 0.5
    return omega @ sym


class AlmostComplexStructure:
    """Field of real matrices J(x) with J(x)^2 = -I on a chart.

    Three kinds: ``constant`` (one matrix everywhere), ``rotated``
    (conjugation of the standard structure by exp(theta(x) K)) and
    ``explicit`` (each entry its own expression).
    """

    def __init__(self, kind: str, n: int, *, matrix=None, angle=None, axis=None, entries=None):
        self.kind = kind
        self.n = n
        self.matrix = matrix
        self.angle = angle
        self.axis = axis
        self.entries = entries
        self.generator = rotation_generator(n, axis) if kind == "rotated" else None

    @classmethod
    def standard(cls, n: int) -> "AlmostComplexStructure":
        return cls("constant", n, matrix=standard_complex_structure(n))

    @classmethod
    def constant(cls, matrix) -> "AlmostComplexStructure":
        mat = np.asarray(matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] % 2:
            raise ValueError("matrix must be square with even dimension")
        return cls("constant", mat.shape[0] // 2, matrix=mat)

    @classmethod
    def rotated(cls, chart: Chart, angle: str | Expression, axis) -> "AlmostComplexStructure":
        return cls("rotated", chart.n, angle=chart.compile(angle), axis=axis)

    @classmethod
    def explicit(cls, chart: Chart, entries) -> "AlmostComplexStructure":
        dim = chart.dim
        if len(entries) != dim or any(len(row) != dim for row in entries):
            raise ValueError(f"entries must form a {dim} x {dim} matrix")
        compiled = tuple(tuple(chart.compile(e) for e in row) for row in entries)
        return cls("explicit", chart.n, entries=compiled)

    @property
    def dim(self) -> int:
        return 2 * self.n

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """J values on an (N, 2n) point batch, shape (N, 2n, 2n)."""
        return self._evaluate(points, want_gradient=False)[0]

    def evaluate_with_gradient(self, points: np.ndarray):
        """(J, dJ) with dJ[t, a, b, c] = d J_ab / d x_c at point t."""
        return self._evaluate(points, want_gradient=True)

    def _evaluate(self, points, want_gradient):
        pts = np.ascontiguousarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise ValueError(f"expected points of shape (N, {self.dim})")
        n_pts = pts.shape[0]
        dim = self.dim

        if self.kind == "constant":
            j = np.broadcast_to(self.matrix, (n_pts, dim, dim)).copy()
            dj = np.zeros((n_pts, dim, dim, dim)) if want_gradient else None
            return j, dj

        if self.kind == "rotated":
            values, partials = self.angle.eval_batch(pts, want_partials=want_gradient)
            theta = _require_real(values, "rotation angle")
            k = self.generator
            j0 = standard_complex_structure(self.n)
            forward = expm(theta[:, None, None] * k)
            backward = expm(-theta[:, None, None] * k)
            j = forward @ j0 @ backward
            dj = None
            if want_gradient:
                dtheta = _require_real(partials, "rotation angle gradient")
                commutator = k @ j - j @ k
                dj = commutator[:, :, :, None] * dtheta[:, None, None, :]
            return j, dj

        # explicit entries
        j = np.empty((n_pts, dim, dim))
        dj = np.empty((n_pts, dim, dim, dim)) if want_gradient else None
        for a in range(dim):
            for b in range(dim):
                values, partials = self.entries[a][b].eval_batch(
                    pts, want_partials=want_gradient
                )
                j[:, a, b] = _require_real(values, f"entry ({a + 1},{b + 1})")
                if want_gradient:
                    dj[:, a, b, :] = _require_real(
                        partials, f"entry ({a + 1},{b + 1}) gradient"
                    )
        return j, dj


def _require_real(values: np.ndarray, what: str) -> np.ndarray:
    if np.max(np.abs(values.imag), initial=0.0) > 1e-10:
        raise EvalError(f"{what} must be real-valued")
    return np.ascontiguousarray(values.real)


# ---------------------------------------------------------------------------
# Checks


@dataclass(frozen=True)
class StructureCheck:
    max_deviation: float
    tolerance: float
    passed: bool
    worst_point: tuple[float, ...]


@dataclass(frozen=True)
class CompatibilityCheck:
    symplectic_residual: float
    metric_asymmetry: float
    min_metric_eigenvalue: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class IntegrabilityCheck:
    max_norm: float
    tolerance: float
    integrable: bool
    worst_point: tuple[float, ...]
    worst_pair: tuple[int, int]


def check_acs(structure: AlmostComplexStructure, chart: Chart, tol: float = 1e-9) -> StructureCheck:
    """Max-entry deviation of J(x)^2 from -I over the chart grid."""
    points = chart.sample_points()
    j = structure.evaluate(points)
    deviation = np.abs(j @ j + np.eye(chart.dim)).max(axis=(1, 2))
    worst = int(np.argmax(deviation))
    value = float(deviation[worst])
    return StructureCheck(value, tol, value < tol, tuple(points[worst]))


def check_compatibility(
    structure: AlmostComplexStructure, chart: Chart, tol: float = 1e-8
) -> CompatibilityCheck:
    """Omega-preservation plus positivity of the induced metric.

    The metric is g(X, Y) = omega(JX, Y), i.e. the matrix J^T Omega; the
    symplectic residual, the asymmetry of g and its smallest eigenvalue are
    reported separately so either compatibility reading can be audited.
    """
    points = chart.sample_points()
    omega = omega_matrix(chart.n)
    j = structure.evaluate(points)
    jt = j.transpose(0, 2, 1)
    residual = float(np.abs(jt @ omega @ j - omega).max())
    metric = jt @ omega
    asymmetry = float(np.abs(metric - metric.transpose(0, 2, 1)).max())
    eigenvalues = np.linalg.eigvalsh(0.5 * (metric + metric.transpose(0, 2, 1)))
    min_eig = float(eigenvalues.min())
    passed = residual < tol and asymmetry < tol and min_eig > 0.0
    return CompatibilityCheck(residual, asymmetry, min_eig, tol, passed)


def lie_bracket(x: VectorField, y: VectorField, point: Sequence[float]) -> np.ndarray:
    """[X, Y] = (DY) X - (DX) Y evaluated at one point."""
    xv, xj = _field_value_jacobian(x, point)
    yv, yj = _field_value_jacobian(y, point)
    return yj @ xv - xj @ yv


def _field_value_jacobian(field: VectorField, point):
    dim = len(field.components)
    values = np.empty(dim)
    jac = np.empty((dim, dim))
    for a, comp in enumerate(field.components):
        dual = comp.eval_dual(point)
        if abs(dual.value.imag) > 1e-10 or np.max(np.abs(dual.partials.imag)) > 1e-10:
            raise EvalError("vector field components must be real-valued")
        values[a] = dual.value.real
        jac[a] = dual.partials.real
    return values, jac


def nijenhuis(
    structure: AlmostComplexStructure, chart: Chart, tol: float = 1e-6
) -> IntegrabilityCheck:
    """Torsion of J on all coordinate basis pairs over the chart grid.

    For Z = d_i, W = d_j the tensor reduces to
    N = -[JZ, JW] + J [Z, JW] + J [JZ, W]; the report carries the maximum
    Euclidean norm over grid points and pairs i < j.
    """
    points = chart.sample_points()
    j, dj = structure.evaluate_with_gradient(points)
    # t1[t, a, i, j] = sum_b dJ[t, a, j, b] J[t, b, i]
    t1 = np.einsum("tajb,tbi->taij", dj, j, optimize=True)
    # t2[t, a, i, j] = sum_b J[t, a, b] dJ[t, b, j, i]
    t2 = np.einsum("tab,tbji->taij", j, dj, optimize=True)
    tensor = -(t1 - t1.swapaxes(2, 3)) + (t2 - t2.swapaxes(2, 3))
    norms = np.linalg.norm(tensor, axis=1)
    upper_i, upper_j = np.triu_indices(chart.dim, k=1)
    per_pair = norms[:, upper_i, upper_j]
    flat = int(np.argmax(per_pair))
    t_idx, pair_idx = np.unravel_index(flat, per_pair.shape)
    value = float(per_pair[t_idx, pair_idx])
    return IntegrabilityCheck(
        max_norm=value,
        tolerance=tol,
        integrable=value < tol,
        worst_point=tuple(points[t_idx]),
        worst_pair=(int(upper_i[pair_idx]) + 1, int(upper_j[pair_idx]) + 1),
    )


def nijenhuis_pair(
    structure: AlmostComplexStructure,
    z: VectorField,
    w: VectorField,
    point: Sequence[float],
) -> np.ndarray:
    """N(Z, W) at one point for arbitrary vector fields.

    Assembled from brackets, N = [Z,W] - [JZ,JW] + J[Z,JW] + J[JZ,W]; used
    by the antisymmetry and tensoriality property checks.
    """
    pt = np.asarray(point, dtype=float).reshape(1, -1)
    j_batch, dj_batch = structure.evaluate_with_gradient(pt)
    j = j_batch[0]
    dj = dj_batch[0]

    zv, zj = _field_value_jacobian(z, point)
    wv, wj = _field_value_jacobian(w, point)

    def j_applied(value, jacobian):
        # (J V)_a and its Jacobian: dJ[a, c, b] V_c + J[a, c] dV[c, b]
        jv = j @ value
        jjac = np.einsum("acb,c->ab", dj, value) + j @ jacobian
        return jv, jjac

    jzv, jzj = j_applied(zv, zj)
    jwv, jwj = j_applied(wv, wj)

    def bracket(uv, uj, vv, vj):
        return vj @ uv - uj @ vv

    term = bracket(zv, zj, wv, wj)
    term = term - bracket(jzv, jzj, jwv, jwj)
    term = term + j @ bracket(zv, zj, jwv, jwj)
    term = term + j @ bracket(jzv, jzj, wv, wj)
    return term
