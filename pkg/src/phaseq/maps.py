"""Phase-space transition maps: holomorphy tests, linear classification and
normal-ordered operator lifts.

A transition map is a tuple of complex-valued component expressions over a
chart; it is holomorphic when every antiholomorphic Wirtinger derivative
vanishes on the sample grid.  Linear maps are classified by two residuals:
canonical (preserves the symplectic form) and holomorphic (commutes with
the standard complex structure).  Polynomials in (w, wbar) lift to
operators by normal ordering, w -> A and wbar -> A+ with every creator to
the left, which is where vacuum and coherence non-invariance under
nonholomorphic maps becomes quantitative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .expr import Expression
from .fock import FockSpace, build_operators, coherent, coherent_radius_bound, expectation, vacuum
from .geometry import Chart, omega_matrix, standard_complex_structure

__all__ = [
    "CrCheck",
    "LinearClassification",
    "PolynomialLift",
    "TransitionMap",
    "classify_linear",
    "coherence_residual",
    "cr_residual",
    "holomorphic_vacuum_state",
    "lift_normal_ordered",
    "random_symplectic",
    "unitary_symplectic",
    "vacuum_transport_residual",
]

QUADRANT_BOTH = "canonical-and-holomorphic"
QUADRANT_CANONICAL = "canonical-only"
QUADRANT_HOLOMORPHIC = "holomorphic-only (duality candidate)"
QUADRANT_NEITHER = "neither"


@dataclass(frozen=True)
class TransitionMap:
    """Complex components of a coordinate change, one expression per mode."""

    components: tuple[Expression, ...]

    @classmethod
    def from_sources(cls, chart: Chart, sources: Sequence[str]) -> "TransitionMap":
        return cls(tuple(chart.compile(s) for s in sources))


@dataclass(frozen=True)
class CrCheck:
    max_residual: float
    tolerance: float
    holomorphic: bool
    worst_component: int
    worst_mode: int


def cr_residual(tmap: TransitionMap, chart: Chart, tol: float = 1e-8) -> CrCheck:
    """Largest |d/dwbar_l| of any component over the chart grid."""
    points = chart.sample_points()
    n = chart.n
    worst = (0.0, 0, 0)
    for comp_idx, comp in enumerate(tmap.components):
        _, partials = comp.eval_batch(points, want_partials=True)
        for mode in range(n):
            dwbar = 0.5 * (partials[:, mode] + 1j * partials[:, n + mode])
            value = float(np.abs(dwbar).max())
            if value > worst[0]:
                worst = (value, comp_idx, mode)
    value, comp_idx, mode = worst
    return CrCheck(value, tol, value < tol, comp_idx + 1, mode + 1)


@dataclass(frozen=True)
class LinearClassification:
    symplectic_residual: float
    commutant_residual: float
    tolerance: float
    quadrant: str


def classify_linear(matrix, tol: float = 1e-10) -> LinearClassification:
    """Sort a linear map into the canonical/holomorphic quadrants."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise ValueError("matrix must be square with even dimension")
    n = m.shape[0] // 2
    omega = omega_matrix(n)
    j0 = standard_complex_structure(n)
    symplectic = float(np.abs(m.T @ omega @ m - omega).max())
    commutant = float(np.abs(m @ j0 - j0 @ m).max())
    canonical = symplectic < tol
    holomorphic = commutant < tol
    if canonical and holomorphic:
        quadrant = QUADRANT_BOTH
    elif canonical:
        quadrant = QUADRANT_CANONICAL
    elif holomorphic:
        quadrant = QUADRANT_HOLOMORPHIC
    else:
        quadrant = QUADRANT_NEITHER
    return LinearClassification(symplectic, commutant, tol, quadrant)


@dataclass(frozen=True)
class PolynomialLift:
    """Polynomial sum c_{mk} w^m wbar^k as a coefficient table."""

    terms: tuple[tuple[int, int, complex], ...]

    @classmethod
    def from_terms(cls, terms: Mapping[tuple[int, int], complex]) -> "PolynomialLift":
        cleaned = []
        for (m, k), coeff in sorted(terms.items()):
            if m < 0 or k < 0:
                raise ValueError("powers must be non-negative")
            coeff = complex(coeff)
            if coeff != 0:
                cleaned.append((int(m), int(k), coeff))
        return cls(tuple(cleaned))

    @property
    def degree(self) -> int:
        return max((m + k for m, k, _ in self.terms), default=0)

    @property
    def antiholomorphic_weight(self) -> float:
        """Sum of |c_{mk}| over terms with wbar support."""
        return float(sum(abs(c) for m, k, c in self.terms if k > 0))

    def holomorphic_coefficients(self) -> np.ndarray:
        """Coefficient vector c_0..c_deg; raises when wbar terms exist."""
        if self.antiholomorphic_weight:
            raise ValueError("polynomial has antiholomorphic terms")
        coeffs = np.zeros(self.degree + 1, dtype=complex)
        for m, _, c in self.terms:
            coeffs[m] = c
        return coeffs


def lift_normal_ordered(lift: PolynomialLift, space: FockSpace) -> np.ndarray:
    """Normal-ordered operator sum c_{mk} (A+)^k A^m on the truncated space.

    The total degree is capped at dim/4 to keep truncation effects away
    from the comparison window.
    """
    cap = space.dim // 4
    if lift.degree > cap:
        raise ValueError(f"polynomial degree {lift.degree} exceeds cap dim/4 = {cap}")
    ops = build_operators(space)[0]
    dim = space.total_dim
    max_m = max((m for m, _, _ in lift.terms), default=0)
    max_k = max((k for _, k, _ in lift.terms), default=0)
    a_pow = [np.eye(dim, dtype=complex)]
    for _ in range(max_m):
        a_pow.append(ops.annihilator @ a_pow[-1])
    adag_pow = [np.eye(dim, dtype=complex)]
    for _ in range(max_k):
        adag_pow.append(ops.creator @ adag_pow[-1])
    out = np.zeros((dim, dim), dtype=complex)
    for m, k, coeff in lift.terms:
        out += coeff * (adag_pow[k] @ a_pow[m])
    return out


def vacuum_transport_residual(lift: PolynomialLift, space: FockSpace) -> float:
    """Norm of the lifted operator applied to the vacuum.

    Zero exactly when the polynomial is holomorphic with no constant term;
    antiholomorphic content excites the vacuum.
    """
    operator = lift_normal_ordered(lift, space)
    return float(np.linalg.norm(operator @ vacuum(space)))


def coherence_residual(state: np.ndarray, operator: np.ndarray) -> float:
    """How far ``state`` is from being an eigenvector of ``operator``."""
    mean = expectation(operator, state)
    return float(np.linalg.norm(operator @ state - mean * state))


def holomorphic_vacuum_state(lift: PolynomialLift, space: FockSpace):
    """Coherent state annihilated by the lift of a holomorphic polynomial.

    Returns ``(state, root)`` where ``root`` is a zero of the polynomial
    inside the truncation-safe disk; for f(0) = 0 this is the vacuum.
    """
    coeffs = lift.holomorphic_coefficients()
    if lift.degree < 1:
        raise ValueError("need a non-constant polynomial")
    roots = np.roots(coeffs[::-1])
    bound = coherent_radius_bound(space.dim)
    inside = [r for r in roots if abs(r) <= bound]
    if not inside:
        raise ValueError(f"no root within the truncation-safe disk |z| <= {bound:.4g}")
    root = complex(min(inside, key=abs))
    return coherent(space, root), root


# ---------------------------------------------------------------------------
# Random matrix generators used by the property checks


def unitary_symplectic(block: np.ndarray) -> np.ndarray:
    """Embed a complex unitary X + iY as [[X, -Y], [Y, X]] in Sp(2n, R)."""
    u = np.asarray(block, dtype=complex)
    x, y = u.real, u.imag
    return np.block([[x, -y], [y, x]])


def random_symplectic(n: int, rng: np.random.Generator, factors: int = 4) -> np.ndarray:
    """Product of random shears and unitary rotations; always canonical."""
    dim = 2 * n
    out = np.eye(dim)
    for k in range(factors):
        s = rng.normal(size=(n, n))
        s = 0.5 * (s + s.T)
        shear = np.eye(dim)
        if k % 2 == 0:
            shear[:n, n:] = s
        else:
            shear[n:, :n] = s
        raw = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        q, r = np.linalg.qr(raw)
        q = q @ np.diag(r.diagonal() / np.abs(r.diagonal()))
        out = out @ shear @ unitary_symplectic(q)
    return out
