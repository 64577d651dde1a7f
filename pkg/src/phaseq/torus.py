"""Jacobi theta sums and modular-parameter classification for torus phase
spaces.

The third theta function theta(z, tau) = sum_n exp(i pi tau n^2 + 2 pi i n z)
converges for tau in the upper half-plane; the truncated sum carries an
explicit tail bound so callers can demand a target accuracy.  Two modular
parameters describe the same torus exactly when an integer Moebius map with
determinant one connects them, which is decided by reduction to the standard
fundamental domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import floor, pi

import numpy as np

__all__ = [
    "SL2Z",
    "ModuliClassification",
    "ThetaSum",
    "classify_moduli_pair",
    "kahler_coefficient",
    "reduce_to_fundamental_domain",
    "theta",
]

_BOUNDARY_TOL = 1e-9
_INTERIOR_MARGIN = 1e-15
_MAX_REDUCTION_STEPS = 10_000


def _validate_tau(tau) -> complex:
    tau = complex(tau)
    if not tau.imag > 0:
        raise ValueError("tau must lie in the upper half-plane (positive imaginary part)")
    return tau


def kahler_coefficient(tau) -> float:
    """Prefactor pi / Im(tau) of the flat Kaehler potential on the torus."""
    return pi / _validate_tau(tau).imag


@dataclass(frozen=True)
class ThetaSum:
    value: complex
    tail_bound: float
    n_terms: int


def _theta_tail(n_terms: int, im_tau: float, im_z: float) -> float:
    # magnitudes of the dropped terms, both signs of n folded into the factor 2
    m = np.arange(n_terms + 1, n_terms + 201, dtype=float)
    with np.errstate(over="ignore"):
        vals = np.exp(-pi * im_tau * m * m + 2.0 * pi * abs(im_z) * m)
    total = 2.0 * float(vals.sum())
    ratio = float(vals[-1] / vals[-2]) if vals[-2] > 0 else 0.0
    if 0.0 < ratio < 1.0:
        total += 2.0 * float(vals[-1]) * ratio / (1.0 - ratio)
    return total


def theta(z, tau, n_terms: int = 60, accuracy: float | None = None) -> ThetaSum:
    """Truncated theta sum over n in [-n_terms, n_terms] with a tail bound.

    The bound covers the dropped terms of the exact series; roundoff in
    the retained terms (about 1e-16 relative) is not included.  When
    ``accuracy`` is given and the tail bound exceeds it, the call raises
    instead of returning a value that cannot honour the request.
    """
    tau = _validate_tau(tau)
    z = complex(z)
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    n = np.arange(-n_terms, n_terms + 1, dtype=float)
    exponent = 1j * pi * tau * n * n + 2j * pi * n * z
    value = complex(np.exp(exponent).sum())
    tail = _theta_tail(n_terms, tau.imag, z.imag)
    if accuracy is not None and tail > accuracy:
        raise ValueError(
            f"tail bound {tail:.3e} exceeds requested accuracy {accuracy:.3e}; "
            "increase n_terms"
        )
    return ThetaSum(value, tail, n_terms)


@dataclass(frozen=True)
class SL2Z:
    """Integer matrix [[a, b], [c, d]] with determinant one."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "d"):
            if not isinstance(getattr(self, name), int):
                raise TypeError("entries must be integers")
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError("determinant must be 1")

    @classmethod
    def identity(cls) -> "SL2Z":
        return cls(1, 0, 0, 1)

    @classmethod
    def t_shift(cls, k: int) -> "SL2Z":
        """tau -> tau + k."""
        return cls(1, int(k), 0, 1)

    @classmethod
    def s_flip(cls) -> "SL2Z":
        """tau -> -1/tau."""
        return cls(0, -1, 1, 0)

    def __matmul__(self, other: "SL2Z") -> "SL2Z":
        return SL2Z(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "SL2Z":
        return SL2Z(self.d, -self.b, -self.c, self.a)

    def act(self, tau) -> complex:
        tau = _validate_tau(tau)
        return (self.a * tau + self.b) / (self.c * tau + self.d)

    def normalized(self) -> "SL2Z":
        """Fix the overall sign: c > 0, or c == 0 and d > 0."""
        if self.c < 0 or (self.c == 0 and self.d < 0):
            return SL2Z(-self.a, -self.b, -self.c, -self.d)
        return self


def reduce_to_fundamental_domain(tau) -> tuple[complex, SL2Z]:
    """Map tau to the standard fundamental domain, returning (point, word).

    The domain is Re in [-1/2, 1/2), |tau| >= 1, keeping Re <= 0 on the
    unit arc.  The word satisfies word.act(tau) == point up to roundoff.
    """
    tau = _validate_tau(tau)
    word = SL2Z.identity()
    current = tau
    for _ in range(_MAX_REDUCTION_STEPS):
        k = floor(current.real + 0.5)
        if k:
            step = SL2Z.t_shift(-k)
            current = current - k
            word = step @ word
        if abs(current) < 1.0 - _INTERIOR_MARGIN:
            step = SL2Z.s_flip()
            current = -1.0 / current
            word = step @ word
        else:
            break
    else:
        raise RuntimeError("fundamental-domain reduction did not terminate")
    # boundary canonicalization: fold the right edge and right half-arc
    if abs(current.real - 0.5) < _BOUNDARY_TOL:
        step = SL2Z.t_shift(-1)
        current = current - 1
        word = step @ word
    if abs(abs(current) - 1.0) < _BOUNDARY_TOL and current.real > _BOUNDARY_TOL:
        step = SL2Z.s_flip()
        current = -1.0 / current
        word = step @ word
    return current, word


@dataclass(frozen=True)
class ModuliClassification:
    equivalent: bool
    distance: float
    tolerance: float
    reduced_first: complex
    reduced_second: complex
    witness: SL2Z | None


def classify_moduli_pair(tau_first, tau_second, tol: float = 1e-9) -> ModuliClassification:
    """Decide whether two modular parameters describe the same torus.

    When they do, the witness w satisfies w.act(tau_first) == tau_second
    up to roundoff, with the sign convention of SL2Z.normalized.
    """
    red_a, word_a = reduce_to_fundamental_domain(tau_first)
    red_b, word_b = reduce_to_fundamental_domain(tau_second)
    distance = abs(red_a - red_b)
    equivalent = distance < tol
    witness = (word_b.inverse() @ word_a).normalized() if equivalent else None
    return ModuliClassification(equivalent, distance, tol, red_a, red_b, witness)
