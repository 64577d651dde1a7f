"""Leafwise quantization of a product phase space.

The ambient space R^{2n} splits into the first m coordinate pairs (the
leaf) and the remaining n - m pairs (the complement).  The leaf carries
the standard complex structure and quantizes globally; the complement
carries a caller-supplied structure that is validated (J^2 = -1,
compatibility) and classified by its torsion, and its coherent factor is
only chart-local whenever that structure is not integrable.  The split is
symplectically clean, so hybrid overlaps factorize exactly, and the
resolution of unity works along the leaf but provably not along the
complement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fock import (
    FockSpace,
    ResolutionCheck,
    coherent,
    coherent_quadrature_sum,
    resolution_of_unity,
)
from .geometry import (
    AlmostComplexStructure,
    Chart,
    GridSpec,
    check_acs,
    check_compatibility,
    nijenhuis,
    omega_matrix,
)

__all__ = [
    "FoliatedSpace",
    "HybridState",
    "LeafResolution",
    "ScanCheck",
    "apply_to_complement",
    "apply_to_leaf",
    "build_foliated",
    "complement_scan_deviation",
    "hybrid_coherent",
    "leaf_resolution",
    "omega_cross_block",
    "overlap_factorization_residual",
]

_FLAG_GRID = GridSpec(-1.0, 1.0, 5)


@dataclass(frozen=True)
class FoliatedSpace:
    """Truncated Hilbert space H_leaf (x) H_complement over a split chart."""

    ambient_modes: int
    leaf: FockSpace
    complement: FockSpace
    complement_structure: AlmostComplexStructure
    leaf_globally_coherent: bool
    complement_globally_coherent: bool
    complement_torsion: float

    @property
    def leaf_modes(self) -> int:
        return self.leaf.n_modes

    @property
    def complement_modes(self) -> int:
        return self.complement.n_modes

    @property
    def total_dim(self) -> int:
        return self.leaf.total_dim * self.complement.total_dim


def build_foliated(
    leaf_modes: int,
    ambient_modes: int,
    leaf_dim: int,
    complement_dim: int,
    complement_structure: AlmostComplexStructure | None = None,
    structure_chart: Chart | None = None,
) -> FoliatedSpace:
    """Assemble the split space and classify both factors.

    The complement structure may live on a chart of different dimension
    than the complement itself (a non-integrable structure needs at least
    two modes); it is validated here and its torsion decides the
    chart-local flag.  Defaults to the standard structure.
    """
    if ambient_modes < 2:
        raise ValueError("ambient_modes must be >= 2")
    if not 0 < leaf_modes < ambient_modes:
        raise ValueError("leaf_modes must satisfy 0 < leaf_modes < ambient_modes")
    leaf = FockSpace(leaf_dim, n_modes=leaf_modes)
    complement = FockSpace(complement_dim, n_modes=ambient_modes - leaf_modes)
    if leaf.total_dim * complement.total_dim > 8192:
        raise ValueError("combined truncated dimension exceeds 8192")

    if complement_structure is None:
        complement_structure = AlmostComplexStructure.standard(complement.n_modes)
    if structure_chart is None:
        structure_chart = Chart(complement_structure.n, _FLAG_GRID)
    elif structure_chart.n != complement_structure.n:
        raise ValueError("structure_chart modes must match the complement structure")

    square = check_acs(complement_structure, structure_chart)
    if not square.passed:
        raise ValueError(
            "complement structure fails J^2 = -1 "
            f"(max deviation {square.max_deviation:.3e})"
        )
    compat = check_compatibility(complement_structure, structure_chart)
    if not compat.passed:
        raise ValueError(
            "complement structure fails compatibility "
            f"(symplectic residual {compat.symplectic_residual:.3e}, "
            f"min metric eigenvalue {compat.min_metric_eigenvalue:.3e})"
        )
    torsion = nijenhuis(complement_structure, structure_chart)

    leaf_torsion = nijenhuis(
        AlmostComplexStructure.standard(leaf_modes), Chart(leaf_modes, _FLAG_GRID)
    )
    return FoliatedSpace(
        ambient_modes=ambient_modes,
        leaf=leaf,
        complement=complement,
        complement_structure=complement_structure,
        leaf_globally_coherent=leaf_torsion.integrable,
        complement_globally_coherent=torsion.integrable,
        complement_torsion=torsion.max_norm,
    )


def omega_cross_block(ambient_modes: int, leaf_modes: int) -> float:
    """Largest symplectic pairing between a leaf and a complement direction.

    Coordinate splits are symplectically orthogonal, so this is exactly
    zero; it is computed rather than asserted so explicit charts can be
    audited the same way.
    """
    if not 0 < leaf_modes < ambient_modes:
        raise ValueError("leaf_modes must satisfy 0 < leaf_modes < ambient_modes")
    n, m = ambient_modes, leaf_modes
    omega = omega_matrix(n)
    leaf_idx = np.concatenate([np.arange(m), n + np.arange(m)])
    comp_idx = np.concatenate([np.arange(m, n), n + np.arange(m, n)])
    return float(np.abs(omega[np.ix_(leaf_idx, comp_idx)]).max())


@dataclass(frozen=True)
class HybridState:
    """Tensor product of leaf and complement coherent states.

    The leaf factor is a coherent state in the global sense (eigenvector
    of the leaf annihilators); the complement factor deserves that
    reading only when the complement structure is integrable, which the
    flags record.
    """

    vector: np.ndarray
    leaf_values: tuple[complex, ...]
    complement_values: tuple[complex, ...]
    leaf_globally_coherent: bool
    complement_globally_coherent: bool


def _as_tuple(values: complex | Sequence[complex], n_modes: int) -> tuple[complex, ...]:
    if isinstance(values, (int, float, complex)):
        values = (values,) * n_modes
    out = tuple(complex(v) for v in values)
    if len(out) != n_modes:
        raise ValueError(f"expected {n_modes} coherent parameters, got {len(out)}")
    return out


def hybrid_coherent(
    space: FoliatedSpace,
    leaf_values: complex | Sequence[complex],
    complement_values: complex | Sequence[complex],
) -> HybridState:
    leaf_vals = _as_tuple(leaf_values, space.leaf_modes)
    comp_vals = _as_tuple(complement_values, space.complement_modes)
    vector = np.kron(
        coherent(space.leaf, leaf_vals), coherent(space.complement, comp_vals)
    )
    return HybridState(
        vector=vector,
        leaf_values=leaf_vals,
        complement_values=comp_vals,
        leaf_globally_coherent=space.leaf_globally_coherent,
        complement_globally_coherent=space.complement_globally_coherent,
    )


def _as_matrix(space: FoliatedSpace, state: np.ndarray) -> np.ndarray:
    return np.asarray(state, dtype=complex).reshape(
        space.leaf.total_dim, space.complement.total_dim
    )


def apply_to_leaf(space: FoliatedSpace, operator: np.ndarray, state: np.ndarray) -> np.ndarray:
    """(O (x) 1) state without forming the Kronecker product."""
    return (operator @ _as_matrix(space, state)).ravel()


def apply_to_complement(space: FoliatedSpace, operator: np.ndarray, state: np.ndarray) -> np.ndarray:
    """(1 (x) O) state without forming the Kronecker product."""
    return (_as_matrix(space, state) @ operator.T).ravel()


def overlap_factorization_residual(
    space: FoliatedSpace,
    leaf_a: complex | Sequence[complex],
    comp_a: complex | Sequence[complex],
    leaf_b: complex | Sequence[complex],
    comp_b: complex | Sequence[complex],
) -> float:
    """|<hybrid_a|hybrid_b> - <leaf_a|leaf_b><comp_a|comp_b>|, zero up to
    roundoff for product states."""
    ha = hybrid_coherent(space, leaf_a, comp_a)
    hb = hybrid_coherent(space, leaf_b, comp_b)
    joint = np.vdot(ha.vector, hb.vector)
    split = np.vdot(
        coherent(space.leaf, ha.leaf_values), coherent(space.leaf, hb.leaf_values)
    ) * np.vdot(
        coherent(space.complement, ha.complement_values),
        coherent(space.complement, hb.complement_values),
    )
    return float(abs(joint - split))


@dataclass(frozen=True)
class LeafResolution:
    """Resolution-of-unity check along the leaf factor.

    The complement factor of the integrated operator is the exact
    rank-one projector on the fixed complement state, and
    |X (x) vv*| = |X| in operator norm, so the joint deviation equals the
    leaf-space deviation reported here no matter which complement state
    is held fixed.
    """

    leaf_check: ResolutionCheck

    @property
    def deviation(self) -> float:
        return self.leaf_check.deviation

    @property
    def passed(self) -> bool:
        return self.leaf_check.passed


def leaf_resolution(
    space: FoliatedSpace,
    radius: float,
    n_radial: int = 200,
    n_angular: int = 200,
    levels: int = 8,
    threshold: float = 1e-3,
) -> LeafResolution:
    if space.leaf.n_modes != 1:
        raise ValueError("leaf resolution scan is single-mode; use leaf_modes = 1")
    check = resolution_of_unity(
        space.leaf, radius, n_radial=n_radial, n_angular=n_angular,
        levels=levels, threshold=threshold,
    )
    return LeafResolution(check)


@dataclass(frozen=True)
class ScanCheck:
    deviation: float
    threshold: float
    exceeded: bool
    levels: int
    radius: float
    leaf_value: complex


def complement_scan_deviation(
    space: FoliatedSpace,
    leaf_value: complex,
    radius: float,
    n_radial: int = 200,
    n_angular: int = 200,
    levels: int = 8,
    threshold: float = 0.5,
) -> ScanCheck:
    """How far the complement-side integral stays from every resolution.

    The scanned operator is T = |z><z| (x) sum_w w |w><w| with z fixed on
    the leaf.  A resolution in the leafwise sense has the shape
    projector (x) rank-one.  For any such candidate P (x) r u v*, test
    vectors of the form (leaf coherent block) (x) x with x orthogonal to
    v annihilate the candidate entirely, which gives the bound

        |T - P (x) r u v*| >= p * lambda_2(scan block)

    with p the coherent mass retained in the comparison block and
    lambda_2 the second-largest eigenvalue of the complement quadrature
    block.  That lower bound is what is reported; it is close to one for
    adequate quadrature, so the check passes when it exceeds
    ``threshold``.  Needs levels >= 1: a single retained level cannot
    see the rank deficiency.
    """
    if space.leaf.n_modes != 1 or space.complement.n_modes != 1:
        raise ValueError("complement scan needs single-mode leaf and complement")
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if levels > space.complement.dim // 4:
        raise ValueError(
            f"levels must not exceed complement dim/4 = {space.complement.dim // 4}"
        )
    if levels >= space.leaf.dim:
        raise ValueError("levels must be below the leaf dimension")
    leaf_state = coherent(space.leaf, leaf_value)
    scan = coherent_quadrature_sum(space.complement.dim, radius, n_radial, n_angular)
    k = levels + 1
    retained_mass = float(np.linalg.norm(leaf_state[:k]) ** 2)
    eigenvalues = np.linalg.eigvalsh(scan[:k, :k])
    deviation = retained_mass * float(eigenvalues[-2])
    return ScanCheck(
        deviation=deviation,
        threshold=threshold,
        exceeded=deviation > threshold,
        levels=levels,
        radius=radius,
        leaf_value=complex(leaf_value),
    )
