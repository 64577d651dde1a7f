"""Backend selection for the expression executor.

Two interchangeable implementations execute the same postfix programs:
``_exprcore`` (Cython, compiled at install time) and ``_exprcore_py``
(vectorised NumPy).  The compiled one is used when importable; set
``PHASEQ_BACKEND`` to ``py`` or ``c`` to force a choice.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import EvalError

# Opcodes shared by both executors.
(
    OP_CONST,
    OP_VAR,
    OP_NEG,
    OP_ADD,
    OP_SUB,
    OP_MUL,
    OP_DIV,
    OP_POW,
    OP_EXP,
    OP_SIN,
    OP_COS,
    OP_SQRT,
) = range(12)

FUNC_OPCODES = {"exp": OP_EXP, "sin": OP_SIN, "cos": OP_COS, "sqrt": OP_SQRT}

ERR_DIV_ZERO = 1
ERR_SQRT_DOMAIN = 2
ERR_POW_ZERO_NEG = 3

_ERR_MESSAGES = {
    ERR_DIV_ZERO: "division by zero",
    ERR_SQRT_DOMAIN: "sqrt requires a positive real argument",
    ERR_POW_ZERO_NEG: "zero raised to a negative power",
}


@dataclass(frozen=True)
class Program:
    """Flat postfix form of a parsed expression."""

    ops: np.ndarray
    args: np.ndarray
    consts: np.ndarray
    n_variables: int
    stack_depth: int


def _load_backend():
    choice = os.environ.get("PHASEQ_BACKEND", "auto").lower()
    if choice not in ("auto", "c", "py"):
        raise ValueError(f"PHASEQ_BACKEND must be auto, c or py, not {choice!r}")
    if choice in ("auto", "c"):
        try:
            from . import _exprcore

            return _exprcore, "compiled"
        except ImportError:
            if choice == "c":
                raise
    from . import _exprcore_py

    return _exprcore_py, "python"


_IMPL, _BACKEND_NAME = _load_backend()


def backend_name() -> str:
    """Name of the active executor: ``compiled`` or ``python``."""
    return _BACKEND_NAME


def execute(program: Program, points: np.ndarray, want_partials: bool):
    """Run ``program`` on ``points`` of shape (n_points, n_variables).

    Returns ``(values, partials)``; ``partials`` has shape
    ``(n_points, n_variables)`` or is None.  Raises :class:`EvalError` on
    the lowest-index point whose evaluation fails.
    """
    return run_with(_IMPL, program, points, want_partials)


def run_with(impl, program: Program, points: np.ndarray, want_partials: bool):
    """Run a program through an explicit backend module (used by benchmarks)."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    n_points, n_vars = pts.shape
    if n_vars != program.n_variables:
        raise ValueError(
            f"program expects {program.n_variables} variables, points have {n_vars}"
        )
    values = np.empty(n_points, dtype=np.complex128)
    partials = np.empty((n_points, max(n_vars, 1)), dtype=np.complex128)
    code, point_index = impl.run_batch(
        program.ops,
        program.args,
        program.consts,
        program.stack_depth,
        pts,
        bool(want_partials),
        values,
        partials,
    )
    if code:
        raise EvalError(
            f"{_ERR_MESSAGES[code]} (point index {point_index})",
            point_index=point_index,
        )
    return values, (partials if want_partials else None)
