"""Pure-Python executor for expression programs.

Vectorises over the point batch with NumPy.  Each stack slot is a
``(1 + n_vars, n_points)`` array: row 0 holds values, the remaining rows the
forward-mode partials.  Semantics (including the error contract: report the
lowest point index that fails anywhere in the program) match the compiled
executor in ``_exprcore.pyx``.
"""

from __future__ import annotations

import numpy as np

from ._kernel import (
    ERR_DIV_ZERO,
    ERR_POW_ZERO_NEG,
    ERR_SQRT_DOMAIN,
    OP_ADD,
    OP_CONST,
    OP_COS,
    OP_DIV,
    OP_EXP,
    OP_MUL,
    OP_NEG,
    OP_POW,
    OP_SIN,
    OP_SQRT,
    OP_SUB,
    OP_VAR,
)


def _ipow(base: np.ndarray, exponent: int) -> np.ndarray:
    # Square-and-multiply, mirroring the compiled kernel exactly.
    result = np.ones_like(base)
    acc = base.copy()
    e = exponent
    while e:
        if e & 1:
            result = result * acc
        e >>= 1
        if e:
            acc = acc * acc
    return result


def run_batch(ops, args, consts, depth, points, want_partials, out_values, out_partials):
    n_points, n_vars = points.shape
    rows = 1 + n_vars if want_partials else 1
    stack = np.zeros((depth, rows, n_points), dtype=np.complex128)
    err = np.zeros(n_points, dtype=np.int8)

    def flag(mask, code):
        fresh = mask & (err == 0)
        err[fresh] = code

    sp = 0
    for op, arg in zip(ops, args):
        if op == OP_CONST:
            stack[sp, 0] = consts[arg]
            if rows > 1:
                stack[sp, 1:] = 0.0
            sp += 1
        elif op == OP_VAR:
            stack[sp, 0] = points[:, arg]
            if rows > 1:
                stack[sp, 1:] = 0.0
                stack[sp, 1 + arg] = 1.0
            sp += 1
        elif op == OP_NEG:
            np.negative(stack[sp - 1], out=stack[sp - 1])
        elif op == OP_ADD:
            stack[sp - 2] += stack[sp - 1]
            sp -= 1
        elif op == OP_SUB:
            stack[sp - 2] -= stack[sp - 1]
            sp -= 1
        elif op == OP_MUL:
            a = stack[sp - 2]
            b = stack[sp - 1]
            if rows > 1:
                a[1:] = a[0] * b[1:] + b[0] * a[1:]
            a[0] = a[0] * b[0]
            sp -= 1
        elif op == OP_DIV:
            a = stack[sp - 2]
            b = stack[sp - 1]
            zero = b[0] == 0
            if zero.any():
                flag(zero, ERR_DIV_ZERO)
                b[0] = np.where(zero, 1.0, b[0])
            quotient = a[0] / b[0]
            if rows > 1:
                a[1:] = (a[1:] - quotient * b[1:]) / b[0]
            a[0] = quotient
            sp -= 1
        elif op == OP_POW:
            exponent = int(arg)
            a = stack[sp - 1]
            if exponent == 0:
                a[0] = 1.0
                if rows > 1:
                    a[1:] = 0.0
            elif exponent != 1:
                v = a[0].copy()
                if exponent > 0:
                    lower = _ipow(v, exponent - 1)
                    if rows > 1:
                        a[1:] *= exponent * lower
                    a[0] = lower * v
                else:
                    zero = v == 0
                    if zero.any():
                        flag(zero, ERR_POW_ZERO_NEG)
                        v = np.where(zero, 1.0, v)
                    positive = _ipow(v, -exponent)
                    a[0] = 1.0 / positive
                    if rows > 1:
                        a[1:] *= exponent * a[0] / v
        elif op == OP_EXP:
            a = stack[sp - 1]
            value = np.exp(a[0])
            if rows > 1:
                a[1:] *= value
            a[0] = value
        elif op == OP_SIN:
            a = stack[sp - 1]
            v = a[0].copy()
            if rows > 1:
                a[1:] *= np.cos(v)
            a[0] = np.sin(v)
        elif op == OP_COS:
            a = stack[sp - 1]
            v = a[0].copy()
            if rows > 1:
                a[1:] *= -np.sin(v)
            a[0] = np.cos(v)
        elif op == OP_SQRT:
            a = stack[sp - 1]
            v = a[0]
            bad = (v.imag != 0.0) | (v.real <= 0.0)
            if bad.any():
                flag(bad, ERR_SQRT_DOMAIN)
                v = np.where(bad, 1.0, v)
            root = np.sqrt(v)
            a[0] = root
            if rows > 1:
                a[1:] /= 2.0 * root
        else:
            raise RuntimeError(f"unknown opcode {op}")

    if err.any():
        index = int(np.flatnonzero(err)[0])
        return int(err[index]), index

    out_values[:] = stack[0, 0]
    if want_partials:
        out_partials[:, :n_vars] = stack[0, 1:].T
    return 0, -1
