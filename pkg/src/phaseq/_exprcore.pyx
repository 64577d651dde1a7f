# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled executor for expression programs.

Runs the postfix program point by point with a scalar complex stack plus a
forward-mode partial block per slot.  Semantics match ``_exprcore_py``;
errors report the lowest failing point index.
"""

from libc.stdlib cimport free, malloc

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double complex csin(double complex)
    double complex ccos(double complex)
    double complex csqrt(double complex)
    double creal(double complex)
    double cimag(double complex)

cdef int OP_CONST = 0
cdef int OP_VAR = 1
cdef int OP_NEG = 2
cdef int OP_ADD = 3
cdef int OP_SUB = 4
cdef int OP_MUL = 5
cdef int OP_DIV = 6
cdef int OP_POW = 7
cdef int OP_EXP = 8
cdef int OP_SIN = 9
cdef int OP_COS = 10
cdef int OP_SQRT = 11

cdef int ERR_DIV_ZERO = 1
cdef int ERR_SQRT_DOMAIN = 2
cdef int ERR_POW_ZERO_NEG = 3


cdef inline double complex ipow(double complex base, long exponent) nogil:
    # Square-and-multiply, mirroring the fallback exactly.
    cdef double complex result = 1.0
    cdef double complex acc = base
    cdef long e = exponent
    while e:
        if e & 1:
            result = result * acc
        e >>= 1
        if e:
            acc = acc * acc
    return result


def run_batch(int[::1] ops, int[::1] args, double complex[::1] consts, int depth,
              double[:, ::1] points, bint want_partials,
              double complex[::1] out_values, double complex[:, ::1] out_partials):
    cdef Py_ssize_t n_points = points.shape[0]
    cdef Py_ssize_t n_vars = points.shape[1]
    cdef Py_ssize_t n_ops = ops.shape[0]
    cdef Py_ssize_t p, t, k
    cdef int sp, op, arg, code, first_code = 0
    cdef Py_ssize_t first_point = -1
    cdef long e
    cdef double complex v, w, lower
    cdef double complex *vals
    cdef double complex *parts

    vals = <double complex *> malloc(depth * sizeof(double complex))
    parts = <double complex *> malloc(depth * max(n_vars, 1) * sizeof(double complex))
    if vals == NULL or parts == NULL:
        free(vals)
        free(parts)
        raise MemoryError()

    with nogil:
        for p in range(n_points):
            sp = 0
            code = 0
            for t in range(n_ops):
                op = ops[t]
                arg = args[t]
                if op == OP_CONST:
                    vals[sp] = consts[arg]
                    if want_partials:
                        for k in range(n_vars):
                            parts[sp * n_vars + k] = 0.0
                    sp += 1
                elif op == OP_VAR:
                    vals[sp] = points[p, arg]
                    if want_partials:
                        for k in range(n_vars):
                            parts[sp * n_vars + k] = 0.0
                        parts[sp * n_vars + arg] = 1.0
                    sp += 1
                elif op == OP_NEG:
                    vals[sp - 1] = -vals[sp - 1]
                    if want_partials:
                        for k in range(n_vars):
                            parts[(sp - 1) * n_vars + k] = -parts[(sp - 1) * n_vars + k]
                elif op == OP_ADD:
                    vals[sp - 2] = vals[sp - 2] + vals[sp - 1]
                    if want_partials:
                        for k in range(n_vars):
                            parts[(sp - 2) * n_vars + k] = (
                                parts[(sp - 2) * n_vars + k] + parts[(sp - 1) * n_vars + k]
                            )
                    sp -= 1
                elif op == OP_SUB:
                    vals[sp - 2] = vals[sp - 2] - vals[sp - 1]
                    if want_partials:
                        for k in range(n_vars):
                            parts[(sp - 2) * n_vars + k] = (
                                parts[(sp - 2) * n_vars + k] - parts[(sp - 1) * n_vars + k]
                            )
                    sp -= 1
                elif op == OP_MUL:
                    v = vals[sp - 2]
                    w = vals[sp - 1]
                    if want_partials:
                        for k in range(n_vars):
                            parts[(sp - 2) * n_vars + k] = (
                                v * parts[(sp - 1) * n_vars + k]
                                + w * parts[(sp - 2) * n_vars + k]
                            )
                    vals[sp - 2] = v * w
                    sp -= 1
                elif op == OP_DIV:
                    w = vals[sp - 1]
                    if creal(w) == 0.0 and cimag(w) == 0.0:
                        code = ERR_DIV_ZERO
                        break
                    v = vals[sp - 2] / w
                    if want_partials:
                        for k in range(n_vars):
                            parts[(sp - 2) * n_vars + k] = (
                                parts[(sp - 2) * n_vars + k] - v * parts[(sp - 1) * n_vars + k]
                            ) / w
                    vals[sp - 2] = v
                    sp -= 1
                elif op == OP_POW:
                    e = arg
                    v = vals[sp - 1]
                    if e == 0:
                        vals[sp - 1] = 1.0
                        if want_partials:
                            for k in range(n_vars):
                                parts[(sp - 1) * n_vars + k] = 0.0
                    elif e != 1:
                        if e > 0:
                            lower = ipow(v, e - 1)
                            if want_partials:
                                for k in range(n_vars):
                                    parts[(sp - 1) * n_vars + k] = (
                                        e * lower * parts[(sp - 1) * n_vars + k]
                                    )
                            vals[sp - 1] = lower * v
                        else:
                            if creal(v) == 0.0 and cimag(v) == 0.0:
                                code = ERR_POW_ZERO_NEG
                                break
                            w = 1.0 / ipow(v, -e)
                            vals[sp - 1] = w
                            if want_partials:
                                for k in range(n_vars):
                                    parts[(sp - 1) * n_vars + k] = (
                                        e * w / v * parts[(sp - 1) * n_vars + k]
                                    )
                elif op == OP_EXP:
                    v = cexp(vals[sp - 1])
                    vals[sp - 1] = v
                    if want_partials:
                        for k in range(n_vars):
                            parts[(sp - 1) * n_vars + k] = v * parts[(sp - 1) * n_vars + k]
                elif op == OP_SIN:
                    v = vals[sp - 1]
                    vals[sp - 1] = csin(v)
                    if want_partials:
                        w = ccos(v)
                        for k in range(n_vars):
                            parts[(sp - 1) * n_vars + k] = w * parts[(sp - 1) * n_vars + k]
                elif op == OP_COS:
                    v = vals[sp - 1]
                    vals[sp - 1] = ccos(v)
                    if want_partials:
                        w = -csin(v)
                        for k in range(n_vars):
                            parts[(sp - 1) * n_vars + k] = w * parts[(sp - 1) * n_vars + k]
                elif op == OP_SQRT:
                    v = vals[sp - 1]
                    if cimag(v) != 0.0 or creal(v) <= 0.0:
                        code = ERR_SQRT_DOMAIN
                        break
                    w = csqrt(v)
                    vals[sp - 1] = w
                    if want_partials:
                        for k in range(n_vars):
                            parts[(sp - 1) * n_vars + k] = (
                                parts[(sp - 1) * n_vars + k] / (2.0 * w)
                            )
            if code != 0:
                first_code = code
                first_point = p
                break
            out_values[p] = vals[0]
            if want_partials:
                for k in range(n_vars):
                    out_partials[p, k] = parts[k]

    free(vals)
    free(parts)
    return first_code, first_point
