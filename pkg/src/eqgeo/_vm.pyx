# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: initializedcheck=False, language_level=3
"""Compiled backend for expression programs.

Same contract as eqgeo._vm_py. The stack machine runs on fixed-size C arrays
(no heap traffic per call); first/second-order modes propagate gradients and
Hessians of up to MAX_VARS variables through every operation.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport (NAN, cos as c_cos, exp as c_exp, isnan,
                        log as c_log, pow as c_pow, sin as c_sin,
                        sqrt as c_sqrt)

from .errors import EvalDomainError

NAME = "compiled"

DEF MAXSTACK = 64
DEF MAXV = 8
DEF GRADSZ = 512    # MAXSTACK * MAXV
DEF HESSSZ = 4096   # MAXSTACK * MAXV * MAXV
DEF VSZ = 64        # MAXV * MAXV

# opcode values mirror eqgeo._prog
DEF OP_CONST = 0
DEF OP_VAR = 1
DEF OP_ADD = 2
DEF OP_SUB = 3
DEF OP_MUL = 4
DEF OP_DIV = 5
DEF OP_NEG = 6
DEF OP_SIN = 7
DEF OP_COS = 8
DEF OP_EXP = 9
DEF OP_LOG = 10
DEF OP_SQRT = 11
DEF OP_POW = 12
DEF OP_POWC = 13
DEF OP_POWI = 14

_ERRORS = {
    1: "division by zero",
    2: "log of non-positive value",
    3: "sqrt of negative value",
    4: "power base must be positive",
    5: "fractional power of negative value",
    6: "zero raised to a negative power",
    7: "sqrt of non-positive value (derivative pole)",
    8: "fractional power of non-positive value",
    9: "bad opcode",
}


cdef int _run_scalar(const int[:, :] code, const double[:] consts,
                     const double* x, double* out) noexcept nogil:
    """Value-only pass; returns 0 on success or an _ERRORS code."""
    cdef double stack[MAXSTACK]
    cdef Py_ssize_t k
    cdef int op, arg, n, sp = 0
    cdef double v
    for k in range(code.shape[0]):
        op = code[k, 0]
        arg = code[k, 1]
        if op == OP_CONST:
            stack[sp] = consts[arg]
            sp += 1
        elif op == OP_VAR:
            stack[sp] = x[arg]
            sp += 1
        elif op == OP_ADD:
            sp -= 1
            stack[sp - 1] += stack[sp]
        elif op == OP_SUB:
            sp -= 1
            stack[sp - 1] -= stack[sp]
        elif op == OP_MUL:
            sp -= 1
            stack[sp - 1] *= stack[sp]
        elif op == OP_DIV:
            sp -= 1
            if stack[sp] == 0.0:
                return 1
            stack[sp - 1] /= stack[sp]
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_SIN:
            stack[sp - 1] = c_sin(stack[sp - 1])
        elif op == OP_COS:
            stack[sp - 1] = c_cos(stack[sp - 1])
        elif op == OP_EXP:
            stack[sp - 1] = c_exp(stack[sp - 1])
        elif op == OP_LOG:
            if stack[sp - 1] <= 0.0:
                return 2
            stack[sp - 1] = c_log(stack[sp - 1])
        elif op == OP_SQRT:
            if stack[sp - 1] < 0.0:
                return 3
            stack[sp - 1] = c_sqrt(stack[sp - 1])
        elif op == OP_POW:
            sp -= 1
            if stack[sp - 1] <= 0.0:
                return 4
            stack[sp - 1] = c_pow(stack[sp - 1], stack[sp])
        elif op == OP_POWC:
            v = c_pow(stack[sp - 1], consts[arg]) \
                if stack[sp - 1] >= 0.0 else NAN
            if isnan(v):
                return 5
            stack[sp - 1] = v
        elif op == OP_POWI:
            n = arg
            v = stack[sp - 1]
            if v == 0.0 and n < 0:
                return 6
            stack[sp - 1] = c_pow(v, <double>n)
        else:
            return 9
    out[0] = stack[0]
    return 0


cdef int _dual_machine(const int[:, :] code, const double[:] consts,
                       const double* x, int m, int order,
                       double* out_v, double* out_g,
                       double* out_h) noexcept nogil:
    """(value, grad[m], hess[m,m]) pass; returns 0 or an _ERRORS code.

    Hessian storage is only touched when order == 2.
    """
    cdef double val[MAXSTACK]
    cdef double grad[GRADSZ]
    cdef double hess[HESSSZ]
    cdef double lg[MAXV]
    cdef double mg[MAXV]
    cdef double lh[VSZ]
    cdef double mh[VSZ]
    cdef Py_ssize_t k
    cdef int op, arg, sp = 0, i, j, n
    cdef int mm = m * m
    cdef double v, f, d1, d2, inv, la, mv, bv, c
    cdef double *ag
    cdef double *bg
    cdef double *ah
    cdef double *bh

    for k in range(code.shape[0]):
        op = code[k, 0]
        arg = code[k, 1]
        if op == OP_CONST or op == OP_VAR:
            val[sp] = consts[arg] if op == OP_CONST else x[arg]
            ag = &grad[sp * MAXV]
            for i in range(m):
                ag[i] = 0.0
            if op == OP_VAR:
                ag[arg] = 1.0
            if order == 2:
                ah = &hess[sp * VSZ]
                for i in range(mm):
                    ah[i] = 0.0
            sp += 1
            continue

        if op == OP_ADD or op == OP_SUB or op == OP_MUL or op == OP_DIV \
                or op == OP_POW:
            sp -= 1
            ag = &grad[(sp - 1) * MAXV]
            bg = &grad[sp * MAXV]
            ah = &hess[(sp - 1) * VSZ]
            bh = &hess[sp * VSZ]
            if op == OP_ADD:
                val[sp - 1] += val[sp]
                for i in range(m):
                    ag[i] += bg[i]
                if order == 2:
                    for i in range(mm):
                        ah[i] += bh[i]
            elif op == OP_SUB:
                val[sp - 1] -= val[sp]
                for i in range(m):
                    ag[i] -= bg[i]
                if order == 2:
                    for i in range(mm):
                        ah[i] -= bh[i]
            elif op == OP_MUL:
                v = val[sp - 1]
                bv = val[sp]
                val[sp - 1] = v * bv
                if order == 2:
                    for i in range(m):
                        for j in range(m):
                            ah[i * m + j] = v * bh[i * m + j] \
                                + bv * ah[i * m + j] \
                                + ag[i] * bg[j] + bg[i] * ag[j]
                for i in range(m):
                    ag[i] = v * bg[i] + bv * ag[i]
            elif op == OP_DIV:
                bv = val[sp]
                if bv == 0.0:
                    return 1
                inv = 1.0 / bv
                v = val[sp - 1] * inv  # the quotient a/b
                if order == 2:
                    for i in range(m):
                        for j in range(m):
                            ah[i * m + j] = (ah[i * m + j]
                                             - v * bh[i * m + j]
                                             - ag[i] * inv * bg[j]
                                             - bg[i] * inv * ag[j]
                                             + 2.0 * v * inv
                                             * bg[i] * bg[j]) * inv
                for i in range(m):
                    ag[i] = (ag[i] - v * bg[i]) * inv
                val[sp - 1] = v
            else:  # OP_POW via a^b = exp(b log a)
                v = val[sp - 1]
                bv = val[sp]
                if v <= 0.0:
                    return 4
                la = c_log(v)
                inv = 1.0 / v
                for i in range(m):
                    lg[i] = ag[i] * inv
                if order == 2:
                    for i in range(m):
                        for j in range(m):
                            lh[i * m + j] = ah[i * m + j] * inv \
                                - ag[i] * ag[j] * inv * inv
                mv = bv * la
                for i in range(m):
                    mg[i] = bv * lg[i] + la * bg[i]
                if order == 2:
                    for i in range(m):
                        for j in range(m):
                            mh[i * m + j] = bv * lh[i * m + j] \
                                + la * bh[i * m + j] \
                                + bg[i] * lg[j] + lg[i] * bg[j]
                f = c_exp(mv)
                val[sp - 1] = f
                if order == 2:
                    for i in range(m):
                        for j in range(m):
                            ah[i * m + j] = f * (mh[i * m + j]
                                                 + mg[i] * mg[j])
                for i in range(m):
                    ag[i] = f * mg[i]
            continue

        # unary chain rule: result f, slope d1, curvature d2
        v = val[sp - 1]
        if op == OP_NEG:
            f = -v
            d1 = -1.0
            d2 = 0.0
        elif op == OP_SIN:
            f = c_sin(v)
            d1 = c_cos(v)
            d2 = -f
        elif op == OP_COS:
            f = c_cos(v)
            d1 = -c_sin(v)
            d2 = -f
        elif op == OP_EXP:
            f = c_exp(v)
            d1 = f
            d2 = f
        elif op == OP_LOG:
            if v <= 0.0:
                return 2
            f = c_log(v)
            d1 = 1.0 / v
            d2 = -d1 * d1
        elif op == OP_SQRT:
            if v <= 0.0:
                return 7
            f = c_sqrt(v)
            d1 = 0.5 / f
            d2 = -0.25 / (f * v)
        elif op == OP_POWC or op == OP_POWI:
            c = consts[arg] if op == OP_POWC else <double>arg
            if c == <double><int>c:
                n = <int>c
                if v == 0.0 and n < 3:
                    if n < 0:
                        return 6
                    f = 1.0 if n == 0 else 0.0
                    d1 = 1.0 if n == 1 else 0.0
                    d2 = 2.0 if n == 2 else 0.0
                else:
                    f = c_pow(v, c)
                    d1 = c * c_pow(v, c - 1.0)
                    d2 = c * (c - 1.0) * c_pow(v, c - 2.0)
            else:
                if v <= 0.0:
                    return 8
                f = c_pow(v, c)
                d1 = c * f / v
                d2 = c * (c - 1.0) * f / (v * v)
        else:
            return 9
        ag = &grad[(sp - 1) * MAXV]
        if order == 2:
            ah = &hess[(sp - 1) * VSZ]
            for i in range(m):
                for j in range(m):
                    ah[i * m + j] = d1 * ah[i * m + j] + d2 * ag[i] * ag[j]
        for i in range(m):
            ag[i] = d1 * ag[i]
        val[sp - 1] = f

    out_v[0] = val[0]
    for i in range(m):
        out_g[i] = grad[i]
    if order == 2:
        for i in range(mm):
            out_h[i] = hess[i]
    return 0


def eval0(prog, x):
    """Evaluate a program at point x, value only."""
    cdef const int[:, :] code = prog.code
    cdef const double[:] consts = prog.consts
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = \
        np.ascontiguousarray(x, dtype=np.float64)
    cdef double res
    cdef int status = _run_scalar(code, consts, &xv[0], &res)
    if status:
        raise EvalDomainError(_ERRORS[status])
    return res


def eval1(prog, x):
    """Value and gradient at x (first-order forward mode)."""
    cdef const int[:, :] code = prog.code
    cdef const double[:] consts = prog.consts
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = \
        np.ascontiguousarray(x, dtype=np.float64)
    cdef int m = prog.nvars
    cdef double v
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g = np.empty(m)
    cdef int status = _dual_machine(code, consts, &xv[0], m, 1,
                                    &v, &g[0], NULL)
    if status:
        raise EvalDomainError(_ERRORS[status])
    return v, g


def eval2(prog, x):
    """Value, gradient and Hessian at x (second-order forward mode)."""
    cdef const int[:, :] code = prog.code
    cdef const double[:] consts = prog.consts
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = \
        np.ascontiguousarray(x, dtype=np.float64)
    cdef int m = prog.nvars
    cdef double v
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] h = np.empty((m, m))
    cdef int status = _dual_machine(code, consts, &xv[0], m, 2,
                                    &v, &g[0], &h[0, 0])
    if status:
        raise EvalDomainError(_ERRORS[status])
    return v, g, h


def eval_grid(prog, ts):
    """Vectorized values of a one-variable program on a grid."""
    if prog.nvars != 1:
        raise ValueError("grid evaluation requires a one-variable program")
    cdef const int[:, :] code = prog.code
    cdef const double[:] consts = prog.consts
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tv = \
        np.ascontiguousarray(ts, dtype=np.float64)
    cdef Py_ssize_t g, G = tv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(G)
    cdef int status
    for g in range(G):
        status = _run_scalar(code, consts, &tv[g], &out[g])
        if status:
            raise EvalDomainError(_ERRORS[status])
    return out
