"""Pure-Python backend for expression programs.

Scalar evaluation runs the stack machine on plain floats (math.*), so results
track the compiled backend's libm calls closely. First/second-order modes
carry (value, gradient, Hessian) triples through every operation, i.e.
forward-mode dual numbers truncated at second order. Grid evaluation runs the
same machine on whole numpy arrays at once.
"""

import math

import numpy as np

from ._prog import (OP_ADD, OP_CONST, OP_COS, OP_DIV, OP_EXP, OP_LOG, OP_MUL,
                    OP_NEG, OP_POW, OP_POWC, OP_POWI, OP_SIN, OP_SQRT, OP_SUB,
                    OP_VAR)
from .errors import EvalDomainError

NAME = "pure"


def _err(what, v):
    raise EvalDomainError(f"{what} (argument {v!r})")


def eval0(prog, x):
    """Evaluate a program at point x, value only."""
    stack = [0.0] * prog.nstack
    sp = 0
    consts = prog.consts
    for op, arg in prog.code:
        if op == OP_CONST:
            stack[sp] = consts[arg]
            sp += 1
        elif op == OP_VAR:
            stack[sp] = x[arg]
            sp += 1
        elif op == OP_ADD:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == OP_SUB:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] - stack[sp]
        elif op == OP_MUL:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == OP_DIV:
            sp -= 1
            if stack[sp] == 0.0:
                _err("division by zero", stack[sp])
            stack[sp - 1] = stack[sp - 1] / stack[sp]
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_SIN:
            stack[sp - 1] = math.sin(stack[sp - 1])
        elif op == OP_COS:
            stack[sp - 1] = math.cos(stack[sp - 1])
        elif op == OP_EXP:
            stack[sp - 1] = math.exp(stack[sp - 1])
        elif op == OP_LOG:
            if stack[sp - 1] <= 0.0:
                _err("log of non-positive value", stack[sp - 1])
            stack[sp - 1] = math.log(stack[sp - 1])
        elif op == OP_SQRT:
            if stack[sp - 1] < 0.0:
                _err("sqrt of negative value", stack[sp - 1])
            stack[sp - 1] = math.sqrt(stack[sp - 1])
        elif op == OP_POW:
            sp -= 1
            if stack[sp - 1] <= 0.0:
                _err("power base must be positive", stack[sp - 1])
            stack[sp - 1] = math.pow(stack[sp - 1], stack[sp])
        elif op == OP_POWC:
            v = math.pow(stack[sp - 1], consts[arg]) \
                if stack[sp - 1] >= 0.0 else math.nan
            if math.isnan(v):
                _err("fractional power of negative value", stack[sp - 1])
            stack[sp - 1] = v
        elif op == OP_POWI:
            n = arg
            v = stack[sp - 1]
            if v == 0.0 and n < 0:
                _err("zero raised to a negative power", v)
            stack[sp - 1] = v ** n
        else:
            raise AssertionError(f"bad opcode {op}")
    return float(stack[0])


def _pow_jets(v, c):
    """(v^c, c v^(c-1), c(c-1) v^(c-2)) with domain checks for duals."""
    n = int(c) if float(c).is_integer() else None
    if n is not None:
        if v == 0.0 and n < 3:
            # derivatives would blow up (or 0^negative); only n>=3 is smooth
            if n < 0:
                _err("zero raised to a negative power", v)
            return (v ** n, n * v ** (n - 1) if n >= 1 else 0.0,
                    n * (n - 1) * v ** (n - 2) if n >= 2 else 0.0)
        return v ** n, n * v ** (n - 1), n * (n - 1) * v ** (n - 2)
    if v <= 0.0:
        _err("fractional power of non-positive value", v)
    f = math.pow(v, c)
    return f, c * f / v, c * (c - 1.0) * f / (v * v)


def _apply_unary(val, g, h, f, d1, d2, order):
    if order >= 1:
        if order == 2:
            h *= d1
            h += d2 * np.outer(g, g)
        g *= d1
    return f, g, h


def _eval_dual(prog, x, order):
    m = prog.nvars
    consts = prog.consts
    vals = [0.0] * prog.nstack
    grads = [None] * prog.nstack
    hesss = [None] * prog.nstack
    sp = 0
    for op, arg in prog.code:
        if op == OP_CONST or op == OP_VAR:
            if op == OP_CONST:
                vals[sp] = consts[arg]
                g = np.zeros(m)
            else:
                vals[sp] = x[arg]
                g = np.zeros(m)
                g[arg] = 1.0
            grads[sp] = g
            hesss[sp] = np.zeros((m, m)) if order == 2 else None
            sp += 1
            continue
        if op in (OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POW):
            sp -= 1
            av, ag, ah = vals[sp - 1], grads[sp - 1], hesss[sp - 1]
            bv, bg, bh = vals[sp], grads[sp], hesss[sp]
            if op == OP_ADD:
                vals[sp - 1] = av + bv
                grads[sp - 1] = ag + bg
                if order == 2:
                    hesss[sp - 1] = ah + bh
            elif op == OP_SUB:
                vals[sp - 1] = av - bv
                grads[sp - 1] = ag - bg
                if order == 2:
                    hesss[sp - 1] = ah - bh
            elif op == OP_MUL:
                vals[sp - 1] = av * bv
                grads[sp - 1] = av * bg + bv * ag
                if order == 2:
                    cross = np.outer(ag, bg)
                    hesss[sp - 1] = av * bh + bv * ah + cross + cross.T
            elif op == OP_DIV:
                if bv == 0.0:
                    _err("division by zero", bv)
                inv = 1.0 / bv
                vals[sp - 1] = av * inv
                grads[sp - 1] = (ag - av * inv * bg) * inv
                if order == 2:
                    cross = np.outer(ag, bg) + np.outer(bg, ag)
                    hesss[sp - 1] = (ah - av * inv * bh - inv * cross
                                     + 2.0 * av * inv * inv
                                     * np.outer(bg, bg)) * inv
            else:  # OP_POW: a^b = exp(b log a)
                if av <= 0.0:
                    _err("power base must be positive", av)
                la = math.log(av)
                lg = ag / av
                lh = (ah / av - np.outer(ag, ag) / (av * av)) \
                    if order == 2 else None
                mv = bv * la
                mg = bv * lg + la * bg
                if order == 2:
                    cross = np.outer(bg, lg)
                    mh = bv * lh + la * bh + cross + cross.T
                f = math.exp(mv)
                vals[sp - 1] = f
                grads[sp - 1] = f * mg
                if order == 2:
                    hesss[sp - 1] = f * (mh + np.outer(mg, mg))
            continue
        v = vals[sp - 1]
        g = grads[sp - 1]
        h = hesss[sp - 1]
        if op == OP_NEG:
            vals[sp - 1] = -v
            grads[sp - 1] = -g
            if order == 2:
                hesss[sp - 1] = -h
            continue
        if op == OP_SIN:
            f, d1, d2 = math.sin(v), math.cos(v), -math.sin(v)
        elif op == OP_COS:
            f, d1, d2 = math.cos(v), -math.sin(v), -math.cos(v)
        elif op == OP_EXP:
            f = math.exp(v)
            d1 = d2 = f
        elif op == OP_LOG:
            if v <= 0.0:
                _err("log of non-positive value", v)
            f, d1, d2 = math.log(v), 1.0 / v, -1.0 / (v * v)
        elif op == OP_SQRT:
            if v <= 0.0:
                _err("sqrt of non-positive value (derivative pole)", v)
            f = math.sqrt(v)
            d1 = 0.5 / f
            d2 = -0.25 / (f * v)
        elif op == OP_POWC:
            f, d1, d2 = _pow_jets(v, consts[arg])
        elif op == OP_POWI:
            f, d1, d2 = _pow_jets(v, float(arg))
        else:
            raise AssertionError(f"bad opcode {op}")
        vals[sp - 1], grads[sp - 1], hesss[sp - 1] = \
            _apply_unary(v, g, h, f, d1, d2, order)
    return vals[0], grads[0], hesss[0]


def eval1(prog, x):
    """Value and gradient at x (first-order forward mode)."""
    v, g, _ = _eval_dual(prog, x, 1)
    return float(v), g


def eval2(prog, x):
    """Value, gradient and Hessian at x (second-order forward mode)."""
    v, g, h = _eval_dual(prog, x, 2)
    return float(v), g, h


def eval_grid(prog, ts):
    """Vectorized values of a one-variable program on a grid."""
    if prog.nvars != 1:
        raise ValueError("grid evaluation requires a one-variable program")
    consts = prog.consts
    stack = [None] * prog.nstack
    sp = 0
    for op, arg in prog.code:
        if op == OP_CONST:
            stack[sp] = np.full(ts.shape, consts[arg])
            sp += 1
        elif op == OP_VAR:
            stack[sp] = ts.astype(np.float64, copy=True)
            sp += 1
        elif op == OP_ADD:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == OP_SUB:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] - stack[sp]
        elif op == OP_MUL:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == OP_DIV:
            sp -= 1
            if np.any(stack[sp] == 0.0):
                _err("division by zero", 0.0)
            stack[sp - 1] = stack[sp - 1] / stack[sp]
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_SIN:
            stack[sp - 1] = np.sin(stack[sp - 1])
        elif op == OP_COS:
            stack[sp - 1] = np.cos(stack[sp - 1])
        elif op == OP_EXP:
            stack[sp - 1] = np.exp(stack[sp - 1])
        elif op == OP_LOG:
            if np.any(stack[sp - 1] <= 0.0):
                _err("log of non-positive value", float(np.min(stack[sp - 1])))
            stack[sp - 1] = np.log(stack[sp - 1])
        elif op == OP_SQRT:
            if np.any(stack[sp - 1] < 0.0):
                _err("sqrt of negative value", float(np.min(stack[sp - 1])))
            stack[sp - 1] = np.sqrt(stack[sp - 1])
        elif op == OP_POW:
            sp -= 1
            if np.any(stack[sp - 1] <= 0.0):
                _err("power base must be positive",
                     float(np.min(stack[sp - 1])))
            stack[sp - 1] = np.power(stack[sp - 1], stack[sp])
        elif op == OP_POWC:
            base = stack[sp - 1]
            if np.any(base < 0.0):
                _err("fractional power of negative value",
                     float(np.min(base)))
            stack[sp - 1] = np.power(base, consts[arg])
        elif op == OP_POWI:
            base = stack[sp - 1]
            if arg < 0 and np.any(base == 0.0):
                _err("zero raised to a negative power", 0.0)
            stack[sp - 1] = np.power(base, float(arg))
        else:
            raise AssertionError(f"bad opcode {op}")
    return stack[0]
