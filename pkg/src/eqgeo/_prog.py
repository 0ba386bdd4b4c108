"""Stack-machine program format shared by the compiled and pure backends.

A program is a flat postfix instruction list over a small opcode set. Each
instruction is an (opcode, argument) pair of int32; the argument indexes the
constant pool (CONST, POWC), the variable vector (VAR), or holds a literal
integer exponent (POWI) and is zero otherwise.
"""

from dataclasses import dataclass

import numpy as np

OP_CONST = 0
OP_VAR = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_NEG = 6
OP_SIN = 7
OP_COS = 8
OP_EXP = 9
OP_LOG = 10
OP_SQRT = 11
OP_POW = 12   # general a^b, both from the stack; requires a > 0
OP_POWC = 13  # a^c with float constant c from the pool
OP_POWI = 14  # a^n with literal integer n in the argument slot

# Hard limits of the compiled backend; the pure backend has none, but the
# compiler enforces them anyway so both backends accept the same programs.
MAX_STACK = 64
MAX_VARS = 8


@dataclass(frozen=True)
class Program:
    """Compiled expression: instructions, constant pool, arity, stack need."""

    code: np.ndarray    # int32, shape (n_instr, 2), read-only
    consts: np.ndarray  # float64, shape (n_consts,), read-only
    nvars: int
    nstack: int

    def __post_init__(self):
        if self.nstack > MAX_STACK:
            raise ValueError(f"expression too deep: needs {self.nstack} stack "
                             f"slots (limit {MAX_STACK})")
        if self.nvars > MAX_VARS:
            raise ValueError(f"too many variables: {self.nvars} "
                             f"(limit {MAX_VARS})")
        self.code.setflags(write=False)
        self.consts.setflags(write=False)
