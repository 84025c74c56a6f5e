"""Arithmetic in GF(2^8) with reducing polynomial x^8+x^4+x^3+x^2+1 (0x11D).

Scalar helpers work on plain ints; ``MUL_TABLE`` is a 256x256 numpy table used
to multiply whole byte arrays by a constant with a single ``take``.
"""

from dataclasses import dataclass

import numpy as np

POLY = 0x11D
GENERATOR = 0x02


@dataclass(frozen=True)
class GfTables:
    exp_table: bytes  # 512 entries so exp[log a + log b] needs no modulo
    log_table: bytes  # log_table[0] is a sentinel (0) and must not be used

    @classmethod
    def build(cls, poly=POLY):
        exp = bytearray(512)
        log = bytearray(256)
        x = 1
        for i in range(255):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & 0x100:
                x ^= poly
        if len(set(exp[:255])) != 255:
            raise ValueError(f"0x{poly:x} is not primitive over GF(2)")
        for i in range(255, 512):
            exp[i] = exp[i - 255]
        return cls(bytes(exp), bytes(log))


TABLES = GfTables.build()
_EXP = TABLES.exp_table
_LOG = TABLES.log_table


def gf_mul(a, b):
    if a == 0 or b == 0:
        return 0
    return _EXP[_LOG[a] + _LOG[b]]


def gf_inv(a):
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(256)")
    return _EXP[255 - _LOG[a]]


def gf_div(a, b):
    if b == 0:
        raise ZeroDivisionError("division by 0 in GF(256)")
    if a == 0:
        return 0
    return _EXP[_LOG[a] + 255 - _LOG[b]]


def gf_pow(a, n):
    if n == 0:
        return 1
    if a == 0:
        return 0
    return _EXP[(_LOG[a] * n) % 255]


def _build_mul_table():
    exp = np.frombuffer(_EXP, dtype=np.uint8)
    log = np.frombuffer(_LOG, dtype=np.uint8).astype(np.intp)
    table = exp[log[:, None] + log[None, :]].copy()
    table[0, :] = 0
    table[:, 0] = 0
    table.setflags(write=False)
    return table


MUL_TABLE = _build_mul_table()


def mat_mul(a, b):
    """Product of two matrices given as lists of int rows."""
    inner = len(b)
    cols = len(b[0]) if b else 0
    out = []
    for row in a:
        out_row = []
        for j in range(cols):
            acc = 0
            for t in range(inner):
                acc ^= gf_mul(row[t], b[t][j])
            out_row.append(acc)
        out.append(out_row)
    return out


def mat_inv(matrix):
    """Invert a square matrix by Gauss-Jordan elimination.

    Raises ZeroDivisionError when the matrix is singular.
    """
    n = len(matrix)
    work = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if work[r][col]), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        work[col], work[pivot] = work[pivot], work[col]
        inv = gf_inv(work[col][col])
        work[col] = [gf_mul(v, inv) for v in work[col]]
        for r in range(n):
            factor = work[r][col]
            if r != col and factor:
                pivot_row = work[col]
                work[r] = [v ^ gf_mul(factor, p) for v, p in zip(work[r], pivot_row)]
    return [row[n:] for row in work]


def combine(coefficients, vectors, length):
    """XOR-sum of ``c * v`` over byte arrays, returned as a uint8 array."""
    out = np.zeros(length, dtype=np.uint8)
    for c, v in zip(coefficients, vectors):
        if c == 0:
            continue
        if c == 1:
            out ^= v
        else:
            out ^= MUL_TABLE[c].take(v)
    return out
