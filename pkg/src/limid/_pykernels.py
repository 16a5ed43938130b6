"""Numpy implementations of the hot loops.

Same call signatures as the compiled ``_ckernels`` module. Arrays are flat
float64 buffers in row-major order; shapes and strides are int64 arrays whose
strides are counted in elements, not bytes.
"""
import numpy as np
from numpy.lib.stride_tricks import as_strided

MUL, ADD, SUB, DIV = 0, 1, 2, 3

_ITEM = np.dtype(np.float64).itemsize


def _view(vals, strides, shape):
    return as_strided(vals, shape=tuple(shape), strides=tuple(int(s) * _ITEM for s in strides), writeable=False)


def binop(op, a, a_strides, b, b_strides, shape):
    """Elementwise ``a op b`` over ``shape``; returns ``(flat_out, bad_cell)``.

    ``bad_cell`` is the first cell where a nonzero value is divided by zero,
    or -1. Zero divided by zero yields zero.
    """
    x = _view(a, a_strides, shape)
    y = _view(b, b_strides, shape)
    if op == MUL:
        out = x * y
    elif op == ADD:
        out = x + y
    elif op == SUB:
        out = x - y
    elif op == DIV:
        zero = y == 0.0
        bad = np.flatnonzero(zero & (x != 0.0))
        if bad.size:
            return np.zeros(int(np.prod(shape)), dtype=np.float64), int(bad[0])
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(zero, 0.0, x / np.where(zero, 1.0, y))
    else:
        raise ValueError(f"unknown op {op}")
    return np.ascontiguousarray(out, dtype=np.float64).reshape(-1), -1


def sum_out(vals, shape, axes):
    """Sum a row-major array of ``shape`` over ``axes``; remaining axes keep order."""
    arr = vals.reshape(tuple(shape))
    if len(axes) == 0:
        return vals.copy()
    return np.ascontiguousarray(arr.sum(axis=tuple(int(a) for a in axes)), dtype=np.float64).reshape(-1)


def argmax_rows(vals, n_rows, n_cols):
    """Index of the first maximum in each row of an ``n_rows x n_cols`` matrix."""
    return np.argmax(vals.reshape(n_rows, n_cols), axis=1).astype(np.int64)


def strategy_search(weights, slots, targets, radices, tol, chunk=1 << 14):
    """Exhaustive search over deterministic strategies.

    ``slots[d, x]`` is the strategy digit that fixes decision ``d`` at joint
    cell ``x`` and ``targets[d, x]`` the action that cell requires. Digits are
    enumerated lexicographically (digit 0 most significant). A later strategy
    replaces the incumbent only if it beats it by more than
    ``tol * max(1, |best|)``. Returns ``(digits, best_value, n_evaluated)``.
    """
    radices = np.asarray(radices, dtype=np.int64)
    n_digits = radices.size
    total = int(np.prod(radices)) if n_digits else 1
    place = np.ones(n_digits, dtype=np.int64)
    for j in range(n_digits - 2, -1, -1):
        place[j] = place[j + 1] * radices[j + 1]
    best, best_idx = -np.inf, 0
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = (idx[:, None] // place[None, :]) % radices[None, :]
        ok = np.ones((idx.size, weights.size), dtype=bool)
        for d in range(slots.shape[0]):
            ok &= digits[:, slots[d]] == targets[d][None, :]
        values = ok.astype(np.float64) @ weights
        pos = 0
        while True:
            thresh = best + tol * max(1.0, abs(best)) if np.isfinite(best) else -np.inf
            hits = np.flatnonzero(values[pos:] > thresh)
            if hits.size == 0:
                break
            j = pos + int(hits[0])
            best, best_idx = float(values[j]), int(idx[j])
            pos = j + 1
    digits = (best_idx // place) % radices if n_digits else np.zeros(0, dtype=np.int64)
    return digits.astype(np.int64), best, total
