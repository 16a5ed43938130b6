# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the loops in ``_pykernels``; identical signatures."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

DEF MAXDIM = 64


def binop(int op, const double[::1] a, const cnp.int64_t[::1] a_strides,
          const double[::1] b, const cnp.int64_t[::1] b_strides,
          const cnp.int64_t[::1] shape):
    cdef Py_ssize_t nd = shape.shape[0]
    cdef Py_ssize_t n = 1, i, k
    cdef long long idx[MAXDIM]
    cdef long long ia = 0, ib = 0
    cdef double x, y
    cdef long long bad = -1
    if nd > MAXDIM:
        raise ValueError("too many dimensions")
    for k in range(nd):
        n *= shape[k]
        idx[k] = 0
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        x = a[ia]
        y = b[ib]
        if op == 0:
            out[i] = x * y
        elif op == 1:
            out[i] = x + y
        elif op == 2:
            out[i] = x - y
        else:
            if y == 0.0:
                if x != 0.0:
                    bad = i
                    break
                out[i] = 0.0
            else:
                out[i] = x / y
        # odometer, last axis fastest
        k = nd - 1
        while k >= 0:
            idx[k] += 1
            ia += a_strides[k]
            ib += b_strides[k]
            if idx[k] < shape[k]:
                break
            ia -= a_strides[k] * shape[k]
            ib -= b_strides[k] * shape[k]
            idx[k] = 0
            k -= 1
    if bad >= 0:
        return np.zeros(n, dtype=np.float64), bad
    return out_arr, -1


def sum_out(const double[::1] vals, const cnp.int64_t[::1] shape, axes):
    cdef Py_ssize_t nd = shape.shape[0]
    cdef Py_ssize_t n = 1, m = 1, i, k
    cdef long long idx[MAXDIM]
    cdef long long ostr[MAXDIM]
    cdef long long io = 0
    cdef long long step = 1
    if nd > MAXDIM:
        raise ValueError("too many dimensions")
    summed = set(int(a) for a in axes)
    for k in range(nd - 1, -1, -1):
        idx[k] = 0
        n *= shape[k]
        if k in summed:
            ostr[k] = 0
        else:
            ostr[k] = step
            step *= shape[k]
    m = step
    out_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        out[io] += vals[i]
        k = nd - 1
        while k >= 0:
            idx[k] += 1
            io += ostr[k]
            if idx[k] < shape[k]:
                break
            io -= ostr[k] * shape[k]
            idx[k] = 0
            k -= 1
    return out_arr


def argmax_rows(const double[::1] vals, Py_ssize_t n_rows, Py_ssize_t n_cols):
    out_arr = np.zeros(n_rows, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef Py_ssize_t r, c, best
    cdef double bv
    for r in range(n_rows):
        best = 0
        bv = vals[r * n_cols]
        for c in range(1, n_cols):
            if vals[r * n_cols + c] > bv:
                bv = vals[r * n_cols + c]
                best = c
        out[r] = best
    return out_arr


def strategy_search(const double[::1] weights, slots_in, targets_in, radices_in, double tol):
    cdef cnp.int64_t[:, ::1] slots = np.ascontiguousarray(slots_in, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] targets = np.ascontiguousarray(targets_in, dtype=np.int64)
    cdef cnp.int64_t[::1] radices = np.ascontiguousarray(radices_in, dtype=np.int64)
    cdef Py_ssize_t n_dec = slots.shape[0]
    cdef Py_ssize_t n_cells = weights.shape[0]
    cdef Py_ssize_t n_digits = radices.shape[0]
    digits_arr = np.zeros(n_digits, dtype=np.int64)
    best_arr = np.zeros(n_digits, dtype=np.int64)
    cdef cnp.int64_t[::1] digits = digits_arr
    cdef cnp.int64_t[::1] best_digits = best_arr
    cdef double best = 0.0, value, thresh
    cdef bint have = False, ok
    cdef long long count = 0
    cdef Py_ssize_t x, d, k
    while True:
        value = 0.0
        for x in range(n_cells):
            ok = True
            for d in range(n_dec):
                if digits[slots[d, x]] != targets[d, x]:
                    ok = False
                    break
            if ok:
                value += weights[x]
        count += 1
        if not have:
            have = True
            best = value
            best_digits[:] = digits
        else:
            thresh = best + tol * (fabs(best) if fabs(best) > 1.0 else 1.0)
            if value > thresh:
                best = value
                best_digits[:] = digits
        k = n_digits - 1
        while k >= 0:
            digits[k] += 1
            if digits[k] < radices[k]:
                break
            digits[k] = 0
            k -= 1
        if k < 0:
            break
    return best_arr, best, count
