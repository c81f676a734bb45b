# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled float64 tape evaluator (hot kernel).

Semantics match pathgeom.expr.tape._eval_f64_py exactly; status codes:
0 ok, 1 division by zero, 2 domain error (negative base, fractional power).
"""

from libc.math cimport pow as cpow


cdef inline int _run(const signed char[::1] ops, const int[::1] ia, const int[::1] ib,
                     const int[::1] children, const double[::1] consts,
                     const double[::1] fexps, const double[::1] inputs,
                     double[::1] values) nogil:
    cdef Py_ssize_t n = ops.shape[0]
    cdef Py_ssize_t k, j, start, stop
    cdef double acc, base
    cdef long long e
    cdef signed char op
    for k in range(n):
        op = ops[k]
        if op == 0:                      # CONST
            values[k] = consts[ia[k]]
        elif op == 1:                    # VAR
            values[k] = inputs[ia[k]]
        elif op == 2:                    # ADD
            acc = 0.0
            start = ia[k]
            stop = start + ib[k]
            for j in range(start, stop):
                acc += values[children[j]]
            values[k] = acc
        elif op == 3:                    # MUL
            acc = 1.0
            start = ia[k]
            stop = start + ib[k]
            for j in range(start, stop):
                acc *= values[children[j]]
            values[k] = acc
        elif op == 4:                    # POW, integer exponent
            base = values[ia[k]]
            e = ib[k]
            if base == 0.0 and e < 0:
                return 1
            # cpow keeps bit parity with the Python fallback (same libm)
            values[k] = cpow(base, <double>e)
        else:                            # POW, fractional exponent
            base = values[ia[k]]
            if base < 0.0:
                return 2
            if base == 0.0 and fexps[ib[k]] < 0.0:
                return 1
            values[k] = cpow(base, fexps[ib[k]])
    return 0


def eval_f64(const signed char[::1] ops, const int[::1] ia, const int[::1] ib,
             const int[::1] children, const double[::1] consts,
             const double[::1] fexps, const double[::1] inputs,
             double[::1] values):
    return _run(ops, ia, ib, children, consts, fexps, inputs, values)


def eval_f64_many(const signed char[::1] ops, const int[::1] ia, const int[::1] ib,
                  const int[::1] children, const double[::1] consts,
                  const double[::1] fexps, const double[:, ::1] points,
                  double[::1] out, double[::1] values):
    cdef Py_ssize_t r, m = points.shape[0]
    cdef Py_ssize_t last = ops.shape[0] - 1
    cdef int status = 0
    with nogil:
        for r in range(m):
            status = _run(ops, ia, ib, children, consts, fexps, points[r], values)
            if status != 0:
                break
            out[r] = values[last]
    return status
