"""Flat evaluation tapes for expression DAGs.

A tape is the DAG in topological order with integer-coded instructions, so a
single expression compiled once can be evaluated at many points without
touching Python objects per node.  Three interpreters share the layout:

  * float64   -- the hot kernel; compiled (Cython) when available, with a
                 pure-Python fallback selected at import time
  * exact     -- rational arithmetic (gmpy2/Fraction objects)
  * mpf       -- arbitrary-precision floating (mpmath), used for radicals

Set PATHGEOM_PURE_PYTHON=1 to force the fallback (used by the benchmark).
"""

from __future__ import annotations

import math
import os

import numpy as np

from ..errors import DivisionByZero, DomainError
from .nodes import Add, Expr, Mul, Num, Pow, Var
from .rational import Rat, is_int, rat_pow_exact

OP_CONST, OP_VAR, OP_ADD, OP_MUL, OP_POW_INT, OP_POW_FRAC = range(6)

_compiled = None
if os.environ.get("PATHGEOM_PURE_PYTHON", "") != "1":
    try:
        from .. import _evalcore as _compiled
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def _toposort(root: Expr):
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in seen:
            continue
        if expanded:
            seen.add(id(node))
            order.append(node)
            continue
        stack.append((node, True))
        if isinstance(node, (Add, Mul)):
            stack.extend((a, False) for a in node.args)
        elif isinstance(node, Pow):
            stack.append((node.base, False))
    return order


class Tape:
    """Compiled form of one expression over an ordered variable chart.

    Tapes reuse an internal value buffer, so a single instance must not be
    evaluated from multiple threads; compiling is cheap, compile per thread.
    The expression-level APIs (evaluate, is_zero_probabilistic) build fresh
    tapes per call and stay safe to use concurrently.
    """

    __slots__ = ("var_names", "ops", "ia", "ib", "children",
                 "consts_exact", "consts_f64", "exps_exact", "exps_f64",
                 "exps_int", "_values")

    def __init__(self, root: Expr, var_names):
        self.var_names = tuple(var_names)
        slot = {name: k for k, name in enumerate(self.var_names)}
        missing = root.free_variables - set(slot)
        if missing:
            from ..errors import UnboundVariable
            raise UnboundVariable(f"no slot for variable(s) {sorted(missing)}")
        order = _toposort(root)
        index = {id(n): k for k, n in enumerate(order)}
        n = len(order)
        ops = np.zeros(n, dtype=np.int8)
        ia = np.zeros(n, dtype=np.int32)
        ib = np.zeros(n, dtype=np.int32)
        children: list = []
        consts: list = []
        exps: list = []
        for k, node in enumerate(order):
            if isinstance(node, Num):
                ops[k] = OP_CONST
                ia[k] = len(consts)
                consts.append(node.value)
            elif isinstance(node, Var):
                ops[k] = OP_VAR
                ia[k] = slot[node.name]
            elif isinstance(node, (Add, Mul)):
                ops[k] = OP_ADD if isinstance(node, Add) else OP_MUL
                ia[k] = len(children)
                ib[k] = len(node.args)
                children.extend(index[id(a)] for a in node.args)
            else:
                e = node.exponent
                ia[k] = index[id(node.base)]
                if is_int(e):
                    if abs(int(e)) >= 2 ** 31:
                        raise OverflowError("integer exponent too large to "
                                            "compile")
                    ops[k] = OP_POW_INT
                    ib[k] = int(e)
                else:
                    ops[k] = OP_POW_FRAC
                    ib[k] = len(exps)
                    exps.append(e)
        self.ops = ops
        self.ia = ia
        self.ib = ib
        self.children = np.asarray(children, dtype=np.int32)
        self.consts_exact = consts
        self.consts_f64 = np.asarray([float(c) for c in consts], dtype=np.float64)
        self.exps_exact = exps
        self.exps_f64 = np.asarray([float(e) for e in exps], dtype=np.float64)
        self.exps_int = np.zeros(0, dtype=np.int64)
        self._values = np.zeros(n, dtype=np.float64)

    def __len__(self):
        return len(self.ops)

    # -- float64 ---------------------------------------------------------

    def eval_f64(self, point) -> float:
        inputs = np.asarray(point, dtype=np.float64)
        if _compiled is not None:
            status = _compiled.eval_f64(self.ops, self.ia, self.ib, self.children,
                                        self.consts_f64, self.exps_f64,
                                        inputs, self._values)
            _raise_f64(status)
            return float(self._values[-1])
        return _eval_f64_py(self, inputs)

    def eval_f64_many(self, points) -> np.ndarray:
        """Evaluate at an (m, nvars) array of points; returns length-m array."""
        pts = np.ascontiguousarray(points, dtype=np.float64)
        out = np.zeros(len(pts), dtype=np.float64)
        if _compiled is not None:
            status = _compiled.eval_f64_many(self.ops, self.ia, self.ib, self.children,
                                             self.consts_f64, self.exps_f64,
                                             pts, out, self._values)
            _raise_f64(status)
            return out
        for r in range(len(pts)):
            out[r] = _eval_f64_py(self, pts[r])
        return out

    # -- exact rational ----------------------------------------------------

    def eval_exact(self, point):
        values = [None] * len(self.ops)
        children = self.children
        for k in range(len(self.ops)):
            op = self.ops[k]
            if op == OP_CONST:
                values[k] = self.consts_exact[self.ia[k]]
            elif op == OP_VAR:
                values[k] = point[self.ia[k]]
            elif op == OP_ADD:
                s = 0
                for j in range(self.ia[k], self.ia[k] + self.ib[k]):
                    s += values[children[j]]
                values[k] = s
            elif op == OP_MUL:
                s = 1
                for j in range(self.ia[k], self.ia[k] + self.ib[k]):
                    s *= values[children[j]]
                values[k] = s
            elif op == OP_POW_INT:
                base = values[self.ia[k]]
                e = int(self.ib[k])
                if base == 0 and e < 0:
                    raise DivisionByZero("denominator evaluated to zero")
                values[k] = base ** e
            else:
                got = rat_pow_exact(Rat(values[self.ia[k]]), self.exps_exact[self.ib[k]])
                if got is None:
                    raise DomainError("not a perfect rational power; "
                                      "use floating evaluation")
                values[k] = got
        return values[-1]

    # -- high-precision floating -------------------------------------------

    def eval_mpf(self, point, prec_bits=256):
        """Returns (value, scale): scale is the largest |intermediate|, used
        for relative-tolerance zero decisions."""
        import mpmath

        with mpmath.workprec(prec_bits):
            mpf = mpmath.mpf
            values = [None] * len(self.ops)
            scale = mpf(0)
            children = self.children
            for k in range(len(self.ops)):
                op = self.ops[k]
                if op == OP_CONST:
                    c = self.consts_exact[self.ia[k]]
                    v = mpf(int(c.numerator)) / int(c.denominator)
                elif op == OP_VAR:
                    p = point[self.ia[k]]
                    v = mpf(int(p.numerator)) / int(p.denominator) \
                        if hasattr(p, "numerator") else mpf(p)
                elif op == OP_ADD:
                    v = mpf(0)
                    for j in range(self.ia[k], self.ia[k] + self.ib[k]):
                        v += values[children[j]]
                elif op == OP_MUL:
                    v = mpf(1)
                    for j in range(self.ia[k], self.ia[k] + self.ib[k]):
                        v *= values[children[j]]
                elif op == OP_POW_INT:
                    base = values[self.ia[k]]
                    e = int(self.ib[k])
                    if base == 0 and e < 0:
                        raise DivisionByZero("denominator evaluated to zero")
                    v = base ** e
                else:
                    base = values[self.ia[k]]
                    e = self.exps_exact[self.ib[k]]
                    if base < 0:
                        raise DomainError("negative base under a fractional power")
                    if base == 0 and e < 0:
                        raise DivisionByZero("denominator evaluated to zero")
                    v = mpmath.power(base, mpf(int(e.numerator)) / int(e.denominator))
                values[k] = v
                av = abs(v)
                if av > scale:
                    scale = av
            return values[-1], scale


def _raise_f64(status: int):
    if status == 0:
        return
    if status == 1:
        raise DivisionByZero("denominator evaluated to zero")
    raise DomainError("negative base under a fractional power")


def _eval_f64_py(tape: Tape, inputs) -> float:
    """Pure-Python mirror of the compiled kernel."""
    values = tape._values
    ops, ia, ib, children = tape.ops, tape.ia, tape.ib, tape.children
    consts, fexps = tape.consts_f64, tape.exps_f64
    for k in range(len(ops)):
        op = ops[k]
        if op == OP_CONST:
            values[k] = consts[ia[k]]
        elif op == OP_VAR:
            values[k] = inputs[ia[k]]
        elif op == OP_ADD:
            s = 0.0
            for j in range(ia[k], ia[k] + ib[k]):
                s += values[children[j]]
            values[k] = s
        elif op == OP_MUL:
            s = 1.0
            for j in range(ia[k], ia[k] + ib[k]):
                s *= values[children[j]]
            values[k] = s
        elif op == OP_POW_INT:
            base = values[ia[k]]
            e = int(ib[k])
            if base == 0.0 and e < 0:
                raise DivisionByZero("denominator evaluated to zero")
            values[k] = base ** e
        else:
            base = values[ia[k]]
            if base < 0.0:
                raise DomainError("negative base under a fractional power")
            e = fexps[ib[k]]
            if base == 0.0 and e < 0:
                raise DivisionByZero("denominator evaluated to zero")
            values[k] = math.pow(base, e)
    return float(values[-1])


def compile_tape(e: Expr, var_names) -> Tape:
    return Tape(e, var_names)
