"""Jet-coordinate models of scalar ODEs, ODE pairs, and CR graphs, with the
total derivative operator along solutions."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ChartMismatch
from .expr import Expr, add, differentiate, mul, var

SCALAR_CHART = ("t", "z", "p")
PAIR_CHART = ("t", "u1", "u2", "q1", "q2")
CR_CHART = ("x", "y", "p")


def _check_chart(chart, rhs_list, what):
    if len(set(chart)) != len(chart):
        raise ChartMismatch(f"{what}: chart names must be pairwise distinct: {chart}")
    allowed = set(chart)
    for rhs in rhs_list:
        extra = rhs.free_variables - allowed
        if extra:
            raise ChartMismatch(f"{what}: free variables {sorted(extra)} "
                                f"outside chart {chart}")


@dataclass(frozen=True)
class ScalarODE:
    """z'' = F(t, z, p) with p the first-derivative coordinate."""

    rhs: Expr
    chart: tuple = SCALAR_CHART

    def __post_init__(self):
        if len(self.chart) != 3:
            raise ChartMismatch("scalar chart needs 3 names (t, z, p)")
        _check_chart(self.chart, (self.rhs,), "ScalarODE")

    @property
    def t(self):
        return var(self.chart[0])

    @property
    def z(self):
        return var(self.chart[1])

    @property
    def p(self):
        return var(self.chart[2])


@dataclass(frozen=True)
class PairODE:
    """(u1)'' = F1, (u2)'' = F2 over chart (t, u1, u2, q1, q2)."""

    rhs1: Expr
    rhs2: Expr
    chart: tuple = PAIR_CHART

    def __post_init__(self):
        if len(self.chart) != 5:
            raise ChartMismatch("pair chart needs 5 names (t, u1, u2, q1, q2)")
        _check_chart(self.chart, (self.rhs1, self.rhs2), "PairODE")

    @property
    def rhs(self):
        return (self.rhs1, self.rhs2)


@dataclass(frozen=True)
class CRGraph:
    """Hypersurface q = F(x, y, p) presenting a CR 3-manifold as a graph."""

    rhs: Expr
    chart: tuple = CR_CHART

    def __post_init__(self):
        if len(self.chart) != 3:
            raise ChartMismatch("CR chart needs 3 names (x, y, p)")
        _check_chart(self.chart, (self.rhs,), "CRGraph")


def total_derivative(e: Expr, sys: PairODE) -> Expr:
    """d/dt along solutions of the pair:
    dt e + q1*du1 e + q2*du2 e + F1*dq1 e + F2*dq2 e."""
    t, u1, u2, q1, q2 = sys.chart
    extra = e.free_variables - set(sys.chart)
    if extra:
        raise ChartMismatch(f"expression uses {sorted(extra)} outside chart {sys.chart}")
    return add(differentiate(e, t),
               mul(var(q1), differentiate(e, u1)),
               mul(var(q2), differentiate(e, u2)),
               mul(sys.rhs1, differentiate(e, q1)),
               mul(sys.rhs2, differentiate(e, q2)))


def total_derivative_scalar(e: Expr, sys: ScalarODE) -> Expr:
    """d/dt along solutions of the scalar equation."""
    t, z, p = sys.chart
    extra = e.free_variables - set(sys.chart)
    if extra:
        raise ChartMismatch(f"expression uses {sorted(extra)} outside chart {sys.chart}")
    return add(differentiate(e, t),
               mul(var(p), differentiate(e, z)),
               mul(sys.rhs, differentiate(e, p)))


def prolong(sys: PairODE, e: Expr, order: int) -> Expr:
    """Iterated total derivative."""
    if order < 1:
        raise ValueError("order must be >= 1")
    out = e
    for _ in range(order):
        out = total_derivative(out, sys)
    return out
