"""Differentiation and substitution on expression DAGs.

Derivatives are cached per node per variable, so repeated differentiation of
shared subterms (ubiquitous in the invariant formulas) costs DAG size, not
tree size.
"""

from __future__ import annotations

from .nodes import Add, Expr, Mul, Pow, Var, ZERO, ONE, add, mul, num, pow_, var


def differentiate(e: Expr, v) -> Expr:
    """Partial derivative of e with respect to the named variable.

    Variables other than v are independent; the derivative of anything
    without v among its free variables is 0.
    """
    name = v.name if isinstance(v, Var) else v
    if not isinstance(name, str) or not name:
        raise ValueError(f"bad variable name {name!r}")
    return _diff(e, name)


def _diff(e: Expr, name: str) -> Expr:
    if name not in e._free:
        return ZERO
    cache = e._dcache
    if cache is not None:
        hit = cache.get(name)
        if hit is not None:
            return hit
    if isinstance(e, Var):
        out = ONE
    elif isinstance(e, Add):
        out = add(*[_diff(a, name) for a in e.args])
    elif isinstance(e, Mul):
        terms = []
        for i, a in enumerate(e.args):
            if name not in a._free:
                continue
            rest = e.args[:i] + e.args[i + 1:]
            terms.append(mul(_diff(a, name), *rest))
        out = add(*terms)
    elif isinstance(e, Pow):
        out = mul(num(e.exponent), pow_(e.base, e.exponent - 1), _diff(e.base, name))
    else:
        raise TypeError(f"cannot differentiate {e!r}")
    if e._dcache is None:
        e._dcache = {}
    e._dcache[name] = out
    return out


def substitute(e: Expr, bindings) -> Expr:
    """Simultaneous substitution; unbound variables pass through.

    Keys are variable names (or Var nodes); values are expressions or exact
    rationals.  Rebuilding goes through the constructors, so the usual shallow
    simplification applies to the result.
    """
    table = {}
    for k, val in bindings.items():
        k = k.name if isinstance(k, Var) else k
        table[k] = val if isinstance(val, Expr) else num(val)
    if not table:
        return e
    names = frozenset(table)
    memo: dict = {}

    def walk(node: Expr) -> Expr:
        if not (node._free & names):
            return node
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        if isinstance(node, Var):
            out = table.get(node.name, node)
        elif isinstance(node, Add):
            out = add(*[walk(a) for a in node.args])
        elif isinstance(node, Mul):
            out = mul(*[walk(a) for a in node.args])
        elif isinstance(node, Pow):
            out = pow_(walk(node.base), node.exponent)
        else:
            raise TypeError(f"cannot substitute into {node!r}")
        memo[id(node)] = out
        return out

    return walk(e)


def rename_variables(e: Expr, mapping) -> Expr:
    """Substitution restricted to variable renaming."""
    return substitute(e, {old: var(new) for old, new in mapping.items()})
