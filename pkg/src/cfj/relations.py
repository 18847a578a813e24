"""Subtyping relations over classes, layers, and layer sets.

All relations are decided by reachability over the extends chains rather
than by proof search; the chains are cached on the Program.
"""

from __future__ import annotations

from typing import Iterable

from .syntax import BASE, OBJECT, ClassType, LayerType, Program, Type


def class_sub(p: Program, c: str, d: str) -> bool:
    """c is d or reaches d by extends steps."""
    if c == d:
        return True
    return d in p.class_ancestors(c)


def weak_sub(p: Program, l1: str, l2: str) -> bool:
    """Reflexive-transitive extends closure; no condition on requires."""
    if l1 == l2:
        return True
    return l2 in p.layer_ancestors(l1)


def normal_sub(p: Program, l1: str, l2: str) -> bool:
    """Weak subtyping where every step keeps the requires set unchanged.

    A direct child of Base qualifies only with an empty requires set, so
    Base bounds exactly the dependency-free part of the hierarchy.
    """
    if l1 == l2:
        return True
    chain = p.layer_ancestors(l1)
    if l2 not in chain:
        return False
    for lower, upper in zip(chain, chain[1:]):
        if upper == BASE:
            if p.requires_of(lower):
                return False
        elif p.requires_of(lower) != p.requires_of(upper):
            return False
        if upper == l2:
            return True
    return True


def set_weak_sub(p: Program, lam1: Iterable, lam2: Iterable) -> bool:
    """Every member of lam2 has a weak sublayer in lam1."""
    lam1 = tuple(lam1)
    return all(any(weak_sub(p, l1, l0) for l1 in lam1) for l0 in lam2)


def set_sw_sub(p: Program, lam1: Iterable, lam2: Iterable) -> bool:
    """set_weak_sub, except a member of lam2 may instead be covered through
    a common swappable ancestor (the witness may arrive by swapping)."""
    lam1 = tuple(lam1)
    swappables = [l for l, d in p.layers.items() if d.swappable]

    def covered(l0: str) -> bool:
        for l1 in lam1:
            if weak_sub(p, l1, l0):
                return True
            for lsw in swappables:
                if weak_sub(p, l0, lsw) and weak_sub(p, l1, lsw):
                    return True
        return False

    return all(covered(l0) for l0 in lam2)


def type_sub(p: Program, t1: Type, t2: Type) -> bool:
    """Generic subtyping: class positions use class subtyping, layer
    positions use normal layer subtyping, and the worlds never mix."""
    if isinstance(t1, ClassType) and isinstance(t2, ClassType):
        return class_sub(p, t1.name, t2.name)
    if isinstance(t1, LayerType) and isinstance(t2, LayerType):
        return normal_sub(p, t1.name, t2.name)
    return False


def types_sub(p: Program, ts1: tuple, ts2: tuple) -> bool:
    return len(ts1) == len(ts2) and all(type_sub(p, a, b) for a, b in zip(ts1, ts2))
