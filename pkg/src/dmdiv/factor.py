"""Dense discrete factors.

A :class:`Factor` is a table over a sorted scope of variable ids.  Values are
held as an ``ndarray`` whose axes follow the scope (ascending id), so the flat
row-major layout is the one given by :attr:`Factor.strides`.

Global conventions: ``0 * log 0 = 0``, ``0 / 0 = 0``, ``0 ** 0 = 1``.
"""

from __future__ import annotations

import contextlib
import math
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    DivisionByZero,
    NegativeInput,
    NegativePowerOfZero,
    ScopeNotContained,
    TableTooLarge,
)

_cell_cap = 2**26


def get_cell_cap() -> int:
    return _cell_cap


def set_cell_cap(cap: int) -> None:
    global _cell_cap
    _cell_cap = int(cap)


@contextlib.contextmanager
def cell_cap(cap: int):
    old = get_cell_cap()
    set_cell_cap(cap)
    try:
        yield
    finally:
        set_cell_cap(old)


def _check_cells(cards: Iterable[int]) -> None:
    size = math.prod(int(c) for c in cards)
    if size > _cell_cap:
        raise TableTooLarge(f"table of {size} cells exceeds cap of {_cell_cap}")


class Factor:
    """Nonnegative real table over ``scope``.

    Parameters
    ----------
    scope : sequence of int
        Variable ids, strictly ascending.
    cards : sequence of int
        Cardinality of each scope variable.
    values : array_like
        Either flat (row-major, last variable fastest) or already shaped.
        Object arrays (e.g. of ``mpmath.mpf``) are kept as is, which lets
        the same algebra run in extended precision; they skip validation.
    log_domain : bool
        Marks tables of logarithms; only these may hold ``-inf``.
    """

    __slots__ = ("scope", "cards", "values", "log_domain")

    def __init__(self, scope, cards, values, log_domain: bool = False):
        scope = tuple(int(v) for v in scope)
        cards = tuple(int(c) for c in cards)
        if len(scope) != len(cards):
            raise ValueError("scope and cards differ in length")
        if any(b <= a for a, b in zip(scope, scope[1:])):
            raise ValueError(f"scope must be strictly ascending, got {scope}")
        arr = np.asarray(values)
        if arr.dtype != object:
            arr = arr.astype(np.float64, copy=False)
        if arr.size != math.prod(cards):
            raise ValueError(f"{arr.size} values for table of shape {cards}")
        arr = arr.reshape(cards)
        if arr.dtype != object and not np.isfinite(arr).all():
            if np.isnan(arr).any() or np.isposinf(arr).any():
                raise ValueError("factor values must not be NaN or +inf")
            if not log_domain and np.isneginf(arr).any():
                raise ValueError("-inf only allowed in log-domain factors")
        self.scope = scope
        self.cards = cards
        self.values = arr
        self.log_domain = bool(log_domain)

    @classmethod
    def ones(cls, scope, cards) -> "Factor":
        _check_cells(cards)
        return cls(scope, cards, np.ones(tuple(cards)))

    @classmethod
    def scalar(cls, value: float) -> "Factor":
        return cls((), (), np.asarray(float(value)))

    @classmethod
    def from_ordered(cls, variables, cards, values) -> "Factor":
        """Build from a table laid out in an arbitrary variable order."""
        variables = [int(v) for v in variables]
        arr = np.asarray(values, dtype=np.float64).reshape([int(c) for c in cards])
        perm = sorted(range(len(variables)), key=variables.__getitem__)
        return cls([variables[i] for i in perm], [cards[i] for i in perm], arr.transpose(perm))

    @property
    def size(self) -> int:
        return int(self.values.size)

    @property
    def strides(self) -> tuple[int, ...]:
        out, acc = [], 1
        for c in reversed(self.cards):
            out.append(acc)
            acc *= c
        return tuple(reversed(out))

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def card_map(self) -> dict[int, int]:
        return dict(zip(self.scope, self.cards))

    def total(self):
        s = self.values.sum()
        return s if self.values.dtype == object else float(s)

    def lookup(self, assignment: Mapping[int, int]) -> float:
        idx = sum(assignment[v] * s for v, s in zip(self.scope, self.strides))
        return float(self.flat[idx])

    def expand(self, scope, cards) -> np.ndarray:
        """View of the values broadcastable against a superset ``scope``."""
        pos = {v: i for i, v in enumerate(scope)}
        shape = [1] * len(scope)
        for v, c in zip(self.scope, self.cards):
            if v not in pos:
                raise ScopeNotContained(f"variable {v} not in target scope")
            shape[pos[v]] = c
        return self.values.reshape(shape)

    def __repr__(self) -> str:
        tag = ", log" if self.log_domain else ""
        return f"Factor(scope={self.scope}, cards={self.cards}{tag})"


def _union(a: Factor, b: Factor) -> tuple[tuple[int, ...], tuple[int, ...]]:
    cm = a.card_map()
    for v, c in zip(b.scope, b.cards):
        if cm.setdefault(v, c) != c:
            raise ValueError(f"variable {v} has cardinality {cm[v]} and {c}")
    scope = tuple(sorted(cm))
    return scope, tuple(cm[v] for v in scope)


def multiply(a: Factor, b: Factor) -> Factor:
    scope, cards = _union(a, b)
    _check_cells(cards)
    return Factor(scope, cards, a.expand(scope, cards) * b.expand(scope, cards))


def marginalize(a: Factor, keep: Iterable[int]) -> Factor:
    """Sum out every variable of ``a`` not in ``keep``."""
    keep = set(keep)
    if not keep <= set(a.scope):
        raise ScopeNotContained(f"{sorted(keep - set(a.scope))} not in scope {a.scope}")
    axes = tuple(i for i, v in enumerate(a.scope) if v not in keep)
    if not axes:
        return a
    scope = [v for v in a.scope if v in keep]
    cards = [c for v, c in zip(a.scope, a.cards) if v in keep]
    return Factor(scope, cards, a.values.sum(axis=axes))


def divide(a: Factor, b: Factor) -> Factor:
    """Elementwise ``a / b`` with ``0 / 0 = 0``; ``b.scope`` must lie in ``a.scope``."""
    if not set(b.scope) <= set(a.scope):
        raise ScopeNotContained(f"divisor scope {b.scope} not in {a.scope}")
    den = np.broadcast_to(b.expand(a.scope, a.cards), a.values.shape)
    num = a.values
    zero = den == 0
    if np.any(zero & (num != 0)):
        raise DivisionByZero("nonzero value divided by zero")
    out = np.divide(num, den, out=np.zeros_like(num), where=~zero)
    return Factor(a.scope, a.cards, out)


def elementwise_power(a: Factor, e: float) -> Factor:
    """``value ** e`` per cell with ``0 ** 0 = 1``."""
    e = float(e)
    if e == 0.0:
        return Factor(a.scope, a.cards, np.ones_like(a.values))
    if e == 1.0:
        return a
    if e < 0 and np.any(a.values == 0):
        raise NegativePowerOfZero(f"zero cell raised to negative power {e}")
    if np.any(a.values < 0):
        raise NegativeInput("power of a negative table")
    return Factor(a.scope, a.cards, np.power(a.values, e))


def elementwise_log(a: Factor) -> Factor:
    """Natural log per cell; zeros map to ``-inf`` in a log-domain factor."""
    if np.any(a.values < 0):
        raise NegativeInput("log of a negative value")
    with np.errstate(divide="ignore"):
        out = np.log(a.values)
    return Factor(a.scope, a.cards, out, log_domain=True)


def product(factors: Iterable[Factor]) -> Factor:
    out = Factor.scalar(1.0)
    for f in factors:
        out = multiply(out, f)
    return out


def weighted_sum(weights: Factor, scope, values) -> float:
    """``sum(weights * values)`` with ``0 * (+-inf) = 0``.

    ``values`` is an array over ``scope`` (a subset of ``weights.scope``, in
    ascending order) and is broadcast over the remaining axes.  Returns
    ``+-inf`` (or NaN for mixed signs) when an infinite value meets a
    positive weight.
    """
    w = weights.values
    values = np.asarray(values, dtype=np.float64)
    pos = {v: i for i, v in enumerate(weights.scope)}
    shape = [1] * len(weights.scope)
    for v, c in zip(scope, values.shape):
        if v not in pos:
            raise ScopeNotContained(f"variable {v} not in weight scope {weights.scope}")
        shape[pos[v]] = c
    v = np.broadcast_to(values.reshape(shape), w.shape)
    finite = np.isfinite(v)
    if finite.all():
        return float(np.sum(w * v))
    bad = (w != 0) & ~finite
    if bad.any():
        signs = set(np.sign(v[bad]).tolist())
        return signs.pop() * math.inf if len(signs) == 1 else math.nan
    return float(np.sum(w * np.where(finite, v, 0.0)))
