"""The alpha-beta divergence family assembled from f1, f2 and f3.

Case selection compares ``alpha``, ``beta`` and ``alpha + beta`` against zero
exactly.  Inputs such as ``(1e-12, 0.5)`` therefore take the generic branch,
whose ``1 / (alpha beta)`` prefactor amplifies rounding near the case
boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from .functional import ComputationGraph, build_computation_graph, f1_direct, f2, f3_with_magnitude
from .model import DecomposableModel
from .precise import f2_mp, f3_mp

GRID_VALUES = (-1.0, -0.5, 0.0, 0.5, 1.0, 2.0)
DEFAULT_GRID = tuple((a, b) for a in GRID_VALUES for b in GRID_VALUES)


@dataclass(frozen=True)
class AlphaBeta:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("alpha and beta must be finite")


def divergence_case(alpha: float, beta: float) -> str:
    if alpha == 0 and beta == 0:
        return "log-squared"
    if alpha == 0:
        return "alpha-zero"
    if beta == 0:
        return "beta-zero"
    if alpha + beta == 0:
        return "opposite"
    return "generic"


# Relative error assumed for each double-precision functional, and the
# accuracy a combination must reach before it is trusted.
TERM_RTOL = 1e-13
TARGET_RTOL = 1e-10
TARGET_ATOL = 1e-12


def _combination(a: float, b: float, domain_size: float, num=float):
    """``(scale, [(coeff, kind, args)])`` with ``D = scale * sum coeff * term``.

    ``num`` sets the arithmetic of the scale and coefficients; the
    exponents in ``args`` stay plain floats.
    """
    case = divergence_case(a, b)
    A, B, one = num(a), num(b), num(1)
    if case == "generic":
        s = a + b
        S = num(s)
        return -one / (A * B), [(one, "f2", (a, b)), (-A / S, "f2", (s, 0.0)),
                                (-B / S, "f2", (0.0, s))]
    if case == "beta-zero":
        return one / (A * A), [(one, "f3", (a, 0.0, a, -a)), (-one, "f2", (a, 0.0)),
                               (one, "f2", (0.0, a))]
    if case == "alpha-zero":
        return one / (B * B), [(one, "f3", (0.0, b, -b, b)), (-one, "f2", (0.0, b)),
                               (one, "f2", (b, 0.0))]
    # alpha = -beta: sum log(Q^a / P^a) + sum P^a Q^-a - |X|
    return one / (A * A), [(one, "f3", (0.0, 0.0, -a, a)), (one, "f2", (a, -a)),
                           (-one, "const", (domain_size,))]


def _double_term(kind, args, p, q, cg) -> tuple[float, float]:
    if kind == "f2":
        v = f2(p, q, *args, cg)
        return v, abs(v)
    if kind == "f3":
        return f3_with_magnitude(p, q, *args, cg)
    return args[0], abs(args[0])


def _precise_term(kind, args, p, q, cg):
    if kind == "f2":
        return f2_mp(p, q, *args, cg)
    if kind == "f3":
        return f3_mp(p, q, *args, cg)
    return mpmath.mpf(args[0])


def alpha_beta_divergence(p: DecomposableModel, q: DecomposableModel, alpha: float, beta: float,
                          cg: ComputationGraph | None = None) -> float:
    """``D_AB^(alpha, beta)(P || Q)`` computed exactly over the junction forest.

    Each case is a short linear combination of f2/f3 values.  When the
    terms are much larger than their combination (negative exponents on
    small cells, or ``P`` close to ``Q``), double precision cannot resolve
    the difference; the combination is then recomputed on the same forest
    in extended precision with enough digits to cover the cancellation.

    Raises an :class:`~dmdiv.errors.UndefinedDivergence` subclass when zero
    probabilities make the divergence infinite or undefined.
    """
    ab = AlphaBeta(float(alpha), float(beta))
    a, b = ab.alpha, ab.beta
    if divergence_case(a, b) == "log-squared":
        return f1_direct(p, q)
    cg = cg or build_computation_graph(p, q)
    scale, parts = _combination(a, b, p.domain_size())
    values, mags = zip(*(_double_term(kind, args, p, q, cg) for _, kind, args in parts))
    value = scale * math.fsum(c * v for (c, _, _), v in zip(parts, values))
    spread = abs(scale) * math.fsum(abs(c) * m for (c, _, _), m in zip(parts, mags))
    if TERM_RTOL * spread <= TARGET_ATOL + TARGET_RTOL * abs(value):
        return value
    digits = 30 + max(0, math.ceil(math.log10(spread)))
    with mpmath.workdps(digits):
        scale, parts = _combination(a, b, p.domain_size(), mpmath.mpf)
        total = mpmath.fsum(c * _precise_term(kind, args, p, q, cg) for c, kind, args in parts)
        return float(scale * total)


NAMED = {"kl": (1.0, 0.0), "reverse_kl": (0.0, 1.0), "squared_log": (0.0, 0.0)}


def named_divergence(p: DecomposableModel, q: DecomposableModel, name: str) -> float:
    try:
        a, b = NAMED[name]
    except KeyError:
        raise ValueError(f"unknown divergence {name!r}; choose from {sorted(NAMED)}") from None
    return alpha_beta_divergence(p, q, a, b)
