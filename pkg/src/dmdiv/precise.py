"""Extended-precision evaluation of f2 and f3.

The divergence cases combine two or three functionals whose values can be
many orders of magnitude larger than their combination (``sum P^-1 Q^-1``
on a model with tiny cells easily reaches 1e20 while ``D(P || P) = 0``).
These routines repeat the junction-forest computation on tables of
``mpmath.mpf`` so the combination can be formed without cancellation.
The model tables themselves are taken as exact binary values.
"""

from __future__ import annotations

import mpmath
import numpy as np

from .errors import LogOfZeroOnSupport
from .factor import Factor, elementwise_power
from .functional import ComputationGraph
from .junction import Calibration, calibrate
from .model import DecomposableModel

_to_mpf = np.frompyfunc(mpmath.mpf, 1, 1)
_log = np.frompyfunc(lambda x: mpmath.log(x) if x != 0 else mpmath.mpf(0), 1, 1)


def _mp(f: Factor) -> Factor:
    return Factor(f.scope, f.cards, _to_mpf(f.values).astype(object))


def _calibrate(cg: ComputationGraph, p: DecomposableModel, q: DecomposableModel,
               a: float, b: float) -> Calibration:
    psi = [(elementwise_power(_mp(f), a), cg.alpha_p[i]) for i, f in enumerate(p.jt_factors)]
    psi += [(elementwise_power(_mp(f), b), cg.alpha_q[i]) for i, f in enumerate(q.jt_factors)]
    return calibrate(cg.forest, psi, p.vars.cards)


def f2_mp(p, q, a: float, b: float, cg: ComputationGraph):
    """``sum_x P^a Q^b`` as an ``mpf`` at the current ``mpmath.mp.dps``."""
    cal = _calibrate(cg, p, q, a, b)
    out = mpmath.mpf(1)
    for r in cal.tree_totals:
        out *= r
    return out


def f3_mp(p, q, a: float, b: float, c: float, d: float, cg: ComputationGraph):
    """``sum_x P^a Q^b log(P^c Q^d)`` as an ``mpf``."""
    cal = _calibrate(cg, p, q, a, b)
    total = mpmath.mpf(0)
    for model, e, alpha, tau in ((p, c, cg.alpha_p, cg.tau_p), (q, d, cg.alpha_q, cg.tau_q)):
        if e == 0:
            continue
        for i, f in enumerate(model.jt_factors):
            w = cal.beliefs[alpha[i]]
            zero = np.broadcast_to(f.expand(w.scope, w.cards) == 0, w.values.shape)
            if np.any(zero & (w.values != 0)):
                raise LogOfZeroOnSupport(f"log of a zero table entry on the support (clique {f.scope})")
            logs = Factor(f.scope, f.cards, _log(f.values).astype(object))
            inner = (w.values * logs.expand(w.scope, w.cards)).sum()
            outside = mpmath.mpf(1)
            for t, r in enumerate(cal.tree_totals):
                if t != tau[i]:
                    outside *= r
            total += outside * e * inner
    return total
