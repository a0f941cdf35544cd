"""Reference computations: brute-force enumeration and Monte Carlo.

Brute force evaluates every quantity from its defining sum over the joint
domain, using only :func:`~dmdiv.model.joint_probabilities` (no factor
algebra, no junction trees).  It is the ground truth for tests and the
``--cross-check`` flag.

Random numbers come from numpy's PCG64 bit generator.  A run seeded with
``seed`` derives one child ``SeedSequence`` per stream (model samples,
uniform samples, bootstrap) and one grandchild per chunk of
:data:`CHUNK` samples, so a given ``(seed, n)`` always yields the same draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainTooLarge,
    LogOfZeroOnSupport,
    NegativePowerOfZero,
    UndefinedDivergence,
    VariableMismatch,
    ZeroProbabilitySample,
)
from .functional import Constant, FunctionalSpec, f3_spec
from .model import DecomposableModel, joint_probabilities

DEFAULT_DOMAIN_CAP = 2**22
CHUNK = 1 << 16


# -- brute force --------------------------------------------------------------

def enumerate_domain(cards, cap: int = DEFAULT_DOMAIN_CAP, chunk: int = CHUNK):
    """Yield blocks of full assignments in row-major order (last variable fastest)."""
    size = math.prod(int(c) for c in cards)
    if size > cap:
        raise DomainTooLarge(f"joint domain of {size:.3g} states exceeds cap of {cap}")
    for start in range(0, size, chunk):
        flat = np.arange(start, min(start + chunk, size))
        yield np.stack(np.unravel_index(flat, cards), axis=1) if cards else np.zeros((1, 0), np.int64)


def joint_vector(m: DecomposableModel, cap: int = DEFAULT_DOMAIN_CAP) -> np.ndarray:
    """``P(x)`` for every ``x`` of the domain, row-major."""
    return np.concatenate([joint_probabilities(m, rows) for rows in enumerate_domain(m.vars.cards, cap)])


def _pow(x: np.ndarray, e: float) -> np.ndarray:
    if e == 0:
        return np.ones_like(x)
    if e < 0 and np.any(x == 0):
        raise NegativePowerOfZero(f"zero probability raised to {e}")
    return np.power(x, e)


def _joints(p, q, cap):
    if p.vars != q.vars:
        raise VariableMismatch("models are over different variable tables")
    return joint_vector(p, cap), joint_vector(q, cap)


def brute_force_functional(p: DecomposableModel, q: DecomposableModel, spec: FunctionalSpec,
                           cap: int = DEFAULT_DOMAIN_CAP) -> float:
    """``sum_x g[P](x) h[Q](x) L(g*[P](x) h*[Q](x))`` by enumeration.

    Constant inner transforms act per clique, so for a model with ``k``
    cliques ``g*[P](x) = base ** (k * exponent)``.
    """
    P, Q = _joints(p, q, cap)
    weight = _pow(P, spec.g_exp) * _pow(Q, spec.h_exp)

    def star(s, model, joint):
        if isinstance(s, Constant):
            return np.full_like(joint, s.base ** (len(model.cliques) * s.exponent))
        with np.errstate(divide="ignore"):
            return np.power(joint, s.c) if s.c != 0 else np.ones_like(joint)

    with np.errstate(invalid="ignore", over="ignore"):
        arg = star(spec.g_star, p, P) * star(spec.h_star, q, Q)
    live = weight != 0
    if np.any(live & ~(np.isfinite(arg) & (arg > 0))):
        raise LogOfZeroOnSupport("log argument is zero or infinite where the weight is positive")
    logs = np.log(arg[live])
    if spec.log_base is not None:
        logs = logs / math.log(spec.log_base)
    return math.fsum(weight[live] * logs)


def brute_force_f2(p, q, a, b, cap=DEFAULT_DOMAIN_CAP) -> float:
    P, Q = _joints(p, q, cap)
    return math.fsum(_pow(P, a) * _pow(Q, b))


def brute_force_f3(p, q, a, b, c, d, cap=DEFAULT_DOMAIN_CAP) -> float:
    return brute_force_functional(p, q, f3_spec(a, b, c, d), cap)


def _xlogy_ratio(w, num, den):
    """``w * log(num / den)`` with ``0 * anything = 0``; infinite otherwise."""
    out = np.zeros_like(w)
    live = w != 0
    if np.any(live & ((num == 0) | (den == 0))):
        raise UndefinedDivergence("log ratio of a zero probability on the support")
    out[live] = w[live] * (np.log(num[live]) - np.log(den[live]))
    return out


def _stable_cells(P, Q, a, b):
    """Per-cell divergence summands for strictly positive ``P`` and ``Q``.

    Written in ``r = log Q - log P`` so each summand vanishes exactly when
    ``P == Q`` instead of cancelling large powers.
    """
    lp = np.log(P)
    r = np.log(Q) - lp
    if b == 0:
        u = -a * r
        return np.exp(a * lp) * (u + np.expm1(-u)) / (a * a)
    if a == 0:
        v = b * r
        return np.exp(b * np.log(Q)) * (v + np.expm1(-v)) / (b * b)
    s = a + b
    if s == 0:
        w = a * r
        return (w + np.expm1(-w)) / (a * a)
    return -np.exp(s * lp) * (np.expm1(b * r) - b / s * np.expm1(s * r)) / (a * b)


def _literal_cells(P, Q, a, b):
    """Per-cell summands straight from the case definitions."""
    if b == 0:
        Pa, Qa = _pow(P, a), _pow(Q, a)
        return (_xlogy_ratio(Pa, Pa, Qa) - Pa + Qa) / (a * a)
    if a == 0:
        Pb, Qb = _pow(P, b), _pow(Q, b)
        return (_xlogy_ratio(Qb, Qb, Pb) - Qb + Pb) / (b * b)
    s = a + b
    if s == 0:
        Pa, Qa = _pow(P, a), _pow(Q, a)
        return (_xlogy_ratio(np.ones_like(P), Qa, Pa) + Pa / Qa - 1.0) / (a * a)
    return -(_pow(P, a) * _pow(Q, b) - a / s * _pow(P, s) - b / s * _pow(Q, s)) / (a * b)


def brute_force_divergence(p: DecomposableModel, q: DecomposableModel, alpha: float, beta: float,
                           cap: int = DEFAULT_DOMAIN_CAP) -> float:
    """``D_AB`` from its case-wise definition applied to the two joint vectors.

    Cells where both joints are positive use an algebraically equal form
    free of cancellation; the remaining cells follow the definition
    literally, including its conventions for zeros.
    """
    P, Q = _joints(p, q, cap)
    a, b = float(alpha), float(beta)
    if a == 0 and b == 0:
        if np.any(P == 0) or np.any(Q == 0):
            raise UndefinedDivergence("log of zero probability")
        return 0.5 * math.fsum((np.log(P) - np.log(Q)) ** 2)
    pos = (P > 0) & (Q > 0)
    cells = [_stable_cells(P[pos], Q[pos], a, b)]
    if not pos.all():
        cells.append(_literal_cells(P[~pos], Q[~pos], a, b))
    return math.fsum(np.concatenate(cells))


def brute_force_f1(p, q, cap=DEFAULT_DOMAIN_CAP) -> float:
    return brute_force_divergence(p, q, 0.0, 0.0, cap)


# -- sampling -----------------------------------------------------------------

@dataclass(frozen=True)
class SampleBatch:
    rows: np.ndarray
    seed: int
    count: int


class _ForwardSampler:
    """Per-clique conditional tables for ancestral sampling of a DM."""

    def __init__(self, m: DecomposableModel):
        self.n = len(m.vars)
        self.steps = []
        for t in m.forest.trees:
            for c in t.order:
                table = m.clique_marginals[c]
                sep = m.forest.separator(c, t.parent[c]) if c in t.parent else ()
                rest = [v for v in table.scope if v not in sep]
                perm = [table.scope.index(v) for v in (*sep, *rest)]
                cards_s = [table.cards[table.scope.index(v)] for v in sep]
                cards_r = [table.cards[table.scope.index(v)] for v in rest]
                cond = table.values.transpose(perm).reshape(math.prod(cards_s), math.prod(cards_r))
                cdf = np.cumsum(cond, axis=1)
                self.steps.append((list(sep), cards_s, rest, cards_r, cdf))

    def draw(self, rng: np.random.Generator, k: int) -> np.ndarray:
        rows = np.zeros((k, self.n), dtype=np.int64)
        for sep, cards_s, rest, cards_r, cdf in self.steps:
            if sep:
                sidx = np.ravel_multi_index(tuple(rows[:, sep].T), cards_s)
            else:
                sidx = np.zeros(k, dtype=np.int64)
            rowcdf = cdf[sidx]
            u = rng.random(k) * rowcdf[:, -1]
            # "<=" skips zero-probability cells, whose cdf equals their predecessor's
            pick = np.minimum((rowcdf <= u[:, None]).sum(axis=1), rowcdf.shape[1] - 1)
            vals = np.unravel_index(pick, cards_r)
            for v, col in zip(rest, vals):
                rows[:, v] = col
        return rows


def _chunked(seed_seq: np.random.SeedSequence, n: int, draw) -> np.ndarray:
    sizes = [min(CHUNK, n - s) for s in range(0, n, CHUNK)]
    children = seed_seq.spawn(len(sizes))
    parts = [draw(np.random.Generator(np.random.PCG64(ss)), k) for ss, k in zip(children, sizes)]
    return np.concatenate(parts) if parts else np.empty((0,), dtype=np.int64)


def forward_sample(m: DecomposableModel, n: int, seed: int) -> SampleBatch:
    sampler = _ForwardSampler(m)
    rows = _chunked(np.random.SeedSequence(seed), n, sampler.draw)
    return SampleBatch(rows.reshape(n, len(m.vars)), seed, n)


def _uniform_rows(cards, seed_seq, n) -> np.ndarray:
    hi = np.asarray(cards)

    def draw(rng, k):
        return rng.integers(0, hi, size=(k, len(hi)))
    return _chunked(seed_seq, n, draw).reshape(n, len(hi))


# -- Monte Carlo divergence ---------------------------------------------------

@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    stderr: float
    samples: int
    seed: int


def _importance_terms(lp, lq, terms):
    """Per-sample values of ``sum_x P^a Q^b [log(P^c Q^d)]`` terms for ``x ~ P``."""
    cols = []
    for a, b, cd in terms:
        expo = (a - 1.0) * lp
        if b != 0:
            if b < 0 and np.any(np.isneginf(lq)):
                raise ZeroProbabilitySample("Q(x) = 0 raised to a negative power")
            with np.errstate(invalid="ignore"):
                expo = expo + np.where(np.isneginf(lq), -np.inf, b * lq)
        val = np.exp(expo)
        if cd is not None:
            c, d = cd
            live = val != 0
            if d != 0 and np.any(live & np.isneginf(lq)):
                raise ZeroProbabilitySample("log Q(x) = -inf at a sampled point")
            logarg = c * lp + (d * np.where(live, lq, 0.0) if d != 0 else 0.0)
            val = np.where(live, val * logarg, 0.0)
        cols.append(val)
    return np.stack(cols, axis=1)


def _delta(values: np.ndarray, coeffs: np.ndarray) -> tuple[float, float]:
    """Estimate and standard error of ``coeffs . mean(values)``."""
    n = len(values)
    mean = values.mean(axis=0)
    cov = np.atleast_2d(np.cov(values, rowvar=False, ddof=1))
    var = float(coeffs @ cov @ coeffs) / n
    return float(coeffs @ mean), math.sqrt(max(var, 0.0))


def _bootstrap(values, coeffs, reps, rng) -> float:
    combined = values @ coeffs
    n = len(combined)
    means = [combined[rng.integers(0, n, n)].mean() for _ in range(reps)]
    return float(np.std(means, ddof=1))


def mc_alpha_beta(p: DecomposableModel, q: DecomposableModel, alpha: float, beta: float,
                  n: int, seed: int, bootstrap: int = 0) -> MCEstimate:
    """Monte Carlo ``D_AB`` with a standard error.

    Each ``sum_x P^a Q^b (...)`` term is estimated by importance sampling
    from the model that carries its weight: ``x ~ P`` for terms with
    ``a != 0`` (mean of ``P^(a-1) Q^b (...)``) and ``x ~ Q`` for terms in
    ``Q`` alone.  Sums with no probability weight (``sum_x log`` terms) use
    uniform draws scaled by ``|X|``; so does the whole summand of the
    ``alpha + beta = 0`` case, which avoids a heavy-tailed ``P^a Q^-a``
    importance weight.  Every block draws ``n`` samples from
    its own stream.  The standard error is propagated with the delta
    method over the term means, or by ``bootstrap`` resamples when that is
    positive.
    """
    a, b = float(alpha), float(beta)
    streams = np.random.SeedSequence(seed).spawn(4)
    size = p.domain_size()
    from_p, from_q, uniform = [], [], None
    if a == 0 and b == 0:
        uniform = ("sq", 0.5 * size)
    elif b == 0:
        from_p = [((a, 0.0, (a, -a)), 1 / (a * a)), ((a, 0.0, None), -1 / (a * a))]
        from_q = [((0.0, a, None), 1 / (a * a))]
    elif a == 0:
        from_q = [((0.0, b, (-b, b)), 1 / (b * b)), ((0.0, b, None), -1 / (b * b))]
        from_p = [((b, 0.0, None), 1 / (b * b))]
    elif a + b == 0:
        # whole summand w + exp(-w) - 1, w = a log(Q / P): one nonnegative block
        uniform = ("opposite", size / (a * a))
    else:
        s = a + b
        from_p = [((a, b, None), -1 / (a * b)), ((s, 0.0, None), 1 / (b * s))]
        from_q = [((0.0, s, None), 1 / (a * s))]

    est, var = 0.0, 0.0
    boot_rng = np.random.Generator(np.random.PCG64(streams[3]))
    blocks = [("p", from_p, streams[0]), ("q", from_q, streams[1]), ("uniform", uniform, streams[2])]
    for kind, block, ss in blocks:
        if not block:
            continue
        if kind == "uniform":
            rows = _uniform_rows(p.vars.cards, ss, n)
        else:
            m = p if kind == "p" else q
            rows = _chunked(ss, n, _ForwardSampler(m).draw).reshape(n, len(m.vars))
        P, Q = joint_probabilities(p, rows), joint_probabilities(q, rows)
        with np.errstate(divide="ignore"):
            lp, lq = np.log(P), np.log(Q)
        if kind == "p":
            values = _importance_terms(lp, lq, [t for t, _ in block])
        elif kind == "q":
            # swap roles so the sampled model is always the first argument
            swapped = [(tb, ta, None if cd is None else cd[::-1]) for (ta, tb, cd), _ in block]
            values = _importance_terms(lq, lp, swapped)
        else:
            tag, coeff = block
            if np.any(np.isneginf(lp)) or np.any(np.isneginf(lq)):
                raise ZeroProbabilitySample("log of zero probability at a uniform sample")
            if tag == "sq":
                values = ((lp - lq) ** 2)[:, None]
            else:
                w = a * (lq - lp)
                values = (w + np.expm1(-w))[:, None]
            block = [(None, coeff)]
        coeffs = np.array([c for _, c in block])
        m, se = _delta(values, coeffs)
        if bootstrap:
            se = _bootstrap(values, coeffs, bootstrap, boot_rng)
        est += m
        var += se * se
    return MCEstimate(est, math.sqrt(var), n, seed)
