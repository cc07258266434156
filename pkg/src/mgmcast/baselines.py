"""Zero-forcing and maximum-ratio baselines, and the grid search over alpha.

Both baselines superpose the common message as in SM1, so they return SM1
precoder sets scaled to the SM1 power constraint for the requested alpha.
"""
from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .channel import ChannelSet, composite_matrix
from .rates import RateReport, RateWeights, rate_report
from .signal_model import PrecoderSet, Scheme, SignalModelParams, scale_to_power

DEFAULT_ALPHA_GRID = tuple(np.round(np.arange(1, 20) * 0.05, 2))
DESIGNERS = ("WMMSE1", "ZF", "MRT")


class RankDeficientError(ValueError):
    pass


def zf_user_selection(ch: ChannelSet) -> tuple[int, ...]:
    """Pick one user per cluster maximising ``det(H' H'^H)``.

    Exhaustive over all ``L**K`` tuples; on ties the lexicographically
    smallest tuple wins (``itertools.product`` order plus a strict ``>``).
    """
    if ch.K > ch.M:
        raise ValueError(f"user selection needs K <= M (K={ch.K}, M={ch.M})")
    best, best_det = None, -np.inf
    for sel in itertools.product(range(ch.L), repeat=ch.K):
        Hs = ch.h[np.arange(ch.K), list(sel)]
        d = np.linalg.det(Hs @ Hs.conj().T).real
        if d > best_det:
            best, best_det = sel, d
    return best


def zf_directions(ch: ChannelSet) -> tuple[np.ndarray, tuple[int, ...] | None]:
    """Unnormalised ZF precoders, one row per cluster.

    With ``K*L <= M`` every user is nulled and a cluster precoder is the sum
    of its users' pseudo-inverse columns.  Otherwise one user per cluster is
    selected first.
    """
    if ch.K * ch.L <= ch.M:
        H, sel = composite_matrix(ch), None
    else:
        sel = zf_user_selection(ch)
        H = ch.h[np.arange(ch.K), list(sel)]
    G = H @ H.conj().T
    if np.linalg.matrix_rank(G) < G.shape[0]:
        raise RankDeficientError("composite channel of the ZF users is rank deficient")
    P = H.conj().T @ np.linalg.inv(G)
    if sel is None:
        P = P.reshape(ch.M, ch.K, ch.L).sum(axis=2)
    return P.T, sel


def zf_precoder(ch: ChannelSet, E_tx: float, alpha: float = 0.5) -> PrecoderSet:
    p, _ = zf_directions(ch)
    return scale_to_power(PrecoderSet(Scheme.SM1, p), SignalModelParams.sm1(alpha), E_tx)


def mrt_precoder(ch: ChannelSet, E_tx: float, alpha: float = 0.5) -> PrecoderSet:
    """Matched filter to each cluster's summed channel."""
    p = np.conj(ch.h.sum(axis=1))
    norms = np.linalg.norm(p, axis=1)
    if np.any(norms <= 1e-12 * max(1.0, float(np.abs(ch.h).max()))):
        raise ValueError("summed channel of a cluster vanishes; MRT direction undefined")
    return scale_to_power(PrecoderSet(Scheme.SM1, p), SignalModelParams.sm1(alpha), E_tx)


def optimal_alpha_search(ch: ChannelSet, E_tx: float, weights: RateWeights, designer: str,
                         grid: Sequence[float] = DEFAULT_ALPHA_GRID, **solver_kw):
    """Design at every ``alpha`` of ``grid`` and keep the best WSR (perfect SIC).

    Returns ``(alpha, precoders, report, solve_result)``; ``solve_result``
    is ``None`` for the ZF and MRT designers.  Ties go to the smaller alpha.
    """
    from .solver import SolverConfig, iterate

    if designer not in DESIGNERS:
        raise ValueError(f"unknown designer {designer!r}; choose from {DESIGNERS}")
    grid = sorted(float(a) for a in grid)
    if not grid or grid[0] <= 0.0 or grid[-1] >= 1.0:
        raise ValueError("alpha grid must be non-empty and inside (0, 1)")
    if designer == "ZF":
        base = zf_directions(ch)[0]
    elif designer == "MRT":
        base = mrt_precoder(ch, E_tx).p
    best = None
    for alpha in grid:
        sm = SignalModelParams.sm1(alpha)
        res = None
        if designer == "WMMSE1":
            res = iterate(ch, SolverConfig(E_tx=E_tx, weights=weights, sm=sm, **solver_kw))
            ps = res.ps
        else:
            ps = scale_to_power(PrecoderSet(Scheme.SM1, base), sm, E_tx)
        rep = rate_report(ch, ps, sm, weights)
        if best is None or rep.wsr > best[2].wsr:
            best = (alpha, ps, rep, res)
    return best


def evaluate(ch: ChannelSet, ps: PrecoderSet, alpha: float | None, weights: RateWeights,
             delta: float = 0.0) -> RateReport:
    sm = SignalModelParams.sm2() if ps.scheme is Scheme.SM2 else SignalModelParams.sm1(alpha)
    return rate_report(ch, ps, sm, weights, delta)
