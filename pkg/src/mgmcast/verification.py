"""Independent oracles used by the tests.

* the Lagrangian of the WSR problem and its analytic gradient (SM1),
* a central finite-difference gradient in the ``d/dp*`` convention,
* residuals of the closed-form stationarity equations for a solver state,
* an exhaustive grid search for scalar (``M = 1``) instances.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import ChannelSet
from .mse import mmse_errors, mmse_receivers
from .rates import RateWeights, _own, channel_gains, effective_noise_variances, rate_report, user_rates
from .signal_model import (PrecoderSet, Scheme, SignalModelParams, aggregate_precoder,
                           scale_to_power, transmit_power)
from .solver import SolverState, theorem_precoders


@dataclass(frozen=True)
class KktMultipliers:
    """Rate-constraint multipliers ``mu`` (multicast) and ``eta`` (common),
    both ``(K, L)``, and the power multiplier ``lam``."""

    mu: np.ndarray
    eta: np.ndarray
    lam: float

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        eta = np.asarray(self.eta, dtype=float)
        if mu.shape != eta.shape or mu.ndim != 2:
            raise ValueError("mu and eta must both have shape (K, L)")
        if np.any(mu < 0) or np.any(eta < 0) or self.lam < 0:
            raise ValueError("KKT multipliers must be non-negative")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "lam", float(self.lam))


def lagrangian_f(ch: ChannelSet, ps: PrecoderSet, sm: SignalModelParams, t: np.ndarray,
                 z: float, km: KktMultipliers, weights: RateWeights, E_tx: float) -> float:
    """``-(sum t + z) + sum mu (t_k - a_k R_u) + sum eta (z - b R_c)
    + lam (power - E_tx)``, rates in nats with perfect SIC."""
    t = np.asarray(t, dtype=float)
    R_c, R_u = user_rates(ch, ps, sm)
    val = -(t.sum() + z)
    val += np.sum(km.mu * (t[:, None] - weights.a[:, None] * R_u))
    val += np.sum(km.eta * (z - weights.b * R_c))
    val += km.lam * (transmit_power(ps, sm) - E_tx)
    return float(val)


def gradient_f_terms(ch: ChannelSet, ps: PrecoderSet, sm: SignalModelParams,
                     km: KktMultipliers, weights: RateWeights) -> dict[str, np.ndarray]:
    """The pieces of ``df/dp_k*`` for SM1, each of shape ``(K, M)``.

    ``direct`` comes from the cluster's own multicast rates, ``cross`` from
    the interference ``p_k`` causes in the other clusters, ``common_quad``
    and ``common_lin`` from the common rates, and ``power`` from the power
    constraint.  ``t`` and ``z`` enter ``f`` linearly and drop out.
    """
    if sm.scheme is not Scheme.SM1 or ps.scheme is not Scheme.SM1:
        raise ValueError("the closed-form gradient is derived for SM1 only")
    a, b = weights.a, weights.b
    hc = ch.h.conj()
    r_c, r_u = effective_noise_variances(ch, ps, sm)
    eps = mmse_errors(ch, ps, sm)
    g, g_a = channel_gains(ch, ps)
    own = _own(g)

    cu = km.mu * a[:, None] * eps.eps_u / r_u
    direct = -np.einsum("kl,kl,klm->km", cu, own, hc)

    # C mu a eps |h p_i|^2 / r^2 times (h p_k) h^H, summed over users of clusters i != k
    cx = sm.C * cu * np.abs(own) ** 2 / r_u
    cross = (np.einsum("il,ilk,ilm->km", cx, g, hc)
             - np.einsum("kl,kl,klm->km", cx, own, hc))

    cc = km.eta * b * eps.eps_c / r_c
    common_quad = sm.C * np.einsum("il,ilk,ilm->km", cc * np.abs(g_a) ** 2 / r_c, g, hc)
    common_lin = -np.einsum("il,il,ilm->m", cc, g_a, hc)[None, :].repeat(ch.K, axis=0)

    power = km.lam * (sm.B * aggregate_precoder(ps)[None, :] + sm.C * ps.p)
    return {"direct": direct, "cross": cross, "common_quad": common_quad,
            "common_lin": common_lin, "power": power}


def gradient_f(ch: ChannelSet, ps: PrecoderSet, sm: SignalModelParams, t: np.ndarray, z: float,
               km: KktMultipliers, weights: RateWeights) -> np.ndarray:
    """Analytic ``df/dp_k*`` for every cluster (SM1), shape ``(K, M)``."""
    return sum(gradient_f_terms(ch, ps, sm, km, weights).values())


def finite_difference_gradient(fun: Callable[[PrecoderSet], float], ps: PrecoderSet,
                               step: float = 1e-5) -> np.ndarray:
    """Central differences of a real function of the precoders.

    Returns ``0.5 (df/dRe x + 1j df/dIm x)``, which is ``df/dx*`` for
    real-valued ``f``, with one row per precoder (``p_c`` first for SM2).
    """
    base = ps.matrix().T.astype(complex)

    def rebuild(mat):
        if ps.scheme is Scheme.SM2:
            return PrecoderSet(Scheme.SM2, mat[1:], mat[0])
        return PrecoderSet(Scheme.SM1, mat)

    grad = np.zeros_like(base)
    for idx in np.ndindex(base.shape):
        parts = []
        for unit in (1.0, 1j):
            hi, lo = base.copy(), base.copy()
            hi[idx] += unit * step
            lo[idx] -= unit * step
            parts.append((fun(rebuild(hi)) - fun(rebuild(lo))) / (2 * step))
        grad[idx] = 0.5 * (parts[0] + 1j * parts[1])
    return grad


def _rel(new: np.ndarray, old: np.ndarray) -> float:
    scale = float(np.linalg.norm(old))
    diff = float(np.linalg.norm(np.asarray(new) - np.asarray(old)))
    return diff / scale if scale > 0 else diff


def kkt_residuals(ch: ChannelSet, state: SolverState, E_tx: float) -> dict[str, float]:
    """Relative deviation of each stationarity-equation family.

    ``W``, ``V`` and ``beta`` are recomputed from the stored precoders,
    receivers, weights and multipliers; ``precoders`` is the unscaled
    closed-form update evaluated at the stored state.  Each value is
    ``||recomputed - stored|| / ||stored||`` (Frobenius norm over the family).
    """
    rx = mmse_receivers(ch, state.ps, state.sm)
    beta = (np.sum(state.xi * state.v[:, None] * np.abs(state.rx.V) ** 2)
            + np.sum(state.psi * state.w * np.abs(state.rx.W) ** 2)) / E_tx
    ps, _ = theorem_precoders(state, ch)
    return {
        "W": _rel(rx.W, state.rx.W),
        "V": _rel(rx.V, state.rx.V),
        "beta": _rel(np.array([beta]), np.array([state.beta])),
        "precoders": _rel(ps.matrix(), state.ps.matrix()),
    }


def _grid(resolution: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, resolution + 1)


def brute_force_wsr(ch: ChannelSet, sm: SignalModelParams, weights: RateWeights, E_tx: float,
                    resolution: int = 200) -> tuple[PrecoderSet, float]:
    """Exhaustive grid optimum of the WSR (perfect SIC) for a scalar channel.

    With one antenna only magnitudes matter, except that under SM1 the
    relative phase of ``p_1`` and ``p_2`` sets ``|p_A|``.  SM1 is searched
    over the amplitude angle of ``(p_1, p_2)`` and that phase in ``[0, pi]``;
    SM2 over the power simplex of ``(p_c, p_1, ..., p_K)``.  Every grid
    point is scaled to ``E_tx``.  A resolution that is a multiple of an
    earlier one contains the earlier grid, so refining never lowers the
    result.
    """
    if ch.M != 1 or ch.K > 2 or ch.L > 2:
        raise ValueError("brute force is limited to M = 1, K <= 2, L <= 2")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    u = _grid(resolution)
    candidates = []
    if sm.scheme is Scheme.SM1:
        if ch.K == 1:
            candidates.append(np.array([[1.0 + 0j]]))
        else:
            for x, y in itertools.product(u, u):
                ang, phase = 0.5 * np.pi * x, np.pi * y
                candidates.append(np.array([[np.cos(ang)], [np.sin(ang) * np.exp(1j * phase)]]))
    else:
        n = ch.K + 1
        for point in itertools.product(range(resolution + 1), repeat=n - 1):
            if sum(point) > resolution:
                continue
            shares = np.array((resolution - sum(point),) + point, dtype=float) / resolution
            candidates.append(np.sqrt(shares)[:, None].astype(complex))
    best, best_wsr = None, -np.inf
    for mat in candidates:
        if sm.scheme is Scheme.SM1:
            ps = PrecoderSet(Scheme.SM1, mat)
        else:
            ps = PrecoderSet(Scheme.SM2, mat[1:], mat[0])
        if not transmit_power(ps, sm) > 0:
            continue
        ps = scale_to_power(ps, sm, E_tx)
        wsr = rate_report(ch, ps, sm, weights).wsr
        if wsr > best_wsr:
            best, best_wsr = ps, wsr
    return best, float(best_wsr)
