"""Iterative WMMSE precoder design for both signal models.

One iteration runs, in order: MMSE receivers, receiver MSEs, MSE weights,
exponential-penalty multipliers, the power multiplier ``beta``, the
closed-form precoder update, and a rescale to the power budget.  The loop
stops once the squared Frobenius change of the precoder matrix drops below
``upsilon``.
"""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import softmax

from .channel import ChannelSet
from .mse import MseSet, ReceiverSet, mmse_receivers, mse_values
from .rates import RateReport, RateWeights, rate_report
from .signal_model import (PrecoderSet, Scheme, SignalModelParams, convert_scheme,
                           scale_to_power, transmit_power)

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


class DegenerateStateError(SolverError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    E_tx: float
    weights: RateWeights
    sm: SignalModelParams
    epsilon: float = 1e-3
    upsilon: float = 1e-3
    max_iters: int = 100
    nu: float | None = None
    init: str = "zf"
    initial: PrecoderSet | None = None
    multiplier_damping: str = "harmonic"
    safeguard: bool = True
    max_probes: int = 10
    min_step: float = 0.125
    ascent_tol: float = 1e-4

    def __post_init__(self):
        if self.E_tx <= 0 or self.epsilon <= 0 or self.upsilon <= 0:
            raise ValueError("E_tx, epsilon and upsilon must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.init not in ("zf", "given"):
            raise ValueError(f"init must be 'zf' or 'given', got {self.init!r}")
        if self.init == "given" and self.initial is None:
            raise ValueError("init='given' needs an initial precoder set")
        if self.multiplier_damping not in ("none", "harmonic"):
            raise ValueError(f"multiplier_damping must be 'none' or 'harmonic', "
                             f"got {self.multiplier_damping!r}")
        if self.max_probes < 1 or not 0 < self.min_step <= 1 or self.ascent_tol < 0:
            raise ValueError("need max_probes >= 1, min_step in (0, 1] and ascent_tol >= 0")

    def sharpness(self, K: int, L: int) -> float:
        """Penalty sharpness; defaults to the smallest value meeting
        ``nu >= ln(K L) / epsilon``."""
        bound = math.log(K * L) / self.epsilon
        if self.nu is None:
            return bound
        if self.nu < bound:
            raise ValueError(f"nu={self.nu} is below the epsilon-optimality bound {bound}")
        return float(self.nu)


@dataclass(frozen=True)
class IterationRecord:
    iter: int
    wsr: float
    delta_norm: float
    power: float
    xi_sum_err: float
    psi_sum_err: float
    fallback: bool = False
    step: float = 1.0
    probes: int = 1

    @property
    def wsr_bits(self) -> float:
        return self.wsr / math.log(2.0)


@dataclass(frozen=True)
class SolverState:
    sm: SignalModelParams
    weights: RateWeights
    nu: float
    ps: PrecoderSet
    rx: ReceiverSet | None = None
    mse: MseSet | None = None
    v: np.ndarray | None = None
    w: float = 0.0
    xi: np.ndarray | None = None
    psi: np.ndarray | None = None
    beta: float = 0.0
    t: np.ndarray | None = None
    z: float = 0.0
    iter: int = 0
    fallback: bool = False


@dataclass
class SolveResult:
    ps: PrecoderSet
    report: RateReport
    trace: list[IterationRecord]
    state: SolverState
    converged: bool

    @property
    def iters(self) -> int:
        return self.state.iter

    @property
    def wsr_trace(self) -> list[float]:
        return [r.wsr for r in self.trace]


def update_receivers(state: SolverState, ch: ChannelSet) -> SolverState:
    return dataclasses.replace(state, rx=mmse_receivers(ch, state.ps, state.sm))


def update_mse(state: SolverState, ch: ChannelSet) -> SolverState:
    return dataclasses.replace(state, mse=mse_values(ch, state.ps, state.sm, state.rx))


def update_weights(state: SolverState) -> SolverState:
    """Worst-user MSE weights ``v_k = a_k / max_l eps_u``, ``w = b / max eps_c``,
    with the targets ``t_k``, ``z`` chosen to make those constraints tight."""
    a, b = state.weights.a, state.weights.b
    eu = state.mse.eps_u_max
    ec = state.mse.eps_c_max
    if np.any((eu <= 0) & (a > 0)) or (ec <= 0 and b > 0):
        raise DegenerateStateError(
            f"zero MSE at iteration {state.iter} (eps_u_max={eu}, eps_c_max={ec}); "
            "alpha at 0 or 1?")
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(a > 0, a / eu, 0.0)
        t = np.where(a > 0, -a * np.log(eu), 0.0)
    w = b / ec if b > 0 else 0.0
    z = -b * math.log(ec) if b > 0 else 0.0
    return dataclasses.replace(state, v=v, w=w, t=t, z=z)


def update_multipliers(state: SolverState) -> SolverState:
    """Softmax multipliers over the users of each cluster (``xi``) and over
    all users (``psi``)."""
    a, b = state.weights.a, state.weights.b
    eps = state.mse
    with np.errstate(divide="ignore", invalid="ignore"):
        bound_u = np.where(a > 0, np.exp(-state.t / np.where(a > 0, a, 1.0)), eps.eps_u_max)
    bound_c = math.exp(-state.z / b) if b > 0 else eps.eps_c_max
    xi = softmax(state.nu * (eps.eps_u - bound_u[:, None]), axis=1)
    psi = softmax(state.nu * (eps.eps_c - bound_c))
    return dataclasses.replace(state, xi=xi, psi=psi)


def update_beta(state: SolverState, E_tx: float) -> SolverState:
    beta = (np.sum(state.xi * state.v[:, None] * np.abs(state.rx.V) ** 2)
            + np.sum(state.psi * state.w * np.abs(state.rx.W) ** 2)) / E_tx
    return dataclasses.replace(state, beta=float(beta))


def _quadratic_terms(state: SolverState, ch: ChannelSet):
    """Matrices and vectors shared by the precoder equations.

    ``phi_v = sum xi v_k C |V|^2 h^H h``, ``phi_w = sum psi w |W|^2 h^H h``,
    ``b_w = sum psi w W* h^H`` and ``b_v[k] = sum_l xi v_k V* h^H``.
    """
    sm, rx = state.sm, state.rx
    hf = ch.h.reshape(-1, ch.M)
    cv = (state.xi * state.v[:, None] * sm.C * np.abs(rx.V) ** 2).ravel()
    cw = (state.psi * state.w * np.abs(rx.W) ** 2).ravel()
    hH = hf.conj().T
    phi_v = hH @ (cv[:, None] * hf)
    phi_w = hH @ (cw[:, None] * hf)
    b_w = hH @ (state.psi * state.w * np.conj(rx.W)).ravel()
    b_v = np.einsum("kl,klm->km", state.xi * state.v[:, None] * np.conj(rx.V), ch.h.conj())
    return phi_v, phi_w, b_w, b_v


class _HermitianSolver:
    """Cholesky solve with a least-squares fallback for singular systems."""

    def __init__(self, A: np.ndarray):
        self.A = A
        self.fallback = False
        try:
            self.cho = scipy.linalg.cho_factor(A, check_finite=False)
        except np.linalg.LinAlgError:
            self.cho = None
            self.fallback = True

    def __call__(self, rhs: np.ndarray) -> np.ndarray:
        if self.cho is not None:
            return scipy.linalg.cho_solve(self.cho, rhs, check_finite=False)
        return np.linalg.lstsq(self.A, rhs, rcond=None)[0]


def theorem_precoders(state: SolverState, ch: ChannelSet) -> tuple[PrecoderSet, bool]:
    """Closed-form precoders for the current receivers, weights and
    multipliers, before power scaling.

    SM1 couples the clusters through ``p_A``; the clusters are solved in
    order ``k = 1..K`` and ``p_A`` is refreshed after each one.
    """
    sm, beta = state.sm, state.beta
    phi_v, phi_w, b_w, b_v = _quadratic_terms(state, ch)
    eye = np.eye(ch.M)
    solve = _HermitianSolver(beta * eye + phi_v + phi_w)
    if sm.scheme is Scheme.SM1:
        B, C = sm.B, sm.C
        common = beta * eye + phi_w
        p = np.array(state.ps.p, dtype=complex)
        p_a = p.sum(axis=0)
        for k in range(ch.K):
            rest = p_a - p[k]
            new = solve(B * b_w + C * b_v[k] - B * (common @ rest))
            p_a = rest + new
            p[k] = new
        return PrecoderSet(Scheme.SM1, p), solve.fallback
    p = np.array([solve(b_v[k]) for k in range(ch.K)])
    solve_c = _HermitianSolver(beta * eye + phi_w)
    p_c = solve_c(b_w)
    return PrecoderSet(Scheme.SM2, p, p_c), solve.fallback or solve_c.fallback


def update_precoders(state: SolverState, ch: ChannelSet, E_tx: float) -> SolverState:
    ps, fallback = theorem_precoders(state, ch)
    if fallback:
        log.debug("singular precoder system at iteration %d; used least squares", state.iter)
    if not transmit_power(ps, state.sm) > 0:
        raise DegenerateStateError(f"precoder update produced zero power at iteration {state.iter}")
    return dataclasses.replace(state, ps=scale_to_power(ps, state.sm, E_tx), fallback=fallback)


def initial_precoders(ch: ChannelSet, cfg: SolverConfig) -> PrecoderSet:
    if cfg.init == "given":
        return convert_scheme(cfg.initial, cfg.sm, cfg.E_tx)
    from .baselines import zf_directions

    p, _ = zf_directions(ch)
    return convert_scheme(PrecoderSet(Scheme.SM1, p), cfg.sm, cfg.E_tx)


def step(state: SolverState, ch: ChannelSet, E_tx: float) -> SolverState:
    """One literal iteration (receivers through power rescale), undamped."""
    state = dataclasses.replace(state, iter=state.iter + 1)
    state = update_receivers(state, ch)
    state = update_mse(state, ch)
    state = update_weights(state)
    state = update_multipliers(state)
    state = update_beta(state, E_tx)
    return update_precoders(state, ch, E_tx)


def _blend(state: SolverState, target: SolverState, rho: float) -> SolverState:
    if rho >= 1.0 or state.xi is None:
        return dataclasses.replace(state, xi=target.xi, psi=target.psi)
    return dataclasses.replace(state, xi=(1.0 - rho) * state.xi + rho * target.xi,
                               psi=(1.0 - rho) * state.psi + rho * target.psi)


def _interpolate(old: PrecoderSet, new: PrecoderSet, tau: float) -> PrecoderSet:
    if tau == 1.0:
        return new
    p_c = None if old.p_c is None else old.p_c + tau * (new.p_c - old.p_c)
    return PrecoderSet(old.scheme, old.p + tau * (new.p - old.p), p_c)


class _Iteration:
    """Mutable bookkeeping for :func:`iterate`."""

    def __init__(self, ch, cfg, state):
        self.ch, self.cfg, self.state = ch, cfg, state
        self.updates = 0  # multiplier updates so far; drives the damping schedule

    def rho(self) -> float:
        if self.cfg.multiplier_damping == "none":
            return 1.0
        return 1.0 / self.updates

    def multipliers(self, mse: MseSet) -> None:
        self.updates += 1
        target = update_multipliers(dataclasses.replace(self.state, mse=mse))
        self.state = update_beta(_blend(self.state, target, self.rho()), self.cfg.E_tx)

    def refresh(self) -> None:
        """Receivers, MSEs, weights, multipliers and beta for the current precoders."""
        st = update_weights(update_mse(update_receivers(self.state, self.ch), self.ch))
        self.state = st
        self.multipliers(st.mse)

    def candidate(self) -> tuple[PrecoderSet, bool]:
        ps, fallback = theorem_precoders(self.state, self.ch)
        if not np.all(np.isfinite(ps.matrix())) or not np.isfinite(self.state.beta):
            raise SolverError(f"non-finite value at iteration {self.state.iter}")
        if not transmit_power(ps, self.state.sm) > 0:
            raise DegenerateStateError(
                f"precoder update produced zero power at iteration {self.state.iter}")
        if fallback:
            log.debug("singular precoder system at iteration %d; used least squares",
                      self.state.iter)
        return scale_to_power(ps, self.state.sm, self.cfg.E_tx), fallback


def iterate(ch: ChannelSet, cfg: SolverConfig) -> SolveResult:
    """Run the iterative WMMSE design; rates in the result assume perfect SIC.

    With ``cfg.multiplier_damping == "harmonic"`` the multipliers are the
    running average ``xi <- (1 - 1/m) xi + (1/m) softmax(...)`` over the
    ``m`` updates made so far.  Averaging keeps the fixed points of the
    plain update but stops the hard worst-user switching that a large
    ``nu`` causes.  With ``cfg.safeguard`` a candidate is accepted only if
    the WSR drops by at most ``cfg.ascent_tol`` nats, trying the steps ``1, 1/2, ...`` down to
    ``cfg.min_step``.  After a rejection the multipliers are re-estimated
    from the MSEs the rejected candidate would have, holding the
    receivers, up to ``cfg.max_probes`` times per iteration.

    ``multiplier_damping="none", safeguard=False`` is the literal loop.
    """
    sm, w = cfg.sm, cfg.weights
    ps = initial_precoders(ch, cfg)
    run = _Iteration(ch, cfg, SolverState(sm=sm, weights=w, nu=cfg.sharpness(ch.K, ch.L), ps=ps))
    wsr = rate_report(ch, ps, sm, w).wsr
    trace = [IterationRecord(0, wsr, float("nan"), transmit_power(ps, sm), 0.0, 0.0)]
    converged = False
    for n in range(1, cfg.max_iters + 1):
        run.state = dataclasses.replace(run.state, iter=n)
        run.refresh()
        cur = run.state.ps
        tries = cfg.max_probes if cfg.safeguard else 1
        for probe in range(tries):
            if probe:
                run.multipliers(mse_values(ch, cand, sm, run.state.rx))
            cand, fallback = run.candidate()
            diff = cand.matrix() - cur.matrix()
            dnorm = float(np.vdot(diff, diff).real)
            if not cfg.safeguard:
                accepted, new_wsr, tau = cand, rate_report(ch, cand, sm, w).wsr, 1.0
                break
            accepted, new_wsr, tau = None, wsr, 1.0
            while tau >= cfg.min_step:
                trial = _interpolate(cur, cand, tau)
                if tau != 1.0:
                    trial = scale_to_power(trial, sm, cfg.E_tx)
                trial_wsr = rate_report(ch, trial, sm, w).wsr
                if trial_wsr >= wsr - cfg.ascent_tol:
                    accepted, new_wsr = trial, trial_wsr
                    break
                tau /= 2
            if accepted is not None or dnorm < cfg.upsilon:
                break
        if accepted is not None:
            run.state = dataclasses.replace(run.state, ps=accepted)
            wsr = new_wsr
        st = run.state
        trace.append(IterationRecord(
            n, wsr, dnorm, transmit_power(st.ps, sm),
            float(np.max(np.abs(st.xi.sum(axis=1) - 1.0))),
            float(abs(st.psi.sum() - 1.0)),
            fallback,
            tau if accepted is not None else 0.0,
            probe + 1,
        ))
        if dnorm < cfg.upsilon:
            converged = True
            break
    if cfg.max_iters > 0:
        # leave the state consistent with the returned precoders
        run.refresh()
    report = rate_report(ch, run.state.ps, sm, w)
    return SolveResult(run.state.ps, report, trace, run.state, converged)


def trace_rows(trace: list[IterationRecord]) -> list[tuple]:
    """``(iter, wsr_nats, wsr_bits, delta_precoder_norm)`` rows for CSV export."""
    return [(r.iter, r.wsr, r.wsr_bits, r.delta_norm) for r in trace]
