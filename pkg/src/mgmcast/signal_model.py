"""Transmission schemes, precoder containers and the total power constraint.

SM1 superposes the common message on every multicast stream, so its common
precoder is the sum of the multicast precoders and ``alpha`` splits the
power.  SM2 carries the common message on its own precoder ``p_c``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Scheme(enum.Enum):
    SM1 = 1
    SM2 = 2


@dataclass(frozen=True)
class SignalModelParams:
    scheme: Scheme
    alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    @classmethod
    def sm1(cls, alpha: float) -> "SignalModelParams":
        return cls(Scheme.SM1, float(alpha))

    @classmethod
    def sm2(cls) -> "SignalModelParams":
        return cls(Scheme.SM2, 0.5)

    @property
    def B(self) -> float:
        """Power coefficient of the common precoder."""
        return self.alpha if self.scheme is Scheme.SM1 else 1.0

    @property
    def C(self) -> float:
        """Power coefficient of each multicast precoder."""
        return 1.0 - self.alpha if self.scheme is Scheme.SM1 else 1.0


@dataclass(frozen=True)
class PrecoderSet:
    """Multicast precoders ``p`` (shape ``(K, M)``, one row per cluster)
    plus the dedicated common precoder ``p_c`` for SM2."""

    scheme: Scheme
    p: np.ndarray
    p_c: np.ndarray | None = None

    def __post_init__(self):
        p = np.array(self.p, dtype=complex)
        if p.ndim != 2:
            raise ValueError(f"multicast precoders must have shape (K, M), got {p.shape}")
        p_c = self.p_c
        if self.scheme is Scheme.SM2:
            if p_c is None:
                raise ValueError("SM2 precoder set needs a common precoder")
            p_c = np.array(p_c, dtype=complex).reshape(-1)
            if p_c.shape != (p.shape[1],):
                raise ValueError("common precoder length must equal M")
        elif p_c is not None:
            raise ValueError("SM1 precoder set cannot store a common precoder")
        if not np.all(np.isfinite(p)) or (p_c is not None and not np.all(np.isfinite(p_c))):
            raise ValueError("precoder entries must be finite")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        if p_c is not None:
            p_c.setflags(write=False)
            object.__setattr__(self, "p_c", p_c)

    @property
    def K(self) -> int:
        return self.p.shape[0]

    @property
    def M(self) -> int:
        return self.p.shape[1]

    def matrix(self) -> np.ndarray:
        """Precoder matrix with precoders as columns: ``[p_1..p_K]`` for SM1,
        ``[p_c, p_1..p_K]`` for SM2."""
        if self.scheme is Scheme.SM1:
            return self.p.T.copy()
        return np.column_stack([self.p_c, self.p.T])

    def scaled(self, factor: float) -> "PrecoderSet":
        p_c = None if self.p_c is None else self.p_c * factor
        return PrecoderSet(self.scheme, self.p * factor, p_c)


def aggregate_precoder(ps: PrecoderSet) -> np.ndarray:
    """Precoder that carries the common message."""
    if ps.scheme is Scheme.SM1:
        return ps.p.sum(axis=0)
    return ps.p_c.copy()


def _check_scheme(ps: PrecoderSet, sm: SignalModelParams) -> None:
    if ps.scheme is not sm.scheme:
        raise ValueError(f"precoder scheme {ps.scheme.name} does not match signal model {sm.scheme.name}")


def transmit_power(ps: PrecoderSet, sm: SignalModelParams) -> float:
    """``B*||p_A||^2 + C*sum_k ||p_k||^2``."""
    _check_scheme(ps, sm)
    p_a = aggregate_precoder(ps)
    return float(sm.B * np.vdot(p_a, p_a).real + sm.C * np.vdot(ps.p, ps.p).real)


def scale_to_power(ps: PrecoderSet, sm: SignalModelParams, E_tx: float) -> PrecoderSet:
    """Multiply every precoder by one positive scalar so the power is ``E_tx``."""
    if E_tx <= 0:
        raise ValueError(f"E_tx must be positive, got {E_tx}")
    pw = transmit_power(ps, sm)
    if not pw > 0:
        raise ValueError("cannot scale a precoder set with zero transmit power")
    return ps.scaled(np.sqrt(E_tx / pw))


def convert_scheme(ps: PrecoderSet, sm: SignalModelParams, E_tx: float) -> PrecoderSet:
    """Re-package ``ps`` for the scheme of ``sm`` and rescale to ``E_tx``.

    SM1 -> SM2 keeps the multicast precoders and uses their sum as the
    dedicated common precoder; SM2 -> SM1 drops ``p_c``.
    """
    if ps.scheme is sm.scheme:
        return scale_to_power(ps, sm, E_tx)
    if sm.scheme is Scheme.SM2:
        out = PrecoderSet(Scheme.SM2, ps.p, ps.p.sum(axis=0))
    else:
        out = PrecoderSet(Scheme.SM1, ps.p)
    return scale_to_power(out, sm, E_tx)
