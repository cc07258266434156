"""Random downlink channel realizations.

Channels are stored group-major as an array of shape ``(K, L, M)``: entry
``h[k, l]`` is the row channel of user ``l`` in cluster ``k`` (0-based).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Recorded in experiment metadata so that runs can be replayed.
RNG_DESCRIPTION = (
    "numpy PCG64 seeded by SeedSequence(entropy=seed, spawn_key=(stream,)); "
    "normals from numpy's ziggurat standard_normal; "
    "h = (x + 1j*y)/sqrt(2)"
)


@dataclass(frozen=True)
class ChannelSet:
    """K*L complex channel row vectors of length M."""

    h: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        if h.ndim != 3 or min(h.shape) < 1:
            raise ValueError(f"channel array must have shape (K, L, M), got {h.shape}")
        if not np.all(np.isfinite(h)):
            raise ValueError("channel entries must be finite")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def K(self) -> int:
        return self.h.shape[0]

    @property
    def L(self) -> int:
        return self.h.shape[1]

    @property
    def M(self) -> int:
        return self.h.shape[2]

    def user(self, l: int, k: int) -> np.ndarray:
        """Channel of user ``l`` in cluster ``k`` (0-based)."""
        return self.h[k, l]

    def scaled(self, factor: complex) -> "ChannelSet":
        return ChannelSet(self.h * factor, self.seed)


def sample_channels(seed: int, M: int, K: int, L: int, stream: int = 0) -> ChannelSet:
    """Draw i.i.d. CN(0, 1) channels.

    ``stream`` selects an independent substream for the same base seed, so
    realization ``r`` of a Monte-Carlo run is reproducible on its own.
    """
    for name, val in (("M", M), ("K", K), ("L", L)):
        if int(val) < 1:
            raise ValueError(f"{name} must be >= 1, got {val}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))
    rng = np.random.Generator(np.random.PCG64(ss))
    x = rng.standard_normal((K, L, M))
    y = rng.standard_normal((K, L, M))
    return ChannelSet((x + 1j * y) / np.sqrt(2.0), seed=int(seed))


def composite_matrix(ch: ChannelSet) -> np.ndarray:
    """Stack all users into a ``(K*L, M)`` matrix.

    Row ``k*L + l`` is ``h[k, l]``: all users of cluster 1 first, then
    cluster 2, and so on.
    """
    return ch.h.reshape(ch.K * ch.L, ch.M).copy()


def dump_channels(ch: ChannelSet, path: str | Path) -> None:
    """Write channels as CSV: header ``M,K,L,seed``, its values, then one
    row of interleaved ``re,im`` pairs per user in composite order."""
    H = composite_matrix(ch)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["M", "K", "L", "seed"])
        wr.writerow([ch.M, ch.K, ch.L, "" if ch.seed is None else ch.seed])
        for row in H:
            inter = np.empty(2 * ch.M)
            inter[0::2] = row.real
            inter[1::2] = row.imag
            wr.writerow([repr(float(v)) for v in inter])


def load_channels(path: str | Path) -> ChannelSet:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2 or rows[0] != ["M", "K", "L", "seed"]:
        raise ValueError(f"{path}: not a channel dump (bad header)")
    M, K, L = (int(v) for v in rows[1][:3])
    seed = int(rows[1][3]) if rows[1][3] != "" else None
    data = np.array([[float(v) for v in r] for r in rows[2:]])
    if data.shape != (K * L, 2 * M):
        raise ValueError(f"{path}: expected {K * L} rows of {2 * M} values, got {data.shape}")
    H = data[:, 0::2] + 1j * data[:, 1::2]
    return ChannelSet(H.reshape(K, L, M), seed=seed)
