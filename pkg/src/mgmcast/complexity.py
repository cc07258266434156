"""Closed-form operation counts of the two WMMSE designs.

The counts are an abstract cost model in units of matrix operations;
they are not FLOP counts of this implementation and exclude the search
over ``alpha``.
"""
from __future__ import annotations

ALGORITHMS = ("WMMSE1", "WMMSE2")


def complexity_count(algo: str, M: int, K: int, L: int) -> int:
    """Operation count of ``algo`` ("WMMSE1" or "WMMSE2") for ``(M, K, L)``.

    >>> complexity_count("WMMSE1", 2, 2, 2), complexity_count("WMMSE2", 2, 2, 2)
    (1113, 989)
    """
    for name, val in (("M", M), ("K", K), ("L", L)):
        if int(val) != val or val < 1:
            raise ValueError(f"{name} must be a positive integer, got {val}")
    M, K, L = int(M), int(K), int(L)
    key = algo.upper()
    if key == "WMMSE1":
        return (M**3 * K
                + M**2 * (3 * K**2 * L + 2 * K)
                + M * (24 * K**2 * L + 21 * K * L + 3 * K - 1)
                + K**2 * (3 * L**2 + 24 * L)
                + K * (3 * L**2 + 38 * L + 3)
                + 1)
    if key == "WMMSE2":
        return (M**3 * K
                + M**2 * (2 * K**2 * L + K * L + 2 * K + 1)
                + M * (20 * K**2 * L + 24 * K * L + K)
                + K**2 * (3 * L**2 + 14 * L)
                + K * (3 * L**2 + 43 * L)
                + 1)
    raise ValueError(f"unknown algorithm {algo!r}; choose from {ALGORITHMS}")


def complexity_table(dims: list[tuple[int, int, int]]) -> list[tuple[int, int, int, int, int]]:
    """Rows ``(M, K, L, WMMSE1, WMMSE2)`` for each triple in ``dims``."""
    return [(M, K, L, complexity_count("WMMSE1", M, K, L), complexity_count("WMMSE2", M, K, L))
            for M, K, L in dims]
