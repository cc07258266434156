import itertools

import pytest

from mgmcast.complexity import complexity_count, complexity_table


@pytest.mark.parametrize("algo, dims, expected", [
    ("WMMSE1", (2, 2, 2), 1113), ("WMMSE2", (2, 2, 2), 989),
    ("WMMSE1", (4, 4, 2), 7033), ("WMMSE2", (4, 4, 2), 5929),
])
def test_reference_values(algo, dims, expected):
    assert complexity_count(algo, *dims) == expected


@pytest.mark.parametrize("algo", ["WMMSE1", "WMMSE2"])
def test_strictly_increasing(algo):
    for M, K, L in itertools.product(range(1, 17), repeat=3):
        c = complexity_count(algo, M, K, L)
        if M < 16:
            assert complexity_count(algo, M + 1, K, L) > c
        if K < 16:
            assert complexity_count(algo, M, K + 1, L) > c
        if L < 16:
            assert complexity_count(algo, M, K, L + 1) > c


@pytest.mark.parametrize("algo", ["WMMSE1", "WMMSE2"])
def test_cubic_in_m(algo):
    ratio = complexity_count(algo, 512, 4, 2) / complexity_count(algo, 256, 4, 2)
    assert ratio == pytest.approx(8.0, rel=0.05)


def test_case_insensitive_and_table():
    assert complexity_count("wmmse2", 2, 2, 2) == 989
    assert complexity_table([(2, 2, 2), (4, 4, 2)]) == [(2, 2, 2, 1113, 989), (4, 4, 2, 7033, 5929)]


@pytest.mark.parametrize("args", [("DPC", 2, 2, 2), ("WMMSE1", 0, 2, 2), ("WMMSE1", 2, 1.5, 2)])
def test_errors(args):
    with pytest.raises(ValueError):
        complexity_count(*args)
