import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mgmcast.channel import ChannelSet
from mgmcast.signal_model import PrecoderSet, Scheme

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_precoders(rng, scheme, K, M, scale=1.0):
    p = scale * (rng.standard_normal((K, M)) + 1j * rng.standard_normal((K, M)))
    if scheme is Scheme.SM2:
        pc = scale * (rng.standard_normal(M) + 1j * rng.standard_normal(M))
        return PrecoderSet(Scheme.SM2, p, pc)
    return PrecoderSet(Scheme.SM1, p)


@pytest.fixture
def scalar_case():
    """M=K=L=1, SM2, h=1, |p_c|^2 = |p_1|^2 = 1."""
    ch = ChannelSet(np.ones((1, 1, 1)))
    ps = PrecoderSet(Scheme.SM2, np.ones((1, 1)), np.ones(1))
    return ch, ps


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
