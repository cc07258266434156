import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_precoders
from mgmcast.signal_model import (PrecoderSet, Scheme, SignalModelParams, aggregate_precoder,
                                  convert_scheme, scale_to_power, transmit_power)

e1 = np.array([1.0, 0.0])


def test_coefficients():
    sm = SignalModelParams.sm1(0.3)
    assert (sm.B, sm.C) == (0.3, 0.7)
    assert (SignalModelParams.sm2().B, SignalModelParams.sm2().C) == (1.0, 1.0)
    with pytest.raises(ValueError):
        SignalModelParams.sm1(1.2)


def test_aggregate_sum():
    ps = PrecoderSet(Scheme.SM1, np.vstack([e1, e1]))
    np.testing.assert_array_equal(aggregate_precoder(ps), 2 * e1)


def test_aggregate_sm2_identity():
    pc = np.array([0.3 + 1j, -2.0])
    ps = PrecoderSet(Scheme.SM2, np.zeros((2, 2)), pc)
    np.testing.assert_array_equal(aggregate_precoder(ps), pc)


def test_aggregate_cancellation():
    ps = PrecoderSet(Scheme.SM1, np.vstack([e1, -e1]))
    np.testing.assert_array_equal(aggregate_precoder(ps), np.zeros(2))


def test_power_zero():
    ps = PrecoderSet(Scheme.SM1, np.zeros((2, 3)))
    assert transmit_power(ps, SignalModelParams.sm1(0.4)) == 0.0


def test_power_single_cluster():
    ps = PrecoderSet(Scheme.SM1, np.array([[1.0, 0.0]]))
    assert transmit_power(ps, SignalModelParams.sm1(0.5)) == pytest.approx(1.0)


def test_power_two_aligned_clusters():
    ps = PrecoderSet(Scheme.SM1, np.vstack([e1, e1]))
    assert transmit_power(ps, SignalModelParams.sm1(0.5)) == pytest.approx(3.0)


def test_power_scheme_mismatch():
    ps = PrecoderSet(Scheme.SM1, np.vstack([e1, e1]))
    with pytest.raises(ValueError):
        transmit_power(ps, SignalModelParams.sm2())


def test_sm1_cannot_store_common():
    with pytest.raises(ValueError):
        PrecoderSet(Scheme.SM1, np.ones((1, 2)), np.ones(2))
    with pytest.raises(ValueError):
        PrecoderSet(Scheme.SM2, np.ones((1, 2)))


def test_scale_no_op():
    ps = PrecoderSet(Scheme.SM1, np.vstack([e1, e1]))
    sm = SignalModelParams.sm1(0.5)
    out = scale_to_power(ps, sm, 3.0)
    np.testing.assert_allclose(out.p, ps.p, rtol=1e-15)


def test_scale_halves():
    ps = PrecoderSet(Scheme.SM2, np.array([[2.0, 0.0]]), np.array([0.0, 2.0]))
    sm = SignalModelParams.sm2()
    out = scale_to_power(ps, sm, transmit_power(ps, sm) / 4)
    np.testing.assert_allclose(out.p, ps.p / 2)
    np.testing.assert_allclose(out.p_c, ps.p_c / 2)


def test_scale_zero_power_is_error():
    with pytest.raises(ValueError):
        scale_to_power(PrecoderSet(Scheme.SM1, np.zeros((1, 2))), SignalModelParams.sm1(0.5), 1.0)


@given(seed=st.integers(0, 2**32 - 1), sm2=st.booleans(), alpha=st.floats(0.01, 0.99),
       E=st.floats(1e-3, 1e4))
def test_scale_postcondition_and_ratios(seed, sm2, alpha, E):
    rng = np.random.default_rng(seed)
    scheme = Scheme.SM2 if sm2 else Scheme.SM1
    sm = SignalModelParams.sm2() if sm2 else SignalModelParams.sm1(alpha)
    ps = random_precoders(rng, scheme, 3, 2)
    out = scale_to_power(ps, sm, E)
    assert transmit_power(out, sm) == pytest.approx(E, rel=1e-12)
    ratio = out.matrix() / ps.matrix()
    np.testing.assert_allclose(ratio, ratio.flat[0], rtol=1e-12)
    assert ratio.flat[0].real > 0


@given(seed=st.integers(0, 2**32 - 1), alpha=st.floats(0.0, 1.0))
def test_power_unitary_invariance_and_scaling(seed, alpha):
    rng = np.random.default_rng(seed)
    sm = SignalModelParams.sm1(alpha)
    ps = random_precoders(rng, Scheme.SM1, 2, 3)
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    rot = PrecoderSet(Scheme.SM1, ps.p @ Q.T)
    assert transmit_power(rot, sm) == pytest.approx(transmit_power(ps, sm), rel=1e-12)
    assert transmit_power(ps.scaled(2.0), sm) == pytest.approx(4 * transmit_power(ps, sm), rel=1e-12)


def test_convert_sm1_to_sm2_uses_sum():
    ps = PrecoderSet(Scheme.SM1, np.array([[1.0, 0.0], [0.0, 1.0]]))
    out = convert_scheme(ps, SignalModelParams.sm2(), 4.0)
    assert out.scheme is Scheme.SM2
    np.testing.assert_allclose(out.p_c / out.p_c[0], [1.0, 1.0])
    assert transmit_power(out, SignalModelParams.sm2()) == pytest.approx(4.0)
