import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spreadsim.reliability import MttfParams, mttf_em_ratio, mttf_sm_ratio, mttf_tc_ratio, report

# frozen from a 30-digit mpmath evaluation of the closed forms
EM_80_TO_100 = 0.204914517323298397
SM_80_TO_100 = 0.295482269249441175
TC_DOUBLED_RISE = 0.196146024474187684


def test_em_example():
    assert mttf_em_ratio(100.0, 80.0) == pytest.approx(EM_80_TO_100, rel=1e-12)


def test_sm_example():
    assert mttf_sm_ratio(100.0, 80.0) == pytest.approx(SM_80_TO_100, rel=1e-12)


def test_tc_example():
    # 20 K -> 40 K above the low point
    assert mttf_tc_ratio(65.0, 45.0, 25.0) == pytest.approx(TC_DOUBLED_RISE, rel=1e-12)


@pytest.mark.parametrize("t", [-10.0, 25.0, 45.0, 80.0, 150.0])
def test_unity_at_reference(t):
    assert mttf_em_ratio(t, t) == 1.0
    assert mttf_sm_ratio(t, t) == 1.0
    assert mttf_tc_ratio(t, t, -40.0) == 1.0


def test_cooler_than_reference_lasts_longer():
    assert mttf_em_ratio(60.0, 80.0) > 1.0
    assert mttf_tc_ratio(60.0, 80.0, 25.0) > 1.0
    assert mttf_sm_ratio(60.0, 80.0) > 1.0


def test_tc_domain():
    with pytest.raises(ValueError):
        mttf_tc_ratio(25.0, 60.0, 25.0)
    with pytest.raises(ValueError):
        mttf_tc_ratio(60.0, 20.0, 25.0)


def test_sm_domain():
    with pytest.raises(ValueError):
        mttf_sm_ratio(500.0 - 273.15, 80.0)
    with pytest.raises(ValueError):
        mttf_sm_ratio(80.0, 240.0)


def test_sm_degenerate_parameters():
    p = MttfParams(n_sm=0.0, ea_sm=0.0)
    for t in (30.0, 90.0, 140.0):
        assert mttf_sm_ratio(t, 70.0, p) == 1.0


def test_below_absolute_zero():
    with pytest.raises(ValueError):
        mttf_em_ratio(-300.0, 20.0)


def test_params_validation():
    with pytest.raises(ValueError):
        MttfParams(q_tc=-1.0)
    with pytest.raises(ValueError):
        MttfParams.from_dict({"nonsense": 1})
    assert MttfParams.from_dict({"q_tc": 2}).q_tc == 2.0


def test_strictly_decreasing_over_operating_range():
    temps = np.linspace(26.0, 150.0, 60)
    for f in (
        lambda t: mttf_em_ratio(t, 60.0),
        lambda t: mttf_tc_ratio(t, 60.0, 25.0),
        lambda t: mttf_sm_ratio(t, 60.0),
    ):
        vals = [f(t) for t in temps]
        assert all(b < a for a, b in zip(vals, vals[1:]))


@given(st.floats(30.0, 120.0), st.floats(30.0, 120.0), st.floats(30.0, 120.0))
def test_ratios_chain(a, b, c):
    # normalising through an intermediate reference is the same as normalising directly
    assert mttf_em_ratio(a, c) == pytest.approx(mttf_em_ratio(a, b) * mttf_em_ratio(b, c), rel=1e-9)
    assert mttf_sm_ratio(a, c) == pytest.approx(mttf_sm_ratio(a, b) * mttf_sm_ratio(b, c), rel=1e-9)


def test_report_identity():
    temps = {"a": 60.0, "b": 71.5, "c": 45.2}
    out = report(temps, temps, 25.0)
    assert all((r.r_em, r.r_tc, r.r_sm) == (1.0, 1.0, 1.0) for r in out.values())


def test_report_single_hot_core():
    base = {"a": 80.0, "b": 80.0}
    out = report(base, {"a": 100.0, "b": 80.0}, 25.0)
    assert out["a"].r_em == pytest.approx(EM_80_TO_100, rel=1e-12)
    assert out["b"].r_em == 1.0


def test_report_key_mismatch():
    with pytest.raises(KeyError):
        report({"a": 50.0}, {"b": 50.0}, 25.0)


def test_report_permutation_invariant():
    base = {f"c{i}": 50.0 + i for i in range(5)}
    loaded = {f"c{i}": 60.0 + 2 * i for i in range(5)}
    ref = report(base, loaded, 25.0)
    for perm in itertools.islice(itertools.permutations(base), 10):
        assert report({k: base[k] for k in perm}, {k: loaded[k] for k in reversed(perm)}, 25.0) == ref


def test_ten_to_twenty_kelvin_gives_order_of_magnitude_drop():
    # cores 10-20 K above a 45 degC idle state
    worst = min(
        min(mttf_em_ratio(45.0 + dt, 45.0), mttf_tc_ratio(45.0 + dt, 45.0, 25.0), mttf_sm_ratio(45.0 + dt, 45.0))
        for dt in (10.0, 20.0)
    )
    assert 0.05 <= worst <= 0.3
