import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varfrac import waiting
from varfrac.errors import InvalidTailMass


def test_default_threshold_constant_half():
    law = waiting.build_waiting_law(0.5, 0.5)
    assert law.B == pytest.approx(4.0)
    # pure power law: all mass in the tail
    assert float(law.tail_mass(0.5)) == pytest.approx(1.0)
    assert float(law.head_height(0.5)) == pytest.approx(0.0, abs=1e-15)


def test_supplied_threshold_with_head():
    law = waiting.build_waiting_law(0.5, 0.5, B=9.0)
    # direct integration of r^(-1.5) over [9, inf): 9^(-1/2) / (1/2) = 2/3
    assert float(law.tail_mass(0.5)) == pytest.approx(2.0 / 3.0)
    assert float(law.head_height(0.5)) == pytest.approx(1.0 / 27.0)


def test_too_small_threshold_rejected():
    with pytest.raises(InvalidTailMass):
        waiting.build_waiting_law(0.5, 0.5, B=1.0)  # tail mass would be 2


def test_bad_exponent_range_rejected():
    with pytest.raises(InvalidTailMass):
        waiting.build_waiting_law(0.0, 0.5)
    with pytest.raises(InvalidTailMass):
        waiting.build_waiting_law(0.5, 1.0)


def test_inverse_cdf_tail_value():
    law = waiting.build_waiting_law(0.5, 0.5, B=4.0)
    # invert the tail survival r^(-gamma)/gamma at u = 0.75
    assert float(waiting.sample_waiting(law, 0.5, 0.75)) == pytest.approx(64.0)


def test_sample_approaches_support_infimum():
    law = waiting.build_waiting_law(0.5, 0.5, B=4.0)
    for u in (1e-12, 1e-9, 1e-6):
        r = float(waiting.sample_waiting(law, 0.5, u))
        assert 4.0 <= r < 4.0 + 1e-4


def test_survival_values():
    law = waiting.build_waiting_law(0.5, 0.5, B=4.0)
    assert float(waiting.tail_prob(law, 0.5, 4.0)) == pytest.approx(1.0)
    assert float(waiting.tail_prob(law, 0.5, 16.0)) == pytest.approx(0.5)
    assert float(waiting.tail_prob(law, 0.5, 0.0)) == pytest.approx(1.0)


def test_normalization_random_exponents():
    law = waiting.build_waiting_law(0.2, 0.6)
    rng = np.random.default_rng(5)
    gammas = rng.uniform(0.2, 0.6, size=100)
    total = law.tail_mass(gammas) + law.head_height(gammas) * law.B
    assert np.max(np.abs(total - 1.0)) < 1e-12


def test_tail_density_exact_closed_form():
    law = waiting.build_waiting_law(0.3, 0.6)
    rs = np.array([law.B, 2.0 * law.B, 50.0 * law.B])
    for g in (0.3, 0.45, 0.6):
        assert np.array_equal(law.density(g, rs), rs ** (-1.0 - g))


def test_density_below_one_everywhere():
    law = waiting.build_waiting_law(0.2, 0.6)
    rs = np.linspace(0.0, 3.0 * law.B, 500)
    for g in (0.2, 0.4, 0.6):
        assert np.max(law.density(g, rs)) <= 1.0 + 1e-12


@settings(max_examples=200, deadline=None)
@given(
    gamma=st.floats(0.21, 0.59),
    u1=st.floats(1e-6, 1.0 - 1e-6),
    u2=st.floats(1e-6, 1.0 - 1e-6),
)
def test_sampler_monotone_in_u(gamma, u1, u2):
    law = waiting.build_waiting_law(0.2, 0.6)
    lo, hi = min(u1, u2), max(u1, u2)
    r_lo = float(law.sample(gamma, lo))
    r_hi = float(law.sample(gamma, hi))
    assert r_lo <= r_hi


def test_empirical_tail_matches_survival():
    # 10^6 stratified-uniform draws against the analytic survival, three
    # binomial standard errors
    law = waiting.build_waiting_law(0.5, 0.5)
    n = 1_000_000
    u = (np.arange(n) + 0.5) / n
    rng = np.random.default_rng(11)
    rng.shuffle(u)
    r = law.sample(0.5, u)
    for t in (4.0, 8.0, 64.0):
        p_ana = float(waiting.tail_prob(law, 0.5, t))
        p_emp = float(np.mean(r > t))
        se = math.sqrt(max(p_ana * (1.0 - p_ana), 1e-12) / n)
        assert abs(p_emp - p_ana) <= max(3.0 * se, 2.0 / n)


def test_check_rate_constant_and_bound():
    law = waiting.build_waiting_law(0.5, 0.5)
    f = waiting.RateTestFunction(fn=lambda y: y * np.exp(-y), lipschitz=1.0)
    rep = waiting.check_rate(law, 0.5, f, [0.1, 0.05, 0.025, 0.0125])
    assert rep.constant == pytest.approx(4.0)  # B^(1-a)/(1-a) with empty head
    assert np.all(rep.errors <= rep.bound_values)
    assert np.all(np.diff(rep.errors) < 0)


def test_check_rate_fitted_order_asymptotic():
    for alpha in (0.3, 0.5, 0.7):
        law = waiting.build_waiting_law(alpha, alpha)
        f = waiting.RateTestFunction(fn=lambda y: y * np.exp(-y), lipschitz=1.0)
        ladder = [h / law.B for h in (0.1, 0.05, 0.025, 0.0125)]
        rep = waiting.check_rate(law, alpha, f, ladder)
        assert rep.fitted_order >= (1.0 - alpha) - 0.1


def test_check_rate_requires_matching_exponent():
    law = waiting.build_waiting_law(0.5, 0.5)
    f = waiting.RateTestFunction(fn=lambda y: y * np.exp(-y), lipschitz=1.0)
    with pytest.raises(ValueError):
        waiting.check_rate(law, 0.4, f, [0.1])


def test_discretized_law_shares_the_tail():
    law = waiting.build_waiting_law(0.5, 0.5)
    dlaw = waiting.discretize_waiting_law(law, 0.5, 32, 200.0)
    assert dlaw.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(dlaw.values) > 0)
    # atom values are affine in the index up to the lump
    j = np.arange(len(dlaw.values) - 1)
    assert np.allclose(dlaw.values[:-1], dlaw.offset + dlaw.spacing * j)
    # sampling concentrates where the analytic mass is
    u = (np.arange(100_000) + 0.5) / 100_000
    r = dlaw.sample(0.5, u)
    p_emp = float(np.mean(r >= 100.0))
    p_ana = float(np.sum(dlaw.probs[dlaw.values >= 100.0]))
    assert p_emp == pytest.approx(p_ana, abs=1e-4)


def test_discretized_law_needs_pure_tail():
    law = waiting.build_waiting_law(0.5, 0.5, B=9.0)  # has a head
    with pytest.raises(InvalidTailMass):
        waiting.discretize_waiting_law(law, 0.5, 16, 100.0)
