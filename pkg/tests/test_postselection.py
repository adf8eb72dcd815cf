import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lossgbs.fock import CatInput, SqueezerBank, binomial_thin, total_photon_pmf
from lossgbs.linear_optics import (
    gaussian_output_distribution,
    haar_random_unitary,
    lossless_output_distribution,
    lossy_output_distribution,
    patterns_up_to,
)
from lossgbs.postselection import (
    PostSelectionPolicy,
    SampleRecord,
    apply_postselection,
    build_cat_policy,
    build_nonuniform_policy,
    build_policy,
    cat_post_selection_probability,
    default_truncation,
    equivalent_transmission,
    mapping_ratio,
    max_equivalent_transmission,
    mode_truncation,
    pnr_suppression_ratio,
    post_selection_probability,
    post_selection_probability_nonuniform,
    postselection_yield,
)


def r_prime_for(r: float, c: float) -> float:
    return math.atanh(math.tanh(r) / c)


def test_mapping_ratio():
    assert mapping_ratio([1.1] * 3, [2.6] * 3) == pytest.approx(0.80938, abs=1e-5)
    with pytest.raises(ValueError):
        mapping_ratio([1.0], [1.0])
    with pytest.raises(ValueError, match="not mappable"):
        mapping_ratio([1.0, 0.5], [2.0, 2.0])
    with pytest.raises(ValueError):
        mapping_ratio([1.0, 0.5], [2.0])
    with pytest.raises(ValueError):
        mapping_ratio([0.0], [1.0])


def test_equivalent_transmission_worked_points():
    assert equivalent_transmission(0.32, 0.80938) == pytest.approx(0.4496, abs=1e-3)
    assert equivalent_transmission(0.5, 0.89738) == pytest.approx(0.5513, abs=1e-3)
    assert equivalent_transmission(1.0, 0.5) == 1.0
    with pytest.raises(ValueError):
        equivalent_transmission(0.5, 1.0)


@settings(max_examples=100)
@given(st.floats(0.0, 0.999), st.floats(0.01, 0.999))
def test_equivalent_transmission_improves(eta, c):
    assert equivalent_transmission(eta, c) > eta


def test_max_equivalent_transmission():
    assert max_equivalent_transmission(0.32, 1.1) == pytest.approx(1 - 0.68 * math.tanh(1.1))
    assert max_equivalent_transmission(0.32, 1.1) == pytest.approx(0.4557, abs=1e-4)
    assert max_equivalent_transmission(0.3, 1e-9) == pytest.approx(1.0)
    for rp in (1.2, 2.0, 5.0):
        c = math.tanh(1.1) / math.tanh(rp)
        assert max_equivalent_transmission(0.32, 1.1) >= equivalent_transmission(0.32, c)


def test_fig3b_policy_values():
    pol = build_policy(1.4, 2.5, 0.5, 113)
    assert post_selection_probability(pol, 113) == 1.0
    assert post_selection_probability(pol, 114) == 0.0
    expected = (pol.c * pol.eta / pol.eta_prime) ** 2
    assert post_selection_probability(pol, 111) == pytest.approx(expected, rel=1e-12)
    assert post_selection_probability(pol, 111) == pytest.approx(0.6624, abs=1e-4)


def test_alpha_solves_normalization():
    pol = build_policy(1.1, 2.6, 0.32, 219)
    literal = pol.c ** (pol.alpha - 219) * (pol.eta_prime / pol.eta) ** 219
    assert literal == pytest.approx(1.0, rel=1e-9)
    assert pol.alpha == pytest.approx(219 * (1 - math.log(pol.eta_prime / pol.eta) / math.log(pol.c)))


def test_policy_rejects_inconsistent_fields():
    with pytest.raises(ValueError):
        PostSelectionPolicy(c=0.8, eta=0.5, eta_prime=0.7, n0=4, alpha=1.0)
    with pytest.raises(ValueError):
        PostSelectionPolicy(c=0.8, eta=0.5, eta_prime=0.6, n0=4, alpha=1.0)


def test_zero_truncation_keeps_only_vacuum():
    pol = build_policy(0.5, 0.9, 0.5, 0)
    assert post_selection_probability(pol, 0) == 1.0
    assert post_selection_probability(pol, 2) == 0.0
    recs = [SampleRecord((n,)) for n in (0, 2, 4)]
    kept = list(apply_postselection(recs, pol, np.random.default_rng(0)))
    assert [r.total for r in kept] == [0]


@settings(max_examples=50)
@given(st.floats(0.1, 1.5), st.floats(0.05, 2.0), st.floats(0.01, 1.0), st.integers(1, 60))
def test_probability_increasing_below_truncation(r, dr, eta, n0):
    pol = build_policy(r, r + dr, eta, n0)
    probs = [post_selection_probability(pol, n) for n in range(n0 + 1)]
    assert all(0 <= p <= 1 for p in probs)
    assert all(a < b for a, b in zip(probs, probs[1:]))
    assert probs[-1] == 1.0


@pytest.mark.parametrize("r,r_prime,eta", [(0.5, 1.0, 0.2), (1.0, 2.5, 0.1), (1.4, 2.5, 0.5), (1.1, 2.6, 0.32)])
def test_pnr_suppression_ratio(r, r_prime, eta):
    pol = build_policy(r, r_prime, eta, 40)
    for delta in range(1, 10):
        ratio = pnr_suppression_ratio(pol, delta)
        assert ratio < 1
        assert ratio == pytest.approx(post_selection_probability(pol, 40 - delta), rel=1e-12)


def test_nonuniform_reduces_to_uniform():
    uni = build_policy(0.6, 1.0, 0.4, 6)
    per = build_nonuniform_policy(0.6, 1.0, [0.4, 0.4, 0.4], 6)
    for pat in patterns_up_to(3, 7):
        assert post_selection_probability_nonuniform(per, pat) == pytest.approx(
            post_selection_probability(uni, sum(pat)), rel=1e-12
        )


def test_nonuniform_example_ratio():
    r = 0.5
    pol = build_nonuniform_policy(r, r_prime_for(r, 0.8), [0.5, 0.25], 4)
    g1, g2 = pol.mode_eta_primes[0] / 0.5, pol.mode_eta_primes[1] / 0.25
    ratio = post_selection_probability_nonuniform(pol, (1, 1)) / post_selection_probability_nonuniform(pol, (2, 0))
    assert ratio == pytest.approx(g2 / g1, rel=1e-12)
    assert post_selection_probability_nonuniform(pol, (0, 4)) == pytest.approx(1.0)
    assert post_selection_probability_nonuniform(pol, (3, 2)) == 0.0


def test_nonuniform_zero_transmission_mode():
    pol = build_nonuniform_policy(0.5, 0.8, [0.5, 0.0], 4)
    assert post_selection_probability_nonuniform(pol, (2, 0)) > 0
    with pytest.raises(ValueError):
        post_selection_probability_nonuniform(pol, (1, 1))


def test_nonuniform_maps_detector_loss_exactly():
    bank = SqueezerBank((0.4, 0.6), 2)
    u = haar_random_unitary(2, 5).unitary
    etas = (0.5, 0.25)
    rp = [r_prime_for(r, 0.8) for r in bank.squeezing]
    pol = build_nonuniform_policy(bank.squeezing, rp, etas, 6)
    got = gaussian_output_distribution(bank, np.diag(np.sqrt(etas)) @ u, 6).reweighted(pol.pattern_probability)
    target = gaussian_output_distribution(SqueezerBank(tuple(rp), 2), np.diag(np.sqrt(pol.mode_eta_primes)) @ u, 6)
    target = target.conditioned(6)
    assert max(abs(got[p] - target[p]) for p in target.patterns()) < 1e-10


def test_lossy_reweighting_identity_small_instance():
    bank = SqueezerBank((0.4, 0.6), 3)
    u = haar_random_unitary(3, 11).unitary
    rp = tuple(r_prime_for(r, 0.8) for r in bank.squeezing)
    pol = build_policy(bank.squeezing, rp, 0.5, 6)
    assert pol.eta_prime == pytest.approx(0.6)
    got = lossy_output_distribution(bank, u, 0.5, 6).reweighted(pol.pattern_probability)
    target = lossy_output_distribution(SqueezerBank(rp, 3), u, pol.eta_prime, 6).conditioned(6)
    assert max(abs(got[p] - target[p]) for p in target.patterns()) < 1e-8


def test_conditional_distribution_unchanged():
    bank = SqueezerBank((0.4, 0.6), 3)
    u = haar_random_unitary(3, 11).unitary
    pol = build_policy(bank.squeezing, [r_prime_for(r, 0.8) for r in bank.squeezing], 0.5, 6)
    before = lossy_output_distribution(bank, u, 0.5, 6)
    after = before.reweighted(pol.pattern_probability, normalize=False)
    for total in range(7):
        pats = [p for p in before.patterns() if sum(p) == total]
        zb = sum(before[p] for p in pats)
        za = sum(after[p] for p in pats)
        for p in pats:
            assert after[p] / za == pytest.approx(before[p] / zb, rel=1e-12)


def test_cat_policy_identity_and_ratio():
    assert cat_post_selection_probability(1.0, 1.0, 0.5, 0.5, 2, 6) == 1.0
    assert cat_post_selection_probability(1.0, 1.0, 0.5, 0.5, 8, 6) == 0.0
    pol = build_cat_policy(1.0, 1.3, 0.5, 6)
    assert pol.c == pytest.approx(1 / 1.69)
    for n in range(7):
        assert pol.probability(n) == pytest.approx(
            cat_post_selection_probability(1.0, 1.3, 0.5, pol.eta_prime, n, 6), rel=1e-12
        )
    with pytest.raises(ValueError):
        cat_post_selection_probability(1.3, 1.0, 0.5, 0.5, 2, 6)


def test_cat_ratio_independent_of_n():
    from lossgbs.fock import cat_photon_pmf

    a, b = 0.9, 1.4
    pa, pb = cat_photon_pmf(a, 10), cat_photon_pmf(b, 10)
    ratios = [pa[n] / pb[n] * (b / a) ** (2 * n) for n in (0, 2, 4, 6)]
    assert np.ptp(ratios) < 1e-12 * ratios[0]


def test_cat_b3_identity():
    alphas = np.array([0.8, 0.6j, 1.1 * np.exp(0.4j)])
    cats_a = CatInput(tuple(alphas), 3)
    cats_b = CatInput(tuple(1.35 * alphas), 3)
    by_total: dict = {}
    for pat in patterns_up_to(3, 6):
        if any(n % 2 for n in pat):
            continue
        by_total.setdefault(sum(pat), []).append(cats_a.pattern_probability(pat) / cats_b.pattern_probability(pat))
    for ratios in by_total.values():
        assert max(ratios) - min(ratios) < 1e-12 * max(ratios)


def test_yield_examples():
    pol_b = build_policy(1.4, 2.5, 0.5, 113)
    y_b = postselection_yield(pol_b, SqueezerBank.uniform(1.4, 50))
    assert not y_b.truncation_warning
    assert 0 <= y_b.value <= y_b.cumulative_mass
    pol_a = build_policy(1.1, 2.6, 0.32, 219)
    y_a = postselection_yield(pol_a, SqueezerBank.uniform(1.1, 216))
    assert 2.5e-7 <= y_a.value <= 1e-6


def test_yield_decreases_with_r_prime():
    bank = SqueezerBank.uniform(1.4, 50)
    ys = [postselection_yield(build_policy(1.4, rp, 0.5, 113), bank).value for rp in np.arange(1.5, 3.01, 0.1)]
    assert all(a > b for a, b in zip(ys, ys[1:]))


def test_yield_tends_to_cumulative_mass():
    # r' barely above r makes P_post ~ 1 below N0
    bank = SqueezerBank.uniform(0.8, 10)
    pol = build_policy(0.8, 0.8 + 1e-9, 0.6, 12)
    y = postselection_yield(pol, bank)
    mass = binomial_thin(total_photon_pmf(bank, 400), 0.6).cumulative(12)
    assert y.value == pytest.approx(mass, rel=1e-6)


def test_yield_rejects_wrong_eta():
    with pytest.raises(ValueError):
        postselection_yield(build_policy(1.0, 2.0, 0.5, 10), SqueezerBank.uniform(1.0, 4), eta=0.4)


def test_retention_frequency_monte_carlo():
    pol = build_policy(1.4, 2.5, 0.5, 113)
    p = post_selection_probability(pol, 110)
    n = 200_000
    kept = sum(1 for _ in apply_postselection((SampleRecord((110,)) for _ in range(n)), pol, np.random.default_rng(8)))
    assert abs(kept / n - p) < 3 * math.sqrt(p * (1 - p) / n)


def test_apply_postselection_determinism_and_order():
    pol = build_policy(0.5, 0.9, 0.5, 6)
    recs = [SampleRecord((n % 7,), index=i) for i, n in enumerate(range(300))]
    a = list(apply_postselection(recs, pol, np.random.default_rng(4)))
    b = list(apply_postselection(recs, pol, np.random.default_rng(4)))
    assert a == b
    assert [r.index for r in a] == sorted(r.index for r in a)
    assert all(r.retained and 0 < r.retention_probability <= 1 for r in a)
    everything = list(apply_postselection(recs, pol, np.random.default_rng(4), keep_discarded=True))
    assert len(everything) == len(recs)
    assert [r for r in everything if r.retained] == a


def test_strict_saturation():
    pol = build_policy(0.5, 0.9, 0.5, 4)
    recs = [SampleRecord((2, 2), flags=frozenset({"saturated"}))] * 50
    assert len(list(apply_postselection(recs, pol, np.random.default_rng(0)))) == 50
    assert not list(apply_postselection(recs, pol, np.random.default_rng(0), strict=True))


def test_truncation_choices():
    recs = [SampleRecord((1, 2)), SampleRecord((4, 4)), SampleRecord((0, 0))]
    assert default_truncation(recs) == 8
    assert default_truncation([]) == 0
    assert mode_truncation(1.1, 216) == 380


def test_lossless_reweighting_via_totals():
    bank = SqueezerBank((0.4, 0.6), 3)
    u = haar_random_unitary(3, 11).unitary
    rp = tuple(r_prime_for(r, 0.8) for r in bank.squeezing)
    src = lossless_output_distribution(bank, u, 6)
    dst = lossless_output_distribution(SqueezerBank(rp, 3), u, 6)
    p_src = total_photon_pmf(bank, 6).probabilities
    p_dst = total_photon_pmf(SqueezerBank(rp, 3), 6).probabilities
    for pat, prob in src:
        n = sum(pat)
        if p_src[n] > 0:
            assert abs(dst[pat] - prob * p_dst[n] / p_src[n]) < 1e-9
