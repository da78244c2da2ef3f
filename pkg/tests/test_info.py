import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lemonlens.dist import Beta, Uniform
from lemonlens.errors import ConfigError, DegenerateError
from lemonlens.info import (
    InfoStructure,
    disclosure_equilibria,
    expected_welfare,
    garble,
    garble_chain,
    is_mps,
    persuasion_check,
    posterior_means,
    signal_posteriors,
    unraveling_holds,
)
from lemonlens.pricing import revenue
from lemonlens.scenario import MarketScenario, PosteriorMeanDistribution

from conftest import PEAKED

P = PosteriorMeanDistribution.from_pairs
UNIFORM_24 = MarketScenario(2.0, 4.0, 1.0, Uniform())

# scripts/oracle_counterexample.py (scipy.stats + brute-force price + quadrature)
ORACLE_FULL_CS = 0.7016545729437856
ORACLE_FULL_TS = 5.08069459579493
ORACLE_POOLED_CS = 0.7051664740464424
ORACLE_POOLED_TS = 5.080945851879195


def test_full_revelation_posteriors():
    mu = posterior_means(InfoStructure.full_revelation((2.0, 4.0), (0.5, 0.5)))
    assert mu.atoms == ((2.0, 0.5), (4.0, 0.5))


def test_uninformative_posteriors():
    mu = posterior_means(InfoStructure.uninformative((2.0, 4.0), (0.5, 0.5)))
    assert mu.atoms == ((3.0, 1.0),)


def test_noisy_channel_posteriors():
    info = InfoStructure((2.0, 4.0), (0.5, 0.5), ("a", "b"), ((0.75, 0.25), (0.25, 0.75)))
    mu = posterior_means(info)
    assert mu.close_to(P([(2.5, 0.5), (3.5, 0.5)]), tol=1e-12)


def test_zero_probability_signals_dropped():
    info = InfoStructure((2.0, 4.0), (1.0, 0.0), ("a", "b"), ((1.0, 0.0), (0.0, 1.0)))
    assert [x for x, _, _ in signal_posteriors(info)] == ["a"]


def test_equal_means_are_merged():
    info = InfoStructure((2.0, 4.0), (0.5, 0.5), ("a", "b", "c"), ((0.5, 0.25, 0.25), (0.5, 0.25, 0.25)))
    assert posterior_means(info).atoms == ((3.0, 1.0),)


def test_degenerate_channel_raises():
    info = InfoStructure((2.0,), (1.0,), ("a",), ((1.0,),))
    object.__setattr__(info, "prior", (0.0,))  # bypass validation to reach the Bayes step
    with pytest.raises(DegenerateError):
        posterior_means(info)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(qualities=(2.0, 4.0), prior=(0.5, 0.6), signals=("a",), channel=((1.0,), (1.0,))),
        dict(qualities=(2.0, 4.0), prior=(0.5, 0.5), signals=("a", "b"), channel=((0.5, 0.6), (1.0, 0.0))),
        dict(qualities=(2.0, 4.0), prior=(0.5, 0.5), signals=("a", "a"), channel=((1.0, 0.0), (0.0, 1.0))),
        dict(qualities=(2.0,), prior=(1.0,), signals=("a",), channel=((1.2,),)),
    ],
)
def test_info_structure_validation(kwargs):
    with pytest.raises(ConfigError):
        InfoStructure(**kwargs)


def test_mps_examples():
    spread, pooled = P([(2, 0.5), (4, 0.5)]), P([(3, 1)])
    assert is_mps(spread, pooled)
    assert not is_mps(pooled, spread)
    assert is_mps(spread, P([(2.5, 0.5), (3.5, 0.5)]))
    assert not is_mps(spread, P([(2.5, 0.5), (3.6, 0.5)]))


def test_garble_chain_single_pooling():
    chain = garble_chain(P([(2, 0.5), (4, 0.5)]), 1, seed=0)
    assert chain == [P([(2, 0.5), (4, 0.5)]), P([(3, 1)])]


def test_garble_chain_full_pooling():
    prior = P([(q, 0.25) for q in (1.0, 2.0, 3.0, 4.0)])
    chain = garble_chain(prior, 3, seed=5)
    assert chain[-1].is_degenerate
    assert chain[-1].mean == pytest.approx(2.5, abs=1e-12)


def test_garble_chain_preconditions():
    with pytest.raises(ConfigError):
        garble_chain(P([(2, 0.5), (4, 0.5)]), 2, seed=0)
    with pytest.raises(ConfigError):
        garble_chain(P([(3, 1)]), 1, seed=0)


def test_garble_chain_deterministic():
    prior = P([(q, 0.1) for q in np.linspace(1, 4, 10)], normalize=True)
    assert garble_chain(prior, 7, seed=11) == garble_chain(prior, 7, seed=11)


weights = st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8)


@settings(max_examples=80, deadline=None)
@given(weights, st.integers(0, 2**32 - 1))
def test_chain_is_blackwell_ordered(ws, seed):
    qs = np.linspace(1.0, 5.0, len(ws))
    prior = P(zip(qs, ws), normalize=True)
    chain = garble_chain(prior, len(ws) - 1, seed)
    for a, b in zip(chain, chain[1:]):
        assert is_mps(a, b)
        assert abs(b.mean - prior.mean) <= 1e-9
    assert chain[-1].is_degenerate


@settings(max_examples=80, deadline=None)
@given(weights, st.integers(0, 2**32 - 1))
def test_random_garbling_is_a_contraction(ws, seed):
    qs = np.linspace(1.0, 5.0, len(ws))
    prior = P(zip(qs, ws), normalize=True)
    rng = np.random.default_rng(seed)
    kernel = rng.dirichlet(np.ones(3), size=len(ws))
    mu = garble(prior, kernel)
    assert is_mps(prior, mu)
    assert abs(mu.mean - prior.mean) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(0.01, 1.0), min_size=2, max_size=3),
    st.lists(st.lists(st.floats(0.0, 1.0), min_size=3, max_size=3), min_size=3, max_size=3),
)
def test_bayes_preserves_prior_mean(prior, rows):
    n = len(prior)
    rows = [r for r in rows[:n]]
    if any(sum(r) == 0 for r in rows):
        return
    channel = tuple(tuple(x / sum(r) for x in r) for r in rows)
    w = tuple(p / sum(prior) for p in prior)
    w = w[:-1] + (1.0 - math.fsum(w[:-1]),)
    channel = tuple(row[:-1] + (1.0 - math.fsum(row[:-1]),) for row in channel)
    if any(x < 0 for row in channel for x in row) or w[-1] < 0:
        return
    info = InfoStructure(tuple(np.linspace(2, 4, n)), w, ("a", "b", "c"), channel)
    assert posterior_means(info).mean == pytest.approx(info.prior_mean, abs=1e-9)


def test_expected_welfare_uniform_full():
    w = expected_welfare(UNIFORM_24, P([(2, 0.5), (4, 0.5)]))
    assert w.e_rev == pytest.approx(0.34375, abs=1e-12)
    assert w.e_cs == pytest.approx(0.171875, abs=1e-12)
    assert w.e_ts == pytest.approx(w.e_rev + w.e_cs, abs=1e-9)
    # p = (q + c)/2 averages to 2.0 over {2, 4}
    assert w.e_price == pytest.approx(2.0, abs=1e-12)


def test_expected_welfare_uniform_pooled():
    w = expected_welfare(UNIFORM_24, P([(3, 1)]))
    assert w.e_rev == pytest.approx(1 / 3, abs=1e-12)
    assert w.e_cs == pytest.approx(1 / 6, abs=1e-12)
    assert w.e_price == pytest.approx(2.0, abs=1e-12)


def test_expected_welfare_single_atom_is_pointwise():
    s = MarketScenario(2.0, 4.0, 1.0, Beta(3, 3))
    assert expected_welfare(s, P([(2.7, 1)])).e_rev == revenue(s, 2.7)


def test_peaked_normal_counterexample_regression():
    s = MarketScenario(5.0, 20.0, 1.0, PEAKED)
    full = expected_welfare(s, P([(5, 0.5), (20, 0.5)]))
    pooled = expected_welfare(s, P([(12.5, 1)]))
    assert full.e_cs == pytest.approx(ORACLE_FULL_CS, abs=1e-8)
    assert full.e_ts == pytest.approx(ORACLE_FULL_TS, abs=1e-8)
    assert pooled.e_cs == pytest.approx(ORACLE_POOLED_CS, abs=1e-8)
    assert pooled.e_ts == pytest.approx(ORACLE_POOLED_TS, abs=1e-8)
    assert full.e_cs < pooled.e_cs and full.e_ts < pooled.e_ts
    assert full.e_rev > pooled.e_rev


def test_persuasion_uniform():
    res = persuasion_check(UNIFORM_24, P([(2, 0.5), (4, 0.5)]), 100, seed=1)
    assert res.optimal_is_full and res.max_gap < 0
    pooled_gap = 1 / 3 - 0.34375
    assert res.max_gap >= pooled_gap - 1e-12
    assert pooled_gap == pytest.approx(-0.0104167, abs=1e-6)


def test_persuasion_degenerate():
    res = persuasion_check(UNIFORM_24, P([(3, 1)]), 10, seed=1)
    assert res.optimal_is_full and res.samples == 0


def test_disclosure_full_revelation_uniform():
    eqs = disclosure_equilibria(UNIFORM_24, InfoStructure.full_revelation((2.0, 4.0), (0.5, 0.5)))
    strategies = [e.strategy for e in eqs]
    assert {"x0": "disclose", "x1": "disclose"} in strategies
    full = next(e for e in eqs if set(e.strategy.values()) == {"disclose"})
    assert full.off_path_belief == 2.0
    for e in eqs:
        withheld = [x for x, a in e.strategy.items() if a == "withhold"]
        means = {e.induced.atoms[0][0]} if not withheld else {
            m for x, _, m in signal_posteriors(InfoStructure.full_revelation((2.0, 4.0), (0.5, 0.5)))
            if x in withheld
        }
        assert len(means) == 1
        assert e.induced == P([(2, 0.5), (4, 0.5)])


def test_disclosure_uninformative():
    eqs = disclosure_equilibria(UNIFORM_24, InfoStructure.uninformative((2.0, 4.0), (0.5, 0.5)))
    assert len(eqs) == 2
    assert all(e.induced.atoms == ((3.0, 1.0),) for e in eqs)


def test_disclosure_three_signals():
    info = InfoStructure(
        (2.0, 3.0, 4.0),
        (0.3, 0.4, 0.3),
        ("lo", "mid", "hi"),
        ((0.7, 0.2, 0.1), (0.2, 0.6, 0.2), (0.1, 0.2, 0.7)),
    )
    s = MarketScenario(2.0, 4.0, 1.0, Beta(3, 3))
    eqs = disclosure_equilibria(s, info)
    assert eqs
    assert all(e.induced.close_to(posterior_means(info)) for e in eqs)
    for e in eqs:
        pooled = e.posterior_means["∅"]
        for x, _, m in signal_posteriors(info):
            if m > pooled + 1e-9:
                assert e.strategy[x] == "disclose"


def test_disclosure_signal_cap():
    n = 13
    info = InfoStructure.full_revelation(tuple(np.linspace(2, 4, n)), tuple([1 / n] * n))
    with pytest.raises(ConfigError):
        disclosure_equilibria(UNIFORM_24, info)


def test_unraveling_small_sweep():
    lattice = [0.0, 0.5, 1.0]
    for rows in itertools.product([(a, 1 - a) for a in lattice], repeat=2):
        info = InfoStructure((2.0, 4.0), (0.5, 0.5), ("a", "b"), rows)
        assert unraveling_holds(UNIFORM_24, info)
