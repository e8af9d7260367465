import numpy as np
import pytest

from splitflow.errors import InvalidExponent, OutsideLmfRegime
from splitflow.simulate import (
    SimConfig,
    sample_metaorder_length,
    simulate,
    theoretical_prefactor,
)

ZETA_25 = 1.34148725725091717975676969335  # zeta(2.5), 30-digit reference


def zeta_partial(s: float, n: int = 2_000_000) -> float:
    """Independent zeta check: partial sum plus integral tail bound midpoint."""
    k = np.arange(1, n + 1, dtype=np.float64)
    head = np.sum(k**-s)
    # tail between integral bounds [n^(1-s)/(s-1), (n+1)^(1-s)/(s-1)]; use midpoint
    lo = (n + 1) ** (1 - s) / (s - 1)
    hi = n ** (1 - s) / (s - 1)
    return head + 0.5 * (lo + hi)


def test_zeta_normalization_constant():
    assert zeta_partial(2.5) == pytest.approx(ZETA_25, abs=1e-9)


def test_length_one_probability():
    # P(L=1) = 1/zeta(alpha+1); for alpha=1.5 that is 0.745441...
    rng = np.random.default_rng(7)
    draws = sample_metaorder_length(rng, 1.5, size=1_000_000)
    p1 = np.mean(draws == 1)
    assert p1 == pytest.approx(1.0 / ZETA_25, abs=2e-3)


@pytest.mark.parametrize(
    "x, want",
    [
        (2, 0.25455870371122283),
        (5, 0.051666932853584132),
        (10, 0.016942910990531514),
        (100, 0.0005007036002933395),
    ],
)
def test_length_ccdf(x, want):
    # P(L >= x) for alpha=1.5, frozen from the Hurwitz-zeta ratio.
    rng = np.random.default_rng(11)
    draws = sample_metaorder_length(rng, 1.5, size=2_000_000)
    got = np.mean(draws >= x)
    # binomial sampling noise: sd = sqrt(p(1-p)/n)
    sd = np.sqrt(want * (1 - want) / draws.size)
    assert abs(got - want) < 5 * sd + 1e-6


def test_length_ccdf_loglog_slope():
    # survival curve of the drawn lengths falls like L**-alpha over [10, 1e3]
    rng = np.random.default_rng(19)
    draws = sample_metaorder_length(rng, 1.5, size=1_000_000)
    xs = np.unique(draws[(draws >= 10) & (draws <= 1000)])
    ccdf = np.array([(draws >= x).mean() for x in xs])
    slope = np.polyfit(np.log10(xs), np.log10(ccdf), 1)[0]
    assert slope == pytest.approx(-1.5, abs=0.05)


def test_length_sampler_rejects_bad_exponent():
    rng = np.random.default_rng(0)
    with pytest.raises(InvalidExponent):
        sample_metaorder_length(rng, 1.0, size=10)
    with pytest.raises(InvalidExponent):
        sample_metaorder_length(rng, -0.5, size=10)


def test_simulate_deterministic():
    cfg = SimConfig(n_st=20, alpha=1.5, n_steps=5000, seed=123)
    a = simulate(cfg)
    b = simulate(cfg)
    assert np.array_equal(a.signs, b.signs)
    assert np.array_equal(a.trader_codes, b.trader_codes)
    c = simulate(SimConfig(n_st=20, alpha=1.5, n_steps=5000, seed=124))
    assert not np.array_equal(a.signs, c.signs)


def test_simulate_shapes_and_signs():
    dp = simulate(SimConfig(n_st=15, alpha=1.6, n_steps=4000, seed=5))
    assert dp.n_events == 4000
    assert set(np.unique(dp.signs)) <= {-1, 1}
    assert dp.seq.shape == (4000,)
    assert np.all(np.diff(dp.seq) == 1)


def test_truth_log_reconstructs_stream():
    """Replaying each trader's metaorder log must reproduce its sign stream."""
    dp = simulate(SimConfig(n_st=10, alpha=1.5, n_steps=3000, seed=9))
    truth = dp.truth
    assert truth is not None
    assert len(truth.metaorder_logs) == 10
    table = np.asarray(dp.trader_table)
    total = 0
    for i, log in enumerate(truth.metaorder_logs):
        code = int(np.flatnonzero(table == f"st-{i:04d}")[0])
        mine = dp.signs[dp.trader_codes == code]
        rebuilt = np.repeat(log.signs, log.lengths)
        assert np.array_equal(rebuilt, mine)
        total += int(log.lengths.sum())
    assert total == dp.n_events


def test_pareto_intensities_vary():
    dp = simulate(
        SimConfig(n_st=50, alpha=1.5, n_steps=20_000, seed=3, intensity_mode="pareto")
    )
    w = dp.truth.intensities
    assert w.shape == (50,)
    assert w.max() / w.min() > 2.0
    assert np.all(w > 0)


def test_explicit_weights():
    w = np.array([1.0, 1.0, 8.0])
    dp = simulate(
        SimConfig(
            n_st=3,
            alpha=1.5,
            n_steps=30_000,
            seed=21,
            intensity_mode="explicit",
            weights=w,
        )
    )
    ids = np.asarray(dp.trader_table)[dp.trader_codes]
    counts = np.array([(ids == f"st-{k:04d}").sum() for k in range(3)])
    # trader 2 holds 80% of the pick rate
    assert counts[2] > 3 * max(counts[0], counts[1])
    assert dp.truth.intensities[2] == pytest.approx(0.8)


def test_rt_fraction_mixes_noise_traders():
    dp = simulate(
        SimConfig(n_st=10, alpha=1.5, n_steps=20_000, seed=2, rt_fraction=0.4, n_rt_ids=7)
    )
    ids = np.asarray(dp.trader_table)[dp.trader_codes]
    rt_mask = np.char.startswith(ids, "rt-")
    assert rt_mask.mean() == pytest.approx(0.4, abs=0.02)
    assert len(np.unique(ids[rt_mask])) == 7
    st_seen = set(np.unique(ids[~rt_mask]).tolist())
    assert st_seen <= {f"st-{i:04d}" for i in range(10)}


def test_events_per_day():
    dp = simulate(SimConfig(n_st=5, alpha=1.5, n_steps=1000, seed=1, events_per_day=100))
    assert dp.day_index is not None
    assert dp.day_index[0] == 0
    assert dp.day_index[-1] == 9
    assert np.all(np.diff(dp.day_index) >= 0)
    assert np.bincount(dp.day_index).tolist() == [100] * 10


def test_pure_noise_flow_has_no_memory():
    dp = simulate(SimConfig(n_st=5, alpha=1.5, n_steps=100_000, seed=31, rt_fraction=1.0))
    x = dp.signs.astype(np.float64)
    n = x.size
    acf = np.array([np.dot(x[:-t], x[t:]) / (n - t) for t in range(1, 101)])
    assert np.max(np.abs(acf)) < 3.0 / np.sqrt(n)


def test_theoretical_prefactor_value():
    # n_st^(alpha-2)/alpha at alpha=1.5, n_st=100: 100^(-0.5)/1.5
    assert theoretical_prefactor(1.5, 100) == pytest.approx(0.0666666666, abs=1e-6)
    assert theoretical_prefactor(1.5, 1) == pytest.approx(2.0 / 3.0, rel=1e-12)


def test_theoretical_prefactor_regime():
    with pytest.raises(OutsideLmfRegime):
        theoretical_prefactor(2.0, 100)
    with pytest.raises(OutsideLmfRegime):
        theoretical_prefactor(1.0, 100)
    with pytest.raises(OutsideLmfRegime):
        theoretical_prefactor(2.5, 100)


def test_simulate_validates_config():
    with pytest.raises(InvalidExponent):
        simulate(SimConfig(n_st=5, alpha=0.9, n_steps=100, seed=0))
    with pytest.raises(ValueError):
        simulate(SimConfig(n_st=0, alpha=1.5, n_steps=100, seed=0))
