import math

import numpy as np
import pytest
from scipy import stats

from conftest import CountingModel, ForcedStream, QuadraticModel
from core.diagnostics import effective_sample_size
from core.errors import NonFiniteState
from core.mass import MassSpec
from core.rng import RngStream
from core.samplers import (EnhancedKernel, HmcKernel, ThtKernel, hmc_step, mass_enhanced_step,
                           run_chain, run_parallel_chains, tht_step)
from core.schedule import CosineSchedule, IndexDistribution, MassSchedule
from schemas.results import StepResult
from schemas.sampler import EnhancedConfig, HmcConfig, ThtConfig
from targets.augmented import AugmentedTarget, GappedTarget
from targets.mixture import GaussianMixture


def _tht(K=20, window=2, L=1, N=24, eta_star=1.0, eps=0.2, a=0.5, dim=1, schedule=None, psi=None):
    schedule = schedule or CosineSchedule(eta_star=eta_star, c_eta=0.0, K=K)
    return ThtConfig(eps=eps, a=a, L=L, N=N, schedule=schedule,
                     psi=psi or IndexDistribution.windowed_uniform(K, window), mass=MassSpec.identity(dim))


def _identity_kernel(x, rng):
    return StepResult(next_x=x, accepted_move=False, delta_H=math.nan, proposals_used=0, acceptable_found=0)


# --- configuration checks ---

def test_tht_config_rejects_L_above_N():
    with pytest.raises(ValueError):
        _tht(L=30, N=24)


def test_tht_config_rejects_period_mismatch():
    with pytest.raises(ValueError):
        _tht(schedule=CosineSchedule(1.0, 0.0, 20), psi=IndexDistribution.point_mass(30))


def test_hmc_config_rejects_bad_step():
    with pytest.raises(ValueError):
        HmcConfig(eps=0.0, n_leapfrog=5, mass=MassSpec.identity(1))


# --- HMC and mass-enhanced HMC ---

def test_tiny_step_hmc_always_accepts(quadratic):
    cfg = HmcConfig(eps=1e-6, n_leapfrog=1, mass=MassSpec.identity(1))
    rng = RngStream(1)
    x = np.zeros(1)
    accepted = 0
    for _ in range(1000):
        res = hmc_step(quadratic, x, cfg, rng)
        accepted += res.accepted_move
        x = res.next_x
    assert accepted >= 999


def test_enhanced_reduces_to_hmc():
    model = GaussianMixture.symmetric_pair([-1.0], [1.5], 0.7)
    hmc = HmcConfig(eps=0.3, n_leapfrog=1, mass=MassSpec.identity(1))
    enh = EnhancedConfig(mass=MassSpec.identity(1), alpha=1.0, eps_tilde=0.3, N=1, L=1)
    r1, r2 = RngStream(99), RngStream(99)
    x1 = x2 = np.array([0.2])
    for _ in range(200):
        a = hmc_step(model, x1, hmc, r1)
        b = mass_enhanced_step(model, x2, enh, r2)
        np.testing.assert_array_equal(a.next_x, b.next_x)
        assert a.accepted_move == b.accepted_move
        x1, x2 = a.next_x, b.next_x


def test_enhanced_rejects_uphill_path_with_near_one_lambda(quadratic):
    cfg = EnhancedConfig(mass=MassSpec.identity(1), alpha=100.0, eps_tilde=0.01, N=20, L=1)
    res = mass_enhanced_step(quadratic, np.zeros(1), cfg, ForcedStream(1 - 1e-12, 1.0))
    assert res.proposals_used == 20
    assert not res.accepted_move
    np.testing.assert_array_equal(res.next_x, np.zeros(1))


def test_hmc_does_not_cross_far_modes():
    mix = GaussianMixture.symmetric_pair([-200.0], [200.0], 1.0)
    cfg = HmcConfig(eps=0.2, n_leapfrog=32, mass=MassSpec.identity(1))
    out = run_chain(HmcKernel(mix, cfg), [-200.0], 1000, RngStream(4))
    assert np.all(out.states[:, 0] < 0)


# --- THT ---

def test_tht_point_mass_short_path_never_accepts(quadratic, rng):
    cfg = _tht(K=20, N=19, psi=IndexDistribution.point_mass(20))
    x = np.array([0.5])
    for _ in range(50):
        res = tht_step(quadratic, x, cfg, rng)
        assert not res.accepted_move
        assert res.acceptable_found == 0
        np.testing.assert_array_equal(res.next_x, x)


def test_tht_flat_schedule_full_period_accepts(quadratic, rng):
    K = 10
    cfg = _tht(K=K, N=K, schedule=MassSchedule.constant(0.0, K), psi=IndexDistribution.point_mass(K), eps=1e-5)
    x = np.array([0.3])
    accepted = 0
    for _ in range(100):
        res = tht_step(quadratic, x, cfg, rng)
        assert res.k0 == 0
        accepted += res.accepted_move
        x = res.next_x
    assert accepted >= 99


def test_tht_potential_calls_follow_support(rng):
    model = CountingModel(QuadraticModel(1))
    cfg = _tht(K=20, window=2, L=20, N=20)
    res = tht_step(model, np.array([0.4]), cfg, rng)
    assert res.proposals_used == 20
    assert not res.accepted_move
    assert model.potential_calls == 1 + 5


def test_tht_trace_marks_off_support(quadratic, rng):
    cfg = _tht(K=20, window=2, L=20, N=20)
    res = tht_step(quadratic, np.array([0.4]), cfg, rng, record_trace=True)
    assert len(res.h_trace) == 20
    off = [t for t in res.h_trace if not cfg.psi.in_support(t[1])]
    assert len(off) == 15
    assert all(t[2] == math.inf and not t[3] for t in off)


def test_tht_non_finite_velocity_is_rejected(quadratic):
    cfg = _tht()
    res = tht_step(quadratic, np.array([0.1]), cfg, ForcedStream(0.5, 1e300))
    assert not res.accepted_move
    np.testing.assert_array_equal(res.next_x, [0.1])


def test_tht_stationary_on_standard_normal(quadratic):
    cfg = _tht(K=20, N=20, eta_star=0.5, psi=IndexDistribution.point_mass(20))
    out = run_chain(ThtKernel(quadratic, cfg), [0.0], 2000, RngStream(21))
    draws = out.states[101:, 0]
    assert abs(draws.mean()) < 0.15
    assert 0.8 < draws.var() < 1.25


@pytest.mark.slow
def test_hmc_stationary_on_standard_normal(quadratic):
    cfg = HmcConfig(eps=0.2, n_leapfrog=32, mass=MassSpec.identity(1))
    out = run_chain(HmcKernel(quadratic, cfg), [0.0], 20_000, RngStream(5))
    draws = out.states[1:, 0]
    ess = effective_sample_size(draws)
    assert abs(draws.mean()) < 3 * draws.std() / math.sqrt(ess)
    assert 0.9 < draws.var() < 1.1
    thinned = draws[::max(int(len(draws) / ess), 1)]
    assert stats.kstest(thinned, "norm").statistic < 0.02 + 1.63 / math.sqrt(len(thinned))


@pytest.mark.slow
def test_enhanced_stationary_on_standard_normal(quadratic):
    cfg = EnhancedConfig(mass=MassSpec.identity(1), alpha=2.0, eps_tilde=0.1, N=200, L=1)
    out = run_chain(EnhancedKernel(quadratic, cfg), [0.0], 20_000, RngStream(6))
    assert 0.9 < out.states[1:, 0].var() < 1.1


@pytest.mark.slow
@pytest.mark.parametrize("target", ["normal", "mixture"])
def test_tht_exactness(target):
    if target == "normal":
        model = GaussianMixture.single([0.0], 1.0)
        cdf = stats.norm.cdf
    else:
        model = GaussianMixture.symmetric_pair([-5.0], [5.0], 1.0)
        cdf = lambda x: 0.5 * stats.norm.cdf(x, -5, 1) + 0.5 * stats.norm.cdf(x, 5, 1)
    cfg = _tht(K=40, window=3, L=4, N=46, eta_star=2.0, eps=0.2)
    out = run_chain(ThtKernel(model, cfg), [-5.0 if target == "mixture" else 0.0], 51_000, RngStream(31))
    draws = out.states[1001:, 0]
    ess = effective_sample_size(draws)
    critical = 1.63 / math.sqrt(ess)
    assert stats.kstest(draws, cdf).statistic < critical
    if target == "mixture":
        assert 0.45 <= np.mean(draws > 0) <= 0.55


def test_tht_acceptability_is_monotone_in_energy(rng):
    model = GaussianMixture([0.3, 0.7], [[-2.0], [1.5]], [0.6, 1.0])
    cfg = _tht(K=20, window=4, L=5, N=24, eta_star=1.5, eps=0.3)
    x = np.array([0.0])
    checked = 0
    for _ in range(300):
        res = tht_step(model, x, cfg, rng, record_trace=True)
        evaluated = [(dh, ok) for _, _, dh, ok in res.h_trace if math.isfinite(dh)]
        accepted = [dh for dh, ok in evaluated if ok]
        refused = [dh for dh, ok in evaluated if not ok]
        if accepted and refused:
            assert max(accepted) < min(refused)
            checked += 1
        x = res.next_x
    assert checked > 20


def _lag_one_counts(draws, inner_edges):
    bins = np.digitize(draws, inner_edges)
    n = inner_edges.size + 1
    counts = np.zeros((n, n))
    np.add.at(counts, (bins[:-1], bins[1:]), 1)
    return counts


@pytest.mark.slow
def test_tht_lag_one_transitions_are_symmetric():
    model = GaussianMixture([0.3, 0.7], [[-2.0], [1.5]], [0.6, 1.0])
    cfg = _tht(K=20, window=2, L=1, N=24, eta_star=1.0, eps=0.3)
    out = run_chain(ThtKernel(model, cfg), [0.0], 40_000, RngStream(37))
    draws = out.states[1:, 0]
    inner = np.quantile(draws, np.linspace(0.1, 0.9, 9))
    batches = np.array([_lag_one_counts(b, inner) for b in np.array_split(draws, 40)])
    skew = batches - batches.transpose(0, 2, 1)
    mean = skew.mean(axis=0)
    se = skew.std(axis=0, ddof=1) / math.sqrt(len(batches))
    assert np.all(np.abs(mean) <= 4 * se + 1e-12)


@pytest.mark.slow
def test_tht_keeps_exact_draws_exact_across_support_gap():
    base = GappedTarget.two_sided_gap()
    target = AugmentedTarget(base, GaussianMixture.single([0.0], 5.0), log_nu=-25.0)
    # the gap_bridge experiment's default sampler settings
    cfg = _tht(K=100, window=2, L=5, N=105, eta_star=2.5, eps=0.2)
    starts = base.sample(RngStream(41), 600)
    ends = np.empty_like(starts)
    for i, x0 in enumerate(starts):
        rng = RngStream.derive(41, i)
        x = np.array([x0])
        for _ in range(5):
            x = tht_step(target, x, cfg, rng).next_x
        ends[i] = x[0]
    assert np.any((starts > 0) != (ends > 0))
    assert np.mean(ends > 0) == pytest.approx(base.component_masses()[1], abs=0.06)
    assert stats.kstest(ends, np.vectorize(base.cdf)).pvalue > 0.01


# --- chains ---

def test_run_chain_identity_kernel():
    out = run_chain(_identity_kernel, [1.5, -2.0], 10, RngStream(0))
    assert out.states.shape == (11, 2)
    assert np.all(out.states == np.array([1.5, -2.0]))
    assert out.acceptance_rate == 0.0


def test_run_chain_rejects_non_finite_start(quadratic):
    with pytest.raises(NonFiniteState):
        run_chain(ThtKernel(quadratic, _tht()), [math.nan], 5, RngStream(0))


def test_run_chain_is_reproducible(quadratic):
    k = ThtKernel(quadratic, _tht())
    a = run_chain(k, [0.3], 50, RngStream(8))
    b = run_chain(k, [0.3], 50, RngStream(8))
    np.testing.assert_array_equal(a.states, b.states)
    assert [r.k0 for r in a.step_results] == [r.k0 for r in b.step_results]


def test_parallel_chains_independent_of_workers():
    model = GaussianMixture.single([0.0], 1.0)
    kernel = ThtKernel(model, _tht())
    inits = [[0.0], [1.0], [-1.0]]
    serial = run_parallel_chains(kernel, inits, 30, base_seed=17, n_workers=1)
    pooled = run_parallel_chains(kernel, inits, 30, base_seed=17, n_workers=3)
    for s, p in zip(serial, pooled):
        assert s.chain_index == p.chain_index
        np.testing.assert_array_equal(s.states, p.states)
    assert not np.array_equal(serial[0].states[1:], run_parallel_chains(kernel, [[0.0], [0.0]], 30, 17)[1].states[1:])


def test_parallel_chains_need_inits(quadratic):
    with pytest.raises(ValueError):
        run_parallel_chains(ThtKernel(quadratic, _tht()), [], 10, 0)


@pytest.mark.slow
def test_tht_chains_visit_both_far_modes():
    mix = GaussianMixture.symmetric_pair([-200.0], [200.0], 1.0)
    cfg = _tht(K=500, window=4, L=9, N=509, eta_star=6.0, eps=0.1)
    outs = run_parallel_chains(ThtKernel(mix, cfg), [[-200.0]] * 12, 100, base_seed=3)
    for out in outs:
        assert np.any(out.states[:, 0] > 0) and np.any(out.states[:, 0] < 0)


def test_state_dimension_must_match_mass(quadratic, rng):
    with pytest.raises(ValueError):
        tht_step(quadratic, np.zeros(2), _tht(dim=1), rng)
