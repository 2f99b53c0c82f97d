"""Bound right-hand sides, gap/regret/error metrics, and the reference
equilibrium solver."""

import numpy as np
import pytest
from scipy.special import logsumexp

from dsmd import (GraphSpec, MatrixGameSpec, MixingSchedule, StepSchedule,
                  TopologyBundle, build_graph, make_matrix_game,
                  metropolis_weights, run_dsmd, time_averaged_iterate,
                  uniform_bipartite)
from dsmd import metrics as mx
from dsmd.games import expected_cost, lipschitz_profile
from dsmd.geometry import Regularizer
from dsmd.topology import DecayConstants, decay_constants

import oracles as orc

PEN = np.array([[[1.0, -1.0], [-1.0, 1.0]]])
IDENT = np.array([[[1.0, 0.0], [0.0, 1.0]]])


def simple_game(base, reg="none", noise=0.0):
    return MatrixGameSpec(n1=1, n2=1, action_counts=base.shape[1:],
                          base_matrices=base, noise_half_width=noise,
                          regularization=reg, seed=0)


def bundle(kind1, kind2, n1, n2, seed=0):
    g1 = build_graph(GraphSpec(kind1, n1, 0.7, seed))
    g2 = build_graph(GraphSpec(kind2, n2, 0.7, seed + 1))
    return TopologyBundle(
        w1=MixingSchedule((metropolis_weights(g1),)),
        w2=MixingSchedule((metropolis_weights(g2),)),
        w12=uniform_bipartite(n2, n1),
        w21=uniform_bipartite(n1, n2),
    )


def hand_params(**overrides):
    base = dict(L=1.0, nu1=0.0, nu2=0.0, r1_sq=1.0, r2_sq=1.0,
                decay1=DecayConstants(gamma=1.0, theta=0.5),
                decay2=DecayConstants(gamma=1.0, theta=0.5),
                lambda1=1.0, lambda2=1.0, n1=1, n2=1,
                alpha=lambda t: 1.0, schedule_kind="power")
    base.update(overrides)
    return mx.BoundParams(**base)


@pytest.fixture(scope="module")
def desk_params():
    """Bound parameters of a 12-agent setup at full action scale."""
    game = make_matrix_game(12, 12, 20, 20, noise_half_width=0.5, seed=0)
    topo = bundle("random", "complete", 12, 12)
    sched = StepSchedule("power", exponent=0.5)
    x0 = np.full((12, 20), 1 / 20.0)
    return mx.bound_params(game, "entropic", topo, sched, x0, x0)


# ---------------------------------------------------------------------------
# Consensus envelope
# ---------------------------------------------------------------------------

def test_consensus_envelope_hand_example():
    p = hand_params()
    # n Gamma theta^2 Lam + 2 (L+nu) + n Gamma (L+nu) (theta + 1)
    assert mx.consensus_envelope(p, 1, 3) == pytest.approx(3.75, abs=1e-15)
    assert mx.consensus_envelope(p, 1, 1) == pytest.approx(3.0, abs=1e-15)
    with pytest.raises(ValueError):
        mx.consensus_envelope(p, 1, 0)


def test_consensus_envelope_vanishing_theta_limit():
    # with theta ~ 0 the history sum collapses to its s = t-1 term, so
    # H(t) ~ 2(L+nu) alpha(t-1) + n Gamma (L+nu) alpha(t-2)
    p = hand_params(nu1=0.5, decay1=DecayConstants(gamma=1.2, theta=1e-12),
                    n1=3, alpha=lambda t: float(max(t, 1)) ** -0.5)
    for t in (2, 5, 17):
        lim = 2 * 1.5 * p.alpha(t - 1) + 3 * 1.2 * 1.5 * p.alpha(t - 2)
        assert mx.consensus_envelope(p, 1, t) == pytest.approx(lim, abs=1e-9)


def test_consensus_envelope_matches_naive_sum(desk_params):
    for l in (1, 2):
        ser = mx.consensus_envelope_series(desk_params, l, 200)
        for t in (1, 2, 3, 17, 100, 200):
            naive = orc.naive_consensus_envelope(desk_params, l, t)
            assert ser[t - 1] == pytest.approx(naive, rel=1e-12)
        assert mx.consensus_envelope(desk_params, l, 200) == ser[-1]


# ---------------------------------------------------------------------------
# Regret bounds
# ---------------------------------------------------------------------------

def test_regret_bound_cc_matches_naive_sum(desk_params):
    ser = mx.regret_bound_cc_series(desk_params, 500)
    for T in (1, 2, 10, 137, 500):
        naive = orc.naive_regret_cc(desk_params, T)
        assert mx.regret_bound_cc(desk_params, T) == pytest.approx(
            naive, rel=1e-12)
        assert ser[T - 1] == pytest.approx(naive, rel=1e-12)
    assert np.all(np.diff(ser) > 0)  # strictly increasing in the horizon
    with pytest.raises(ValueError):
        mx.regret_bound_cc(desk_params, 0)


def test_regret_bound_sc_matches_naive_and_gating(desk_params):
    game = make_matrix_game(12, 12, 20, 20, noise_half_width=0.5,
                            regularization="entropic", seed=0)
    topo = bundle("random", "complete", 12, 12)
    sched = StepSchedule("strongly_convex", modulus=1.0)
    x0 = np.full((12, 20), 1 / 20.0)
    p = mx.bound_params(game, "entropic", topo, sched, x0, x0)
    for T in (1, 5, 100, 500):
        assert mx.regret_bound_sc(p, T) == pytest.approx(
            orc.naive_regret_sc(p, T), rel=1e-12)
    assert mx.sc_regret_coefficient(p) > 0
    # the sc bound is reserved for the matching schedule
    with pytest.raises(ValueError):
        mx.regret_bound_sc(desk_params, 10)
    with pytest.raises(ValueError):
        mx.regret_bound_sc(p, 0)


# ---------------------------------------------------------------------------
# Ergodic gap / MSE bounds
# ---------------------------------------------------------------------------

def test_gap_bound_matches_naive_sum(desk_params):
    ser = mx.ergodic_gap_bound_series(desk_params, 500)
    for t in (1, 2, 10, 137, 500):
        naive = orc.naive_gap_bound(desk_params, t)
        assert mx.ergodic_gap_bound(desk_params, t) == pytest.approx(
            naive, rel=1e-12)
        assert ser[t - 1] == pytest.approx(naive, rel=1e-12)
    m1, m2 = mx._m1_m2(desk_params)
    n1, n2 = orc.naive_m1_m2(desk_params)
    assert m1 == pytest.approx(n1, rel=1e-12)
    assert m2 == pytest.approx(n2, rel=1e-12)
    with pytest.raises(ValueError):
        mx.ergodic_gap_bound(desk_params, 0)


def test_gap_bound_limits():
    p = hand_params(nu1=0.5, nu2=0.5, n1=2, n2=2,
                    decay1=decay_constants(2, 0.25),
                    decay2=decay_constants(2, 0.25))
    _, m2 = mx._m1_m2(p)
    # constant steps: (m1 + m2 t) / t -> m2
    assert mx.ergodic_gap_bound(p, 10 ** 5) == pytest.approx(m2, rel=1e-3)
    decaying = hand_params(nu1=0.5, nu2=0.5, n1=2, n2=2,
                           decay1=decay_constants(2, 0.25),
                           decay2=decay_constants(2, 0.25),
                           alpha=lambda t: (t + 1.0) ** -0.5)
    assert (mx.ergodic_gap_bound(decaying, 10 ** 4)
            < mx.ergodic_gap_bound(decaying, 10 ** 2))


def test_mse_bound_is_scaled_gap_bound(desk_params):
    t = 137
    g = mx.ergodic_gap_bound(desk_params, t)
    assert mx.mse_bound_sc(desk_params, 2.0, t) == pytest.approx(g)
    assert mx.mse_bound_sc(desk_params, 1.0, t) == pytest.approx(2.0 * g)
    with pytest.raises(ValueError):
        mx.mse_bound_sc(desk_params, 0.0, t)


def test_simplex_diameter_sq_values():
    assert mx.simplex_diameter_sq(Regularizer("euclidean", 7)) == 1.0
    got = mx.simplex_diameter_sq(Regularizer("entropic", 20))
    assert got == pytest.approx(np.log(20.0) + 9.0 * np.log(10.0))


def test_bound_params_assembly():
    game = make_matrix_game(3, 3, 4, 4, noise_half_width=0.5, seed=2)
    topo = bundle("cycle", "complete", 3, 3)
    sched = StepSchedule("power", exponent=0.5)
    rng = np.random.default_rng(0)
    x1 = rng.dirichlet(np.ones(4), 3)
    x2 = np.full((3, 4), 0.25)
    p = mx.bound_params(game, "euclidean", topo, sched, x1, x2)
    prof = lipschitz_profile(game, "euclidean")
    assert p.L == prof.L and p.nu1 == prof.nu1 and p.nu2 == prof.nu2
    assert p.r1_sq == 1.0 and p.r2_sq == 1.0
    assert p.lambda1 == pytest.approx(
        max(np.linalg.norm(x1[i]) for i in range(3)))
    assert p.lambda2 == pytest.approx(np.linalg.norm(x2[0]))
    assert p.decay1 == topo.w1.decay() and p.decay2 == topo.w2.decay()
    assert p.alpha(4) == 0.5 and p.schedule_kind == "power"
    half = mx.bound_params(game, "euclidean", topo, sched, x1, x2,
                           l_scale=0.5)
    assert half.L == pytest.approx(0.5 * p.L)


# ---------------------------------------------------------------------------
# Best responses and the gap
# ---------------------------------------------------------------------------

def test_best_response_value_examples():
    u = np.array([0.5, 0.5])
    e1 = np.array([1.0, 0.0])
    pen = simple_game(PEN)
    assert mx.best_response_value(pen, "max", u) == 0.0
    assert mx.best_response_value(pen, "min", u) == 0.0
    iden = simple_game(IDENT)
    assert mx.best_response_value(iden, "max", e1) == 1.0
    assert mx.best_response_value(iden, "min", e1) == 0.0
    zero_reg = simple_game(np.zeros((1, 2, 2)), reg="entropic")
    assert mx.best_response_value(zero_reg, "max", e1) == pytest.approx(
        np.log(2.0))
    with pytest.raises(ValueError):
        mx.best_response_value(pen, "saddle", u)


def test_regularized_best_response_matches_dense_grid():
    pen_reg = simple_game(PEN, reg="entropic")
    m = PEN[0]
    q = np.linspace(1e-12, 1.0 - 1e-12, 100001)
    grid = np.stack([q, 1.0 - q], axis=1)
    ent = np.sum(grid * np.log(grid), axis=1)
    for p in (np.array([0.3, 0.7]), np.array([0.9, 0.1])):
        closed = mx.best_response_value(pen_reg, "max", p)
        vals = p @ m @ grid.T + np.sum(p * np.log(p)) - ent
        assert closed == pytest.approx(vals.max(), abs=1e-9)
        assert closed >= vals.max() - 1e-12  # true optimum dominates grid
        closed_min = mx.best_response_value(pen_reg, "min", p)
        vals_min = grid @ m @ p + ent - np.sum(p * np.log(p))
        assert closed_min == pytest.approx(vals_min.min(), abs=1e-9)
        assert closed_min <= vals_min.min() + 1e-12


def test_gap_examples_and_nonnegativity():
    pen = simple_game(PEN)
    u = np.array([0.5, 0.5])
    e1 = np.array([1.0, 0.0])
    assert mx.gap(pen, u, u) == 0.0
    assert mx.gap(pen, e1, e1) == 2.0
    rng = np.random.default_rng(3)
    game = make_matrix_game(1, 1, 5, 4, seed=7)
    game_reg = MatrixGameSpec(1, 1, (5, 4), game.base_matrices, 0.0,
                              "entropic", 7)
    for _ in range(50):
        a = rng.dirichlet(np.ones(5))
        b = rng.dirichlet(np.ones(4))
        assert mx.gap(game, a, b) >= -1e-10
        assert mx.gap(game_reg, a, b) >= -1e-10


def test_gap_vanishes_at_reference_equilibrium():
    game = make_matrix_game(1, 1, 4, 3, seed=8)
    ne = mx.ne_reference(game)
    assert mx.gap(game, *ne) <= 1e-9 + 1e-15


def test_mean_gap_matches_pairwise_average():
    game = make_matrix_game(2, 2, 3, 3, noise_half_width=0.5, seed=9)
    topo = bundle("complete", "complete", 2, 2)
    trajs = [run_dsmd(game, topo, StepSchedule("power"), 8, seed=s)
             for s in (0, 1)]
    t = 5
    manual = np.mean([
        np.mean([mx.gap(game,
                        time_averaged_iterate(traj, 1, i, t),
                        time_averaged_iterate(traj, 2, j, t))
                 for i in range(2) for j in range(2)])
        for traj in trajs])
    assert mx.mean_gap(trajs, game, t) == pytest.approx(manual, abs=1e-12)


# ---------------------------------------------------------------------------
# Pseudo regret
# ---------------------------------------------------------------------------

def test_pseudo_regret_single_round_example():
    iden = simple_game(IDENT)
    x_seq = np.array([[0.5, 0.5], [1.0, 0.0]])
    u_seq = np.array([[0.5, 0.5], [1.0, 0.0]])
    assert mx.pseudo_regret(x_seq, u_seq, iden, 1) == 1.0
    with pytest.raises(ValueError):
        mx.pseudo_regret(x_seq, u_seq, iden, 0)


def test_pseudo_regret_constant_game_is_zero():
    # all payoffs equal: every strategy performs identically
    flat = simple_game(np.full((1, 3, 3), 0.4))
    rng = np.random.default_rng(1)
    x = rng.dirichlet(np.ones(3), 6)
    u = rng.dirichlet(np.ones(3), 6)
    ser = mx.pseudo_regret_series(x, u, flat, 5)
    assert np.abs(ser).max() < 1e-12


def test_pseudo_regret_adaptive_play_can_beat_comparator():
    # switching to the current-best action each round beats every fixed
    # action, so the regret is negative; nonnegativity is a property of
    # constant played sequences only
    iden = simple_game(IDENT)
    x_seq = np.array([[0.5, 0.5], [0.0, 1.0], [1.0, 0.0]])
    u_seq = np.array([[0.5, 0.5], [1.0, 0.0], [0.0, 1.0]])
    assert mx.pseudo_regret(x_seq, u_seq, iden, 2) == -1.0


def test_pseudo_regret_nonnegative_for_constant_play():
    game = make_matrix_game(3, 3, 4, 4, noise_half_width=0.5, seed=1)
    topo = bundle("random", "random", 3, 3)
    traj = run_dsmd(game, topo, StepSchedule("power"), 30,
                    geometry="entropic", seed=5)
    for pick in (0, 5, 30):
        const = np.tile(traj.x1[pick, 0], (31, 1))
        ser = mx.pseudo_regret_series(const, traj.u2[:, 0, :], game, 30)
        assert ser.min() >= 0.0


@pytest.mark.parametrize("reg", ["none", "entropic"])
def test_pseudo_regret_matches_definitional_sums(reg):
    game = make_matrix_game(3, 3, 4, 4, noise_half_width=0.5, seed=1)
    variant = MatrixGameSpec(3, 3, (4, 4), game.base_matrices, 0.5, reg, 1)
    topo = bundle("random", "random", 3, 3)
    traj = run_dsmd(game, topo, StepSchedule("power"), 30,
                    geometry="entropic", seed=5)
    m = mx.mean_matrix(variant)
    x_s, u_s = traj.x1[:, 0, :], traj.u2[:, 0, :]
    ser = mx.pseudo_regret_series(x_s, u_s, variant, 30)
    for T in (1, 7, 30):
        played = sum(expected_cost(variant, x_s[t], u_s[t])
                     for t in range(1, T + 1))
        c = m @ u_s[1:T + 1].sum(axis=0)
        if reg == "none":
            comparator = c.min()
        else:
            e_u = sum(float(np.sum(u_s[t] * np.log(u_s[t])))
                      for t in range(1, T + 1))
            comparator = -T * logsumexp(-c / T) - e_u
        assert ser[T - 1] == pytest.approx(played - comparator, abs=1e-10)
    assert mx.pseudo_regret(x_s, u_s, variant, 30) == ser[29]


# ---------------------------------------------------------------------------
# Per-path series vs definitional recomputation
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def short_run():
    game = make_matrix_game(3, 3, 4, 4, noise_half_width=0.5,
                            regularization="entropic", seed=4)
    topo = bundle("cycle", "complete", 3, 3)
    traj = run_dsmd(game, topo, StepSchedule("strongly_convex", modulus=1.0),
                    15, geometry="entropic", seed=2)
    return game, traj


def test_gap_series_matches_mean_gap(short_run):
    game, traj = short_run
    ser = mx.gap_series(traj, game)
    assert ser.shape == (15,)
    for t in (1, 4, 15):
        assert ser[t - 1] == pytest.approx(mx.mean_gap([traj], game, t),
                                           abs=1e-12)


def test_consensus_error_series_matches_definition(short_run):
    _, traj = short_run
    for l, norm_kind in ((1, "l1"), (2, "l1"), (1, "l2")):
        ser = mx.consensus_error_series(traj, l, norm_kind)
        x = traj.x1 if l == 1 else traj.x2
        assert ser.shape == (16, 3)
        for t in (0, 7, 15):
            xbar = x[t].mean(axis=0)
            for i in range(3):
                d = x[t, i] - xbar
                want = (np.abs(d).sum() if norm_kind == "l1"
                        else np.linalg.norm(d))
                assert ser[t, i] == pytest.approx(want, abs=1e-14)


def test_error_series_match_definitions(short_run):
    game, traj = short_run
    ne = mx.ne_reference(game)
    abs_ser = mx.absolute_error_series(traj, ne)
    mse_ser = mx.xhat_mse_series(traj, ne, "l2")
    assert abs_ser.shape == (16,) and mse_ser.shape == (15,)
    for t in (0, 9, 15):
        want = mx.absolute_error(traj.x1[t], traj.x2[t], ne)
        assert abs_ser[t] == pytest.approx(want, abs=1e-13)
    for t in (1, 9, 15):
        h1 = np.stack([time_averaged_iterate(traj, 1, i, t)
                       for i in range(3)])
        h2 = np.stack([time_averaged_iterate(traj, 2, j, t)
                       for j in range(3)])
        want = (np.mean(np.linalg.norm(h1 - ne[0], axis=1) ** 2)
                + np.mean(np.linalg.norm(h2 - ne[1], axis=1) ** 2))
        assert mse_ser[t - 1] == pytest.approx(want, abs=1e-13)


def test_absolute_error_crafted_offsets():
    ne = (np.array([0.5, 0.5]), np.array([0.5, 0.5]))
    off = np.array([1.0, -1.0]) / np.sqrt(2.0)
    x1 = np.stack([ne[0] + 0.2 * off, ne[0] - 0.2 * off])
    x2 = np.stack([ne[1] + 0.5 * off, ne[1] - 0.5 * off])
    assert mx.absolute_error(x1, x2, ne) == pytest.approx(0.7, abs=1e-14)
    x2_near = np.stack([ne[1] + 0.1 * off, ne[1] - 0.1 * off])
    assert mx.absolute_error(x1, x2_near, ne) == pytest.approx(0.3,
                                                               abs=1e-14)
    assert mx.absolute_error(np.tile(ne[0], (3, 1)),
                             np.tile(ne[1], (2, 1)), ne) == 0.0


# ---------------------------------------------------------------------------
# Reference equilibrium
# ---------------------------------------------------------------------------

def test_ne_reference_matching_pennies():
    ne = mx.ne_reference(simple_game(PEN))
    assert np.abs(np.concatenate(ne) - 0.5).max() < 1e-4
    assert mx.gap(simple_game(PEN), *ne) <= 1e-9


def test_ne_reference_regularized_symmetric_game():
    ne = mx.ne_reference(simple_game(PEN, reg="entropic"))
    assert np.allclose(ne[0], 0.5, atol=1e-8)
    assert np.allclose(ne[1], 0.5, atol=1e-8)


def test_ne_reference_zero_matrix():
    ne = mx.ne_reference(simple_game(np.zeros((1, 3, 3))))
    assert np.allclose(ne[0], 1 / 3, atol=1e-12)
    assert np.allclose(ne[1], 1 / 3, atol=1e-12)


def test_ne_reference_iteration_cap(monkeypatch):
    monkeypatch.setattr(mx, "_NE_ITER_CAP", 3)
    with pytest.raises(mx.NonConvergenceError):
        mx.ne_reference(make_matrix_game(1, 1, 4, 3, seed=8), 1e-12)
    asym = make_matrix_game(1, 1, 4, 3, regularization="entropic", seed=8)
    with pytest.raises(mx.NonConvergenceError):
        mx.ne_reference(asym, 1e-12)


# ---------------------------------------------------------------------------
# Series container
# ---------------------------------------------------------------------------

def test_metric_series_validation():
    ts = np.arange(1, 4)
    good = mx.MetricSeries("gap", "gap", ts, np.ones(3), np.zeros(3))
    assert good.metric == "gap"
    with pytest.raises(ValueError):
        mx.MetricSeries("gap", "gap", ts, np.ones(2), np.zeros(3))
    with pytest.raises(ValueError):
        mx.MetricSeries("gap", "gap", ts, np.array([1.0, np.nan, 1.0]),
                        np.zeros(3))
