"""Inner solver and the four design procedures."""
import itertools
import math

import numpy as np
import pytest

from pcs_shaper.capacity import EntropyGrid
from pcs_shaper.channel import LinkBudget
from pcs_shaper.constellation import ConstraintSet, \
    build_constellation, signed_amplitude_mean, symmetry_residual
from pcs_shaper.error_rate import ber_upper_bound
from pcs_shaper.exceptions import ConfigError, DegradedRegimeError, InfeasibleError
from pcs_shaper.solver import (
    CccpSettings,
    DesignProblem,
    LinearConstraints,
    inner_solve,
    linearized_ber_constraint,
    project_to_simplex,
    solve,
    solve_known_csi,
    solve_qos,
    solve_symmetric,
    solve_unknown_csi,
)

from conftest import dirichlet_interior, links_at_dbm


# ---------------------------------------------------------------------------
# independent QP oracle: enumerate KKT systems over all active-set guesses
# ---------------------------------------------------------------------------

def qp_oracle_max(q_mat, c_vec, a_ub=None, b_ub=None):
    """Maximize 1/2 x^T Q x + c^T x over the simplex with optional halfspaces.

    Exhaustively enumerates which bounds x_i = 0 and which inequalities are
    active, solves each equality-constrained KKT system, and keeps the best
    feasible point with the right multiplier signs.  Exact for n <= 6.
    """
    n = c_vec.size
    k = 0 if a_ub is None else a_ub.shape[0]
    best_val, best_x = -np.inf, None
    for zero_set in itertools.chain.from_iterable(
            itertools.combinations(range(n), r) for r in range(n)):
        free = [i for i in range(n) if i not in zero_set]
        for act in itertools.chain.from_iterable(
                itertools.combinations(range(k), r) for r in range(k + 1)):
            rows = [np.ones(n)]
            rhs = [1.0]
            for i in zero_set:
                e = np.zeros(n)
                e[i] = 1.0
                rows.append(e)
                rhs.append(0.0)
            for j in act:
                rows.append(a_ub[j])
                rhs.append(b_ub[j])
            a_eq = np.vstack(rows)
            m = a_eq.shape[0]
            kkt = np.zeros((n + m, n + m))
            kkt[:n, :n] = q_mat
            kkt[:n, n:] = a_eq.T
            kkt[n:, :n] = a_eq
            rhs_full = np.concatenate([-c_vec, rhs])
            try:
                sol = np.linalg.solve(kkt, rhs_full)
            except np.linalg.LinAlgError:
                continue
            x = sol[:n]
            if np.any(x < -1e-9):
                continue
            if a_ub is not None and np.any(a_ub @ x - b_ub > 1e-9):
                continue
            # the optimum solves the KKT system of its own active set, so the
            # feasible candidate with the highest objective is the optimum
            val = 0.5 * x @ q_mat @ x + c_vec @ x
            if val > best_val:
                best_val, best_x = val, np.maximum(x, 0.0)
    return best_val, best_x


def test_max_entropy_over_simplex_is_uniform():
    def fg(p):
        q = np.maximum(p, 1e-300)
        return float(-(q * np.log(q)).sum()), -(np.log(q) + 1.0)

    out = inner_solve(fg, 8)
    assert np.abs(out.probs - 1.0 / 8).max() < 1e-8


def test_projection_identity():
    q = np.array([0.1, 0.25, 0.4, 0.25])

    def fg(p):
        return -float((p - q) @ (p - q)), -2.0 * (p - q)

    out = inner_solve(fg, 4)
    assert np.abs(out.probs - q).max() < 1e-8


def test_concave_quadratic_matches_active_set_oracle():
    rng = np.random.default_rng(103)
    for trial in range(10):
        w = rng.standard_normal((4, 4))
        q_mat = -(w @ w.T) - 0.5 * np.eye(4)
        c_vec = rng.standard_normal(4)
        g_row = rng.standard_normal(4)
        b_val = float(g_row @ rng.dirichlet(np.ones(4)))   # guaranteed feasible
        a_ub = g_row[None, :]
        b_ub = np.array([b_val])

        def fg(p):
            return float(0.5 * p @ q_mat @ p + c_vec @ p), q_mat @ p + c_vec

        got = inner_solve(fg, 4, LinearConstraints(a_ub=a_ub, b_ub=b_ub))
        val = fg(got.probs)[0]
        want_val, want_x = qp_oracle_max(q_mat, c_vec, a_ub, b_ub)
        assert val == pytest.approx(want_val, abs=1e-5)
        assert np.abs(got.probs - want_x).max() < 1e-4


def test_inner_solve_signals_infeasible():
    a = np.array([[1.0, 1.0, 1.0, 1.0]])
    with pytest.raises(InfeasibleError):
        inner_solve(lambda p: (0.0, np.zeros(4)), 4,
                    LinearConstraints(a_ub=a, b_ub=np.array([0.5])))


def test_inner_solve_symmetric_subspace():
    target = np.array([0.4, 0.1, 0.2, 0.3])

    def fg(p):
        return -float((p - target) @ (p - target)), -2.0 * (p - target)

    out = inner_solve(fg, 4, LinearConstraints(symmetric=True))
    assert np.abs(symmetry_residual(out.probs)).max() < 1e-12
    sym_target = 0.5 * (target + target[::-1])
    assert np.abs(out.probs - sym_target).max() < 1e-8


def test_linearized_ber_constraint_properties(receiver, noise_params):
    rng = np.random.default_rng(107)
    led, bob, _, _, _ = links_at_dbm(25.0, receiver, noise_params)
    c = build_constellation(8, led.peak_amplitude)
    p0 = dirichlet_interior(rng, 8, floor=0.01)
    affine = linearized_ber_constraint(p0, bob, c)
    assert affine(p0) == pytest.approx(ber_upper_bound(c, p0, bob), rel=1e-12)
    for _ in range(25):
        p = rng.dirichlet(np.ones(8))
        assert affine(p) >= ber_upper_bound(c, p, bob) - 1e-12
    h = 1e-6
    for i in range(3):
        up, dn = p0.copy(), p0.copy()
        up[i] += h
        dn[i] -= h
        num = (ber_upper_bound(c, up, bob) - ber_upper_bound(c, dn, bob)) / (2 * h)
        assert affine.coef[i] == pytest.approx(num, rel=1e-5, abs=1e-10)


def _problem(variant, power_dbm, receiver, noise_params, mode="flicker", m=8,
             threshold=3.8e-3, alpha=0.01):
    led, bob, eve, eve_avg, _ = links_at_dbm(power_dbm, receiver, noise_params)
    c = build_constellation(m, led.peak_amplitude)
    known = variant in ("known_csi", "qos_max_eve_ber")
    return DesignProblem(
        variant=variant, constellation=c, bob_link=bob, dc_bias=led.dc_bias,
        constraints=ConstraintSet(pre_fec_threshold=threshold,
                                  flicker_alpha=alpha, mode=mode),
        eve_link=eve if known else None,
        eve_avg=None if known else eve_avg), led, bob, eve, eve_avg


def test_known_csi_unconstrained_reduction(receiver, noise_params):
    # huge alpha and a threshold near 1/2 make every constraint slack
    prob, led, bob, eve, _ = _problem("known_csi", 30.0, receiver, noise_params,
                                      threshold=0.499, alpha=1e6)
    res = solve_known_csi(prob, CccpSettings(n_starts=2, seed=0))
    gb = EntropyGrid(bob.composite_gain * prob.constellation.amplitudes, bob.sigma)
    ge = EntropyGrid(eve.composite_gain * prob.constellation.amplitudes, eve.sigma)
    const = math.log2(eve.sigma / bob.sigma)

    def fg(p):
        hb, gradb = gb.entropy_and_gradient(p)
        he, grade = ge.entropy_and_gradient(p)
        return hb - he + const, gradb - grade

    free = inner_solve(fg, 8)
    assert res.objective == pytest.approx(fg(free.probs)[0], abs=1e-4)


def test_traces_monotone_and_feasible(receiver, noise_params):
    for variant, mode in (("known_csi", "flicker"), ("unknown_csi", "flicker"),
                          ("unknown_csi_symmetric", "symmetric"),
                          ("qos_max_eve_ber", "flicker")):
        for power in (22.0, 28.0):
            prob, led, bob, _, _ = _problem(variant, power, receiver,
                                            noise_params, mode=mode)
            res = solve(prob, CccpSettings(n_starts=4, seed=2))
            trace = res.objective_trace
            assert all(b >= a - 1e-8 for a, b in zip(trace, trace[1:])), \
                f"{variant}@{power}: non-monotone trace {trace}"
            assert ber_upper_bound(prob.constellation, res.p_opt.probs, bob) \
                <= 3.8e-3 + 1e-8
            assert res.feasibility["simplex_sum_error"] < 1e-6
            assert res.iterations <= 50


def test_multi_start_determinism(receiver, noise_params):
    prob, *_ = _problem("known_csi", 24.0, receiver, noise_params)
    s = CccpSettings(n_starts=6, seed=42)
    r1 = solve_known_csi(prob, s)
    r2 = solve_known_csi(prob, s)
    assert np.array_equal(r1.p_opt.probs, r2.p_opt.probs)
    assert r1.objective_trace == r2.objective_trace
    assert r1.start_index == r2.start_index
    assert r1.iterations == r2.iterations


def test_symmetric_solution_is_exactly_symmetric(receiver, noise_params):
    for power in (23.0, 29.0):
        prob, led, _, _, _ = _problem("unknown_csi_symmetric", power, receiver,
                                      noise_params, mode="symmetric")
        res = solve_symmetric(prob, CccpSettings(n_starts=4, seed=1))
        assert np.abs(symmetry_residual(res.p_opt.probs)).max() <= 1e-9
        assert abs(signed_amplitude_mean(prob.constellation, res.p_opt.probs)) \
            <= 1e-9


def test_symmetric_large_noise_prefers_extreme_mass(receiver, noise_params):
    # when sigma >> peak amplitude and the reliability constraint is slack,
    # the output-entropy gain is first-order in the signal variance, so the
    # optimum concentrates mass on the extreme mirror pair rather than
    # spreading uniformly
    c = build_constellation(8, 1.0)
    bob = LinkBudget(composite_gain=1.0, sigma=25.0)
    eve_avg = LinkBudget(composite_gain=0.1, sigma=25.0)
    prob = DesignProblem(variant="unknown_csi_symmetric", constellation=c,
                         bob_link=bob, dc_bias=1.0,
                         constraints=ConstraintSet(pre_fec_threshold=0.499,
                                                   mode="symmetric"),
                         eve_avg=eve_avg)
    res = solve_symmetric(prob, CccpSettings(n_starts=4, seed=3))
    p = res.p_opt.probs
    assert p[0] + p[-1] > 0.9
    grid = EntropyGrid(bob.composite_gain * c.amplitudes, bob.sigma)
    assert grid.entropy(p) >= grid.entropy(np.ones(8) / 8)


def test_unknown_with_symmetric_mode_matches_solve_symmetric(receiver, noise_params):
    prob_u, *_ = _problem("unknown_csi", 27.0, receiver, noise_params,
                          mode="symmetric")
    prob_s, *_ = _problem("unknown_csi_symmetric", 27.0, receiver, noise_params,
                          mode="symmetric")
    res_u = solve_unknown_csi(prob_u, CccpSettings(n_starts=4, seed=5))
    res_s = solve_symmetric(prob_s, CccpSettings(n_starts=4, seed=5))
    assert res_u.objective == pytest.approx(res_s.objective, abs=1e-5)
    assert np.abs(res_u.p_opt.probs - res_s.p_opt.probs).max() < 1e-4


def test_unknown_objective_consistent_with_t_at_bound(receiver, noise_params):
    from pcs_shaper.capacity import secrecy_lb_estimate
    prob, led, bob, _, eve_avg = _problem("unknown_csi", 25.0, receiver,
                                          noise_params)
    res = solve_unknown_csi(prob, CccpSettings(n_starts=4, seed=7))
    t_opt = signed_amplitude_mean(prob.constellation, res.p_opt.probs) ** 2
    want = secrecy_lb_estimate(res.p_opt.probs, bob, eve_avg,
                               prob.constellation, t=t_opt)
    assert res.objective == pytest.approx(want, abs=1e-6)
    assert t_opt <= prob.constellation.peak_a**2 + 1e-9


def test_qos_sanity_path(receiver, noise_params):
    # eavesdropper link identical to the legitimate one, threshold wide open
    led, bob, _, _, _ = links_at_dbm(26.0, receiver, noise_params)
    c = build_constellation(8, led.peak_amplitude)
    prob = DesignProblem(variant="qos_max_eve_ber", constellation=c,
                         bob_link=bob, dc_bias=led.dc_bias,
                         constraints=ConstraintSet(pre_fec_threshold=0.499),
                         eve_link=bob)
    res = solve_qos(prob, CccpSettings(n_starts=2, seed=11))
    assert 0.0 < res.objective <= 1.0
    assert res.feasibility["flicker_excess"] <= 1e-12


def test_degraded_regime_guard(receiver, noise_params):
    led, bob, eve, _, _ = links_at_dbm(28.0, receiver, noise_params)
    c = build_constellation(8, led.peak_amplitude)
    prob = DesignProblem(variant="known_csi", constellation=c, bob_link=eve,
                         dc_bias=led.dc_bias, constraints=ConstraintSet(),
                         eve_link=bob)
    with pytest.raises(DegradedRegimeError):
        solve_known_csi(prob, CccpSettings(n_starts=1, seed=0))


def test_infeasible_design_at_very_low_power(receiver, noise_params):
    prob, *_ = _problem("known_csi", 12.0, receiver, noise_params)
    with pytest.raises(InfeasibleError):
        solve_known_csi(prob, CccpSettings(n_starts=3, seed=0))


def test_problem_validation(receiver, noise_params):
    led, bob, eve, eve_avg, _ = links_at_dbm(26.0, receiver, noise_params)
    c = build_constellation(8, led.peak_amplitude)
    with pytest.raises(ConfigError):
        DesignProblem(variant="known_csi", constellation=c, bob_link=bob,
                      dc_bias=led.dc_bias)          # missing eve_link
    with pytest.raises(ConfigError):
        DesignProblem(variant="unknown_csi", constellation=c, bob_link=bob,
                      dc_bias=led.dc_bias)          # missing eve_avg
    with pytest.raises(ConfigError):
        DesignProblem(variant="unknown_csi_symmetric", constellation=c,
                      bob_link=bob, dc_bias=led.dc_bias, eve_avg=eve_avg,
                      constraints=ConstraintSet(mode="flicker"))
    with pytest.raises(ConfigError):
        DesignProblem(variant="nope", constellation=c, bob_link=bob,
                      dc_bias=led.dc_bias, eve_link=eve)


def test_restoration_from_infeasible_uniform_start(receiver, noise_params):
    # at 22 dBm uniform signaling violates the reliability constraint, so the
    # first (uniform) start must pass through the restoration phase
    prob, led, bob, _, _ = _problem("known_csi", 22.0, receiver, noise_params)
    res = solve_known_csi(prob, CccpSettings(n_starts=1, seed=0))
    assert ber_upper_bound(prob.constellation, res.p_opt.probs, bob) <= 3.8e-3 + 1e-8
    assert res.per_start[0]["feasible"]


def test_project_to_simplex_basics():
    rng = np.random.default_rng(113)
    for _ in range(50):
        v = rng.standard_normal(8) * rng.uniform(0.1, 10.0)
        x = project_to_simplex(v)
        assert x.min() >= 0.0
        assert x.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(project_to_simplex(np.ones(4) / 4), np.ones(4) / 4)


def test_sixteen_pam_secrecy_gain_at_high_power(receiver, noise_params):
    # doubling the modulation order at 30 dBm still yields a shaping gain,
    # smaller than the 8-PAM one (~3.1% vs ~4.7%)
    prob, led, bob, eve, _ = _problem("known_csi", 30.0, receiver, noise_params,
                                      m=16)
    res = solve_known_csi(prob, CccpSettings(n_starts=4, seed=1))
    p_uni = np.ones(16) / 16
    gb = EntropyGrid(bob.composite_gain * prob.constellation.amplitudes, bob.sigma)
    ge = EntropyGrid(eve.composite_gain * prob.constellation.amplitudes, eve.sigma)
    cs_uni = gb.entropy(p_uni) - ge.entropy(p_uni) + math.log2(eve.sigma / bob.sigma)
    gain_pct = (res.objective / cs_uni - 1.0) * 100.0
    assert 1.6 <= gain_pct <= 4.6
