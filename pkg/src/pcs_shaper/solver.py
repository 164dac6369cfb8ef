"""Constrained design of the shaping distribution.

The four design problems share one skeleton: a concave objective is maximized
over the simplex intersected with linear illumination constraints and the
reliability constraint ``ber_upper(p) <= threshold``.  The reliability bound is
a *concave* function of p, so its sublevel set is non-convex; the solver
replaces it by its tangent plane at the current iterate (which majorizes the
bound, hence any surrogate-feasible point is truly feasible) and re-linearizes
until the objective stalls.  Where the objective itself is non-concave (the
average-eavesdropper bound), the offending term is minorized by its tangent in
an auxiliary variable.  Every accepted iterate is feasible and the objective
trace is non-decreasing.

The inner concave maximizations use projected-gradient ascent with
Barzilai-Borwein steps, an Armijo backtracking safeguard, and an exact
projection onto the intersection of the simple sets (simplex, halfspaces,
mirror-symmetry subspace) computed in the dual of the projection problem.
No external convex-programming solver is involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .capacity import EntropyGrid, GAUSS_ENTROPY_STD
from .channel import LinkBudget
from .constellation import ConstraintSet, Distribution, PamConstellation, \
    signed_amplitude_mean, symmetry_residual
from .error_rate import ber_approx, ber_upper_bound, grad_ber_approx, grad_ber_upper
from .exceptions import ConfigError, DegradedRegimeError, InfeasibleError, \
    NonConvergenceError

__all__ = [
    "VARIANTS",
    "CccpSettings",
    "DesignProblem",
    "SolveResult",
    "LinearConstraints",
    "AffineFunction",
    "inner_solve",
    "linearized_ber_constraint",
    "solve_known_csi",
    "solve_unknown_csi",
    "solve_symmetric",
    "solve_qos",
    "solve",
    "project_to_simplex",
]

VARIANTS = ("known_csi", "unknown_csi", "unknown_csi_symmetric", "qos_max_eve_ber")

_FEAS_TOL = 1e-13       # projection constraint-violation target
_ARMIJO = 1e-4
_MAX_BACKTRACKS = 60


# ---------------------------------------------------------------------------
# problem / settings / result containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CccpSettings:
    """Outer-loop controls: iteration cap, relative-change tolerance, restarts."""

    max_iters: int = 50
    rel_tol: float = 1e-2
    n_starts: int = 32
    seed: int = 0
    p_floor: float = 1e-9
    inner_max_iter: int = 3000
    inner_kkt_tol: float = 1e-8

    def __post_init__(self):
        if self.max_iters < 1 or self.n_starts < 1:
            raise ConfigError("max_iters and n_starts must be >= 1")
        if not self.rel_tol > 0:
            raise ConfigError("rel_tol must be > 0")


@dataclass(frozen=True)
class DesignProblem:
    variant: str
    constellation: PamConstellation
    bob_link: LinkBudget
    dc_bias: float
    constraints: ConstraintSet = field(default_factory=ConstraintSet)
    eve_link: LinkBudget | None = None
    eve_avg: LinkBudget | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.variant in ("known_csi", "qos_max_eve_ber") and self.eve_link is None:
            raise ConfigError(f"variant {self.variant!r} requires eve_link")
        if self.variant.startswith("unknown_csi") and self.eve_avg is None:
            raise ConfigError(f"variant {self.variant!r} requires eve_avg")
        if self.variant == "unknown_csi_symmetric" and self.constraints.mode != "symmetric":
            raise ConfigError("unknown_csi_symmetric requires constraints.mode='symmetric'")
        if not self.dc_bias > 0:
            raise ConfigError("dc_bias must be > 0")


@dataclass
class SolveResult:
    p_opt: Distribution
    objective: float
    objective_trace: list[float]
    iterations: int
    converged: bool
    feasibility: dict[str, float]
    start_index: int
    per_start: list[dict] = field(default_factory=list)

    @property
    def inactive_count(self) -> int:
        return int(np.count_nonzero(self.p_opt.probs < 1e-6))


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------

def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {p >= 0, sum p = 1} (sort-based, exact)."""
    u = np.sort(v)[::-1]
    cs = np.cumsum(u)
    j = np.arange(1, v.size + 1)
    rho = np.nonzero(u + (1.0 - cs) / j > 0)[0][-1]
    lam = (1.0 - cs[rho]) / (rho + 1.0)
    return np.maximum(v + lam, 0.0)


def _symmetrize(v: np.ndarray) -> np.ndarray:
    return 0.5 * (v + v[::-1])


@dataclass
class LinearConstraints:
    """Halfspaces ``a_ub @ p <= b_ub`` plus the optional mirror-symmetry subspace."""

    a_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    symmetric: bool = False

    def __post_init__(self):
        if (self.a_ub is None) != (self.b_ub is None):
            raise ConfigError("a_ub and b_ub must be supplied together")
        if self.a_ub is not None:
            self.a_ub = np.atleast_2d(np.asarray(self.a_ub, dtype=float))
            self.b_ub = np.atleast_1d(np.asarray(self.b_ub, dtype=float))
            if self.a_ub.shape[0] != self.b_ub.size:
                raise ConfigError("a_ub rows and b_ub length differ")

    def rows(self) -> list[tuple[np.ndarray, float, float]]:
        if self.a_ub is None:
            return []
        return [(self.a_ub[i], float(self.b_ub[i]),
                 float(self.a_ub[i] @ self.a_ub[i]))
                for i in range(self.a_ub.shape[0])]


class _Projector:
    """Exact projection onto {simplex [∩ symmetry subspace] ∩ linear inequalities}.

    The simplex (optionally pre-symmetrized: the simplex is invariant under
    index reversal, so projecting the symmetric part is exact) has a
    closed-form projection.  The few general inequalities are handled in the
    dual: antipodal row pairs (g, -g) merge into two-sided slabs with a free
    signed multiplier, remaining rows keep a nonnegative one, and the
    multipliers solve ``x* = base_project(v - R^T theta)`` by cyclic exact
    coordinate maximization of the concave dual (each coordinate is a monotone
    scalar root-find), finished by an active-face Newton solve.  Multipliers
    are warm-started across calls, so consecutive projections during one inner
    solve usually cost a single evaluation.  A scalar equation whose residual
    cannot reach its target certifies an empty constraint set.
    """

    def __init__(self, n: int, constraints: LinearConstraints | None,
                 max_sweeps: int = 200):
        self.n = n
        self.cons = constraints or LinearConstraints()
        self.symmetric = self.cons.symmetric
        self.max_sweeps = max_sweeps
        rows = None
        if self.cons.a_ub is not None:
            rows = self.cons.a_ub.astype(float)
            if self.symmetric:
                # fold each row through the mirror: equivalent on the subspace
                rows = 0.5 * (rows + rows[:, ::-1])
        self.rows = []      # (g, lo, hi): lo = -inf for one-sided rows
        if rows is not None:
            b = self.cons.b_ub.astype(float)
            used = np.zeros(rows.shape[0], dtype=bool)
            for i in range(rows.shape[0]):
                if used[i]:
                    continue
                mate = -1
                for j in range(i + 1, rows.shape[0]):
                    if not used[j] and np.allclose(rows[j], -rows[i],
                                                   rtol=0.0, atol=1e-14):
                        mate = j
                        break
                if mate >= 0:
                    used[i] = used[mate] = True
                    self.rows.append((rows[i], -b[mate], b[i]))
                else:
                    used[i] = True
                    self.rows.append((rows[i], -math.inf, b[i]))
        self.theta = np.zeros(len(self.rows))

    # -- geometry helpers -------------------------------------------------
    def base_project(self, v: np.ndarray) -> np.ndarray:
        if self.symmetric:
            v = _symmetrize(v)
        return project_to_simplex(v)

    def _point(self, v: np.ndarray, theta: np.ndarray) -> np.ndarray:
        w = v
        for k, (g, _, _) in enumerate(self.rows):
            if theta[k] != 0.0:
                w = w - theta[k] * g
        return self.base_project(w)

    def violation(self, x: np.ndarray) -> float:
        out = max(abs(x.sum() - 1.0), -min(float(x.min()), 0.0))
        for g, lo, hi in self.rows:
            val = float(g @ x)
            scale = 1.0 + max(abs(hi), 0.0 if math.isinf(lo) else abs(lo))
            out = max(out, (val - hi) / scale)
            if not math.isinf(lo):
                out = max(out, (lo - val) / scale)
        if self.symmetric:
            half = self.n // 2
            out = max(out, float(np.abs(x[:half] - x[::-1][:half]).max()))
        return out

    def _face_map(self, support: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Jacobian action of base_project on the face with the given support."""
        w = _symmetrize(g) if self.symmetric else g.copy()
        q = np.zeros_like(w)
        q[support] = w[support] - w[support].mean()
        return q

    def _complementary(self, theta: np.ndarray, x: np.ndarray) -> bool:
        for k, (g, lo, hi) in enumerate(self.rows):
            val = float(g @ x)
            scale = 1.0 + max(abs(hi), 0.0 if math.isinf(lo) else abs(lo))
            if (val - hi) / scale > _FEAS_TOL:
                return False
            if not math.isinf(lo) and (lo - val) / scale > _FEAS_TOL:
                return False
            if theta[k] > 1e-14 * (1.0 + abs(theta[k])) \
                    and abs(val - hi) / scale > _FEAS_TOL:
                return False
            if theta[k] < -1e-14 * (1.0 + abs(theta[k])) \
                    and abs(val - lo) / scale > _FEAS_TOL:
                return False
        return True

    # -- exact scalar coordinate solve ------------------------------------
    def _coordinate_solve(self, v: np.ndarray, theta: np.ndarray, k: int) -> np.ndarray:
        g, lo, hi = self.rows[k]
        two_sided = not math.isinf(lo)

        def resid(t):
            th = theta.copy()
            th[k] = t
            return float(g @ self._point(v, th)), th

        r0, _ = resid(0.0)
        if r0 <= hi + 0.0 and (not two_sided or r0 >= lo):
            theta = theta.copy()
            theta[k] = 0.0
            return theta
        if r0 > hi:
            target, direction = hi, 1.0
        else:
            target, direction = lo, -1.0
        # bracket: r is non-increasing in t, so move t in `direction`
        t_lo = 0.0
        t_hi = direction
        r_hi, _ = resid(t_hi)
        for _ in range(120):
            if (r_hi - target) * direction <= 0.0:
                break
            t_lo = t_hi
            t_hi *= 2.0
            r_prev = r_hi
            r_hi, _ = resid(t_hi)
            if r_hi == r_prev and abs(t_hi) > 1e9 * (1.0 + np.abs(v).max()):
                raise InfeasibleError(
                    "constraint set is empty (projection residual cannot reach "
                    "its bound)")
        else:
            raise InfeasibleError(
                "constraint set is empty (projection dual is unbounded)")
        for _ in range(200):
            mid = 0.5 * (t_lo + t_hi)
            if mid == t_lo or mid == t_hi:
                break
            r_mid, _ = resid(mid)
            if (r_mid - target) * direction > 0.0:
                t_lo = mid
            else:
                t_hi = mid
        theta = theta.copy()
        theta[k] = t_hi
        return theta

    def _newton_finish(self, v: np.ndarray, theta: np.ndarray, x: np.ndarray):
        """Solve the active-face KKT system exactly; None if the guess is wrong."""
        active = []
        targets = []
        for k, (g, lo, hi) in enumerate(self.rows):
            val = float(g @ x)
            if theta[k] > 0.0 or val > hi:
                active.append(k)
                targets.append(hi)
            elif not math.isinf(lo) and (theta[k] < 0.0 or val < lo):
                active.append(k)
                targets.append(lo)
        if not active:
            return None
        support = x > 0.0
        if not support.any():
            return None
        rows = np.stack([self.rows[k][0] for k in active])
        k_mat = rows @ np.stack([self._face_map(support, g) for g in rows]).T
        resid = rows @ x - np.asarray(targets)
        try:
            delta = np.linalg.solve(k_mat, resid)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(delta)) \
                or np.abs(delta).max() > 1e8 * (1.0 + np.abs(theta).max()):
            return None
        cand = theta.copy()
        cand[list(active)] += delta
        for k, (g, lo, hi) in enumerate(self.rows):
            one_sided = math.isinf(lo)
            if one_sided and cand[k] < 0.0:
                if cand[k] < -1e-9 * (1.0 + np.abs(cand).max()):
                    return None
                cand[k] = 0.0
        x_c = self._point(v, cand)
        if self.violation(x_c) <= _FEAS_TOL and self._complementary(cand, x_c):
            return cand, x_c
        return None

    def __call__(self, v: np.ndarray) -> np.ndarray:
        if not self.rows:
            return self.base_project(v)
        theta = self.theta.copy()
        x = self._point(v, theta)
        for _ in range(self.max_sweeps):
            if self.violation(x) <= _FEAS_TOL and self._complementary(theta, x):
                break
            finished = self._newton_finish(v, theta, x)
            if finished is not None:
                theta, x = finished
                break
            theta_prev = theta
            for k in range(len(self.rows)):
                theta = self._coordinate_solve(v, theta, k)
            x = self._point(v, theta)
            if np.abs(theta - theta_prev).max() == 0.0:
                break
        if self.violation(x) > _FEAS_TOL or not self._complementary(theta, x):
            raise NonConvergenceError("projection dual did not converge")
        self.theta = theta
        return x


# ---------------------------------------------------------------------------
# inner concave maximization
# ---------------------------------------------------------------------------

def _kkt_residual(p: np.ndarray, g: np.ndarray, project) -> float:
    """Inf-norm displacement of the projected step along the normalized gradient.

    Zero exactly at a stationary point; the gradient is capped to unit inf-norm
    so the probe point stays near the feasible set.
    """
    probe = g / max(np.abs(g).max(), 1.0)
    return float(np.abs(p - project(p + probe)).max())


def _pg_ascent(value_and_grad, project, x0: np.ndarray, max_iter: int,
               kkt_tol: float) -> tuple[np.ndarray, float, bool]:
    """Monotone projected-gradient ascent; returns (point, value, kkt_met)."""
    p = project(np.asarray(x0, dtype=float))
    f, g = value_and_grad(p)
    step = 1.0 / max(np.abs(g).max(), 1.0)
    for _ in range(max_iter):
        if _kkt_residual(p, g, project) <= kkt_tol:
            return p, f, True
        # cap the trial displacement at a few simplex diameters
        cap = 4.0 / max(np.abs(g).max(), 1e-12)
        cand = project(p + min(step, cap) * g)
        d = cand - p
        gd = g @ d
        if gd <= 0 or np.abs(d).max() < 1e-17:
            step = min(step * 4.0, 1e12)
            cand = project(p + min(step, cap) * g)
            d = cand - p
            gd = g @ d
            if gd <= 0 or np.abs(d).max() < 1e-17:
                return p, f, _kkt_residual(p, g, project) <= kkt_tol
        fc, gc = value_and_grad(cand)
        backtracks = 0
        while fc < f + _ARMIJO * gd and backtracks < _MAX_BACKTRACKS:
            step *= 0.5
            cand = project(p + min(step, cap) * g)
            d = cand - p
            gd = g @ d
            if np.abs(d).max() < 1e-17:
                break
            fc, gc = value_and_grad(cand)
            backtracks += 1
        if fc <= f and backtracks >= _MAX_BACKTRACKS:
            return p, f, _kkt_residual(p, g, project) <= kkt_tol
        s = cand - p
        y = gc - g
        sy = s @ y
        p, f, g = cand, fc, gc
        # Barzilai-Borwein step for the next trial (concave: s.y <= 0)
        step = min(max((s @ s) / (-sy), 1e-14), 1e12) if sy < -1e-300 \
            else min(step * 2.0, 1e12)
    return p, f, _kkt_residual(p, g, project) <= kkt_tol


def inner_solve(objective, n: int, constraints: LinearConstraints | None = None,
                x0: np.ndarray | None = None, kkt_tol: float = 1e-8,
                max_iter: int = 3000) -> Distribution:
    """Maximize a concave objective over the constrained simplex.

    ``objective(p)`` must return ``(value, gradient)``.  Raises
    InfeasibleError when the constraint set is empty and NonConvergenceError
    when the KKT residual (unit-step projected-gradient mapping) cannot be
    driven below ``kkt_tol``.
    """
    project = _Projector(n, constraints)
    start = np.full(n, 1.0 / n) if x0 is None else np.asarray(x0, dtype=float)
    start = project(start)   # raises InfeasibleError on an empty set
    p, _, kkt_ok = _pg_ascent(objective, project, start, max_iter, kkt_tol)
    if not kkt_ok:
        raise NonConvergenceError(
            f"inner solve stalled above the KKT tolerance {kkt_tol}")
    return Distribution(project_to_simplex(p))


@dataclass(frozen=True)
class AffineFunction:
    """f(p) = offset + coef . p"""

    coef: np.ndarray
    offset: float

    def __call__(self, p) -> float:
        arr = p.probs if isinstance(p, Distribution) else np.asarray(p, dtype=float)
        return self.offset + float(self.coef @ arr)


def linearized_ber_constraint(p_k, link: LinkBudget,
                              c: PamConstellation) -> AffineFunction:
    """Tangent plane of the concave BER upper bound at the interior point p_k.

    Majorizes the bound everywhere, so enforcing ``tangent(p) <= threshold``
    guarantees the true constraint.
    """
    probs = p_k.probs if isinstance(p_k, Distribution) else np.asarray(p_k, dtype=float)
    grad = grad_ber_upper(c, probs, link)
    value = ber_upper_bound(c, probs, link)
    return AffineFunction(coef=grad, offset=value - float(grad @ probs))


# ---------------------------------------------------------------------------
# CCCP driver
# ---------------------------------------------------------------------------

def _start_points(m: int, settings: CccpSettings) -> list[np.ndarray]:
    points = [np.full(m, 1.0 / m)]
    for i in range(1, settings.n_starts):
        rng = np.random.Generator(np.random.Philox(key=(int(settings.seed) << 64) + i))
        points.append(rng.dirichlet(np.ones(m)))
    return points


def _base_constraints(problem: DesignProblem) -> LinearConstraints:
    if problem.constraints.mode == "symmetric":
        return LinearConstraints(symmetric=True)
    a = problem.constellation.amplitudes
    bound = problem.constraints.flicker_alpha * problem.dc_bias
    return LinearConstraints(a_ub=np.vstack([a, -a]), b_ub=np.array([bound, bound]))


def _with_ber_row(base: LinearConstraints, coef: np.ndarray,
                  rhs: float) -> LinearConstraints:
    rows = [coef] if base.a_ub is None else [base.a_ub, coef[None, :]]
    b = [rhs] if base.b_ub is None else [base.b_ub, [rhs]]
    return LinearConstraints(a_ub=np.vstack([np.atleast_2d(r) for r in rows]),
                             b_ub=np.concatenate([np.atleast_1d(x) for x in b]),
                             symmetric=base.symmetric)


class _Objective:
    """Per-variant objective closures over precomputed entropy tables."""

    def __init__(self, problem: DesignProblem, settings: CccpSettings):
        self.problem = problem
        self.settings = settings
        c = problem.constellation
        self.c = c
        self.grid_b = EntropyGrid(problem.bob_link.composite_gain * c.amplitudes,
                                  problem.bob_link.sigma)
        v = problem.variant
        if v == "known_csi":
            self.grid_e = EntropyGrid(problem.eve_link.composite_gain * c.amplitudes,
                                      problem.eve_link.sigma)
            self.const = math.log2(problem.eve_link.sigma / problem.bob_link.sigma)
        elif v.startswith("unknown_csi"):
            eve = problem.eve_avg
            self.snr_scale = (eve.composite_gain / eve.sigma) ** 2
            self.cap_b_const = -GAUSS_ENTROPY_STD - math.log2(problem.bob_link.sigma)

    def clamp(self, p: np.ndarray) -> np.ndarray:
        return np.maximum(p, self.settings.p_floor)

    # -- true (reported) objectives -------------------------------------
    def true_value(self, p: np.ndarray) -> float:
        v = self.problem.variant
        if v == "known_csi":
            hb, _ = self.grid_b.entropy_and_gradient(p)
            he, _ = self.grid_e.entropy_and_gradient(p)
            return hb - he + self.const
        if v == "qos_max_eve_ber":
            return ber_approx(self.c, p, self.problem.eve_link)
        t = 0.0 if v == "unknown_csi_symmetric" \
            else signed_amplitude_mean(self.c, p) ** 2
        return self._unknown_value(p, t)

    def _unknown_value(self, p: np.ndarray, t: float) -> float:
        cap_b = self.grid_b.entropy(p) + self.cap_b_const
        return cap_b - 0.5 * math.log2(
            1.0 + self.snr_scale * max(self.c.peak_a**2 - t, 0.0))

    # -- surrogate (value, grad) closures for the inner solver ----------
    def surrogate(self, p_k: np.ndarray):
        v = self.problem.variant
        if v == "known_csi":
            def fg(p):
                hb, gb = self.grid_b.entropy_and_gradient(p)
                he, ge = self.grid_e.entropy_and_gradient(p)
                return hb - he + self.const, gb - ge
            return fg
        if v == "qos_max_eve_ber":
            def fg(p):
                q = self.clamp(p)
                return (ber_approx(self.c, q, self.problem.eve_link),
                        grad_ber_approx(self.c, q, self.problem.eve_link))
            return fg
        if v == "unknown_csi_symmetric":
            off = -0.5 * math.log2(1.0 + self.snr_scale * self.c.peak_a**2)

            def fg(p):
                h, g = self.grid_b.entropy_and_gradient(p)
                return h + self.cap_b_const + off, g
            return fg
        # unknown_csi: minorize the (convex, increasing) -1/2 log2(1+c(A^2-t))
        # term at t_k and push t to its linear minorant -s_k^2 + 2 s_k a.p
        a = self.c.amplitudes
        s_k = signed_amplitude_mean(self.c, p_k)
        t_k = s_k**2
        gap = 1.0 + self.snr_scale * max(self.c.peak_a**2 - t_k, 0.0)
        lam = self.snr_scale / (2.0 * math.log(2.0) * gap)
        eve_at_tk = -0.5 * math.log2(gap)

        def fg(p):
            h, g = self.grid_b.entropy_and_gradient(p)
            t_lin = -t_k + 2.0 * s_k * float(a @ p)
            val = h + self.cap_b_const + eve_at_tk + lam * (t_lin - t_k)
            return val, g + lam * 2.0 * s_k * a
        return fg


def _restore_feasibility(obj: _Objective, project: _Projector, p: np.ndarray,
                         settings: CccpSettings) -> np.ndarray | None:
    """Drive ber_upper below the threshold by minimizing its tangent plane.

    Each round minimizes the majorizing linearization over the illumination
    constraints, which cannot increase the true bound.  Returns None when the
    bound stops improving while still above the threshold.
    """
    problem = obj.problem
    thr = problem.constraints.pre_fec_threshold
    ber = ber_upper_bound(obj.c, obj.clamp(p), problem.bob_link)
    for _ in range(100):
        if ber <= thr:
            return p
        grad = grad_ber_upper(obj.c, obj.clamp(p), problem.bob_link)

        def fg(x, grad=grad):
            return -float(grad @ x), -grad
        p_new, _, _ = _pg_ascent(fg, project, p, settings.inner_max_iter,
                                 settings.inner_kkt_tol)
        ber_new = ber_upper_bound(obj.c, obj.clamp(p_new), problem.bob_link)
        if ber_new >= ber * (1.0 - 1e-12):
            return None
        p, ber = p_new, ber_new
    return p if ber <= thr else None


def _run_single_start(obj: _Objective, start: np.ndarray, start_index: int,
                      settings: CccpSettings):
    problem = obj.problem
    thr = problem.constraints.pre_fec_threshold
    base = _base_constraints(problem)
    base_proj = _Projector(problem.constellation.order_m, base)
    p = base_proj(start)
    p = _restore_feasibility(obj, base_proj, p, settings)
    if p is None:
        return None
    trace = [obj.true_value(p)]
    converged = False
    iterations = settings.max_iters
    for k in range(1, settings.max_iters + 1):
        tangent = linearized_ber_constraint(obj.clamp(p), problem.bob_link, obj.c)
        margin = 1e-13 * (1.0 + thr)
        cons_k = _with_ber_row(base, tangent.coef,
                               thr - margin - tangent.offset)
        fg = obj.surrogate(p)
        p_new, _, _ = _pg_ascent(fg, _Projector(problem.constellation.order_m, cons_k),
                                 p, settings.inner_max_iter, settings.inner_kkt_tol)
        trace.append(obj.true_value(p_new))
        p = p_new
        denom = max(abs(trace[-2]), 1e-12)
        if abs(trace[-1] - trace[-2]) / denom <= settings.rel_tol:
            converged = True
            iterations = k
            break
    p = _finalize(obj, p)
    return p, trace, iterations, converged, start_index


def _finalize(obj: _Objective, p: np.ndarray) -> np.ndarray:
    if obj.problem.constraints.mode == "symmetric":
        p = _symmetrize(p)
        p = np.maximum(p, 0.0)
        p /= p.sum()
    return p


def _feasibility_report(problem: DesignProblem, p: np.ndarray) -> dict[str, float]:
    c = problem.constellation
    thr = problem.constraints.pre_fec_threshold
    report = {
        "ber_upper_excess": ber_upper_bound(c, p, problem.bob_link) - thr,
        "simplex_sum_error": abs(float(p.sum()) - 1.0),
        "min_prob": float(p.min()),
    }
    if problem.constraints.mode == "symmetric":
        report["symmetry_residual_max"] = float(np.abs(symmetry_residual(p)).max())
        report["amplitude_mean"] = signed_amplitude_mean(c, p)
    else:
        bound = problem.constraints.flicker_alpha * problem.dc_bias
        report["flicker_excess"] = abs(signed_amplitude_mean(c, p)) - bound
    return report


def _solve_cccp(problem: DesignProblem, settings: CccpSettings) -> SolveResult:
    obj = _Objective(problem, settings)
    best = None
    per_start = []
    for idx, start in enumerate(_start_points(problem.constellation.order_m, settings)):
        outcome = _run_single_start(obj, start, idx, settings)
        if outcome is None:
            per_start.append({"start_index": idx, "feasible": False})
            continue
        p, trace, iterations, converged, start_index = outcome
        per_start.append({"start_index": idx, "feasible": True,
                          "iterations": iterations, "converged": converged,
                          "objective": trace[-1], "trace": trace})
        if best is None or trace[-1] > best[1][-1]:
            best = (p, trace, iterations, converged, start_index)
    if best is None:
        raise InfeasibleError(
            "no starting point reaches the reliability constraint; "
            "the design is infeasible at this operating point")
    p, trace, iterations, converged, start_index = best
    return SolveResult(
        p_opt=Distribution(p),
        objective=trace[-1],
        objective_trace=trace,
        iterations=iterations,
        converged=converged,
        feasibility=_feasibility_report(problem, p),
        start_index=start_index,
        per_start=per_start,
    )


# ---------------------------------------------------------------------------
# public variant entry points
# ---------------------------------------------------------------------------

def solve_known_csi(problem: DesignProblem, settings: CccpSettings | None = None) -> SolveResult:
    """Maximize the exact secrecy capacity with a known eavesdropper link."""
    settings = settings or CccpSettings()
    if problem.variant != "known_csi":
        raise ConfigError("problem.variant must be 'known_csi'")
    if problem.bob_link.quality <= problem.eve_link.quality:
        raise DegradedRegimeError(
            "known-CSI design requires bob quality > eve quality")
    return _solve_cccp(problem, settings)


def solve_unknown_csi(problem: DesignProblem, settings: CccpSettings | None = None) -> SolveResult:
    """Maximize the tractable average-eavesdropper secrecy lower bound."""
    settings = settings or CccpSettings()
    if problem.variant != "unknown_csi":
        raise ConfigError("problem.variant must be 'unknown_csi'")
    return _solve_cccp(problem, settings)


def solve_symmetric(problem: DesignProblem, settings: CccpSettings | None = None) -> SolveResult:
    """Maximize Bob's output entropy under the hard symmetry constraint.

    The objective is concave outright, so only the reliability linearization
    is refreshed between inner solves.
    """
    settings = settings or CccpSettings()
    if problem.variant != "unknown_csi_symmetric":
        raise ConfigError("problem.variant must be 'unknown_csi_symmetric'")
    return _solve_cccp(problem, settings)


def solve_qos(problem: DesignProblem, settings: CccpSettings | None = None) -> SolveResult:
    """Maximize the eavesdropper's approximate BER (concave objective)."""
    settings = settings or CccpSettings()
    if problem.variant != "qos_max_eve_ber":
        raise ConfigError("problem.variant must be 'qos_max_eve_ber'")
    return _solve_cccp(problem, settings)


_DISPATCH = {
    "known_csi": solve_known_csi,
    "unknown_csi": solve_unknown_csi,
    "unknown_csi_symmetric": solve_symmetric,
    "qos_max_eve_ber": solve_qos,
}


def solve(problem: DesignProblem, settings: CccpSettings | None = None) -> SolveResult:
    return _DISPATCH[problem.variant](problem, settings)
