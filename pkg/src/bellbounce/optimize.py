"""Gradient-based search over measurement angles, plus the bounce loop.

Both search directions share one engine:
  maximize beta_C(solve(T(theta), h))   -- Hamiltonian fixed, Adam ascent
  minimize c . T(theta) . alpha         -- inequality fixed, Adam descent

Gradients are central finite differences. The classical bound is only
piecewise smooth, so correctness rests on best-so-far tracking, not smooth
convergence: the reported optimum is always an exactly enumerated bound of a
feasible coefficient vector. Angle parameters are unconstrained; wrapping is
unnecessary by periodicity. Points where T(theta) . alpha = h has no solution
within tolerance are scored -inf (ascent) so restarts move off them smoothly;
a finite-difference coordinate with a non-finite side gets gradient 0.

Restarts run in lockstep: each engine step evaluates all restarts' probe
points in one batched call. Per-restart random streams are seeded from
(seed, restart_index), so results do not depend on how many restarts run.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .bell import BellCoeffs, Scenario, _sign_patterns
from .mapping import (
    RANK_RCOND,
    RESIDUAL_RTOL,
    MeasurementSettings,
    TransferMatrix,
    build_transfer_matrix,
)

__all__ = [
    "OptimizerConfig",
    "FiniteDiffConfig",
    "AdamState",
    "RunRecord",
    "OptimizeResult",
    "RestartOutcome",
    "BounceRecord",
    "BounceResult",
    "NoFeasiblePointError",
    "finite_diff_gradient",
    "adam_init",
    "adam_step",
    "maximize_classical_bound",
    "minimize_quantum_value",
    "bound_maximization_task",
    "value_minimization_task",
    "restart_harness",
    "bounce_loop",
    "DEFAULT_ASCENT",
    "DEFAULT_DESCENT",
    "DEFAULT_FD",
]


class NoFeasiblePointError(RuntimeError):
    """No angle configuration could represent the target coefficients."""


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float
    max_steps: int = 10_000
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon_stability: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("moment decay rates must lie in [0, 1)")
        if self.max_steps < 1:
            raise ValueError("step budget must be positive")


@dataclass(frozen=True)
class FiniteDiffConfig:
    step: float = 1e-4
    scheme: str = "central"

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("finite-difference step must be positive")
        if self.scheme != "central":
            raise ValueError(f"unsupported scheme {self.scheme!r}")


# Ascent on the classical bound / descent on the quantum value.
DEFAULT_ASCENT = OptimizerConfig(learning_rate=0.02)
DEFAULT_DESCENT = OptimizerConfig(learning_rate=0.01)
DEFAULT_FD = FiniteDiffConfig()


@dataclass(frozen=True)
class AdamState:
    theta: np.ndarray
    m: np.ndarray
    v: np.ndarray
    step: int = 0


def adam_init(theta0) -> AdamState:
    theta0 = np.asarray(theta0, dtype=float)
    return AdamState(theta0.copy(), np.zeros_like(theta0), np.zeros_like(theta0))


def adam_step(
    state: AdamState, gradient, cfg: OptimizerConfig, maximize: bool = False
) -> AdamState:
    """One bias-corrected Adam update; sign of motion set by maximize."""
    g = np.asarray(gradient, dtype=float)
    t = state.step + 1
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * g
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * g * g
    m_hat = m / (1.0 - cfg.beta1**t)
    v_hat = v / (1.0 - cfg.beta2**t)
    delta = cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon_stability)
    theta = state.theta + delta if maximize else state.theta - delta
    return AdamState(theta, m, v, t)


def finite_diff_gradient(f, theta, cfg: FiniteDiffConfig = DEFAULT_FD) -> np.ndarray:
    """Central-difference gradient of a scalar objective over angles.

    Raises:
        ValueError: if the objective returns a non-finite value at any
            probe point.
    """
    theta = np.asarray(theta, dtype=float)
    grad = np.empty_like(theta)
    for k in range(theta.size):
        probe = theta.copy()
        probe[k] = theta[k] + cfg.step
        up = float(f(probe))
        probe[k] = theta[k] - cfg.step
        down = float(f(probe))
        if not (np.isfinite(up) and np.isfinite(down)):
            raise ValueError(f"objective non-finite near coordinate {k}")
        grad[k] = (up - down) / (2.0 * cfg.step)
    return grad


@dataclass(frozen=True)
class RunRecord:
    step: int
    theta: np.ndarray
    value: float
    is_best: bool


@dataclass(frozen=True)
class OptimizeResult:
    settings: MeasurementSettings
    value: float
    alpha: BellCoeffs | None
    history: np.ndarray  # best-so-far objective, indexed by step
    records: tuple[RunRecord, ...]
    restart_index: int = 0


@dataclass(frozen=True)
class RestartOutcome:
    best: OptimizeResult
    runs: tuple[OptimizeResult, ...]
    best_index: int


# ---------------------------------------------------------------------------
# batched objective evaluation


def _bloch_split_batch(thetas: np.ndarray, m1: int, m2: int):
    n = thetas.shape[0]
    a = thetas[:, : 2 * m1].reshape(n, m1, 2)
    b = thetas[:, 2 * m1 :].reshape(n, m2, 2)

    def blo(x):
        t, p = x[..., 0], x[..., 1]
        st = np.sin(t)
        return np.stack([np.cos(t), st * np.cos(p), st * np.sin(p)], axis=-1)

    return blo(a), blo(b)


def _transfer_batch(na: np.ndarray, nb: np.ndarray) -> np.ndarray:
    n, m1, _ = na.shape
    m2 = nb.shape[1]
    return np.einsum("nai,nbj->nijab", na, nb).reshape(n, 9, m1 * m2)


def _enumerated_bounds(amats: np.ndarray) -> np.ndarray:
    # Exact classical bounds of a batch of coefficient matrices, enumerating
    # the smaller party side.
    _, m1, m2 = amats.shape
    if m2 <= m1:
        rows = np.einsum("nab,kb->nak", amats, _sign_patterns(m2).astype(float))
        return (-np.abs(rows).sum(axis=1)).min(axis=1)
    cols = np.einsum("nab,ka->nbk", amats, _sign_patterns(m1).astype(float))
    return (-np.abs(cols).sum(axis=1)).min(axis=1)


def _solve_unique_batch(t: np.ndarray, h: np.ndarray) -> np.ndarray:
    n = t.shape[0]
    rhs = np.broadcast_to(h, (n, 9))
    try:
        # Trailing singleton keeps batched solve on the matrix signature.
        alpha = np.linalg.solve(t, rhs[..., None])[..., 0]
        resid = rhs - np.einsum("nij,nj->ni", t, alpha)
        alpha = alpha + np.linalg.solve(t, resid[..., None])[..., 0]
        return alpha
    except np.linalg.LinAlgError:
        pass
    alpha = np.empty((n, 9))
    for i in range(n):
        try:
            ai = np.linalg.solve(t[i], h)
            ai = ai + np.linalg.solve(t[i], h - t[i] @ ai)
        except np.linalg.LinAlgError:
            ai = np.full(9, np.nan)
        alpha[i] = ai
    return alpha


def _solve_min_norm_batch(t: np.ndarray, h: np.ndarray) -> np.ndarray:
    n = t.shape[0]
    try:
        u, s, vt = np.linalg.svd(t, full_matrices=False)
    except np.linalg.LinAlgError:
        out = np.empty((n, t.shape[2]))
        for i in range(n):
            try:
                ui, si, vti = np.linalg.svd(t[i], full_matrices=False)
                keep = si > RANK_RCOND * si[0]
                w = np.where(keep, np.divide(ui.T @ h, si, out=np.zeros_like(si), where=keep), 0.0)
                out[i] = vti.T @ w
            except np.linalg.LinAlgError:
                out[i] = np.nan
        return out
    proj = np.einsum("nik,ni->nk", u, np.broadcast_to(h, (n, 9)))
    keep = s > RANK_RCOND * s[:, :1]
    w = np.where(keep, np.divide(proj, s, out=np.zeros_like(s), where=s > 0), 0.0)
    return np.einsum("nkm,nk->nm", vt, w)


def _make_bound_objective(h: np.ndarray, m1: int, m2: int, solve_mode: str):
    h = np.asarray(h, dtype=float)
    gate = RESIDUAL_RTOL * max(1.0, float(np.linalg.norm(h)))

    def objective(thetas: np.ndarray):
        na, nb = _bloch_split_batch(thetas, m1, m2)
        t = _transfer_batch(na, nb)
        with np.errstate(all="ignore"):
            if solve_mode == "unique":
                alpha = _solve_unique_batch(t, h)
            else:
                alpha = _solve_min_norm_batch(t, h)
            alpha_ok = np.all(np.isfinite(alpha), axis=1)
            alpha = np.where(alpha_ok[:, None], alpha, 0.0)
            resid = np.linalg.norm(np.einsum("nij,nj->ni", t, alpha) - h, axis=1)
            feasible = alpha_ok & (resid <= gate)
            bounds = _enumerated_bounds(alpha.reshape(-1, m1, m2))
        return np.where(feasible, bounds, -np.inf), alpha

    return objective


def _make_qv_objective(alpha_mat: np.ndarray, c: np.ndarray, m1: int, m2: int):
    cmat = np.asarray(c, dtype=float).reshape(3, 3)
    alpha_mat = np.asarray(alpha_mat, dtype=float)

    def objective(thetas: np.ndarray):
        # Fixed contraction order: per-row results must not depend on the
        # batch size, so the bounce loop's half-step bookkeeping stays exact.
        na, nb = _bloch_split_batch(thetas, m1, m2)
        vals = np.einsum("nai,ij,nbj,ab->n", na, cmat, nb, alpha_mat)
        return vals, None

    return objective


# ---------------------------------------------------------------------------
# lockstep engine


def _run_lockstep(
    objective,
    theta0: np.ndarray,
    cfg: OptimizerConfig,
    fd_cfg: FiniteDiffConfig,
    maximize: bool,
    seed_values: np.ndarray | None = None,
    seed_payload: np.ndarray | None = None,
    record_every: int | None = None,
):
    n_runs, dim = theta0.shape
    steps = cfg.max_steps
    if record_every is None:
        record_every = max(1, steps // 100)
    worst = -np.inf if maximize else np.inf
    state = adam_init(theta0)
    best_value = np.full(n_runs, worst)
    best_theta = theta0.copy()
    best_payload = None
    if seed_values is not None:
        best_value = seed_values.astype(float).copy()
        best_payload = None if seed_payload is None else seed_payload.copy()
    history = np.empty((n_runs, steps + 1))
    records: list[list[RunRecord]] = [[] for _ in range(n_runs)]
    offsets = np.concatenate(
        [np.zeros((1, dim)), np.eye(dim) * fd_cfg.step, -np.eye(dim) * fd_cfg.step]
    )
    n_pts = offsets.shape[0]
    for t in range(steps + 1):
        if t < steps:
            pts = (state.theta[:, None, :] + offsets[None, :, :]).reshape(n_runs * n_pts, dim)
            values, payload = objective(pts)
            values = values.reshape(n_runs, n_pts)
            center = values[:, 0]
            center_payload = None if payload is None else payload.reshape(n_runs, n_pts, -1)[:, 0, :]
        else:
            center, payload = objective(state.theta)
            center_payload = payload
        improved = (center > best_value) if maximize else (center < best_value)
        improved &= np.isfinite(center)
        if np.any(improved):
            best_value = np.where(improved, center, best_value)
            best_theta[improved] = state.theta[improved]
            if center_payload is not None:
                if best_payload is None:
                    best_payload = np.zeros((n_runs, center_payload.shape[-1]))
                best_payload[improved] = center_payload[improved]
        history[:, t] = best_value
        if t % record_every == 0 or t == steps:
            for r in range(n_runs):
                records[r].append(
                    RunRecord(step=t, theta=state.theta[r].copy(), value=float(center[r]), is_best=bool(improved[r]))
                )
        if t == steps:
            break
        f_up = values[:, 1 : dim + 1]
        f_down = values[:, dim + 1 :]
        ok = np.isfinite(f_up) & np.isfinite(f_down)
        # subtract only where both sides are finite; inf - inf would warn
        diff = np.subtract(f_up, f_down, out=np.zeros_like(f_up), where=ok)
        grad = diff / (2.0 * fd_cfg.step)
        state = adam_step(state, grad, cfg, maximize=maximize)
    return best_value, best_theta, best_payload, history, records


# ---------------------------------------------------------------------------
# public search operations


def _auto_solve_mode(scenario: Scenario, solve_mode: str | None) -> str:
    if solve_mode is None:
        return "unique" if scenario.m1 * scenario.m2 == 9 else "min_norm"
    if solve_mode not in ("unique", "min_norm"):
        raise ValueError(f"unknown solve mode {solve_mode!r}")
    if solve_mode == "unique" and scenario.m1 * scenario.m2 != 9:
        raise ValueError("unique mode needs m1 * m2 == 9")
    return solve_mode


def _check_settings(scenario: Scenario, ms: MeasurementSettings):
    if (ms.m1, ms.m2) != (scenario.m1, scenario.m2):
        raise ValueError(
            f"settings ({ms.m1}, {ms.m2}) do not match scenario ({scenario.m1}, {scenario.m2})"
        )


def maximize_classical_bound(
    h,
    scenario: Scenario,
    init: MeasurementSettings,
    cfg: OptimizerConfig | None = None,
    fd_cfg: FiniteDiffConfig | None = None,
    solve_mode: str | None = None,
    init_alpha: BellCoeffs | None = None,
) -> OptimizeResult:
    """Adam ascent of the classical bound at fixed operator coefficients h.

    Every reported iterate solves T(theta) alpha = h within tolerance, and
    the reported bound is the exact enumerated bound of the reported alpha.
    If init_alpha is supplied (a known-feasible solution at init), the best
    tracker is seeded with it, so the result never falls below its bound.
    """
    h = np.asarray(h, dtype=float)
    cfg = cfg or DEFAULT_ASCENT
    fd_cfg = fd_cfg or DEFAULT_FD
    _check_settings(scenario, init)
    mode = _auto_solve_mode(scenario, solve_mode)
    objective = _make_bound_objective(h, scenario.m1, scenario.m2, mode)
    theta0 = init.to_vector()[None, :]
    seed_values = seed_payload = None
    if init_alpha is not None:
        if init_alpha.alpha.shape != (scenario.m1, scenario.m2):
            raise ValueError("init_alpha does not match the scenario")
        t0 = build_transfer_matrix(init)
        res = float(np.linalg.norm(t0.matrix @ init_alpha.alpha.ravel() - h))
        if res > RESIDUAL_RTOL * max(1.0, float(np.linalg.norm(h))):
            raise ValueError(f"init_alpha is not feasible at init: residual {res!r}")
        seed_values = _enumerated_bounds(init_alpha.alpha[None, :, :])
        seed_payload = init_alpha.alpha.ravel()[None, :]
    best_value, best_theta, best_payload, history, records = _run_lockstep(
        objective, theta0, cfg, fd_cfg, maximize=True,
        seed_values=seed_values, seed_payload=seed_payload,
    )
    if not np.isfinite(best_value[0]):
        raise NoFeasiblePointError("no feasible settings found for these coefficients")
    alpha = BellCoeffs(scenario, best_payload[0].reshape(scenario.m1, scenario.m2))
    return OptimizeResult(
        settings=MeasurementSettings.from_vector(scenario.m1, scenario.m2, best_theta[0]),
        value=float(best_value[0]),
        alpha=alpha,
        history=history[0],
        records=tuple(records[0]),
    )


def minimize_quantum_value(
    alpha: BellCoeffs,
    c,
    init: MeasurementSettings,
    cfg: OptimizerConfig | None = None,
    fd_cfg: FiniteDiffConfig | None = None,
) -> OptimizeResult:
    """Adam descent of c . T(theta) . alpha at fixed inequality coefficients."""
    cfg = cfg or DEFAULT_DESCENT
    fd_cfg = fd_cfg or DEFAULT_FD
    scenario = alpha.scenario
    _check_settings(scenario, init)
    c = np.asarray(c, dtype=float)
    if c.shape != (9,):
        raise ValueError(f"correlator vector must have shape (9,), got {c.shape}")
    objective = _make_qv_objective(alpha.alpha, c, scenario.m1, scenario.m2)
    best_value, best_theta, _, history, records = _run_lockstep(
        objective, init.to_vector()[None, :], cfg, fd_cfg, maximize=False
    )
    return OptimizeResult(
        settings=MeasurementSettings.from_vector(scenario.m1, scenario.m2, best_theta[0]),
        value=float(best_value[0]),
        alpha=alpha,
        history=history[0],
        records=tuple(records[0]),
    )


@dataclass(frozen=True)
class OptimizationTask:
    """A restartable search: init sampler plus a lockstep batch runner."""

    scenario: Scenario
    maximize: bool
    _objective_payload: tuple

    @property
    def dim(self) -> int:
        return 2 * (self.scenario.m1 + self.scenario.m2)

    def sample_init(self, rng: np.random.Generator) -> np.ndarray:
        # Polar angles uniform on [0, pi], azimuths on [0, 2 pi).
        u = rng.random(self.dim)
        u[0::2] *= np.pi
        u[1::2] *= 2.0 * np.pi
        return u

    def run_batch(self, theta0s: np.ndarray) -> list[OptimizeResult]:
        kind, objective, cfg, fd_cfg, alpha_fixed = self._objective_payload
        best_value, best_theta, best_payload, history, records = _run_lockstep(
            objective, theta0s, cfg, fd_cfg, maximize=self.maximize
        )
        out = []
        for r in range(theta0s.shape[0]):
            if kind == "bound" and np.isfinite(best_value[r]):
                alpha = BellCoeffs(
                    self.scenario,
                    best_payload[r].reshape(self.scenario.m1, self.scenario.m2),
                )
            elif kind == "bound":
                alpha = None
            else:
                alpha = alpha_fixed
            out.append(
                OptimizeResult(
                    settings=MeasurementSettings.from_vector(
                        self.scenario.m1, self.scenario.m2, best_theta[r]
                    ),
                    value=float(best_value[r]),
                    alpha=alpha,
                    history=history[r],
                    records=tuple(records[r]),
                    restart_index=r,
                )
            )
        return out


def bound_maximization_task(
    h,
    scenario: Scenario,
    cfg: OptimizerConfig | None = None,
    fd_cfg: FiniteDiffConfig | None = None,
    solve_mode: str | None = None,
) -> OptimizationTask:
    h = np.asarray(h, dtype=float)
    mode = _auto_solve_mode(scenario, solve_mode)
    objective = _make_bound_objective(h, scenario.m1, scenario.m2, mode)
    return OptimizationTask(
        scenario, True, ("bound", objective, cfg or DEFAULT_ASCENT, fd_cfg or DEFAULT_FD, None)
    )


def value_minimization_task(
    alpha: BellCoeffs,
    c,
    cfg: OptimizerConfig | None = None,
    fd_cfg: FiniteDiffConfig | None = None,
) -> OptimizationTask:
    c = np.asarray(c, dtype=float)
    objective = _make_qv_objective(alpha.alpha, c, alpha.scenario.m1, alpha.scenario.m2)
    return OptimizationTask(
        alpha.scenario, False, ("qv", objective, cfg or DEFAULT_DESCENT, fd_cfg or DEFAULT_FD, alpha)
    )


def restart_harness(task: OptimizationTask, n_restarts: int, seed: int) -> RestartOutcome:
    """Run the task from deterministically seeded random inits; keep the best.

    Restart i draws its init from a stream seeded by (seed, i), so a single
    restart reproduces exactly the first member of a larger batch. Ties go to
    the lowest restart index.
    """
    if n_restarts < 1:
        raise ValueError("need at least one restart")
    theta0s = np.stack(
        [
            task.sample_init(np.random.default_rng(np.random.SeedSequence((seed, i))))
            for i in range(n_restarts)
        ]
    )
    runs = task.run_batch(theta0s)
    values = np.array([r.value for r in runs])
    best_index = int(np.argmax(values)) if task.maximize else int(np.argmin(values))
    best = runs[best_index]
    if task.maximize and not np.isfinite(best.value):
        raise NoFeasiblePointError("no restart found a feasible point")
    return RestartOutcome(best=best, runs=tuple(runs), best_index=best_index)


# ---------------------------------------------------------------------------
# bounce loop


@dataclass(frozen=True)
class BounceRecord:
    half_step: int
    kind: str
    beta_c: float
    beta_q: float
    gap: float


@dataclass(frozen=True)
class BounceResult:
    records: tuple[BounceRecord, ...]
    loops: int
    converged: bool
    violation: bool
    alpha: BellCoeffs
    settings: MeasurementSettings

    @property
    def final_gap(self) -> float:
        return self.records[-1].gap


def bounce_loop(
    start,
    ms0: MeasurementSettings,
    c,
    *,
    min_cfg: OptimizerConfig | None = None,
    max_cfg: OptimizerConfig | None = None,
    fd_cfg: FiniteDiffConfig | None = None,
    solve_mode: str | None = None,
    gap_tol: float = 1e-6,
    max_loops: int = 10,
) -> BounceResult:
    """Alternate value descent and bound ascent until the gap stops improving.

    Args:
        start: either BellCoeffs (loop begins by minimizing the quantum
            value at fixed inequality) or a 9-component operator coefficient
            vector (an inequality is first solved for at ms0).
        ms0: initial measurement settings.
        c: measured Pauli correlator vector driving the quantum value.
        gap_tol: stop once a full loop improves the gap beta_Q - beta_C by
            less than this.
        max_loops: hard loop budget; must be positive.

    The recorded trajectory keeps the half-step contracts exact: a minimize
    half-step never raises beta_Q, a maximize half-step never lowers beta_C.
    """
    if max_loops < 1:
        raise ValueError("loop budget must be positive")
    c = np.asarray(c, dtype=float)
    min_cfg = min_cfg or DEFAULT_DESCENT
    max_cfg = max_cfg or DEFAULT_ASCENT
    fd_cfg = fd_cfg or DEFAULT_FD
    if isinstance(start, BellCoeffs):
        alpha = start
    else:
        from .mapping import solve_alpha

        t0 = build_transfer_matrix(ms0)
        h0 = np.asarray(start, dtype=float)
        mode0 = "unique" if ms0.m1 * ms0.m2 == 9 else "min_norm"
        alpha = solve_alpha(t0, h0, mode0)
    scenario = alpha.scenario
    _check_settings(scenario, ms0)

    def qv_at(ms: MeasurementSettings, bc: BellCoeffs) -> float:
        objective = _make_qv_objective(bc.alpha, c, scenario.m1, scenario.m2)
        return float(objective(ms.to_vector()[None, :])[0][0])

    ms = ms0
    beta_c = float(_enumerated_bounds(alpha.alpha[None, :, :])[0])
    beta_q = qv_at(ms, alpha)
    records = [BounceRecord(0, "init", beta_c, beta_q, beta_q - beta_c)]
    gap_prev = records[-1].gap
    loops = 0
    converged = False
    half = 0
    for _ in range(max_loops):
        res_min = minimize_quantum_value(alpha, c, ms, cfg=min_cfg, fd_cfg=fd_cfg)
        ms = res_min.settings
        beta_q = res_min.value
        half += 1
        records.append(BounceRecord(half, "minimize-quantum-value", beta_c, beta_q, beta_q - beta_c))

        h_cur = build_transfer_matrix(ms).matrix @ alpha.alpha.ravel()
        res_max = maximize_classical_bound(
            h_cur, scenario, ms, cfg=max_cfg, fd_cfg=fd_cfg,
            solve_mode=solve_mode, init_alpha=alpha,
        )
        ms = res_max.settings
        alpha = res_max.alpha
        beta_c = res_max.value
        beta_q = qv_at(ms, alpha)
        half += 1
        records.append(BounceRecord(half, "maximize-classical-bound", beta_c, beta_q, beta_q - beta_c))

        loops += 1
        gap = records[-1].gap
        if gap_prev - gap < gap_tol:
            converged = True
            break
        gap_prev = gap
    return BounceResult(
        records=tuple(records),
        loops=loops,
        converged=converged,
        violation=records[-1].gap < 0,
        alpha=alpha,
        settings=ms,
    )
