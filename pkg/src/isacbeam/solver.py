"""Two-layer robust beamforming optimisation.

The inner layer repeatedly solves a conic subproblem built from the SCA
surrogates and robustness LMIs (worst-case beamforming for fixed hull
weights); the outer layer alternates that with the closed-form hull-weight
update. Channels are rescaled per user to unit norm inside the subproblem and
the bilinear slack is rescaled to its current anchor, which keeps every cone
well conditioned across the huge dynamic range between transmit power and
noise floor; all reported quantities are converted back to physical units.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import cvxpy as cp
import numpy as np

from . import sca
from .arraymodel import Beamformer, ChannelSet, steering_vector
from .scenario import Scenario, SystemConfig
from .uncertainty import (WorstCaseReport, evaluate_worst_case,
                          worst_interference, worst_signal_power)

_DELTA_FLOOR = 1e-6
_EVAL_STREAM = 101  # rng stream tag for final report sampling


@dataclass(frozen=True)
class RunConfig:
    """Solver knobs; mirrors the corresponding SystemConfig fields.

    ``warmup_budget_fracs`` is a power-continuation schedule: the two-layer
    algorithm first converges under each reduced budget, then continues from
    that design at the full budget. Starting directly at a large budget can
    trap the surrogate ascent in a poor basin (power floods the linear
    sensing term before the interference structure has formed); converging
    under scarcity first avoids it and is often faster overall.
    """

    rho: float = 0.8
    power_budget: float = 1.0  # watts
    inner_tol: float = 1e-3
    outer_tol: float = 1e-3
    max_inner: int = 30
    max_outer: int = 20
    solver_feas_tol: float = 1e-7
    warmup_budget_fracs: tuple = (0.5,)

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must be in [0, 1]")
        if self.power_budget <= 0:
            raise ValueError("power budget must be positive")
        if min(self.inner_tol, self.outer_tol, self.solver_feas_tol) <= 0:
            raise ValueError("tolerances must be positive")
        if any(not 0.0 < f < 1.0 for f in self.warmup_budget_fracs):
            raise ValueError("warmup budget fractions must lie in (0, 1)")

    @classmethod
    def from_system(cls, config: SystemConfig) -> "RunConfig":
        return cls(rho=config.rho, power_budget=config.power_budget,
                   inner_tol=config.inner_tol, outer_tol=config.outer_tol,
                   max_inner=config.max_inner, max_outer=config.max_outer,
                   solver_feas_tol=config.solver_feas_tol)


class SolverError(RuntimeError):
    """Conic backend failed or reported the subproblem infeasible."""

    def __init__(self, message: str, status: str = "failed"):
        super().__init__(message)
        self.status = status


@dataclass
class SubproblemSolution:
    """Primal values of one conic solve, in physical units unless noted."""

    W: np.ndarray
    delta: np.ndarray
    beta: np.ndarray            # watts
    nu_normalized: np.ndarray   # unit-channel units, for certificates
    beta_normalized: np.ndarray
    phi: np.ndarray
    xi: np.ndarray
    objective: float            # surrogate optimum
    status: str


class ConicSubproblem:
    """Compiled conic form of the per-iteration design problem.

    This is the conic-solver capability boundary: the problem is expressed
    once with cvxpy (linear objective after surrogates; second-order-cone
    power constraint; Hermitian PSD robustness blocks; exponential cones for
    the rates) and re-solved for new anchors by updating parameters only.
    Results are deterministic for fixed inputs, and independent instances can
    be used from concurrent contexts.
    """

    def __init__(self, scenario: Scenario, config: RunConfig):
        self.scenario = scenario
        self.config = config
        cfg = scenario.config
        Nt, K, M = cfg.num_antennas, cfg.num_users, cfg.num_targets
        KM = K + M
        self.K, self.M, self.KM = K, M, KM

        # per-user unit-norm rescaling of the channel data
        norms = np.linalg.norm(scenario.channels.estimates, axis=1)
        if np.any(norms == 0):
            raise SolverError("zero channel estimate", status="failed")
        self._norms = norms
        h = scenario.channels.estimates / norms[:, None]
        eps = scenario.channels.radii / norms
        s2 = scenario.channels.noise_powers / norms**2
        self.normalized_channels = ChannelSet(h, eps, s2)

        W = cp.Variable((Nt, KM), complex=True)
        dhat = cp.Variable(K, nonneg=True)   # delta / delta_anchor
        bhat = cp.Variable(K, nonneg=True)   # beta / beta_anchor
        nu = cp.Variable(K)
        phi = cp.Variable(K, nonneg=True)
        xi = cp.Variable(K, nonneg=True)
        self._vars = (W, dhat, bhat, nu, phi, xi)

        self._Wp = cp.Parameter((Nt, KM), complex=True)
        self._anchor_outer = [cp.Parameter((Nt, Nt), complex=True) for _ in range(K)]
        self._d_sc = cp.Parameter(K, pos=True)
        self._b_sc = cp.Parameter(K, pos=True)
        self._db_sc = cp.Parameter(K, pos=True)

        cons = [cp.norm(cp.vec(W, order="F")) <= np.sqrt(config.power_budget)]
        for k in range(K):
            Lam, b, c = sca.sca_signal_terms(
                W[:, k], self._Wp[:, k], h[k],
                anchor_outer=self._anchor_outer[k])
            others = [j for j in range(KM) if j != k]
            beta_k = self._b_sc[k] * bhat[k]
            if eps[k] > 0:
                cons.append(sca.lmi_signal(Lam, b, c, nu[k], phi[k], eps[k]) >> 0)
                if others:
                    cons.append(sca.lmi_interference(
                        h[k], W[:, others], beta_k, xi[k], eps[k], s2[k]) >> 0)
            else:
                # zero error radius: the multipliers are degenerate rays, so
                # impose the equivalent nominal constraints directly
                cons += [c >= nu[k], phi[k] == 0, xi[k] == 0]
                if others:
                    cons.append(cp.sum_squares(h[k].conj() @ W[:, others])
                                <= beta_k - s2[k])
            if not others:
                cons.append(beta_k >= s2[k] + xi[k])
            # nu >= delta*beta via the anchor-scaled convex majorant
            cons.append(nu[k] >= self._db_sc[k]
                        * sca.slack_upper_bound(dhat[k], bhat[k], 1.0, 1.0))

        terms = []
        if config.rho > 0:
            terms.append((config.rho / np.log(2.0))
                         * cp.sum(cp.log1p(cp.multiply(self._d_sc, dhat))))
        if config.rho < 1 and M > 0:
            self._G = cp.Parameter((Nt, KM), complex=True)
            self._sens_off = cp.Parameter()
            terms.append((1.0 - config.rho)
                         * (2.0 * cp.real(cp.trace(cp.conj(self._G).T @ W))
                            - self._sens_off))
        else:
            self._G = None
            self._sens_off = None
        self._problem = cp.Problem(cp.Maximize(sum(terms)), cons)

    def set_anchor(self, iterate: sca.SolverIterate) -> None:
        W_prev = iterate.W
        # sensing-only columns may legitimately go dark; a zero communication
        # column makes that user's signal surrogate identically zero
        if np.any(np.linalg.norm(W_prev[:, :self.K], axis=0) < 1e-12):
            raise SolverError(
                "zero anchor column stalls the signal surrogate; "
                "re-initialise from a steering-matched start", status="failed")
        self._Wp.value = W_prev
        for k in range(self.K):
            wk = W_prev[:, k]
            self._anchor_outer[k].value = np.outer(wk, wk.conj())
        d_sc = np.maximum(iterate.delta, 1e-9)
        b_sc = np.maximum(iterate.beta / self._norms**2,
                          self.normalized_channels.noise_powers)
        self._d_sc.value = d_sc
        self._b_sc.value = b_sc
        self._db_sc.value = d_sc * b_sc
        if self._G is not None:
            B_tot = np.sum([
                np.tensordot(iterate.mu[m], u.samples, axes=(0, 0))
                for m, u in enumerate(self.scenario.target_uncertainty)
            ], axis=0)
            self._G.value = B_tot @ W_prev
            self._sens_off.value = float(
                np.real(np.trace(W_prev.conj().T @ B_tot @ W_prev)))

    def solve(self) -> SubproblemSolution:
        # warm_start=False sidesteps Clarabel's in-place data update, which
        # rejects parameter values that change the sparsity pattern (for
        # example an anchor column going exactly to zero); the DPP
        # canonicalisation cache is unaffected
        status = self._try(cp.CLARABEL, warm_start=False)
        if status is None:
            status = self._try(cp.SCS, eps=1e-8, max_iters=50_000)
        if status is None:
            raise SolverError("conic backends failed on the subproblem",
                              status="failed")
        if status in ("infeasible", "infeasible_inaccurate"):
            raise SolverError("subproblem infeasible at the current anchor",
                              status="infeasible")
        if status not in ("optimal", "optimal_inaccurate"):
            raise SolverError(f"unexpected solver status {status}", status="failed")
        W, dhat, bhat, nu, phi, xi = self._vars
        beta_norm = bhat.value * self._b_sc.value
        return SubproblemSolution(
            W=W.value.copy(),
            delta=dhat.value * self._d_sc.value,
            beta=beta_norm * self._norms**2,
            nu_normalized=nu.value.copy(),
            beta_normalized=beta_norm,
            phi=phi.value.copy(),
            xi=xi.value.copy(),
            objective=float(self._problem.value),
            status="solved",
        )

    def _try(self, solver, **kwargs):
        try:
            self._problem.solve(solver=solver, **kwargs)
        except cp.error.SolverError:
            return None
        except Exception:  # backend-internal failures count as solver failures
            return None
        return self._problem.status


def steering_matched_start(scenario: Scenario,
                           power_budget: float | None = None) -> np.ndarray:
    """Beamformer with columns aligned to the estimated user/target angles
    and the power budget split evenly across columns."""
    cfg = scenario.config
    if power_budget is None:
        power_budget = cfg.power_budget
    angles = np.concatenate([scenario.user_angles, scenario.target_angles])
    cols = np.stack([steering_vector(t, scenario.geometry) for t in angles], axis=1)
    scale = np.sqrt(power_budget / (scenario.num_streams * cfg.num_antennas))
    return cols * scale


def certified_slacks(W: np.ndarray, scenario: Scenario,
                     delta_floor: float = _DELTA_FLOOR):
    """Exact worst-case signal/interference slacks for a fixed beamformer."""
    ch = scenario.channels
    K = scenario.num_users
    delta = np.empty(K)
    beta = np.empty(K)
    for k in range(K):
        others = [j for j in range(W.shape[1]) if j != k]
        sig = worst_signal_power(ch.estimates[k], W[:, k], ch.radii[k])
        itf = worst_interference(ch.estimates[k], W[:, others],
                                 ch.radii[k], ch.noise_powers[k])
        beta[k] = itf
        delta[k] = max(sig / itf, delta_floor)
    return delta, beta


def true_objective(W: np.ndarray, delta: np.ndarray, mu: np.ndarray,
                   scenario: Scenario, rho: float) -> float:
    """Weighted sum of slack-backed rates and hull-weighted beampattern gain."""
    rate = float(np.log2(1.0 + np.asarray(delta)).sum())
    sensing = 0.0
    if scenario.num_targets:
        R = W @ W.conj().T
        for m, u in enumerate(scenario.target_uncertainty):
            B = np.tensordot(mu[m], u.samples, axes=(0, 0))
            sensing += float(np.real(np.trace(B @ R)))
    return rho * rate + (1.0 - rho) * sensing


def initialize(scenario: Scenario, config: RunConfig) -> sca.SolverIterate:
    """Steering-matched start with certified worst-case slack anchors and
    uniform hull weights."""
    W0 = steering_matched_start(scenario, config.power_budget)
    delta0, beta0 = certified_slacks(W0, scenario)
    S = (scenario.target_uncertainty[0].num_samples
         if scenario.num_targets else scenario.config.hull_samples)
    mu0 = np.full((scenario.num_targets, S), 1.0 / S)
    obj = true_objective(W0, delta0, mu0, scenario, config.rho)
    return sca.SolverIterate(W=W0, delta=delta0, beta=beta0, mu=mu0,
                             objective=obj)


def solve_subproblem(iterate: sca.SolverIterate, scenario: Scenario,
                     config: RunConfig,
                     subproblem: ConicSubproblem | None = None
                     ) -> tuple[sca.SolverIterate, float]:
    """One convex subproblem solve around the given anchor iterate."""
    if subproblem is None:
        subproblem = ConicSubproblem(scenario, config)
    subproblem.set_anchor(iterate)
    sol = subproblem.solve()
    new = sca.SolverIterate(W=sol.W, delta=sol.delta, beta=sol.beta,
                            mu=iterate.mu.copy(), objective=sol.objective)
    return new, sol.objective


def _solve_with_recovery(subproblem: ConicSubproblem,
                         iterate: sca.SolverIterate,
                         scenario: Scenario) -> SubproblemSolution:
    """Solve once; on failure, pull the anchor halfway back to the certified
    steering-matched start and retry once."""
    subproblem.set_anchor(iterate)
    try:
        return subproblem.solve()
    except SolverError as first:
        budget = subproblem.config.power_budget
        W_ref = steering_matched_start(scenario, budget)
        W_mix = 0.5 * (iterate.W + W_ref)
        W_mix *= np.sqrt(budget / max(np.linalg.norm(W_mix, "fro") ** 2, 1e-300))
        delta, beta = certified_slacks(W_mix, scenario)
        iterate.W, iterate.delta, iterate.beta = W_mix, delta, beta
        subproblem.set_anchor(iterate)
        try:
            return subproblem.solve()
        except SolverError as second:
            raise SolverError(
                f"subproblem failed twice (first: {first}; retry: {second})",
                status=second.status) from second


def inner_loop(scenario: Scenario, mu: np.ndarray, config: RunConfig,
               start: sca.SolverIterate | None = None,
               subproblem: ConicSubproblem | None = None
               ) -> tuple[sca.SolverIterate, list[dict]]:
    """Worst-case beamforming for fixed hull weights.

    Iterates the conic subproblem, re-anchoring at each solution, until the
    relative change of the objective drops below ``inner_tol``. The objective
    sequence is nondecreasing up to solver feasibility tolerance because each
    anchor is feasible for its own subproblem and every surrogate is tight
    there.
    """
    if subproblem is None:
        subproblem = ConicSubproblem(scenario, config)
    it = (start.copy() if start is not None else initialize(scenario, config))
    it.mu = np.asarray(mu, dtype=float).copy()
    records: list[dict] = []
    for step in range(config.max_inner):
        t0 = time.perf_counter()
        sol = _solve_with_recovery(subproblem, it, scenario)
        wall = time.perf_counter() - t0
        # `it` now holds the anchor actually used (recovery may have moved it)
        anchor_obj = true_objective(it.W, it.delta, it.mu, scenario, config.rho)
        anchor_W = it.W
        it = sca.SolverIterate(W=sol.W, delta=sol.delta, beta=sol.beta,
                               mu=it.mu, objective=sol.objective)
        obj = true_objective(it.W, it.delta, it.mu, scenario, config.rho)
        sig_eig, itf_eig = sca.lmi_eigmins(
            sol.W, anchor_W, sol.nu_normalized, sol.phi, sol.xi,
            sol.beta_normalized, subproblem.normalized_channels, subproblem.K)
        records.append({
            "inner_index": step,
            "objective": obj,
            "anchor_objective": anchor_obj,
            "subproblem_objective": sol.objective,
            "delta": sol.delta.tolist(),
            "beta": sol.beta.tolist(),
            "nu_normalized": sol.nu_normalized.tolist(),
            "beta_normalized": sol.beta_normalized.tolist(),
            "power": float(np.linalg.norm(sol.W, "fro") ** 2),
            "eigmin_signal": sig_eig.tolist(),
            "eigmin_interference": itf_eig.tolist(),
            "status": sol.status,
            "wall_time_s": wall,
        })
        it.objective = obj
        if abs(obj - anchor_obj) < config.inner_tol * max(abs(anchor_obj), 1e-12):
            break
    return it, records


@dataclass
class OuterResult:
    """Final design with its certification and full iteration trace."""

    beamformer: Beamformer
    report: WorstCaseReport
    iterate: sca.SolverIterate
    trace: dict
    objective: float
    total_inner_iterations: int
    wall_time_s: float


def _two_layer(scenario: Scenario, config: RunConfig,
               start: sca.SolverIterate | None) -> tuple[sca.SolverIterate, list]:
    """One full run of the alternation: hull-weight update, then inner loop,
    until the weights stop moving or the outer cap is reached."""
    subproblem = ConicSubproblem(scenario, config)
    it = start if start is not None else initialize(scenario, config)
    outer_records = []
    for outer in range(config.max_outer):
        if scenario.num_targets:
            R = it.W @ it.W.conj().T
            mu_new = np.stack([
                sca.mu_update(R, u.samples)
                for u in scenario.target_uncertainty
            ])
            mu_change = float(np.abs(mu_new - it.mu).max())
            it.mu = mu_new
        else:
            mu_change = 0.0
        it, inner_records = inner_loop(scenario, it.mu, config,
                                       start=it, subproblem=subproblem)
        outer_records.append({
            "outer_index": outer,
            "mu": it.mu.tolist(),
            "mu_change": mu_change,
            "inner": inner_records,
        })
        if mu_change < config.outer_tol:
            break
    return it, outer_records


def outer_loop(scenario: Scenario, config: RunConfig | None = None,
               eval_samples: int | None = None) -> OuterResult:
    """Run the two-layer algorithm through the power-continuation schedule
    and certify the final beamformer."""
    if config is None:
        config = RunConfig.from_system(scenario.config)
    t_start = time.perf_counter()
    it = None
    warmup_traces = []
    total_inner = 0
    budgets = tuple(f * config.power_budget for f in config.warmup_budget_fracs)
    for budget in budgets + (config.power_budget,):
        stage_cfg = (config if budget == config.power_budget else
                     RunConfig(rho=config.rho, power_budget=budget,
                               inner_tol=config.inner_tol,
                               outer_tol=config.outer_tol,
                               max_inner=config.max_inner,
                               max_outer=config.max_outer,
                               solver_feas_tol=config.solver_feas_tol,
                               warmup_budget_fracs=()))
        if it is not None:
            delta, beta = certified_slacks(it.W, scenario)
            it = sca.SolverIterate(W=it.W, delta=delta, beta=beta, mu=it.mu,
                                   objective=it.objective)
        it, outer_records = _two_layer(scenario, stage_cfg, it)
        total_inner += sum(len(o["inner"]) for o in outer_records)
        if budget != config.power_budget:
            warmup_traces.append({"power_budget": budget,
                                  "outer": outer_records})

    W = it.W
    power = float(np.linalg.norm(W, "fro") ** 2)
    if power > config.power_budget:
        W = W * np.sqrt(config.power_budget / power)
        it.W = W
    bf = Beamformer(W)
    bf.validate_power(config.power_budget)
    n_eval = (eval_samples if eval_samples is not None
              else scenario.config.eval_samples)
    rng = np.random.default_rng([scenario.seed, _EVAL_STREAM])
    report = evaluate_worst_case(bf, scenario.channels,
                                 list(scenario.target_uncertainty),
                                 num_samples=n_eval, rng=rng)
    wall = time.perf_counter() - t_start
    trace = {
        "status": "solved",
        "objective": it.objective,
        "total_inner_iterations": total_inner,
        "outer_iterations": len(outer_records),
        "wall_time_s": wall,
        "outer": outer_records,
        "warmup": warmup_traces,
    }
    return OuterResult(beamformer=bf, report=report, iterate=it, trace=trace,
                       objective=it.objective,
                       total_inner_iterations=total_inner, wall_time_s=wall)
