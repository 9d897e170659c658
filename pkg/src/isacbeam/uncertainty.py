"""Uncertainty sets and independent worst-case evaluation oracles.

Two uncertainty models are covered: a Euclidean ball of radius eps around each
user's channel estimate, and a per-target angle interval discretised into a
convex hull of steering outer products. The oracles here are used both to
certify solver output and to anchor the solver's slack variables, so they must
never report an optimistic value: closed forms are exact minimisers /
maximisers, and the sampling oracles only tighten from the pessimistic side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arraymodel import ArrayGeometry, Beamformer, ChannelSet, steering_vector


def worst_signal_power(h_hat: np.ndarray, w: np.ndarray, eps: float) -> float:
    """Minimum of |(h_hat + d)^H w|^2 over ||d|| <= eps, in closed form.

    The error can rotate and shrink the projection onto w by at most
    eps*||w||, so the minimum is (max(|h_hat^H w| - eps*||w||, 0))^2.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    level = abs(np.vdot(h_hat, w)) - eps * np.linalg.norm(w)
    return float(max(level, 0.0) ** 2)


def worst_interference(h_hat: np.ndarray, W_bar: np.ndarray, eps: float,
                       sigma2: float, max_bisect: int = 200) -> float:
    """Maximum of ||W_bar^H (h_hat + d)||^2 + sigma2 over ||d|| <= eps.

    Maximising the convex quadratic over the ball puts the maximiser on the
    boundary where it satisfies Q(h+d) = lam*d with lam >= lam_max(Q),
    Q = W_bar W_bar^H. The maximising error is phase aligned with h_hat in
    each eigendirection of Q, which reduces the stationarity condition to
    real coordinates t_i(lam) = lam_i m_i / (lam - lam_i), m_i = |(U^H h)_i|,
    with ||t(lam)|| monotone in lam; lam is bisected above lam_max until
    ||t|| = eps. When h_hat has (numerically) no component in the top
    eigenspace the pole cannot absorb the radius (hard case) and the residual
    is spent along a top eigendirection instead.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    h_hat = np.asarray(h_hat, dtype=complex)
    W_bar = np.asarray(W_bar, dtype=complex)
    nominal = float(np.linalg.norm(W_bar.conj().T @ h_hat) ** 2) + sigma2
    if eps == 0 or W_bar.size == 0:
        return nominal

    Q = W_bar @ W_bar.conj().T
    evals, U = np.linalg.eigh(Q)  # ascending
    evals = np.maximum(evals, 0.0)
    lam1 = evals[-1]
    if lam1 <= 0:
        return nominal
    m = np.abs(U.conj().T @ h_hat)
    top = evals >= lam1 * (1.0 - 1e-12)
    rest = ~top

    def value_at(t):
        return float(np.sum(evals * (m + t) ** 2)) + sigma2

    # coefficients of the non-pole coordinates at lam -> lam1+
    t_rest = np.zeros_like(m)
    t_rest[rest] = evals[rest] * m[rest] / (lam1 - evals[rest])
    rest_norm_sq = float(np.sum(t_rest**2))

    candidates = []
    if rest_norm_sq < eps**2:
        # hard-case point: pad the leftover radius along a top eigendirection
        # (aligned with the - possibly zero - top component of h_hat)
        t_hard = t_rest.copy()
        t_hard[-1] += math.sqrt(eps**2 - rest_norm_sq)
        candidates.append(t_hard)

    if np.any(m[top] > 0):

        def t_of(lam):
            return evals * m / (lam - evals)

        hi = lam1 + max(lam1, lam1 * float(np.max(m)) / max(eps, 1e-300))
        while np.linalg.norm(t_of(hi)) > eps:
            hi *= 2.0
        lo = lam1
        converged = False
        for _ in range(max_bisect):
            lam = 0.5 * (lo + hi)
            if lam <= lam1:  # bracket collapsed onto the pole
                break
            r = np.linalg.norm(t_of(lam))
            if abs(r - eps) <= 1e-10 * eps:
                converged = True
                break
            if r > eps:
                lo = lam
            else:
                hi = lam
        if converged:
            candidates.append(t_of(lam))
        else:
            t_best = t_of(hi)  # feasible side of the bracket
            if np.linalg.norm(t_best) <= eps:
                candidates.append(t_best)
    elif rest_norm_sq >= eps**2:
        # no pole at all and the smooth coordinates already exceed the radius
        # at lam1: the root lies strictly above lam1 on a smooth function
        def t_smooth(lam):
            out = np.zeros_like(m)
            out[rest] = evals[rest] * m[rest] / (lam - evals[rest])
            return out

        lo, hi = lam1, 2.0 * lam1 + 1.0
        while np.linalg.norm(t_smooth(hi)) > eps:
            hi *= 2.0
        converged = False
        for _ in range(max_bisect):
            lam = 0.5 * (lo + hi)
            r = np.linalg.norm(t_smooth(lam))
            if abs(r - eps) <= 1e-10 * eps:
                converged = True
                break
            if r > eps:
                lo = lam
            else:
                hi = lam
        if converged:
            candidates.append(t_smooth(lam))

    if not candidates:
        raise RuntimeError(
            "secular bisection did not converge; quadratic is ill-conditioned")
    value = max(value_at(t) for t in candidates)
    return max(value, nominal)


def sample_ball(eps: float, dim: int, num: int, rng: np.random.Generator,
                interior_frac: float = 0.1) -> np.ndarray:
    """Draw complex error vectors in the eps-ball, mostly on the boundary.

    Worst cases of both the signal and the interference quadratics sit on the
    boundary; a small interior fraction is kept as a sanity check.
    """
    z = rng.standard_normal((num, dim)) + 1j * rng.standard_normal((num, dim))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    radius = np.full(num, eps)
    n_int = int(num * interior_frac)
    if n_int:
        radius[:n_int] = eps * rng.random(n_int) ** (1.0 / (2 * dim))
    return z * radius[:, None]


def _project_ball(d: np.ndarray, eps: float) -> np.ndarray:
    norm = np.linalg.norm(d)
    return d if norm <= eps else d * (eps / norm)


def sampled_min_signal_power(h_hat, w, eps, num_samples: int,
                             rng: np.random.Generator,
                             polish_starts: int = 10,
                             polish_iters: int = 200) -> float:
    """Sampling oracle for the worst signal power, polished by projected
    gradient descent (the objective is convex in the error, so descent from
    the best samples reaches the global minimum over the ball)."""
    w = np.asarray(w, dtype=complex)
    deltas = sample_ball(eps, len(h_hat), num_samples, rng)
    proj = (h_hat.conj() @ w) + deltas.conj() @ w
    values = np.abs(proj) ** 2
    order = np.argsort(values)
    best = float(values[order[0]])
    w_norm_sq = float(np.linalg.norm(w) ** 2)
    if w_norm_sq == 0.0:
        return best
    for idx in order[:polish_starts]:
        d = deltas[idx].copy()
        step = 1.0 / w_norm_sq  # inverse curvature of the rank-one quadratic
        val = values[idx]
        for _ in range(polish_iters):
            grad = w * np.vdot(w, h_hat + d)  # wrt conj(d)
            cand = _project_ball(d - step * grad, eps)
            cand_val = abs(np.vdot(h_hat + cand, w)) ** 2
            if cand_val < val:
                d, val = cand, cand_val
            else:
                step *= 0.5
                if step < 1e-12 / w_norm_sq:
                    break
        best = min(best, float(val))
    return best


def sampled_max_interference(h_hat, W_bar, eps, sigma2, num_samples: int,
                             rng: np.random.Generator,
                             polish_starts: int = 10,
                             polish_iters: int = 200) -> float:
    """Sampling oracle for the worst interference, polished by conditional
    gradient ascent (d <- eps * grad/||grad||, the linearisation maximiser on
    the ball) from the strongest samples and the top eigenvector."""
    W_bar = np.asarray(W_bar, dtype=complex)
    if W_bar.size == 0:
        return float(sigma2)
    Q = W_bar @ W_bar.conj().T
    deltas = sample_ball(eps, len(h_hat), num_samples, rng)
    z = h_hat[None, :] + deltas
    values = np.linalg.norm(z @ W_bar.conj(), axis=1) ** 2
    order = np.argsort(values)[::-1]
    starts = [deltas[i] for i in order[:polish_starts]]
    evals, U = np.linalg.eigh(Q)
    starts.append(eps * U[:, -1])
    starts.append(-eps * U[:, -1])
    best = float(values[order[0]])
    for d0 in starts:
        d = d0.copy()
        val = float(np.real((h_hat + d).conj() @ Q @ (h_hat + d)))
        for _ in range(polish_iters):
            grad = Q @ (h_hat + d)
            gnorm = np.linalg.norm(grad)
            if gnorm < 1e-300:
                break
            cand = eps * grad / gnorm
            cand_val = float(np.real((h_hat + cand).conj() @ Q @ (h_hat + cand)))
            if cand_val <= val * (1 + 1e-15):
                val = max(val, cand_val)
                break
            d, val = cand, cand_val
        best = max(best, val)
    return best + sigma2


def worst_case_sinr(channel_idx: int, bf: Beamformer, channels: ChannelSet,
                    num_samples: int = 10_000,
                    rng: np.random.Generator | None = None,
                    delta_floor: float = 0.0) -> tuple[float, float]:
    """Certified lower bound and sampled estimate of a user's worst SINR.

    The certified value decouples the joint minimisation: worst signal over
    worst interference, each optimised separately over the ball, which can
    only understate the true worst SINR. The sampled value takes the minimum
    of the exact SINR over ball draws plus projected-gradient descent from the
    ten worst, so certified <= true worst-case <= sampled always holds.
    """
    if num_samples < 1:
        raise ValueError("need at least one sample")
    if rng is None:
        rng = np.random.default_rng(0)
    W = bf.matrix
    k = channel_idx
    h = channels.estimates[k]
    eps = channels.radii[k]
    sigma2 = channels.noise_powers[k]
    others = [j for j in range(W.shape[1]) if j != k]
    W_bar = W[:, others]
    w = W[:, k]

    certified = worst_signal_power(h, w, eps) / worst_interference(h, W_bar, eps, sigma2)
    certified = max(certified, delta_floor)
    if eps == 0:
        return certified, certified

    Q = W_bar @ W_bar.conj().T if W_bar.size else np.zeros((len(h), len(h)))
    S_mat = np.outer(w, w.conj())

    def gamma(d):
        z = h + d
        sig = float(np.real(z.conj() @ S_mat @ z))
        itf = float(np.real(z.conj() @ Q @ z)) + sigma2
        return sig / itf

    deltas = sample_ball(eps, len(h), num_samples, rng)
    z = h[None, :] + deltas
    sig = np.abs(z @ w.conj()) ** 2
    itf = (np.linalg.norm(z @ W_bar.conj(), axis=1) ** 2 if W_bar.size
           else np.zeros(len(z))) + sigma2
    values = sig / itf
    order = np.argsort(values)
    sampled = float(values[order[0]])
    for idx in order[:10]:
        d = deltas[idx].copy()
        val = values[idx]
        step = eps
        for _ in range(200):
            zz = h + d
            sig_v = float(np.real(zz.conj() @ S_mat @ zz))
            itf_v = float(np.real(zz.conj() @ Q @ zz)) + sigma2
            grad = (itf_v * (S_mat @ zz) - sig_v * (Q @ zz)) / itf_v**2
            gnorm = np.linalg.norm(grad)
            if gnorm < 1e-300:
                break
            cand = _project_ball(d - step * grad / gnorm, eps)
            cand_val = gamma(cand)
            if cand_val < val:
                d, val = cand, cand_val
                step *= 2.0
            else:
                step *= 0.5
                if step < 1e-14 * eps:
                    break
        sampled = min(sampled, float(val))
    return certified, max(sampled, certified)


def hull_samples(interval: tuple[float, float], num_samples: int,
                 geometry: ArrayGeometry) -> np.ndarray:
    """Steering outer products on a uniform angle grid over the interval.

    Both endpoints are included; a single sample sits at the midpoint. Each
    matrix is Hermitian PSD rank one with trace N_t.
    """
    lo, hi = interval
    if lo > hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    if num_samples < 1:
        raise ValueError("need at least one hull sample")
    if num_samples == 1:
        angles = np.array([0.5 * (lo + hi)])
    else:
        angles = np.linspace(lo, hi, num_samples)
    mats = np.empty((len(angles), geometry.num_antennas, geometry.num_antennas),
                    dtype=complex)
    for s, th in enumerate(angles):
        a = steering_vector(th, geometry)
        mats[s] = np.outer(a, a.conj())
    return mats


@dataclass(frozen=True)
class AngleUncertainty:
    """Angle interval for one target with its hull discretisation."""

    interval_min: float
    interval_max: float
    samples: np.ndarray  # (S, N_t, N_t)
    weights: np.ndarray  # (S,) on the simplex

    def __post_init__(self):
        if self.interval_min > self.interval_max:
            raise ValueError("interval_min exceeds interval_max")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.samples.shape[0],):
            raise ValueError("one weight per hull sample required")
        if np.any(w < -1e-9) or np.any(w > 1 + 1e-9) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must lie on the simplex")
        n = self.samples.shape[1]
        for A in self.samples:
            if not np.allclose(A, A.conj().T, atol=1e-12):
                raise ValueError("hull samples must be Hermitian")
            if abs(np.trace(A).real - n) > 1e-9 * n:
                raise ValueError("hull samples must have trace N_t")
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_interval(cls, interval_min: float, interval_max: float,
                      num_samples: int, geometry: ArrayGeometry) -> "AngleUncertainty":
        mats = hull_samples((interval_min, interval_max), num_samples, geometry)
        weights = np.full(len(mats), 1.0 / len(mats))
        return cls(interval_min, interval_max, mats, weights)

    @property
    def num_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def interval(self) -> tuple[float, float]:
        return (self.interval_min, self.interval_max)

    def weighted_matrix(self) -> np.ndarray:
        """Current hull point sum_s mu_s A_s."""
        return np.tensordot(self.weights, self.samples, axes=(0, 0))


def worst_beampattern(bf: Beamformer, interval: tuple[float, float],
                      grid_step: float = math.radians(0.05)) -> tuple[float, float]:
    """Grid-search minimum of the beampattern over an angle interval.

    Returns (value, argmin angle). The default 0.05 degree step is fine
    enough that refining it changes the value by less than the beampattern's
    Lipschitz slack over one step.
    """
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    lo, hi = interval
    if lo > hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    count = max(int(math.ceil((hi - lo) / grid_step)) + 1, 1)
    angles = np.linspace(lo, hi, count)
    n = np.arange(bf.num_antennas)
    A = np.exp(-1j * np.pi * np.outer(np.sin(angles), n))  # (count, N_t)
    values = np.linalg.norm(A.conj() @ bf.matrix, axis=1) ** 2
    idx = int(np.argmin(values))
    return float(values[idx]), float(angles[idx])


@dataclass(frozen=True)
class WorstCaseReport:
    """Certified and sampled worst-case figures for one beamformer."""

    certified_sinr: np.ndarray      # (K,) decoupled lower bounds
    sampled_sinr: np.ndarray        # (K,) sampled-plus-descent estimates
    worst_beampattern: np.ndarray   # (M,) grid minima in watts
    worst_sum_rate: float           # bits/s/Hz from the sampled SINRs
    certified_sum_rate: float       # bits/s/Hz from the certified bounds

    def __post_init__(self):
        cert = np.asarray(self.certified_sinr, dtype=float)
        samp = np.asarray(self.sampled_sinr, dtype=float)
        bp = np.asarray(self.worst_beampattern, dtype=float)
        if np.any(cert < 0) or np.any(samp < 0) or np.any(bp < 0):
            raise ValueError("worst-case figures must be nonnegative")
        slack = 1e-9 * np.maximum(1.0, np.abs(samp))
        if np.any(cert > samp + slack):
            raise ValueError("certified bound exceeds sampled worst case")
        object.__setattr__(self, "certified_sinr", cert)
        object.__setattr__(self, "sampled_sinr", samp)
        object.__setattr__(self, "worst_beampattern", bp)

    @property
    def worst_beampattern_total(self) -> float:
        return float(self.worst_beampattern.sum())


def evaluate_worst_case(bf: Beamformer, channels: ChannelSet,
                        uncertainties: list[AngleUncertainty],
                        num_samples: int = 10_000,
                        rng: np.random.Generator | None = None,
                        grid_step: float = math.radians(0.05)) -> WorstCaseReport:
    """Certify a beamformer against both uncertainty sets.

    Per-user worst SINRs are evaluated under each user's own error ball (the
    balls are independent, so the joint worst case decomposes per user); the
    reported worst sum rate sums log2(1 + sampled worst SINR).
    """
    if rng is None:
        rng = np.random.default_rng(0)
    K = channels.num_users
    certified = np.empty(K)
    sampled = np.empty(K)
    for k in range(K):
        certified[k], sampled[k] = worst_case_sinr(
            k, bf, channels, num_samples=num_samples, rng=rng)
    bp = np.array([worst_beampattern(bf, u.interval, grid_step)[0]
                   for u in uncertainties])
    return WorstCaseReport(
        certified_sinr=certified,
        sampled_sinr=sampled,
        worst_beampattern=bp,
        worst_sum_rate=float(np.log2(1.0 + sampled).sum()),
        certified_sum_rate=float(np.log2(1.0 + certified).sum()),
    )
