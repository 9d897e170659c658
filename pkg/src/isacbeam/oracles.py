"""Independent-oracle cross checks runnable from the command line.

Each check compares a closed form or solver-facing quantity against a
different evaluation route (direct summation, sampling with polish, grid
refinement, vertex enumeration). They are the same comparisons the test suite
freezes; the CLI exposes them for quick field verification.
"""

from __future__ import annotations

import math

import numpy as np

from .arraymodel import (ArrayGeometry, Beamformer, ChannelSet,
                         steering_vector, user_sinr)
from .sca import mu_update
from .uncertainty import (hull_samples, sampled_max_interference,
                          sampled_min_signal_power, worst_beampattern,
                          worst_case_sinr, worst_interference,
                          worst_signal_power)


def _rand_unit(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v


def run_oracle_checks(seed: int = 0, instances: int = 20,
                      samples: int = 100_000) -> list[dict]:
    """Run every derived-oracle comparison; returns one record per check."""
    rng = np.random.default_rng(seed)
    geometry = ArrayGeometry(8)
    results = []

    def record(name, passed, detail):
        results.append({"check": name, "passed": bool(passed), "detail": detail})

    # beampattern quadratic form vs direct column-wise summation
    worst_rel = 0.0
    for _ in range(instances):
        W = _rand_unit(rng, (8, 5))
        theta = rng.uniform(0, math.pi)
        bf = Beamformer(W)
        a = steering_vector(theta, geometry)
        direct = sum(abs(a.conj() @ W[:, j]) ** 2 for j in range(W.shape[1]))
        quad = float(np.real(a.conj() @ bf.covariance @ a))
        worst_rel = max(worst_rel, abs(quad - direct) / direct)
    record("beampattern_column_sum", worst_rel < 1e-10,
           f"max relative gap {worst_rel:.2e}")

    # SINR vs term-by-term evaluation
    worst_rel = 0.0
    for _ in range(instances):
        W = _rand_unit(rng, (8, 5))
        h = _rand_unit(rng, 8)
        sigma2 = float(rng.uniform(0.1, 2.0))
        k = int(rng.integers(0, 3))
        direct_num = abs(h.conj() @ W[:, k]) ** 2
        direct_den = sum(abs(h.conj() @ W[:, j]) ** 2
                         for j in range(5) if j != k) + sigma2
        val = user_sinr(Beamformer(W), h, k, sigma2)
        worst_rel = max(worst_rel, abs(val - direct_num / direct_den) / val)
    record("sinr_term_by_term", worst_rel < 1e-10,
           f"max relative gap {worst_rel:.2e}")

    # closed-form worst signal vs sampling-plus-descent, and the lower-bound
    # property against every raw sample
    worst_rel, bound_ok = 0.0, True
    for i in range(instances):
        h = _rand_unit(rng, 8)
        w = _rand_unit(rng, 8)
        eps = float(rng.uniform(0.05, 0.6)) * np.linalg.norm(h)
        closed = worst_signal_power(h, w, eps)
        sampled = sampled_min_signal_power(h, w, eps, samples, rng)
        bound_ok &= closed <= sampled * (1 + 1e-9) + 1e-12
        if closed > 0:
            worst_rel = max(worst_rel, abs(sampled - closed) / closed)
    record("worst_signal_closed_vs_sampled",
           bound_ok and worst_rel < 5e-3,
           f"max relative gap {worst_rel:.2e}, lower bound held: {bound_ok}")

    # secular-equation worst interference vs sampling-plus-ascent
    worst_rel, bound_ok = 0.0, True
    for _ in range(instances):
        h = _rand_unit(rng, 8)
        Wb = _rand_unit(rng, (8, 4))
        eps = float(rng.uniform(0.05, 0.6)) * np.linalg.norm(h)
        sigma2 = float(rng.uniform(0.01, 1.0))
        exact = worst_interference(h, Wb, eps, sigma2)
        sampled = sampled_max_interference(h, Wb, eps, sigma2, samples, rng)
        bound_ok &= exact >= sampled * (1 - 1e-9) - 1e-12
        worst_rel = max(worst_rel, abs(exact - sampled) / exact)
    record("worst_interference_secular_vs_sampled",
           bound_ok and worst_rel < 5e-3,
           f"max relative gap {worst_rel:.2e}, upper bound held: {bound_ok}")

    # sampled worst SINR stable between sample counts
    h = _rand_unit(rng, 8)
    W = _rand_unit(rng, (8, 5))
    channels = ChannelSet(h[None, :], [0.3 * np.linalg.norm(h)], [0.5])
    bf = Beamformer(W)
    _, lo = worst_case_sinr(0, bf, channels, num_samples=samples,
                            rng=np.random.default_rng(seed + 1))
    _, hi = worst_case_sinr(0, bf, channels, num_samples=10 * samples,
                            rng=np.random.default_rng(seed + 2))
    rel = abs(lo - hi) / max(lo, 1e-300)
    record("worst_sinr_sampling_convergence", rel < 1e-2,
           f"relative gap {rel:.2e} between sample counts")

    # beampattern grid refinement
    worst_rel = 0.0
    for _ in range(instances):
        W = _rand_unit(rng, (8, 5))
        bf = Beamformer(W)
        centre = rng.uniform(math.radians(30), math.radians(150))
        interval = (centre - math.radians(3), centre + math.radians(3))
        coarse, _ = worst_beampattern(bf, interval, math.radians(0.05))
        fine, _ = worst_beampattern(bf, interval, math.radians(0.005))
        worst_rel = max(worst_rel, abs(coarse - fine) / max(fine, 1e-300))
    record("beampattern_grid_refinement", worst_rel < 5e-3,
           f"max relative gap {worst_rel:.2e}")

    # linear objective over the simplex attains its minimum at a vertex
    ok = True
    for _ in range(instances):
        W = _rand_unit(rng, (8, 5))
        R = W @ W.conj().T
        mats = hull_samples((math.radians(118), math.radians(124)), 11, geometry)
        traces = np.real(np.einsum("sij,ji->s", mats, R))
        vertex_min = traces.min()
        for _ in range(200):
            mu = rng.dirichlet(np.ones(len(traces)))
            ok &= mu @ traces >= vertex_min - 1e-12
        mu_star = mu_update(R, mats)
        ok &= mu_star @ traces >= vertex_min - 1e-12
    record("hull_vertex_minimum", ok, "simplex minimum attained at a vertex")

    return results
