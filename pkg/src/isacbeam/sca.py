"""Convexified ingredients of the per-iteration subproblem.

Every builder here accepts either plain numpy arrays or cvxpy expressions for
the decision quantities; with numeric inputs the result is evaluated to numpy,
which is how the post-solve certificates and the unit tests exercise the same
construction the solver hands to the conic backend. All surrogates are tight
at their anchor and one-sided: minorants for maximised terms, majorants for
upper-bounded ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

_TRACE_FLOOR = 1e-12


@dataclass
class SolverIterate:
    """Anchor state carried between successive convex subproblems."""

    W: np.ndarray          # (N_t, K+M) beamformer at the last iteration
    delta: np.ndarray      # (K,) worst-SINR slacks, nonnegative
    beta: np.ndarray       # (K,) worst-interference slacks, watts
    mu: np.ndarray         # (M, S) hull weights, rows on the simplex
    objective: float = field(default=float("nan"))

    def copy(self) -> "SolverIterate":
        return SolverIterate(self.W.copy(), self.delta.copy(), self.beta.copy(),
                             self.mu.copy(), self.objective)


def _is_symbolic(*args) -> bool:
    return any(isinstance(a, cp.Expression) and not isinstance(a, cp.Constant)
               for a in args)


def _col(x, n):
    if isinstance(x, cp.Expression):
        return cp.reshape(x, (n, 1), order="F")
    return np.asarray(x, dtype=complex).reshape(n, 1)


def _conj_row(x, n):
    if isinstance(x, cp.Expression):
        return cp.reshape(cp.conj(x), (1, n), order="F")
    return np.conj(np.asarray(x, dtype=complex)).reshape(1, n)


def sca_signal_terms(w, w_prev, h_hat, anchor_outer=None):
    """Linearised signal quadratic around the anchor column ``w_prev``.

    Returns (Lambda, b, c) with Lambda = w w_prev^H + w_prev w^H -
    w_prev w_prev^H, b = Lambda h_hat, c = h_hat^H Lambda h_hat, so that
    d^H Lambda d + 2 Re{b^H d} + c equals (h+d)^H Lambda (h+d) and minorises
    |(h_hat+d)^H w|^2 for every error d, with equality at w = w_prev.

    ``anchor_outer`` may supply w_prev w_prev^H separately, which keeps the
    construction parameter-affine when the anchor itself is a solver
    parameter.
    """
    h = np.asarray(h_hat, dtype=complex)
    n = h.shape[0]
    if _is_symbolic(w, w_prev):
        wp = (w_prev if isinstance(w_prev, cp.Expression)
              else np.asarray(w_prev, dtype=complex).reshape(n))
        if anchor_outer is None:
            if isinstance(w_prev, cp.Expression):
                raise ValueError("anchor_outer required for a symbolic anchor")
            anchor_outer = np.outer(wp, np.conj(wp))
        E = _col(w, n) @ _conj_row(wp, n)
        Lam = E + cp.conj(E).T - anchor_outer
        b = Lam @ h
        c = cp.real(h.conj() @ Lam @ h)
        return Lam, b, c
    wp = np.asarray(w_prev, dtype=complex).reshape(n, 1)
    if anchor_outer is None:
        anchor_outer = wp @ wp.conj().T
    wc = np.asarray(w, dtype=complex).reshape(n, 1)
    E = wc @ wp.conj().T
    Lam = E + E.conj().T - np.asarray(anchor_outer)
    b = Lam @ h
    c = float(np.real(h.conj() @ Lam @ h))
    return Lam, b, c


def lmi_signal(Lam, b, c, nu, phi, eps: float):
    """S-Procedure block certifying the robust signal-power bound.

    Feasibility of [[Lam + phi*I, b], [b^H, c - nu - phi*eps^2]] >= 0 with
    phi >= 0 is equivalent to d^H Lam d + 2Re{b^H d} + c >= nu holding for
    every ||d|| <= eps. The block is Hermitian by construction for arbitrary
    decision values.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if _is_symbolic(Lam, b, c, nu, phi):
        n = Lam.shape[0]
        corner = c - nu - phi * eps**2
        return cp.bmat([
            [Lam + phi * np.eye(n), _col(b, n)],
            [cp.reshape(cp.conj(b), (1, n), order="F"),
             cp.reshape(corner, (1, 1), order="F")],
        ])
    Lam = np.asarray(Lam, dtype=complex)
    n = Lam.shape[0]
    bcol = np.asarray(b, dtype=complex).reshape(n, 1)
    corner = np.array([[complex(c - nu - phi * eps**2)]])
    return np.block([[Lam + phi * np.eye(n), bcol],
                     [bcol.conj().T, corner]])


def lmi_interference(h_hat, W_bar, beta, xi, eps: float, sigma2: float):
    """Schur-complement block certifying the robust interference bound.

    Feasibility of the block with xi >= 0 implies
    ||W_bar^H (h_hat + d)||^2 + sigma2 <= beta for every ||d|| <= eps. With
    eps = 0 the third block row vanishes in effect and the block reduces to
    the nominal Schur form beta - sigma2 >= ||W_bar^H h_hat||^2.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    h = np.asarray(h_hat, dtype=complex)
    n = h.shape[0]
    if _is_symbolic(W_bar, beta, xi):
        J = W_bar.shape[1]
        hW = cp.reshape(h.conj() @ W_bar, (1, J), order="F")
        corner = cp.reshape(beta - sigma2 - xi, (1, 1), order="F")
        return cp.bmat([
            [corner, hW, np.zeros((1, n))],
            [cp.conj(hW).T, np.eye(J), eps * cp.conj(W_bar).T],
            [np.zeros((n, 1)), eps * W_bar, xi * np.eye(n)],
        ])
    Wb = np.asarray(W_bar, dtype=complex)
    J = Wb.shape[1]
    hW = (h.conj() @ Wb).reshape(1, J)
    corner = np.array([[complex(beta - sigma2 - xi)]])
    return np.block([
        [corner, hW, np.zeros((1, n))],
        [hW.conj().T, np.eye(J), eps * Wb.conj().T],
        [np.zeros((n, 1)), eps * Wb, xi * np.eye(n)],
    ])


def slack_upper_bound(delta, beta, delta_prev: float, beta_prev: float):
    """Convex majorant of the bilinear product delta*beta, tight at the anchor.

    The product is split as ((delta+beta)^2 - (delta-beta)^2)/4 and the
    concave square is linearised at (delta_prev, beta_prev).
    """
    gap = delta_prev - beta_prev
    if _is_symbolic(delta, beta):
        return 0.25 * (cp.square(delta + beta) - 2.0 * gap * (delta - beta) + gap**2)
    return 0.25 * ((delta + beta) ** 2 - 2.0 * gap * (delta - beta) + gap**2)


def slack_surrogate(delta, beta, delta_prev: float, beta_prev: float, nu):
    """Constraint nu >= convex majorant of delta*beta."""
    return nu >= slack_upper_bound(delta, beta, delta_prev, beta_prev)


def mu_update(R_prev: np.ndarray, samples: np.ndarray,
              floor: float = _TRACE_FLOOR) -> np.ndarray:
    """Closed-form worst-case hull weights for a fixed covariance.

    Weights proportional to tr(A_s R)^-2 attain equality in the reverse
    Hoelder bound on the weighted gain, concentrating mass on the lowest-gain
    samples. Traces at or below ``floor`` (a beam nulling a sample angle) are
    clamped before inversion.
    """
    traces = np.real(np.einsum("sij,ji->s", np.asarray(samples), R_prev))
    if np.any(traces <= 0) and np.all(traces > -1e-9 * max(abs(traces).max(), 1.0)):
        traces = np.maximum(traces, floor)
    elif np.any(traces <= 0):
        raise ValueError("hull sample gains must be positive for a PSD covariance")
    traces = np.maximum(traces, floor)
    inv_sq = traces**-2.0
    return inv_sq / inv_sq.sum()


def vertex_min_weights(R_prev: np.ndarray, samples: np.ndarray) -> np.ndarray:
    """All-mass-on-the-worst-vertex alternative to the smoothed update.

    A linear objective over the simplex attains its minimum at a vertex, so
    this is the exact inner minimiser; kept as a comparison option.
    """
    traces = np.real(np.einsum("sij,ji->s", np.asarray(samples), R_prev))
    weights = np.zeros(len(traces))
    weights[int(np.argmin(traces))] = 1.0
    return weights


def sensing_objective_linearization(W, W_prev: np.ndarray, B_bar_list):
    """Affine minorant of the total hull-weighted beampattern gain.

    sum_m sum_j w_j^H B_m w_j is tangent-minorised at W_prev:
    sum_m [2 Re tr(W_prev^H B_m W) - tr(W_prev^H B_m W_prev)]. Requires each
    B_m Hermitian PSD for the minorant property.
    """
    Wp = np.asarray(W_prev, dtype=complex)
    if not B_bar_list:
        return 0.0
    B_tot = np.sum(B_bar_list, axis=0)
    G = B_tot @ Wp  # B Hermitian, so tr(Wp^H B W) = tr(G^H W)
    offset = float(np.real(np.trace(Wp.conj().T @ B_tot @ Wp)))
    if _is_symbolic(W):
        return 2.0 * cp.real(cp.trace(G.conj().T @ W)) - offset
    return 2.0 * float(np.real(np.trace(G.conj().T @ np.asarray(W, dtype=complex)))) - offset


def hermitian_part(X: np.ndarray) -> np.ndarray:
    """Symmetrise before eigenvalue certificates to absorb round-off."""
    return 0.5 * (X + X.conj().T)


def lmi_eigmins(W: np.ndarray, iterate_W: np.ndarray, nu: np.ndarray,
                phi: np.ndarray, xi: np.ndarray, beta: np.ndarray,
                channels, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Feasibility margins of the robustness blocks at a numeric solution.

    For users with a positive error radius these are the smallest eigenvalues
    of the signal and interference LMIs; with a zero radius the solver imposes
    the equivalent scalar constraints, so their margins are reported instead.
    """
    sig = np.empty(K)
    itf = np.empty(K)
    for k in range(K):
        h = channels.estimates[k]
        eps = channels.radii[k]
        s2 = channels.noise_powers[k]
        Lam, b, c = sca_signal_terms(W[:, k], iterate_W[:, k], h)
        others = [j for j in range(W.shape[1]) if j != k]
        if eps > 0:
            block = lmi_signal(Lam, b, c, nu[k], phi[k], eps)
            sig[k] = np.linalg.eigvalsh(hermitian_part(block))[0]
            if others:
                block2 = lmi_interference(h, W[:, others], beta[k], xi[k], eps, s2)
                itf[k] = np.linalg.eigvalsh(hermitian_part(block2))[0]
                continue
        else:
            sig[k] = c - nu[k]
            if others:
                itf[k] = beta[k] - s2 - float(
                    np.linalg.norm(h.conj() @ W[:, others]) ** 2)
                continue
        itf[k] = min(beta[k] - s2 - xi[k], xi[k])
    return sig, itf
