"""Uniform linear array geometry, beampatterns, and synthetic downlink channels.

Angles are radians everywhere in this module; callers converting from degrees
should do so at the boundary. Powers are linear watts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """Half-wavelength uniform linear array at the transmitter."""

    num_antennas: int
    element_spacing_ratio: float = 0.5  # spacing over wavelength

    def __post_init__(self):
        if self.num_antennas < 1:
            raise ValueError(f"need at least one antenna, got {self.num_antennas}")
        if self.element_spacing_ratio != 0.5:
            raise ValueError("only half-wavelength spacing is supported")


def steering_vector(theta: float, geometry: ArrayGeometry) -> np.ndarray:
    """Array response toward angle ``theta``.

    Entry n is exp(-j*2*pi*(d/lambda)*n*sin(theta)); with d/lambda = 1/2 the
    phase step per element is -pi*sin(theta). Entry 0 is always 1.
    """
    n = np.arange(geometry.num_antennas)
    phase = -2.0 * np.pi * geometry.element_spacing_ratio * np.sin(theta)
    return np.exp(1j * phase * n)


@dataclass(frozen=True)
class Beamformer:
    """Transmit beamforming matrix, one column per data stream.

    The first K columns carry the communication streams (and probe the
    targets); any remaining columns are sensing-only. Covariance is W W^H.
    """

    matrix: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.matrix, dtype=complex)
        if W.ndim != 2:
            raise ValueError(f"beamformer matrix must be 2-D, got shape {W.shape}")
        object.__setattr__(self, "matrix", W)

    @property
    def num_antennas(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_streams(self) -> int:
        return self.matrix.shape[1]

    @property
    def covariance(self) -> np.ndarray:
        return self.matrix @ self.matrix.conj().T

    @property
    def power(self) -> float:
        """Total transmit power ||W||_F^2 in watts."""
        return float(np.linalg.norm(self.matrix, "fro") ** 2)

    def validate_power(self, budget: float, rtol: float = 1e-6) -> None:
        if self.power > budget * (1.0 + rtol):
            raise ValueError(
                f"power {self.power:.6e} exceeds budget {budget:.6e} beyond rtol"
            )


def beampattern_gain(bf: Beamformer, theta: float,
                     geometry: ArrayGeometry | None = None) -> float:
    """Transmit power density a(theta)^H W W^H a(theta) in watts."""
    if geometry is None:
        geometry = ArrayGeometry(bf.num_antennas)
    if geometry.num_antennas != bf.num_antennas:
        raise ValueError(
            f"geometry has {geometry.num_antennas} antennas, "
            f"beamformer has {bf.num_antennas}"
        )
    a = steering_vector(theta, geometry)
    return float(np.linalg.norm(a.conj() @ bf.matrix) ** 2)


@dataclass(frozen=True)
class PathLossModel:
    """Log-distance path loss: PL(d) = ref + 10*exponent*log10(d) dB, d in m."""

    reference_loss_db: float = 30.0
    exponent: float = 3.0

    def __post_init__(self):
        if self.exponent <= 0:
            raise ValueError("path loss exponent must be positive")

    def loss_db(self, distance: float) -> float:
        if distance <= 0:
            raise ValueError(f"distance must be positive, got {distance}")
        return self.reference_loss_db + 10.0 * self.exponent * math.log10(distance)

    def gain(self, distance: float) -> float:
        """Linear power gain 10^(-PL/10)."""
        return 10.0 ** (-self.loss_db(distance) / 10.0)


def synth_channel(distance: float, angle: float, model: PathLossModel,
                  geometry: ArrayGeometry, rician_k_db: float = math.inf,
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """Line-of-sight channel sqrt(g)*a(angle) with distance-dependent gain g.

    A finite ``rician_k_db`` adds an isotropic scattered component with the
    given K-factor (E||h||^2 stays N_t*g); the default is pure line of sight.
    """
    g = model.gain(distance)
    los = steering_vector(angle, geometry)
    if math.isinf(rician_k_db):
        return np.sqrt(g) * los
    if rng is None:
        raise ValueError("scattered component requires an rng")
    kappa = 10.0 ** (rician_k_db / 10.0)
    n = geometry.num_antennas
    scatter = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    return np.sqrt(g) * (np.sqrt(kappa / (1 + kappa)) * los
                         + np.sqrt(1.0 / (1 + kappa)) * scatter)


@dataclass(frozen=True)
class ChannelSet:
    """Estimated downlink channels with per-user error radii and noise powers.

    ``estimates`` is (K, N_t) complex; ``radii`` bounds the Euclidean norm of
    each user's channel error; ``noise_powers`` are linear watts.
    """

    estimates: np.ndarray
    radii: np.ndarray
    noise_powers: np.ndarray

    def __post_init__(self):
        est = np.atleast_2d(np.asarray(self.estimates, dtype=complex))
        radii = np.asarray(self.radii, dtype=float)
        noise = np.asarray(self.noise_powers, dtype=float)
        if radii.shape != (est.shape[0],) or noise.shape != (est.shape[0],):
            raise ValueError("radii and noise_powers must have one entry per user")
        if np.any(radii < 0):
            raise ValueError("error radii must be nonnegative")
        if np.any(noise <= 0):
            raise ValueError("noise powers must be positive")
        object.__setattr__(self, "estimates", est)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "noise_powers", noise)

    @property
    def num_users(self) -> int:
        return self.estimates.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.estimates.shape[1]


def user_sinr(bf: Beamformer, channel: np.ndarray, k: int, sigma2: float) -> float:
    """SINR of user k: |h^H w_k|^2 over interference from every other column
    plus noise."""
    W = bf.matrix
    if not 0 <= k < W.shape[1]:
        raise IndexError(f"user index {k} out of range for {W.shape[1]} streams")
    h = np.asarray(channel, dtype=complex)
    if h.shape != (W.shape[0],):
        raise ValueError(f"channel shape {h.shape} does not match {W.shape[0]} antennas")
    gains = np.abs(h.conj() @ W) ** 2
    signal = gains[k]
    interference = gains.sum() - signal
    return float(signal / (interference + sigma2))


def user_rate(bf: Beamformer, channel: np.ndarray, k: int, sigma2: float) -> float:
    """Achievable rate log2(1 + SINR) in bits/s/Hz."""
    return math.log2(1.0 + user_sinr(bf, channel, k, sigma2))
