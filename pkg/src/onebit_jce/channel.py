"""Clustered narrowband mmWave MIMO channel model and beamspace transforms.

The channel is a normalized sum of rank-one ray contributions over a small
number of clusters. Angle-domain (beamspace) representations use the
unnormalized DFT matrix ``U_N(k, l) = exp(-2j*pi*k*l/N)``; the inverse
scaling ``1/(n_rx*n_tx)`` lives in :func:`to_beamspace` so that
``from_beamspace(to_beamspace(H)) == H``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelModelConfig:
    """Geometry and statistics of the clustered channel model."""

    n_tx: int = 16
    n_rx: int = 16
    n_clusters: int = 2
    rays_per_cluster: int = 15
    angle_spread_deg: float = 10.0
    antenna_spacing_ratio: float = 0.5  # d / lambda

    def __post_init__(self):
        if self.n_tx < 1 or self.n_rx < 1:
            raise ValueError("antenna counts must be >= 1")
        if self.n_clusters < 1 or self.rays_per_cluster < 1:
            raise ValueError("cluster/ray counts must be >= 1")
        if self.angle_spread_deg <= 0:
            raise ValueError("angle_spread_deg must be > 0")
        if self.antenna_spacing_ratio <= 0:
            raise ValueError("antenna_spacing_ratio must be > 0")

    @property
    def n_rays(self) -> int:
        return self.n_clusters * self.rays_per_cluster


@dataclass(frozen=True)
class RaySet:
    """Per-ray complex gains and spatial frequencies (radians per element)."""

    gains: np.ndarray
    aoa_spatial_freq: np.ndarray
    aod_spatial_freq: np.ndarray

    def __post_init__(self):
        if not (len(self.gains) == len(self.aoa_spatial_freq) == len(self.aod_spatial_freq)):
            raise ValueError("ray arrays must have equal length")


def dft_matrix(n: int) -> np.ndarray:
    """Unnormalized symmetric DFT matrix, U[k, l] = exp(-2j*pi*k*l/n)."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n)


def array_response(n: int, theta: float) -> np.ndarray:
    """ULA response vector [1, e^{j*theta}, ..., e^{j*(n-1)*theta}]."""
    if n < 1:
        raise ValueError("array size must be >= 1")
    return np.exp(1j * theta * np.arange(n))


def laplacian_angle_offsets(spread_deg: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Zero-mean Laplacian ray offsets (radians) with std equal to ``spread_deg``.

    Laplace(scale=b) has std b*sqrt(2), so the scale is spread/sqrt(2).
    """
    return rng.laplace(0.0, np.deg2rad(spread_deg) / np.sqrt(2.0), size=size)


def sample_rays(config: ChannelModelConfig, rng: np.random.Generator) -> RaySet:
    """Draw a random ray set for one channel realization.

    Cluster-center physical angles are uniform on [-pi/2, pi/2); ray angles
    add Laplacian offsets whose standard deviation equals
    ``angle_spread_deg``. Gains are IID CN(0, 1).
    """
    nc, k = config.n_clusters, config.rays_per_cluster
    n_rays = nc * k

    centers_aoa = rng.uniform(-np.pi / 2, np.pi / 2, size=nc)
    centers_aod = rng.uniform(-np.pi / 2, np.pi / 2, size=nc)
    aoa = np.repeat(centers_aoa, k) + laplacian_angle_offsets(config.angle_spread_deg, n_rays, rng)
    aod = np.repeat(centers_aod, k) + laplacian_angle_offsets(config.angle_spread_deg, n_rays, rng)

    gains = (rng.standard_normal(n_rays) + 1j * rng.standard_normal(n_rays)) / np.sqrt(2.0)

    two_pi_d = 2.0 * np.pi * config.antenna_spacing_ratio
    return RaySet(
        gains=gains,
        aoa_spatial_freq=two_pi_d * np.sin(aoa),
        aod_spatial_freq=two_pi_d * np.sin(aod),
    )


def assemble_channel(rays: RaySet, config: ChannelModelConfig) -> np.ndarray:
    """Build the n_rx x n_tx channel matrix from a ray set.

    Each ray contributes a rank-one outer product of array responses; the
    sum is normalized by sqrt(n_clusters) and sqrt(rays_per_cluster) so
    E||H||_F^2 = n_rx * n_tx for unit-variance gains.
    """
    if not (np.all(np.isfinite(rays.aoa_spatial_freq)) and np.all(np.isfinite(rays.aod_spatial_freq))):
        raise ValueError("ray spatial frequencies must be finite")
    a_rx = np.exp(1j * np.outer(np.arange(config.n_rx), rays.aoa_spatial_freq))
    a_tx = np.exp(1j * np.outer(np.arange(config.n_tx), rays.aod_spatial_freq))
    scale = 1.0 / np.sqrt(config.n_clusters * config.rays_per_cluster)
    return scale * (a_rx * rays.gains) @ a_tx.conj().T


def to_beamspace(h: np.ndarray) -> np.ndarray:
    """Angle-domain representation C with H == U_rx @ C @ conj(U_tx)."""
    n_rx, n_tx = h.shape
    u_rx = dft_matrix(n_rx)
    u_tx = dft_matrix(n_tx)
    return (u_rx.conj() @ h @ u_tx) / (n_rx * n_tx)


def from_beamspace(c: np.ndarray) -> np.ndarray:
    """Inverse of :func:`to_beamspace`."""
    n_rx, n_tx = c.shape
    return dft_matrix(n_rx) @ c @ dft_matrix(n_tx).conj()
