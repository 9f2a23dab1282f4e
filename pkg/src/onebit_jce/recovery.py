"""Factor the lifted estimate into CFO and channel, then refine the CFO.

The lifted estimate reshaped to n_p x (n_rx*n_tx) is split by its leading
singular pair (power iteration on the small Gram matrix); the whole
singular value is folded into the CFO factor, an arbitrary but fixed
convention since every downstream consumer is scale-invariant. The CFO is
read coarsely from the spectral peak and refined with a three-bin
interpolated 2*n_p-point DFT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import dft_matrix, from_beamspace
from .lifting import lifted_to_matrix

_TWO_PI = 2.0 * math.pi


class DegenerateEstimateError(ValueError):
    """Recovery input carries no usable signal (all zero / non-finite)."""


@dataclass
class JointEstimate:
    """Recovered factors; b_hat/c_hat carry a common arbitrary complex scale."""

    b_hat: np.ndarray
    c_hat: np.ndarray
    h_hat: np.ndarray
    omega_hat: float
    sigma1_ratio: float


def _power_leading(matvec, rmatvec, n_rows, tol=1e-12, max_iter=1000):
    """Leading left singular vector and value via power iteration on X X^H."""
    rng = np.random.default_rng(0x5EED1E55)
    u = rng.standard_normal(n_rows) + 1j * rng.standard_normal(n_rows)
    u /= np.linalg.norm(u)
    sigma = 0.0
    for _ in range(max_iter):
        w = matvec(rmatvec(u))
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return u, 0.0
        u = w / nw
        prev, sigma = sigma, math.sqrt(nw)
        if abs(sigma - prev) <= tol * sigma:
            break
    return u, float(np.linalg.norm(rmatvec(u)))


def rank1_decompose(x_hat: np.ndarray, n_p: int):
    """Split a lifted vector into (b_hat, c_hat, sigma1_ratio).

    b_hat absorbs the leading singular value; c_hat is the conjugated
    right singular vector, so ``outer(b_hat, c_hat)`` is the best rank-one
    fit of the reshaped estimate.
    """
    x_hat = np.asarray(x_hat, dtype=complex)
    if not np.all(np.isfinite(x_hat.view(float))) or not np.any(x_hat):
        raise DegenerateEstimateError("lifted estimate is zero or non-finite")
    xm = lifted_to_matrix(x_hat, n_p)

    mv = lambda v: xm @ v
    rmv = lambda u: xm.conj().T @ u
    u1, sigma1 = _power_leading(mv, rmv, n_p)
    if sigma1 == 0.0:
        raise DegenerateEstimateError("lifted estimate has zero leading singular value")
    v1 = rmv(u1) / sigma1

    # second singular value (ratio only) from the deflated matrix
    mv2 = lambda v: xm @ v - sigma1 * u1 * (v1.conj() @ v)
    rmv2 = lambda u: xm.conj().T @ u - sigma1 * v1 * (u1.conj() @ u)
    _, sigma2 = _power_leading(mv2, rmv2, n_p, tol=1e-9, max_iter=300)

    b_hat = sigma1 * u1
    c_hat = v1.conj()
    ratio = math.inf if sigma2 == 0.0 else sigma1 / sigma2
    return b_hat, c_hat, ratio


def reconstruct_channel(c_hat: np.ndarray, n_rx: int, n_tx: int) -> np.ndarray:
    """Rebuild the antenna-domain channel from the stacked beamspace vector."""
    c_hat = np.asarray(c_hat)
    if c_hat.size != n_rx * n_tx:
        raise ValueError(f"expected length {n_rx * n_tx}, got {c_hat.size}")
    return from_beamspace(c_hat.reshape(n_rx, n_tx))


def coarse_cfo(b_hat: np.ndarray) -> float:
    """Peak-bin CFO estimate on the n_p grid (resolution 2*pi/n_p)."""
    b_hat = np.asarray(b_hat)
    if not np.any(b_hat):
        raise DegenerateEstimateError("CFO spectrum estimate is all zero")
    k = int(np.argmax(np.abs(b_hat)))
    return _TWO_PI * k / b_hat.size


def fine_cfo(b_hat: np.ndarray, n_p: int | None = None) -> float:
    """Sub-bin CFO estimate from a zero-padded spectrum with a three-bin corrector.

    The implied phase ramp is rebuilt from b_hat, zero-padded to 2*n_p,
    and the DFT peak is corrected by
    ``Re{(X[k-1]-X[k+1]) / (2X[k]-X[k-1]-X[k+1])} * tan(pi/N)/(pi/N)``
    with circular neighbor indexing. Both the peak pick and the corrector
    use scale-free forms, so any common complex scaling of b_hat is
    invariant by construction.
    """
    b_hat = np.asarray(b_hat, dtype=complex)
    if n_p is None:
        n_p = b_hat.size
    elif n_p != b_hat.size:
        raise ValueError(f"n_p {n_p} != len(b_hat) {b_hat.size}")
    if not np.any(b_hat):
        raise DegenerateEstimateError("CFO spectrum estimate is all zero")

    ramp = dft_matrix(n_p).conj() @ b_hat  # estimate of the length-n_p phase ramp
    n2 = 2 * n_p
    spectrum = np.fft.fft(ramp, n2)
    k = int(np.argmax(np.abs(spectrum)))
    num = spectrum[(k - 1) % n2] - spectrum[(k + 1) % n2]
    den = 2.0 * spectrum[k] - spectrum[(k - 1) % n2] - spectrum[(k + 1) % n2]
    den_sq = den.real**2 + den.imag**2
    if den_sq == 0.0:
        delta = 0.0
    else:
        # Re(num/den) without complex division keeps exact scale immunity
        ratio = (num * den.conjugate()).real / den_sq
        delta = ratio * math.tan(math.pi / n2) / (math.pi / n2)
    return (_TWO_PI / n2 * (k + delta)) % _TWO_PI


def estimate_joint(x_hat: np.ndarray, n_p: int, n_rx: int, n_tx: int) -> JointEstimate:
    """Full recovery chain: rank-1 split, channel rebuild, fine CFO."""
    b_hat, c_hat, ratio = rank1_decompose(x_hat, n_p)
    return JointEstimate(
        b_hat=b_hat,
        c_hat=c_hat,
        h_hat=reconstruct_channel(c_hat, n_rx, n_tx),
        omega_hat=fine_cfo(b_hat, n_p),
        sigma1_ratio=ratio,
    )
