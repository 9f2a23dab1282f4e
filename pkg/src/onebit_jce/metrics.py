"""Evaluation metrics: scale-immune channel NMSE, circular CFO error, rate bound.

All three are invariant to complex rescaling of the estimate: the NMSE
minimizes over the scale, the CFO error never sees one, and the rate
bound only uses the estimate's dominant direction. The invariance is exact
by construction for power-of-two scale/quadrant factors (divisions by real
scalars only, trace-normalized Gram matrix before the eigensolve).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_TWO_PI = 2.0 * math.pi
_KAPPA = 2.0 / math.pi  # Bussgang gain^2 of the one-bit quantizer


@dataclass
class TrialMetrics:
    nmse_linear: float
    nmse_db: float
    cfo_sq_err: float
    rate_bits: float
    gamma: complex


def compute_trial_metrics(h, h_hat, omega_true, omega_hat, snr_db) -> "TrialMetrics":
    """Bundle the three per-trial evaluation quantities."""
    nmse_lin, gamma = channel_nmse(h, h_hat)
    return TrialMetrics(
        nmse_linear=nmse_lin,
        nmse_db=nmse_db(nmse_lin),
        cfo_sq_err=cfo_squared_error(omega_true, omega_hat),
        rate_bits=rate_lower_bound(h, h_hat, snr_db),
        gamma=gamma,
    )


def channel_nmse(h: np.ndarray, h_hat: np.ndarray):
    """Scale-optimal normalized error ||H - gamma*H_hat||_F / ||H||_F.

    Returns ``(nmse_linear, gamma)`` with gamma the least-squares complex
    scale (0 when the estimate is zero). Note this is a ratio of norms,
    not of squared norms; decibels are 20*log10.
    """
    h = np.asarray(h, dtype=complex)
    h_hat = np.asarray(h_hat, dtype=complex)
    if h.shape != h_hat.shape:
        raise ValueError("shape mismatch")
    h_norm = float(np.linalg.norm(h))
    if h_norm == 0.0:
        raise ValueError("true channel is zero")
    est_sq = float(np.linalg.norm(h_hat) ** 2)
    if est_sq == 0.0:
        return 1.0, 0j
    inner = np.vdot(h_hat, h)
    gamma = complex(inner.real / est_sq, inner.imag / est_sq)
    nmse = float(np.linalg.norm(h - gamma * h_hat)) / h_norm
    return nmse, gamma


def nmse_db(nmse_linear: float) -> float:
    return 20.0 * math.log10(nmse_linear) if nmse_linear > 0 else -math.inf


def cfo_squared_error(omega_true: float, omega_hat: float) -> float:
    """Squared minimal circular distance between two angles (radians^2)."""
    diff = abs(omega_true - omega_hat) % _TWO_PI
    diff = min(diff, _TWO_PI - diff)
    return diff * diff


def _dominant_direction(h_hat: np.ndarray) -> np.ndarray:
    """Unit-norm dominant right singular vector of the estimate.

    Computed from the trace-normalized Gram matrix, which is bit-identical
    under power-of-two/quadrant rescaling of h_hat.
    """
    gram = h_hat.conj().T @ h_hat
    trace = float(np.trace(gram).real)
    if trace == 0.0:
        f = np.zeros(h_hat.shape[1], dtype=complex)
        f[0] = 1.0
        return f
    _, vecs = np.linalg.eigh(gram / trace)
    return vecs[:, -1]


def rate_lower_bound(h: np.ndarray, h_hat: np.ndarray, snr_db: float) -> float:
    """Achievable-rate lower bound under the additive quantization-noise model.

    Single-stream transmission along h_hat's dominant direction with total
    power 10^(snr_db/10); the quantizer is linearized to a sqrt(2/pi) gain
    plus uncorrelated per-antenna distortion of variance
    (1 - 2/pi)*(signal power + 1), on top of unit thermal noise.
    """
    h = np.asarray(h, dtype=complex)
    h_hat = np.asarray(h_hat, dtype=complex)
    if h.shape != h_hat.shape:
        raise ValueError("shape mismatch")
    f = _dominant_direction(h_hat)
    power = 10.0 ** (snr_db / 10.0)
    g = h @ f
    sig = power * (g.real**2 + g.imag**2)  # per-antenna signal power
    eff = _KAPPA * sig / ((1.0 - _KAPPA) * (sig + 1.0) + _KAPPA)
    return float(np.log2(1.0 + eff.sum()))
