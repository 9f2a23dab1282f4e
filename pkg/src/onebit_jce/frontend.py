"""Transmit/receive front end: QPSK training, CFO rotation, noise, one-bit ADC.

The received block is ``Y = Q1(H @ T @ diag(a(omega_e)) + N)`` with IID
CN(0, 1) noise and the elementwise one-bit quantizer
``Q1(x) = sgn(Re x) + 1j*sgn(Im x)``. SNR is swept through the QPSK
constellation radius, ``snr_db = 10*log10(n_tx * r^2)``, with the noise
variance pinned at 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import array_response

_TWO_PI = 2.0 * np.pi

# diagonal QPSK: phases pi/4 + k*pi/2
_QPSK_PHASES = np.pi / 4 + np.pi / 2 * np.arange(4)


@dataclass(frozen=True)
class CfoParams:
    """Digital-domain CFO in radians/sample, wrapped to [0, 2*pi)."""

    omega_e: float

    def __post_init__(self):
        object.__setattr__(self, "omega_e", float(self.omega_e) % _TWO_PI)

    @classmethod
    def from_offset_hz(cls, delta_f_hz: float, symbol_period_s: float) -> "CfoParams":
        return cls(_TWO_PI * delta_f_hz * symbol_period_s)


def snr_to_radius(snr_db: float, n_tx: int) -> float:
    """QPSK radius r with 10*log10(n_tx * r^2) == snr_db."""
    if n_tx < 1:
        raise ValueError("n_tx must be >= 1")
    return float(np.sqrt(10.0 ** (snr_db / 10.0) / n_tx))


def gen_training(n_tx: int, n_p: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    """IID QPSK training block of shape (n_tx, n_p) with entry magnitude ``radius``."""
    if n_p < 1:
        raise ValueError("n_p must be >= 1")
    if radius <= 0:
        raise ValueError("radius must be > 0")
    phases = rng.choice(_QPSK_PHASES, size=(n_tx, n_p))
    return radius * np.exp(1j * phases)


def quantize_onebit(x: np.ndarray) -> np.ndarray:
    """Elementwise one-bit quantizer; sgn(0) = +1 for determinism."""
    x = np.asarray(x)
    if np.any(np.isnan(x.real)) or np.any(np.isnan(x.imag)):
        raise ValueError("quantizer input contains NaN")
    return np.where(x.real >= 0, 1.0, -1.0) + 1j * np.where(x.imag >= 0, 1.0, -1.0)


def simulate_rx(
    h: np.ndarray,
    training: np.ndarray,
    cfo: CfoParams,
    rng: np.random.Generator | None = None,
    quantize: bool = True,
    add_noise: bool = True,
) -> np.ndarray:
    """Received block for a training transmission through ``h`` with CFO.

    Column n of the noiseless signal is ``exp(1j*omega_e*n) * h @ training[:, n]``.
    The unquantized/noiseless modes exist for oracle tests only; the
    estimation path always consumes the quantized output.
    """
    n_rx, n_tx = h.shape
    if training.shape[0] != n_tx:
        raise ValueError(f"training rows {training.shape[0]} != n_tx {n_tx}")
    n_p = training.shape[1]
    z = (h @ training) * array_response(n_p, cfo.omega_e)[None, :]
    if add_noise:
        if rng is None:
            raise ValueError("rng is required when add_noise=True")
        z = z + (rng.standard_normal(z.shape) + 1j * rng.standard_normal(z.shape)) / np.sqrt(2.0)
    return quantize_onebit(z) if quantize else z
