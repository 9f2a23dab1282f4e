"""Elementwise denoiser kernels with numba and pure-numpy backends.

These are the hot inner loops of the GAMP iteration (run once per
component per iteration, tens of thousands of times per trial). Backend
selection:

* ``ONEBIT_JCE_BACKEND=numba``  force the @njit kernels
* ``ONEBIT_JCE_BACKEND=numpy``  force the vectorized numpy/scipy kernels
* unset / ``auto``              numba when importable, else numpy

The two backends agree to ~1e-12; a single process uses one backend
throughout, so runs are reproducible bit-for-bit. ``set_backend`` exists
for tests and benchmarks.

Kernel contracts
----------------
``bg_denoise(r, tau_r, lam, theta, phi)``
    Posterior mean/variance of X under X ~ lam*CN(theta, phi) + (1-lam)*delta0
    observed through R = X + CN(0, tau_r). Also returns the support
    responsibilities and active-component moments used by the EM update.

``onebit_denoise(p, tau_p, y)``
    Posterior mean/variance of Z ~ CN(p, tau_p) observed through
    y = sgn(Re(Z+N)) + 1j*sgn(Im(Z+N)), N ~ CN(0, 1). Real and imaginary
    parts are independent probit channels with per-dimension noise 1/2.
"""

from __future__ import annotations

import math
import os

import numpy as np
from scipy import special as _sp

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_SQRT_HALF = math.sqrt(0.5)


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _bg_denoise_numpy(r, tau_r, lam, theta, phi):
    r = np.asarray(r, dtype=complex)
    tau_r = np.asarray(tau_r, dtype=float)
    v = phi + tau_r
    mu_act = (phi * r + tau_r * theta) / v
    v_act = phi * tau_r / v
    if lam >= 1.0:
        pi = np.ones(r.shape)
    else:
        # log odds of the active component
        ll = (
            math.log(lam) - math.log1p(-lam)
            + np.log(tau_r / v)
            + (r.real**2 + r.imag**2) / tau_r
            - (np.abs(r - theta) ** 2) / v
        )
        pi = np.where(ll >= 0, 1.0 / (1.0 + np.exp(-np.abs(ll))),
                      np.exp(-np.abs(ll)) / (1.0 + np.exp(-np.abs(ll))))
    x_hat = pi * mu_act
    # pi*v_act + pi*(1-pi)*|mu|^2 is the nonnegative-stable form
    tau_x = pi * v_act + pi * (1.0 - pi) * (mu_act.real**2 + mu_act.imag**2)
    return x_hat, tau_x, pi, mu_act, v_act


def _probit_ratio_numpy(eta):
    # phi(eta)/Phi(eta), stable for any eta via scaled complementary erf
    return _SQRT_2_OVER_PI / _sp.erfcx(-eta * _SQRT_HALF)


def _onebit_denoise_numpy(p, tau_p, y):
    p = np.asarray(p, dtype=complex)
    y = np.asarray(y, dtype=complex)
    tau_p = np.asarray(tau_p, dtype=float)
    tau_h = 0.5 * tau_p  # per-dimension prior variance
    v_tot = tau_h + 0.5  # plus per-dimension noise variance
    s = np.sqrt(v_tot)
    coef = tau_h / s
    quad = tau_h**2 / v_tot

    eta_r = y.real * p.real / s
    rho_r = _probit_ratio_numpy(eta_r)
    mean_r = p.real + y.real * coef * rho_r
    var_r = tau_h - quad * rho_r * (rho_r + eta_r)

    eta_i = y.imag * p.imag / s
    rho_i = _probit_ratio_numpy(eta_i)
    mean_i = p.imag + y.imag * coef * rho_i
    var_i = tau_h - quad * rho_i * (rho_i + eta_i)

    return mean_r + 1j * mean_i, np.maximum(var_r, 0.0) + np.maximum(var_i, 0.0)


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

def _build_numba():
    import numba

    @numba.njit(cache=True)
    def _probit_ratio(eta):
        # phi(eta)/Phi(eta); erfc is safe down to eta ~ -37, asymptotic
        # Mills-ratio series beyond
        if eta > -30.0:
            return (
                2.0 * math.exp(-0.5 * eta * eta)
                / (math.sqrt(2.0 * math.pi) * math.erfc(-eta * _SQRT_HALF))
            )
        inv2 = 1.0 / (eta * eta)
        series = 1.0 + inv2 * (-1.0 + inv2 * (3.0 + inv2 * (-15.0 + inv2 * 105.0)))
        return -eta / series

    @numba.njit(cache=True)
    def bg_denoise(r, tau_r, lam, theta, phi):
        n = r.shape[0]
        x_hat = np.empty(n, dtype=np.complex128)
        tau_x = np.empty(n, dtype=np.float64)
        pi = np.empty(n, dtype=np.float64)
        mu_act = np.empty(n, dtype=np.complex128)
        v_act = np.empty(n, dtype=np.float64)
        log_odds0 = 0.0
        if lam < 1.0:
            log_odds0 = math.log(lam) - math.log1p(-lam)
        for j in range(n):
            v = phi + tau_r[j]
            mu = (phi * r[j] + tau_r[j] * theta) / v
            va = phi * tau_r[j] / v
            if lam >= 1.0:
                pj = 1.0
            else:
                rr = r[j].real * r[j].real + r[j].imag * r[j].imag
                dt = r[j] - theta
                dd = dt.real * dt.real + dt.imag * dt.imag
                ll = log_odds0 + math.log(tau_r[j] / v) + rr / tau_r[j] - dd / v
                if ll >= 0.0:
                    pj = 1.0 / (1.0 + math.exp(-ll))
                else:
                    e = math.exp(ll)
                    pj = e / (1.0 + e)
            mu2 = mu.real * mu.real + mu.imag * mu.imag
            x_hat[j] = pj * mu
            tau_x[j] = pj * va + pj * (1.0 - pj) * mu2
            pi[j] = pj
            mu_act[j] = mu
            v_act[j] = va
        return x_hat, tau_x, pi, mu_act, v_act

    @numba.njit(cache=True)
    def onebit_denoise(p, tau_p, y):
        n = p.shape[0]
        z_hat = np.empty(n, dtype=np.complex128)
        tau_z = np.empty(n, dtype=np.float64)
        for i in range(n):
            tau_h = 0.5 * tau_p[i]
            v_tot = tau_h + 0.5
            s = math.sqrt(v_tot)
            coef = tau_h / s
            quad = tau_h * tau_h / v_tot

            eta_r = y[i].real * p[i].real / s
            rho_r = _probit_ratio(eta_r)
            mean_r = p[i].real + y[i].real * coef * rho_r
            var_r = tau_h - quad * rho_r * (rho_r + eta_r)

            eta_i = y[i].imag * p[i].imag / s
            rho_i = _probit_ratio(eta_i)
            mean_i = p[i].imag + y[i].imag * coef * rho_i
            var_i = tau_h - quad * rho_i * (rho_i + eta_i)

            z_hat[i] = complex(mean_r, mean_i)
            tau_z[i] = max(var_r, 0.0) + max(var_i, 0.0)
        return z_hat, tau_z

    return {"bg_denoise": bg_denoise, "onebit_denoise": onebit_denoise}


_NUMPY_IMPL = {"bg_denoise": _bg_denoise_numpy, "onebit_denoise": _onebit_denoise_numpy}
_numba_impl = None


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def _resolve(name: str):
    global _numba_impl
    if name == "auto":
        name = "numba" if _numba_available() else "numpy"
    if name == "numba":
        if _numba_impl is None:
            _numba_impl = _build_numba()
        return name, _numba_impl
    if name == "numpy":
        return name, _NUMPY_IMPL
    raise ValueError(f"unknown backend {name!r} (expected numpy, numba or auto)")


_backend_name, _impl = _resolve(os.environ.get("ONEBIT_JCE_BACKEND", "auto"))


def active_backend() -> str:
    return _backend_name


def set_backend(name: str) -> str:
    """Switch the kernel backend (tests/benchmarks); returns the new name."""
    global _backend_name, _impl
    _backend_name, _impl = _resolve(name)
    return _backend_name


def bg_denoise(r, tau_r, lam, theta, phi):
    return _impl["bg_denoise"](
        np.ascontiguousarray(r, dtype=complex),
        np.ascontiguousarray(tau_r, dtype=float),
        float(lam),
        complex(theta),
        float(phi),
    )


def onebit_denoise(p, tau_p, y):
    return _impl["onebit_denoise"](
        np.ascontiguousarray(p, dtype=complex),
        np.ascontiguousarray(tau_p, dtype=float),
        np.ascontiguousarray(y, dtype=complex),
    )
