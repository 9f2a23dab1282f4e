"""Lifted linear measurement model for the joint CFO/channel problem.

The bilinear unknowns (CFO spectrum ``b``, beamspace channel ``c``) are
lifted into ``x = vec(b @ c.T)`` so the unquantized measurements become
``z = A @ x`` for a row-Kronecker structured ``A``: row i is
``kron(channel_basis[i], cfo_basis[i])`` where

* ``cfo_basis  = kron(ones(n_rx), conj(U_np))``            (m x n_p)
* ``channel_basis = kron(U_nrx, conj(U_ntx) @ T).T``       (m x n_rx*n_tx)

``A`` is never materialized on the estimation path; matvec/rmatvec exploit
the structure. A dense materialization is available for oracle tests under
a memory budget.

Index conventions (column-major ``vec``): measurement i = q*n_p + p is
antenna q, sample p; lifted index j = k*n_p + p pairs beamspace entry k
with CFO bin p.
"""

from __future__ import annotations

import numpy as np

from .channel import array_response, dft_matrix

DENSE_BUDGET_ENTRIES = 2**24  # default cap on m*d for dense oracle materialization


class MemoryBudgetError(RuntimeError):
    """Requested materialization exceeds the configured entry budget."""


def cfo_spectrum(omega_e: float, n_p: int) -> np.ndarray:
    """Length-n_p DFT coefficients b of the CFO phase ramp.

    Normalized by 1/n_p so that ``conj(U_np) @ b`` reproduces
    ``array_response(n_p, omega_e)`` exactly; for on-grid omega_e the
    result is a single unit spike.
    """
    if n_p < 2:
        raise ValueError("n_p must be >= 2")
    return np.fft.fft(array_response(n_p, omega_e)) / n_p


def lift(b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Compound vector vec(b @ c.T), length len(b)*len(c)."""
    return np.outer(b, c).ravel(order="F")


def lifted_to_matrix(x: np.ndarray, n_p: int) -> np.ndarray:
    """Reshape a lifted vector back to its n_p x (n_rx*n_tx) matrix form."""
    if x.size % n_p:
        raise ValueError("length not divisible by n_p")
    return x.reshape(n_p, x.size // n_p, order="F")


class LiftedOperator:
    """Structured measurement operator with implicit matvec/rmatvec.

    Attributes
    ----------
    channel_basis : (m, n_rx*n_tx) complex array, the per-row channel factor.
    shape : (m, d) with m = n_rx*n_p and d = n_rx*n_tx*n_p.
    """

    def __init__(self, channel_basis: np.ndarray, n_rx: int, n_tx: int, n_p: int):
        self.n_rx = n_rx
        self.n_tx = n_tx
        self.n_p = n_p
        self.channel_basis = channel_basis
        self.m = n_rx * n_p
        self.d = n_rx * n_tx * n_p
        self.shape = (self.m, self.d)
        u = dft_matrix(n_p)
        self._u_np = u
        self._u_np_conj = u.conj()
        self._basis_sq = np.abs(channel_basis) ** 2
        # every cfo_basis entry is unit modulus, so row/col powers come from
        # channel_basis alone
        self.frob_sq = float(n_p * np.sum(self._basis_sq))
        # (n_p, n_rx, k) layouts so mat/rmatvec run as batched BLAS products
        batched = channel_basis.reshape(n_rx, n_p, -1).transpose(1, 0, 2)
        self._basis_batched = np.ascontiguousarray(batched)
        self._basis_batched_conj = np.ascontiguousarray(batched.conj())

    # -- linear action -----------------------------------------------------

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """z = A @ x without materializing A."""
        if x.size != self.d:
            raise ValueError(f"expected length {self.d}, got {x.size}")
        xm = lifted_to_matrix(np.asarray(x), self.n_p)
        w = self._u_np_conj @ xm  # (n_p, n_rx*n_tx)
        z = np.matmul(self._basis_batched, w[:, :, None])[:, :, 0]  # (n_p, n_rx)
        return z.T.ravel()

    def rmatvec(self, z: np.ndarray) -> np.ndarray:
        """Exact adjoint action, A.conj().T @ z."""
        if z.size != self.m:
            raise ValueError(f"expected length {self.m}, got {z.size}")
        z3 = np.asarray(z).reshape(self.n_rx, self.n_p)
        s = np.matmul(z3.T[:, None, :], self._basis_batched_conj)[:, 0, :]  # (n_p, k)
        return (self._u_np @ s).ravel(order="F")

    # -- squared-magnitude action (variance propagation) --------------------

    def sq_matvec(self, v: np.ndarray) -> np.ndarray:
        """|A|^2 @ v, per-row sum of |A_ij|^2 * v_j."""
        blocks = np.asarray(v).reshape(-1, self.n_p).sum(axis=1)
        return self._basis_sq @ blocks

    def sq_rmatvec(self, v: np.ndarray) -> np.ndarray:
        """|A|^2.T @ v, per-column sum of |A_ij|^2 * v_i."""
        w = self._basis_sq.T @ np.asarray(v)
        return np.repeat(w, self.n_p)

    def row_power(self, i: int) -> np.ndarray:
        """|A_i|^2 as a length-d vector, kron(|channel_basis[i]|^2, ones(n_p))."""
        if not 0 <= i < self.m:
            raise IndexError(f"row index {i} out of range [0, {self.m})")
        return np.repeat(self._basis_sq[i], self.n_p)

    # -- oracle support -----------------------------------------------------

    def cfo_basis(self) -> np.ndarray:
        """The (m, n_p) CFO-side factor; row q*n_p + p is conj(U_np)[p]."""
        return np.tile(self._u_np_conj, (self.n_rx, 1))

    def dense(self, budget: int = DENSE_BUDGET_ENTRIES) -> np.ndarray:
        """Materialize A (oracle use only); refuses above ``budget`` entries."""
        if self.m * self.d > budget:
            raise MemoryBudgetError(
                f"dense A needs {self.m * self.d} entries, budget {budget}"
            )
        g = self.cfo_basis()
        a = np.empty((self.m, self.d), dtype=complex)
        for i in range(self.m):
            a[i] = np.kron(self.channel_basis[i], g[i])
        return a


def build_operator(
    training: np.ndarray, n_rx: int, budget_entries: int = 2**26
) -> LiftedOperator:
    """Assemble the lifted operator for a training block.

    ``channel_basis = kron(U_nrx, conj(U_ntx) @ T).T`` is materialized
    (m x n_rx*n_tx); a budget guard rejects configurations whose factor
    matrices would not fit the configured entry count.
    """
    n_tx, n_p = training.shape
    m = n_rx * n_p
    k = n_rx * n_tx
    if m * k + m * n_p > budget_entries:
        raise MemoryBudgetError(
            f"operator factors need {m * k + m * n_p} entries, budget {budget_entries}"
        )
    mixed = dft_matrix(n_tx).conj() @ training  # (n_tx, n_p)
    channel_basis = np.kron(dft_matrix(n_rx), mixed).T
    return LiftedOperator(channel_basis, n_rx=n_rx, n_tx=n_tx, n_p=n_p)


class DenseMatrixOperator:
    """Plain dense operator with the same protocol; for tests and oracles."""

    def __init__(self, a: np.ndarray):
        self.a = np.asarray(a, dtype=complex)
        self.shape = self.a.shape
        self.m, self.d = self.shape
        self._sq = np.abs(self.a) ** 2
        self.frob_sq = float(self._sq.sum())

    def matvec(self, x):
        return self.a @ x

    def rmatvec(self, z):
        return self.a.conj().T @ z

    def sq_matvec(self, v):
        return self._sq @ v

    def sq_rmatvec(self, v):
        return self._sq.T @ v

    def row_power(self, i):
        return self._sq[i]
