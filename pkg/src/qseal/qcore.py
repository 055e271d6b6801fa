"""Dense complex linear algebra and quantum primitives.

Kets are 1-D complex arrays, operators are square 2-D complex arrays.
Composite systems are ordered public (B) first, private (A) second, so a
vector on B⊗A reshapes to a ``(dim_b, dim_a)`` amplitude matrix.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .config import DEFAULT, Tolerances


class NotHermitianError(ValueError):
    pass


class NotPSDError(ValueError):
    pass


def _square(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def check_hermitian(m, tol: float = DEFAULT.hermitian) -> np.ndarray:
    a = _square(m)
    err = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if err > tol:
        raise NotHermitianError(f"not Hermitian (max asymmetry {err:.3g})")
    return a


def hermitize(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    return 0.5 * (a + a.conj().T)


def as_ket(v, tol: float = DEFAULT.norm) -> np.ndarray:
    a = np.asarray(v, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise ValueError("ket has non-finite amplitudes")
    n = np.vdot(a, a).real
    if abs(n - 1.0) > tol:
        raise ValueError(f"state not normalized (squared norm {n:.12g})")
    return a


def ket_to_density(ket) -> np.ndarray:
    a = np.asarray(ket, dtype=complex).reshape(-1)
    return np.outer(a, a.conj())


def hermitian_eigh(m, tol: float = DEFAULT.hermitian):
    """Eigendecomposition of a Hermitian matrix, ascending eigenvalues."""
    a = check_hermitian(m, tol)
    return np.linalg.eigh(hermitize(a))


def _clamped_spectrum(m, tols: Tolerances):
    w, v = hermitian_eigh(m, tols.hermitian)
    if w.size and w[0] < -tols.psd_clamp:
        raise NotPSDError(f"not PSD (min eigenvalue {w[0]:.3g})")
    return np.clip(w, 0.0, None), v


def operator_function(m, fn: Callable[[np.ndarray], np.ndarray],
                      tols: Tolerances = DEFAULT) -> np.ndarray:
    """Apply a scalar function to the spectrum of a PSD matrix.

    The result depends only on ``m``, not on how degenerate eigenspaces are
    split into eigenvectors.
    """
    w, v = _clamped_spectrum(m, tols)
    return hermitize((v * fn(w)) @ v.conj().T)


def operator_sqrt(m, tols: Tolerances = DEFAULT) -> np.ndarray:
    return operator_function(m, np.sqrt, tols)


def pinv_sqrt(m, cutoff: float = 1e-12, tols: Tolerances = DEFAULT):
    """Pseudo-inverse square root of a PSD matrix and its support projector.

    Eigenvalues below ``cutoff`` are treated as zero.
    """
    w, v = _clamped_spectrum(m, tols)
    keep = w > cutoff
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / np.sqrt(w[keep])
    r = hermitize((v * inv) @ v.conj().T)
    support = hermitize((v * keep) @ v.conj().T)
    return r, support


def check_psd(m, tols: Tolerances = DEFAULT) -> float:
    """Return the minimum eigenvalue, raising if it is below the clamp."""
    w, _ = hermitian_eigh(m, tols.hermitian)
    if w.size and w[0] < -tols.psd_clamp:
        raise NotPSDError(f"not PSD (min eigenvalue {w[0]:.3g})")
    return float(w[0]) if w.size else 0.0


def check_density_matrix(m, tols: Tolerances = DEFAULT) -> np.ndarray:
    a = check_hermitian(m, tols.hermitian)
    check_psd(a, tols)
    t = np.trace(a).real
    if abs(t - 1.0) > tols.trace:
        raise ValueError(f"trace {t:.12g} != 1")
    return a


def partial_trace_private(state, dim_b: int, dim_a: int) -> np.ndarray:
    """Trace out the private register of a state on B⊗A.

    ``state`` may be a ket of length ``dim_b*dim_a`` or a density matrix of
    that dimension.
    """
    s = np.asarray(state, dtype=complex)
    n = dim_b * dim_a
    if s.ndim == 1:
        if s.shape[0] != n:
            raise ValueError(f"dimension mismatch: ket length {s.shape[0]} != {dim_b}*{dim_a}")
        psi = s.reshape(dim_b, dim_a)
        return hermitize(psi @ psi.conj().T)
    if s.shape != (n, n):
        raise ValueError(f"dimension mismatch: state shape {s.shape} != ({n}, {n})")
    return np.einsum("iaja->ij", s.reshape(dim_b, dim_a, dim_b, dim_a))


def _stack_kraus(kraus: Sequence) -> np.ndarray:
    ks = np.asarray(kraus, dtype=complex)
    if ks.ndim == 2:
        ks = ks[None]
    if ks.ndim != 3 or ks.shape[1] != ks.shape[2]:
        raise ValueError(f"Kraus operators must be square, got shape {ks.shape}")
    return ks


def completeness_residual(kraus: Sequence) -> float:
    ks = _stack_kraus(kraus)
    s = np.einsum("kji,kjl->il", ks.conj(), ks)
    return float(np.max(np.abs(s - np.eye(ks.shape[1]))))


def apply_channel(kraus: Sequence, rho, dim_private: int = 1, complete: bool = True,
                  tols: Tolerances = DEFAULT) -> np.ndarray:
    """Return sum_k (K_k ⊗ I) rho (K_k† ⊗ I).

    With ``complete=False`` the Kraus set may be a single measurement branch
    and the (unnormalized) output is returned as is.
    """
    ks = _stack_kraus(kraus)
    d = ks.shape[1]
    r = np.asarray(rho, dtype=complex)
    n = d * dim_private
    if r.shape != (n, n):
        raise ValueError(f"dimension mismatch: rho shape {r.shape} vs Kraus dim {d} x private {dim_private}")
    if complete:
        res = completeness_residual(ks)
        if res > tols.completeness:
            raise ValueError(f"Kraus set violates completeness (residual {res:.3g})")
    out = np.zeros((n, n), dtype=complex)
    for k in ks:
        # (K⊗I) rho: K acts on the major (public) row index
        left = (k @ r.reshape(d, -1)).reshape(n, d, dim_private)
        # ... (K†⊗I): K* acts on the public part of the column index
        out += np.matmul(k.conj(), left).reshape(n, n)
    return out
