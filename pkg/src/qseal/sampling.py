"""Random POVMs and measurement channels for property probes."""

from __future__ import annotations

import numpy as np

from .attack import MeasurementChannel
from .discrimination import Povm
from .qcore import hermitize, pinv_sqrt


def _ginibre(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / np.sqrt(2.0)


def _normalize(ops: np.ndarray) -> np.ndarray:
    """Right-multiply a stack of operators by S^(-1/2), S = sum A†A."""
    flat = ops.reshape(-1, *ops.shape[-2:])
    s = np.einsum("kba,kbc->ac", flat.conj(), flat)
    r, support = pinv_sqrt(s)
    if not np.allclose(support, np.eye(s.shape[0]), atol=1e-9):
        raise ValueError("operators do not span the full space")
    return np.einsum("...ab,bc->...ac", ops, r)


def random_povm(rng: np.random.Generator, dim: int, n: int, rank: int | None = None) -> Povm:
    """POVM with ``n`` elements; ``rank`` limits each element's rank."""
    # n * rank >= dim so the elements can sum to the identity
    rank = dim if rank is None else max(rank, -(-dim // n))
    g = _normalize(_ginibre(rng, (n, rank, dim)))
    return Povm(np.array([hermitize(x.conj().T @ x) for x in g]))


def random_projective_povm(rng: np.random.Generator, dim: int, n: int) -> Povm:
    """Projectors onto ``n`` groups of a random orthonormal basis (some may be empty)."""
    q, _ = np.linalg.qr(_ginibre(rng, (dim, dim)))
    labels = rng.integers(0, n, size=dim)
    labels[:min(n, dim)] = np.arange(min(n, dim))
    return Povm(np.array([hermitize(q[:, labels == k] @ q[:, labels == k].conj().T) for k in range(n)]))


def random_channel(rng: np.random.Generator, dim: int, n_outcomes: int,
                   n_kraus: int | None = None) -> MeasurementChannel:
    """Random channel mixing outcome-biased diagonal, identity and Ginibre parts."""
    n_kraus = int(rng.integers(1, 4)) if n_kraus is None else n_kraus
    diag_w, noise_w, eye_w = np.exp(rng.uniform(-4.0, 2.0, 3))
    ops = np.zeros((n_outcomes, n_kraus, dim, dim), dtype=complex)
    idx = np.arange(dim)
    for j in range(n_outcomes):
        for k in range(n_kraus):
            spread = rng.uniform() * rng.uniform(size=dim) ** 3
            weights = np.where(idx == j % dim, rng.uniform(), spread)
            ops[j, k] = (diag_w * np.diag(weights)
                         + noise_w * _ginibre(rng, (dim, dim)) / np.sqrt(dim)
                         + eye_w * rng.uniform() * np.eye(dim))
    return MeasurementChannel(tuple(_normalize(ops)))


def perturbed_channel(rng: np.random.Generator, base: MeasurementChannel, scale: float,
                      extra_kraus: int = 1) -> MeasurementChannel:
    """Add Ginibre noise of size ``scale`` to ``base`` and renormalize."""
    dim = base.dim
    groups = []
    for g in base.outcome_kraus:
        pad = np.zeros((extra_kraus, dim, dim), dtype=complex)
        groups.append(np.concatenate([g, pad]) + scale * _ginibre(rng, (g.shape[0] + extra_kraus, dim, dim)))
    width = max(g.shape[0] for g in groups)
    stacked = np.zeros((len(groups), width, dim, dim), dtype=complex)
    for j, g in enumerate(groups):
        stacked[j, :g.shape[0]] = g
    return MeasurementChannel(tuple(_normalize(stacked)))
