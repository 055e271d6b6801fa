"""Minimum-error discrimination of the public reduced states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .qcore import check_hermitian, hermitize, pinv_sqrt
from .seal import SealScheme, reduced_states


class NotConvergedError(RuntimeError):
    """The solver hit its iteration cap without certifying optimality.

    The best iterate and its optimality report are attached.
    """

    def __init__(self, message, povm, p, report):
        super().__init__(message)
        self.povm = povm
        self.p = p
        self.report = report


@dataclass(frozen=True)
class Povm:
    elements: np.ndarray

    def __post_init__(self):
        els = np.asarray(self.elements, dtype=complex)
        if els.ndim != 3 or els.shape[1] != els.shape[2]:
            raise ValueError(f"POVM elements must be square matrices, got shape {els.shape}")
        for k, e in enumerate(els):
            check_hermitian(e)
            lo = np.linalg.eigvalsh(hermitize(e))[0]
            if lo < -DEFAULT.psd_clamp:
                raise ValueError(f"POVM element {k} not PSD (min eigenvalue {lo:.3g})")
        res = np.max(np.abs(els.sum(axis=0) - np.eye(els.shape[1])))
        if res > DEFAULT.completeness:
            raise ValueError(f"POVM elements do not sum to identity (residual {res:.3g})")
        els.setflags(write=False)
        object.__setattr__(self, "elements", els)

    @property
    def n_outcomes(self) -> int:
        return self.elements.shape[0]

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    @classmethod
    def computational(cls, dim: int) -> "Povm":
        eye = np.eye(dim)
        return cls(np.array([np.outer(eye[i], eye[i]) for i in range(dim)]))


@dataclass(frozen=True)
class OptimalityReport:
    pairwise_residuals: np.ndarray
    operator_min_eigs: np.ndarray
    passed: bool
    tolerance: float

    @property
    def max_residual(self) -> float:
        return float(self.pairwise_residuals.max())

    @property
    def min_eig(self) -> float:
        return float(self.operator_min_eigs.min())


@dataclass(frozen=True)
class SolverSettings:
    max_dim: int = 64
    max_iter: int = 200_000
    p_tol: float = 1e-12
    opt_tol: float = 1e-6
    pinv_cutoff: float = 1e-12


def _weighted(scheme: SealScheme) -> np.ndarray:
    return scheme.priors[:, None, None] * reduced_states(scheme)


def _check_dims(scheme: SealScheme, povm: Povm):
    if povm.dim != scheme.dim_public:
        raise ValueError(f"dimension mismatch: POVM dim {povm.dim} != public dim {scheme.dim_public}")
    if povm.n_outcomes != scheme.n_messages:
        raise ValueError(f"POVM has {povm.n_outcomes} outcomes for {scheme.n_messages} messages")


def _success(weighted: np.ndarray, elements: np.ndarray) -> float:
    return float(np.einsum("kij,kji->", weighted, elements).real)


def success_probability(scheme: SealScheme, povm: Povm) -> float:
    _check_dims(scheme, povm)
    return _success(_weighted(scheme), povm.elements)


def _report(weighted: np.ndarray, elements: np.ndarray, tol: float) -> OptimalityReport:
    n = weighted.shape[0]
    res = np.zeros((n, n))
    for k in range(n):
        for j in range(n):
            res[k, j] = np.max(np.abs(elements[k] @ (weighted[k] - weighted[j]) @ elements[j]))
    lagrange = np.einsum("kij,kjl->il", weighted, elements)
    mins = np.array([np.linalg.eigvalsh(hermitize(lagrange - weighted[j]))[0] for j in range(n)])
    passed = bool(np.all(res <= tol) and np.all(mins >= -tol))
    return OptimalityReport(res, mins, passed, tol)


def check_optimality(scheme: SealScheme, povm: Povm, tol: float = DEFAULT.optimality) -> OptimalityReport:
    """Residuals of the minimum-error stationarity and global conditions.

    For every pair ``(k, j)`` the max-entry norm of
    ``Pi_k (eta_k rho_k - eta_j rho_j) Pi_j`` is recorded, and for every ``j``
    the minimum eigenvalue of the Hermitized ``sum_i eta_i rho_i Pi_i - eta_j rho_j``.
    """
    _check_dims(scheme, povm)
    return _report(_weighted(scheme), povm.elements, tol)


def pretty_good_measurement(weighted: np.ndarray, cutoff: float = 1e-12,
                            tols: Tolerances = DEFAULT) -> np.ndarray:
    """Square-root measurement for weighted states ``eta_i rho_i``.

    The kernel of the average state is split evenly across outcomes so the
    elements still sum to the identity.
    """
    n, d, _ = weighted.shape
    r, support = pinv_sqrt(weighted.sum(axis=0), cutoff, tols)
    rest = (np.eye(d) - support) / n
    return np.array([hermitize(r @ w @ r) + rest for w in weighted])


def _refine(weighted: np.ndarray, elements: np.ndarray, cutoff: float, tols: Tolerances) -> np.ndarray:
    # Pi_i <- L^+ W_i Pi_i W_i L^+,  L = (sum_j W_j Pi_j W_j)^(1/2)
    n, d, _ = weighted.shape
    sandwiched = np.einsum("kij,kjl,klm->kim", weighted, elements, weighted)
    r, support = pinv_sqrt(sandwiched.sum(axis=0), cutoff, tols)
    rest = (np.eye(d) - support) / n
    return np.array([hermitize(r @ s @ r) + rest for s in sandwiched])


def solve_discrimination(scheme: SealScheme, settings: SolverSettings = SolverSettings(),
                         tols: Tolerances = DEFAULT):
    """Optimal minimum-error POVM and the maximal success probability.

    Starts from the pretty good measurement and iterates the fixed-point map
    above until the success probability stalls and the optimality report
    passes at ``settings.opt_tol``.
    """
    if scheme.dim_public > settings.max_dim:
        raise ValueError(f"public dimension {scheme.dim_public} exceeds solver cap {settings.max_dim}")
    weighted = _weighted(scheme)
    elements = pretty_good_measurement(weighted, settings.pinv_cutoff, tols)
    p = _success(weighted, elements)
    for _ in range(settings.max_iter):
        nxt = _refine(weighted, elements, settings.pinv_cutoff, tols)
        p_next = _success(weighted, nxt)
        elements, stalled = nxt, abs(p_next - p) < settings.p_tol
        p = p_next
        if stalled and _report(weighted, elements, settings.opt_tol).passed:
            return Povm(elements), p
    report = _report(weighted, elements, settings.opt_tol)
    if report.passed:
        return Povm(elements), p
    raise NotConvergedError(
        f"not converged after {settings.max_iter} iterations "
        f"(max residual {report.max_residual:.3g}, min eigenvalue {report.min_eig:.3g})",
        Povm(elements), p, report,
    )
