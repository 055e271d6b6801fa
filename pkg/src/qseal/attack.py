"""Reading attacks on sealed states and their information/disturbance metrics.

Fidelities are evaluated by simulating the channel (identity on the private
register) on the full sealed state, never from the reduced states alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .discrimination import Povm
from .qcore import apply_channel, ket_to_density, operator_sqrt
from .seal import SealScheme, canonical_scheme

# Values printed alongside the N=8, p_max=0.9, p=0.3 example.
REPORTED_SYMMETRIC_FCOND = 0.980204
REPORTED_ASYMMETRIC_FCOND = 0.981247


class DegenerateSchemeError(ValueError):
    """p_max = 1/N: every measurement succeeds with probability exactly 1/N."""


@dataclass(frozen=True)
class MeasurementChannel:
    """Kraus operators grouped by the classical outcome they announce."""

    outcome_kraus: tuple

    def __post_init__(self):
        groups = tuple(np.array(g, dtype=complex, ndmin=3) for g in self.outcome_kraus)
        if not groups:
            raise ValueError("channel needs at least one outcome")
        dims = {g.shape[1:] for g in groups}
        if len(dims) != 1 or any(g.shape[1] != g.shape[2] for g in groups):
            raise ValueError("all Kraus operators must be square with a common dimension")
        for g in groups:
            g.setflags(write=False)
        object.__setattr__(self, "outcome_kraus", groups)
        res = self.completeness_residual()
        if res > DEFAULT.completeness:
            raise ValueError(f"Kraus operators violate completeness (residual {res:.3g})")

    @property
    def dim(self) -> int:
        return self.outcome_kraus[0].shape[1]

    @property
    def n_outcomes(self) -> int:
        return len(self.outcome_kraus)

    def effects(self) -> np.ndarray:
        """POVM element sum_k Q_jk† Q_jk of each outcome."""
        return np.array([np.einsum("kji,kjl->il", g.conj(), g) for g in self.outcome_kraus])

    def completeness_residual(self) -> float:
        return float(np.max(np.abs(self.effects().sum(axis=0) - np.eye(self.dim))))

    def all_kraus(self) -> np.ndarray:
        return np.concatenate(self.outcome_kraus)


@dataclass(frozen=True)
class TradeoffPoint:
    n: int
    p_max: float
    p: float
    nu: float
    a: float
    b: float


@dataclass(frozen=True)
class AttackReport:
    joint: np.ndarray
    p: float
    mutual_information_bits: float
    avg_fidelity: float
    cond_fidelity: float

    def to_dict(self) -> dict:
        return {
            "joint": self.joint.tolist(),
            "p": self.p,
            "mutual_information_bits": self.mutual_information_bits,
            "avg_fidelity": self.avg_fidelity,
            "cond_fidelity": self.cond_fidelity,
        }


def nu(p: float, p_max: float, n: int) -> float:
    """Attack strength (pN - 1)/(p_max N - 1) in [0, 1]."""
    if p_max * n - 1.0 <= 1e-15:
        raise DegenerateSchemeError(
            "p_max = 1/N: states are indistinguishable and every channel achieves p = 1/N")
    if p_max > 1.0 + 1e-12:
        raise ValueError(f"p_max={p_max} exceeds 1")
    slack = 1e-12
    if p < 1.0 / n - slack or p > p_max + slack:
        raise ValueError(f"p={p} outside [1/N, p_max] = [{1.0 / n}, {p_max}]")
    return min(1.0, max(0.0, (p * n - 1.0) / (p_max * n - 1.0)))


def ab_coefficients(nu_: float, n: int):
    """Coefficients of the lower bound a I + b Pi_i on the attack Kraus operator."""
    if not (0.0 <= nu_ <= 1.0) or n < 2:
        raise ValueError(f"need nu in [0, 1] and N >= 2, got nu={nu_}, N={n}")
    a = math.sqrt((1.0 - nu_) / n)
    return a, math.sqrt(nu_ + (1.0 - nu_) / n) - a


def tradeoff_point(p: float, p_max: float, n: int) -> TradeoffPoint:
    v = nu(p, p_max, n)
    a, b = ab_coefficients(v, n)
    return TradeoffPoint(n=n, p_max=p_max, p=p, nu=v, a=a, b=b)


def build_attack(povm: Povm, nu_: float, tols: Tolerances = DEFAULT) -> MeasurementChannel:
    """Kraus operator sqrt((1-nu)/N I + nu Pi_i) for each outcome."""
    if not 0.0 <= nu_ <= 1.0:
        raise ValueError(f"nu={nu_} outside [0, 1]")
    n = povm.n_outcomes
    eye = np.eye(povm.dim)
    return MeasurementChannel(tuple(
        operator_sqrt((1.0 - nu_) / n * eye + nu_ * e, tols)[None] for e in povm.elements
    ))


def attack_for(povm: Povm, p: float, p_max: float) -> MeasurementChannel:
    return build_attack(povm, nu(p, p_max, povm.n_outcomes))


def he_mixed_attack(povm: Povm, n: int | None = None) -> MeasurementChannel:
    """Measure with the POVM half the time, otherwise announce a uniform guess untouched."""
    n = povm.n_outcomes if n is None else n
    if n != povm.n_outcomes:
        raise ValueError(f"POVM has {povm.n_outcomes} outcomes, expected {n}")
    guess = np.eye(povm.dim) / math.sqrt(2.0 * n)
    return MeasurementChannel(tuple(
        np.array([operator_sqrt(e) / math.sqrt(2.0), guess]) for e in povm.elements
    ))


def _check_compatible(scheme: SealScheme, channel: MeasurementChannel):
    if channel.dim != scheme.dim_public:
        raise ValueError(f"dimension mismatch: channel dim {channel.dim} != public dim {scheme.dim_public}")


def joint_distribution(priors, rhos, channel: MeasurementChannel) -> np.ndarray:
    """Pr_ij = eta_i Tr(E_j rho_i) from public reduced states."""
    rhos = np.asarray(rhos, dtype=complex)
    if rhos.shape[1] != channel.dim:
        raise ValueError(f"dimension mismatch: states dim {rhos.shape[1]} != channel dim {channel.dim}")
    tr = np.einsum("jab,iba->ij", channel.effects(), rhos).real
    return np.asarray(priors, dtype=float)[:, None] * tr


def outcome_probabilities(scheme: SealScheme, channel: MeasurementChannel) -> np.ndarray:
    """Joint probabilities Pr_ij that message i was sealed and j is announced."""
    _check_compatible(scheme, channel)
    out = np.zeros((scheme.n_messages, channel.n_outcomes))
    for i in range(scheme.n_messages):
        psi = scheme.amplitude_matrix(i)
        for j, group in enumerate(channel.outcome_kraus):
            # Tr[(K⊗I)|psi><psi|(K†⊗I)] = ||K Psi||_F^2
            out[i, j] = sum(np.vdot(k @ psi, k @ psi).real for k in group)
    return scheme.priors[:, None] * out


def mutual_information(joint, priors=None, tol: float = DEFAULT.norm) -> float:
    """Mutual information in bits between the sealed message and the announced outcome."""
    pr = np.asarray(joint, dtype=float)
    if np.any(pr < -tol) or abs(pr.sum() - 1.0) > tol:
        raise ValueError("joint distribution not normalized")
    pr = np.clip(pr, 0.0, None)
    rows = pr.sum(axis=1)
    if priors is not None and np.max(np.abs(rows - np.asarray(priors, dtype=float))) > tol:
        raise ValueError("joint distribution row sums do not match priors")
    cols = pr.sum(axis=0)
    mask = pr > 0
    outer = np.outer(rows, cols)
    return float(max(0.0, np.sum(pr[mask] * np.log2(pr[mask] / outer[mask]))))


def _branch_outputs(scheme: SealScheme, channel: MeasurementChannel, tols: Tolerances):
    """(fidelity, trace) of every outcome branch on every sealed state, shape (N, J)."""
    _check_compatible(scheme, channel)
    fid = np.zeros((scheme.n_messages, channel.n_outcomes))
    tr = np.zeros_like(fid)
    for i, psi in enumerate(scheme.states):
        rho = ket_to_density(psi)
        for j, group in enumerate(channel.outcome_kraus):
            out = apply_channel(group, rho, scheme.dim_private, complete=False, tols=tols)
            fid[i, j] = np.vdot(psi, out @ psi).real
            tr[i, j] = np.trace(out).real
    return fid, tr


def average_fidelity(scheme: SealScheme, channel: MeasurementChannel, tols: Tolerances = DEFAULT) -> float:
    fid, _ = _branch_outputs(scheme, channel, tols)
    return float(scheme.priors @ fid.sum(axis=1))


def _cond(priors, fid, tr, cutoff) -> float:
    n = len(priors)
    diag_f = fid[np.arange(n), np.arange(n)]
    diag_t = tr[np.arange(n), np.arange(n)]
    ok = diag_t > cutoff
    return float(np.sum(priors[ok] * diag_f[ok] / diag_t[ok]))


def conditional_fidelity(scheme: SealScheme, channel: MeasurementChannel, tols: Tolerances = DEFAULT) -> float:
    """Average fidelity conditioned on the announced outcome being correct.

    Messages whose correct branch has zero probability contribute 0.
    """
    if channel.n_outcomes != scheme.n_messages:
        raise ValueError("conditional fidelity needs one outcome per message")
    fid, tr = _branch_outputs(scheme, channel, tols)
    return _cond(scheme.priors, fid, tr, tols.zero_branch)


def evaluate_attack(scheme: SealScheme, channel: MeasurementChannel, tols: Tolerances = DEFAULT) -> AttackReport:
    """All metrics from a single simulation pass."""
    if channel.n_outcomes != scheme.n_messages:
        raise ValueError("attack must announce one of the N messages")
    fid, tr = _branch_outputs(scheme, channel, tols)
    joint = scheme.priors[:, None] * tr
    return AttackReport(
        joint=joint,
        p=float(np.trace(joint)),
        mutual_information_bits=mutual_information(joint, scheme.priors),
        avg_fidelity=float(scheme.priors @ fid.sum(axis=1)),
        cond_fidelity=_cond(scheme.priors, fid, tr, tols.zero_branch),
    )


def asymmetric_counterexample():
    """Canonical N=8, p_max=0.9 scheme with an asymmetric diagonal channel at p=0.3.

    Outcomes 0..5 use 3(2 sqrt47 |i><i| + sqrt13 sum_{j!=i} |j><j|)/(15 sqrt31),
    outcomes 6 and 7 use (2 sqrt109 |i><i| + 3 sqrt29 sum_{j!=i} |j><j|)/(5 sqrt31).
    """
    n = 8
    scheme = canonical_scheme(n, 0.9)
    s31 = math.sqrt(31.0)
    kraus = []
    for i in range(n):
        if i <= 5:
            on, off = 6.0 * math.sqrt(47.0) / (15.0 * s31), 3.0 * math.sqrt(13.0) / (15.0 * s31)
        else:
            on, off = 2.0 * math.sqrt(109.0) / (5.0 * s31), 3.0 * math.sqrt(29.0) / (5.0 * s31)
        diag = np.full(n, off)
        diag[i] = on
        kraus.append(np.diag(diag)[None])
    return scheme, MeasurementChannel(tuple(kraus))
