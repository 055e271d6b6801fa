"""Named invariant checks run by ``qseal verify``."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import attack, theory
from .config import DEFAULT, Tolerances
from .discrimination import Povm, check_optimality, solve_discrimination
from .qcore import apply_channel, operator_sqrt, partial_trace_private
from .sampling import perturbed_channel, random_channel, random_povm, random_projective_povm
from .seal import SealScheme, canonical_reduced_states, canonical_scheme


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    failures: list = field(default_factory=list)


def _p_grid(n: int, p_max: float, points: int) -> np.ndarray:
    return np.linspace(1.0 / n, p_max, points)


def _pmax_values(n: int, values=(0.3, 0.5, 0.7, 0.9, 1.0)):
    return [pm for pm in values if pm > 1.0 / n]


def check_qcore(tols: Tolerances, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    fails = []
    worst = 0.0
    for dim in (1, 2, 3, 5, 8, 16, 32):
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        m = g @ g.conj().T
        r = operator_sqrt(m)
        err = np.max(np.abs(r @ r - m)) / max(1.0, np.max(np.abs(m)))
        worst = max(worst, err)
        if err > tols.sqrt_residual:
            fails.append(f"operator_sqrt dim={dim} residual {err:.3g}")
    for db, da in ((2, 2), (3, 4), (4, 16)):
        g = rng.normal(size=(db * da, db * da)) + 1j * rng.normal(size=(db * da, db * da))
        rho = g @ g.conj().T
        rho /= np.trace(rho).real
        red = partial_trace_private(rho, db, da)
        if abs(np.trace(red).real - 1) > tols.trace or np.linalg.eigvalsh(red)[0] < -tols.psd_clamp:
            fails.append(f"partial trace ({db},{da}) lost trace/PSD")
        ch = random_channel(rng, db, 3)
        out = apply_channel(ch.all_kraus(), rho, da, tols=DEFAULT)
        if abs(np.trace(out).real - 1) > tols.trace or np.linalg.eigvalsh(out)[0] < -tols.psd_clamp:
            fails.append(f"channel ({db},{da}) lost trace/PSD")
    return CheckResult("qcore", not fails, f"worst sqrt residual {worst:.2e}", failures=fails)


def check_lemma1(tols: Tolerances, n_povms: int = 1000, seed: int = 1) -> CheckResult:
    fails = []
    xs = np.linspace(0.0, 1.0, 1001)
    lo = math.inf
    for n in range(2, 65):
        for v in np.linspace(0.0, 1.0, 11)[1:]:
            f = np.array([theory.lemma_f(x, v, n) for x in xs])
            lo = min(lo, f.min())
            if f.min() < -tols.lemma_scalar:
                fails.append(f"f < 0 at N={n}, nu={v:.2f}: {f.min():.3g}")
            if np.abs(f[10:-10]).min() <= 1e-9:
                fails.append(f"interior zero of f at N={n}, nu={v:.2f}")
    rng = np.random.default_rng(seed)
    op_lo = math.inf
    for _ in range(n_povms):
        dim = int(rng.integers(2, 6))
        n = int(rng.integers(2, 6))
        povm = random_povm(rng, dim, n, rank=int(rng.integers(1, dim + 1)))
        v = float(rng.uniform())
        a, b = attack.ab_coefficients(v, n)
        ch = attack.build_attack(povm, v)
        for m, e in zip(ch.outcome_kraus, povm.elements):
            gap = np.linalg.eigvalsh(m[0] - a * np.eye(dim) - b * e)[0]
            op_lo = min(op_lo, gap)
            if gap < -tols.psd_clamp:
                fails.append(f"operator inequality violated: min eig {gap:.3g}")
    eq = 0.0
    for _ in range(50):
        dim = int(rng.integers(2, 7))
        n = int(rng.integers(2, 5))
        povm = random_projective_povm(rng, dim, n)
        v = float(rng.uniform())
        a, b = attack.ab_coefficients(v, n)
        ch = attack.build_attack(povm, v)
        for m, e in zip(ch.outcome_kraus, povm.elements):
            eq = max(eq, np.max(np.abs(m[0] - a * np.eye(dim) - b * e)))
    if eq > tols.psd_clamp:
        fails.append(f"projective equality residual {eq:.3g}")
    return CheckResult("lemma1", not fails,
                       f"min f {lo:.2e}, min operator gap {op_lo:.2e}, projector residual {eq:.2e}",
                       failures=fails)


def check_oracle(tols: Tolerances, points: int = 25, n_max: int = 8) -> CheckResult:
    fails = []
    worst_f = worst_c = 0.0
    for n in range(2, n_max + 1):
        basis = Povm.computational(n)
        for pm in _pmax_values(n):
            scheme = canonical_scheme(n, pm)
            for p in _p_grid(n, pm, points):
                rep = attack.evaluate_attack(scheme, attack.attack_for(basis, p, pm))
                f_cf = theory.minmax_avg_fidelity(p, pm, n)
                c_cf = theory.minmax_cond_fidelity_bound(p, pm, n)
                worst_f = max(worst_f, abs(rep.avg_fidelity - f_cf))
                if abs(rep.avg_fidelity - f_cf) > tols.oracle:
                    fails.append(f"avg fidelity N={n} pmax={pm} p={p:.4f}: {rep.avg_fidelity} vs {f_cf}")
                if rep.cond_fidelity < c_cf - tols.oracle:
                    fails.append(f"cond fidelity below bound N={n} pmax={pm} p={p:.4f}")
                if theory.is_cond_bound_tight(p, pm, n):
                    worst_c = max(worst_c, abs(rep.cond_fidelity - c_cf))
                    if abs(rep.cond_fidelity - c_cf) > tols.oracle:
                        fails.append(f"cond fidelity not tight N={n} pmax={pm} p={p:.4f}")
    return CheckResult("oracle", not fails,
                       f"max |F sim - closed form| {worst_f:.2e}, max tight cond gap {worst_c:.2e}",
                       failures=fails)


def check_insecurity(tols: Tolerances, n_max: int = 64, grid: int = 200, mi_grid: int = 8) -> CheckResult:
    fails = []
    min_f = min_c = math.inf
    for n in range(2, n_max + 1):
        for pm in np.linspace(1.0 / n, 1.0, grid + 1)[1:]:
            p, b = theory.insecurity_point(pm, n)
            min_f = min(min_f, b.minmax_avg_fidelity)
            min_c = min(min_c, b.minmax_cond_fidelity_bound)
            if b.minmax_avg_fidelity <= 0.5:
                fails.append(f"avg fidelity bound {b.minmax_avg_fidelity:.6f} <= 1/2 at N={n}, pmax={pm:.4f}")
            if b.minmax_cond_fidelity_bound <= 0.5:
                fails.append(f"cond fidelity bound {b.minmax_cond_fidelity_bound:.6f} <= 1/2 at N={n}, pmax={pm:.4f}")
    for n in range(2, n_max + 1):
        basis = Povm.computational(n)
        for pm in np.linspace(1.0 / n, 1.0, mi_grid + 1)[1:]:
            p, _ = theory.insecurity_point(pm, n)
            joint = attack.joint_distribution(np.full(n, 1.0 / n), canonical_reduced_states(n, pm),
                                              attack.attack_for(basis, p, pm))
            if attack.mutual_information(joint) <= 0:
                fails.append(f"zero mutual information at N={n}, pmax={pm:.4f}")
    return CheckResult("insecurity", not fails,
                       f"min avg bound {min_f:.6f}, min cond bound {min_c:.6f}", failures=fails)


def check_discrimination(tols: Tolerances) -> CheckResult:
    fails = []
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    two = SealScheme(np.array([0.5, 0.5]), 2, 1, np.array([[1.0, 0.0], plus]))
    diff = 0.5 * (np.outer([1, 0], [1, 0]) - np.outer(plus, plus))
    helstrom = 0.5 * (1.0 + np.abs(np.linalg.eigvalsh(diff)).sum())
    povm, p = solve_discrimination(two)
    if abs(p - helstrom) > tols.optimality:
        fails.append(f"Helstrom mismatch {p} vs {helstrom}")
    worst = 0.0
    for n in range(2, 9):
        for pm in _pmax_values(n):
            povm, p = solve_discrimination(canonical_scheme(n, pm))
            worst = max(worst, abs(p - pm))
            if abs(p - pm) > 1e-8:
                fails.append(f"canonical N={n} pmax={pm}: solved {p}")
            if not check_optimality(canonical_scheme(n, pm), povm, tols.optimality).passed:
                fails.append(f"canonical N={n} pmax={pm}: optimality check failed")
    return CheckResult("discrimination", not fails,
                       f"Helstrom {helstrom:.9f}, worst canonical error {worst:.2e}", failures=fails)


def check_counterexample(tols: Tolerances) -> CheckResult:
    fails = []
    scheme = canonical_scheme(8, 0.9)
    sym = attack.conditional_fidelity(scheme, attack.attack_for(Povm.computational(8), 0.3, 0.9))
    if abs(sym - attack.REPORTED_SYMMETRIC_FCOND) > 1e-4:
        fails.append(f"symmetric conditional fidelity {sym}")
    scheme, ch = attack.asymmetric_counterexample()
    res = ch.completeness_residual()
    if res > 1e-12:
        fails.append(f"asymmetric completeness residual {res:.3g}")
    rep = attack.evaluate_attack(scheme, ch)
    if abs(rep.p - 0.3) > 1e-9:
        fails.append(f"asymmetric success probability {rep.p}")
    return CheckResult("counterexample", not fails,
                       f"symmetric {sym:.6f}, asymmetric {rep.cond_fidelity:.6f} "
                       f"(reported {attack.REPORTED_ASYMMETRIC_FCOND})", failures=fails)


def optimality_probe(n: int, p_max: float, count: int, seed: int = 0, bin_width: float = 0.05):
    """Largest excess of simulated F over the closed-form bound, per success-probability bin.

    Half the channels are generic random channels, half are noisy versions of
    the optimal attack at a random target p.  Only channels with
    p in [1/N, p_max] are counted.
    """
    rng = np.random.default_rng(seed)
    scheme = canonical_scheme(n, p_max)
    basis = Povm.computational(n)
    bins: dict[int, float] = {}
    used = 0
    while used < count:
        if used % 2:
            ch = random_channel(rng, n, n)
        else:
            target = float(rng.uniform(1.0 / n, p_max))
            ch = perturbed_channel(rng, attack.attack_for(basis, target, p_max),
                                   float(np.exp(rng.uniform(-8.0, -1.0))))
        rep = attack.evaluate_attack(scheme, ch)
        if not (1.0 / n <= rep.p <= p_max):
            continue
        used += 1
        excess = rep.avg_fidelity - theory.minmax_avg_fidelity(rep.p, p_max, n)
        k = int((rep.p - 1.0 / n) // bin_width)
        bins[k] = max(bins.get(k, -math.inf), excess)
    return bins


def check_optimality_probe(tols: Tolerances, count: int = 10_000) -> CheckResult:
    bins = optimality_probe(4, 0.8, count)
    worst = max(bins.values())
    fails = [f"bin {k}: excess {v:.3g}" for k, v in sorted(bins.items()) if v > tols.optimality]
    return CheckResult("optimality_probe", not fails,
                       f"{count} channels in {len(bins)} bins, max excess {worst:.2e}", failures=fails)


def check_concavity(tols: Tolerances) -> CheckResult:
    fails = []
    for n in range(2, 9):
        for pm in _pmax_values(n):
            f = np.array([theory.minmax_avg_fidelity(p, pm, n) for p in _p_grid(n, pm, 200)])
            if np.diff(f, 2).max() > tols.oracle:
                fails.append(f"avg fidelity not concave N={n} pmax={pm}")
    gap = abs(theory.minmax_avg_fidelity(0.7, 0.9, 10 ** 4) - theory.asymptotic_fidelity(0.7, 0.9))
    if gap >= 1e-3:
        fails.append(f"N=1e4 asymptotic gap {gap:.3g} >= 1e-3")
    for n in (2, 3, 4, 5):
        for pm in _pmax_values(n, (0.3, 0.5, 0.7, 0.9, 0.99)):
            h = np.array([theory.h_function(x, pm, n) for x in _p_grid(n, pm, 200)])
            if np.diff(h, 2).max() > tols.oracle:
                fails.append(f"h not concave N={n} pmax={pm}")
    h8 = np.array([theory.h_function(x, 0.9, 8) for x in _p_grid(8, 0.9, 200)])
    if np.diff(h8, 2).max() <= 0:
        fails.append("no concavity violation found for h at N=8")
    return CheckResult("concavity", not fails,
                       f"asymptotic gap at N=1e4 {gap:.3e}, h(N=8) max second difference {np.diff(h8, 2).max():.2e}",
                       failures=fails)


def check_figures(tols: Tolerances, points: int = 100) -> CheckResult:
    from .cli import SweepSpec, sweep_rows

    fails = []
    for n, pms in ((2, (0.6, 0.9, 1.0)), (4, (0.4, 0.6, 0.8, 1.0))):
        rows = sweep_rows(SweepSpec(n, list(pms), points, ["avg_fidelity", "cond_fidelity_bound"]))
        for pm in pms:
            for metric in ("avg_fidelity", "cond_fidelity_bound"):
                vals = [r[5] for r in rows if r[1] == pm and r[4] == metric]
                if np.diff(vals).max() > tols.oracle:
                    fails.append(f"{metric} increases in p for N={n}, pmax={pm}")
                end = theory.avg_fidelity_at_pmax(pm, n) if metric == "avg_fidelity" else pm
                if abs(vals[-1] - end) > tols.oracle or abs(vals[0] - 1.0) > tols.oracle:
                    fails.append(f"{metric} endpoints wrong for N={n}, pmax={pm}")
    return CheckResult("figures", not fails, "N=2 and N=4 reference curves", failures=fails)


CHECKS: dict[str, Callable[[Tolerances], CheckResult]] = {
    "qcore": check_qcore,
    "lemma1": check_lemma1,
    "oracle": check_oracle,
    "insecurity": check_insecurity,
    "discrimination": check_discrimination,
    "counterexample": check_counterexample,
    "optimality_probe": check_optimality_probe,
    "concavity": check_concavity,
    "figures": check_figures,
}


def run_checks(names=None, tols: Tolerances = DEFAULT) -> list[CheckResult]:
    out = []
    for name in names or CHECKS:
        if name not in CHECKS:
            raise KeyError(f"unknown check {name!r}; choose from {', '.join(CHECKS)}")
        t = time.perf_counter()
        try:
            res = CHECKS[name](tols)
        except Exception as exc:  # a crashing check is a failed check
            res = CheckResult(name, False, f"raised {type(exc).__name__}: {exc}", failures=[str(exc)])
        res.seconds = time.perf_counter() - t
        out.append(res)
    return out
