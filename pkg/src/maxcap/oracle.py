"""Brute-force references and randomized property checks.

Everything here is deliberately independent of the solver's incremental
caches: subsets are evaluated from scratch through the module-level objective
functions, and the subproblem reference enumerates candidate selections
directly.  These serve as ground truth for the solver at small scale and as
randomized audits of the structural claims the solver relies on
(monotonicity, submodularity, non-negative coefficients).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .objective import Instance, Solution, objective, objective_gradient, objective_relaxed

__all__ = [
    "PropertyReport",
    "brute_force_opt",
    "brute_force_subproblem",
    "check_submodularity",
    "check_monotonicity",
    "check_gradient",
    "check_cpgf_contracts",
    "check_subproblem",
]

ENUMERATION_GUARD = 10**7
# absolute slack separating rounding noise from real structural violations
VIOLATION_SLACK = 1e-10


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of one randomized audit; deterministic given (instance, trials, seed)."""

    name: str
    trials: int
    violations: int
    worst_violation: float
    seed: int

    def __post_init__(self):
        if self.violations > self.trials:
            raise ValueError("violations cannot exceed trials")

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{self.name}: trials={self.trials} violations={self.violations} "
            f"worst={self.worst_violation:.3e} seed={self.seed} [{status}]"
        )


def brute_force_opt(inst: Instance, C: int) -> Solution:
    """Exact optimum over all size-C subsets; ties go to the first in lex order."""
    if C < 1 or C > inst.m:
        raise ValueError(f"cardinality must satisfy 1 <= C <= {inst.m}, got {C}")
    count = math.comb(inst.m, C)
    if count > ENUMERATION_GUARD:
        raise ValueError(f"refusing to enumerate {count} subsets (guard is {ENUMERATION_GUARD})")
    best_f, best_s = -np.inf, None
    for subset in itertools.combinations(range(inst.m), C):
        f = objective(inst, subset)
        if f > best_f:
            best_f, best_s = f, subset
    return Solution(best_s, best_f)


def _removal_key(d, removed):
    return tuple(sorted((d[r], r) for r in removed))


def _addition_key(d, added):
    return tuple(sorted((-d[a], a) for a in added))


def brute_force_subproblem(d: np.ndarray, incumbent, C: int, delta: int) -> frozenset:
    """Enumerative reference for the coefficient subproblem.

    Maximizes sum of d over { |S| = C, 2 <= |S symdiff incumbent| <= delta },
    i.e. selections that move by at least one swap, matching what the fast
    solver proposes.  Ties are resolved the same way: fewest swaps first,
    then removals of the smallest coefficients (index breaking equal values),
    then additions of the largest.
    """
    d = np.asarray(d, dtype=float)
    m = d.size
    inside = tuple(sorted(int(j) for j in incumbent))
    if len(inside) != C:
        raise ValueError(f"incumbent has {len(inside)} locations, expected C={C}")
    if inside and (inside[0] < 0 or inside[-1] >= m):
        raise ValueError(f"incumbent indices must lie in [0, {m})")
    if delta < 2 or delta % 2 != 0:
        raise ValueError(f"delta must be a positive even integer, got {delta}")
    half = delta // 2
    outside = tuple(j for j in range(m) if j not in set(inside))
    if half > min(C, m - C):
        raise ValueError(f"delta/2 = {half} exceeds min(C, m - C) = {min(C, m - C)}")
    count = sum(math.comb(C, t) * math.comb(m - C, t) for t in range(1, half + 1))
    if count > ENUMERATION_GUARD:
        raise ValueError(f"refusing to enumerate {count} candidates (guard is {ENUMERATION_GUARD})")

    # scores in exact rational arithmetic so mathematically tied candidates
    # really tie regardless of float summation order
    exact = [Fraction(float(v)) for v in d]
    best_score, best_key, best_set = None, None, None
    for t in range(1, half + 1):
        for removed in itertools.combinations(inside, t):
            drop = sum(exact[r] for r in removed)
            for added in itertools.combinations(outside, t):
                score = sum(exact[a] for a in added) - drop
                if best_score is not None and score < best_score:
                    continue
                key = (t, _removal_key(d, removed), _addition_key(d, added))
                if best_score is None or score > best_score or key < best_key:
                    best_score, best_key = score, key
                    best_set = frozenset(set(inside).difference(removed).union(added))
    return best_set


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def check_submodularity(inst: Instance, trials: int, seed: int = 0) -> PropertyReport:
    """Diminishing returns: gain of j on A at least the gain on any B containing A.

    Samples (A subset of B, j outside B) uniformly: |B| uniform on [1, m-1],
    B uniform among those sets, A a uniform subset of B, j uniform outside B.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = _rng(seed)
    m = inst.m
    violations, worst = 0, 0.0
    for _ in range(trials):
        size_b = int(rng.integers(1, m)) if m > 1 else 0
        b = np.sort(rng.choice(m, size=size_b, replace=False))
        a = b[rng.random(size_b) < 0.5]
        pool = np.setdiff1d(np.arange(m), b, assume_unique=True)
        j = int(rng.choice(pool))
        gain_a = objective(inst, np.append(a, j)) - objective(inst, a)
        gain_b = objective(inst, np.append(b, j)) - objective(inst, b)
        gap = gain_b - gain_a
        if gap > VIOLATION_SLACK:
            violations += 1
        worst = max(worst, gap)
    return PropertyReport("submodularity", trials, violations, max(0.0, worst), seed)


def check_monotonicity(inst: Instance, trials: int, seed: int = 0) -> PropertyReport:
    """Adding a location never loses demand: f(S + j) >= f(S).

    Counts a violation when the gain drops below -slack; locations with zero
    attraction everywhere legitimately gain exactly 0.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = _rng(seed)
    m = inst.m
    violations, worst = 0, 0.0
    for _ in range(trials):
        size_s = int(rng.integers(0, m))
        s = np.sort(rng.choice(m, size=size_s, replace=False))
        pool = np.setdiff1d(np.arange(m), s, assume_unique=True)
        j = int(rng.choice(pool))
        gain = objective(inst, np.append(s, j)) - objective(inst, s)
        if gain < -VIOLATION_SLACK:
            violations += 1
        worst = max(worst, -gain)
    return PropertyReport("monotonicity", trials, violations, max(0.0, worst), seed)


def check_gradient(inst: Instance, trials: int, step: float = 1e-5, seed: int = 0) -> PropertyReport:
    """Central finite differences of the relaxed objective against its gradient.

    Samples interior points x in [0.1, 0.9]^m; a trial fails when some entry
    differs by more than 1e-5 relative to max(1, |coefficient|).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0.0 < step <= 0.1:
        raise ValueError(f"step must lie in (0, 0.1], got {step}")
    rng = _rng(seed)
    m = inst.m
    tol = 1e-5
    violations, worst = 0, 0.0
    for _ in range(trials):
        x = rng.uniform(0.1, 0.9, m)
        grad = objective_gradient(inst, x)
        fd = np.empty(m)
        for j in range(m):
            hi = x.copy()
            lo = x.copy()
            hi[j] += step
            lo[j] -= step
            fd[j] = (objective_relaxed(inst, hi) - objective_relaxed(inst, lo)) / (2.0 * step)
        rel = np.abs(fd - grad) / np.maximum(1.0, np.abs(grad))
        err = float(rel.max())
        if err > tol:
            violations += 1
        worst = max(worst, err)
    return PropertyReport("gradient", trials, violations, worst, seed)


def check_subproblem(trials: int, seed: int = 0) -> PropertyReport:
    """Random small subproblems: the fast solver must match enumeration set-for-set.

    Draws coefficient vectors (30% quantized to force ties), incumbents, and
    feasible (C, delta) combinations with m <= 12, then compares the returned
    selections.  The recorded magnitude is the worst coefficient-sum gap over
    mismatching trials (0 when only the tie rule disagreed).
    """
    from .solver import solve_subproblem  # comparison driver; oracle math stays independent

    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = _rng(seed)
    violations, worst = 0, 0.0
    for _ in range(trials):
        m = int(rng.integers(4, 13))
        C = int(rng.integers(1, m))
        half = int(rng.integers(1, min(C, m - C) + 1))
        d = rng.uniform(0.0, 1.0, m)
        if rng.random() < 0.3:
            d = np.round(d, 1)  # coefficient ties exercise the tie rules
        incumbent = frozenset(int(j) for j in rng.choice(m, C, replace=False))
        fast = solve_subproblem(d, incumbent, C, 2 * half)
        exact = brute_force_subproblem(d, incumbent, C, 2 * half)
        if fast != exact:
            violations += 1
            worst = max(worst, float(d[list(exact)].sum() - d[list(fast)].sum()))
    return PropertyReport("subproblem", trials, violations, worst, seed)


def check_cpgf_contracts(inst: Instance, trials: int, seed: int = 0) -> PropertyReport:
    """Generating-function contracts on random attraction vectors.

    Per trial: homogeneity |G(ly) - l G(y)| <= 1e-9 max(1, l G(y)), the Euler
    identity |G(y) - sum y_j dG_j(y)| <= 1e-9 max(1, G(y)), non-negativity of
    G and its gradient, and choice probabilities that are non-negative and
    sum to 1 within 1e-12 with a strictly positive outside share.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = _rng(seed)
    model, m = inst.model, inst.m
    violations, worst = 0, 0.0
    for _ in range(trials):
        y = rng.uniform(0.0, 5.0, m)
        y[rng.random(m) < 0.2] = 0.0  # exercise closed locations too
        lam = float(rng.uniform(0.1, 10.0))
        g = model.value(y)
        dg = model.grad(y)
        p = model.probabilities(y)
        errs = [
            abs(model.value(lam * y) - lam * g) / max(1.0, lam * g) / 1e-9,
            abs(g - float((y * dg).sum())) / max(1.0, g) / 1e-9,
            abs(p.sum() - 1.0) / 1e-12,
            (0.0 if g >= 0.0 and np.all(dg >= 0.0) and np.all(p >= 0.0) and p[-1] > 0.0 else 2.0),
        ]
        err = max(errs)
        if err > 1.0:
            violations += 1
        worst = max(worst, err)
    return PropertyReport("cpgf-contracts", trials, violations, worst, seed)
