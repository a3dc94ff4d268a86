"""Captured-demand objective over demand zones, with fast incremental evaluation.

An :class:`Instance` holds demand zones, each with a weight ``q`` and a
competitor-normalized attraction vector over the ``m`` candidate locations.
Opening the subset ``S`` captures

    f(S) = sum_i q_i - sum_i q_i / (1 + G_i(y_i masked to S))

which is monotone increasing and submodular in ``S`` for every model in the
generating-function family.  The binary relaxation ``f(x)`` replaces the mask
with an elementwise product ``x * y`` and is differentiable; its gradient has
non-negative entries

    d_j = sum_i q_i * y_ij * dG_j(x * y_i) / (1 + G_i(x * y_i))^2

The module-level functions recompute everything from scratch and serve as the
reference semantics.  :class:`IncrementalEvaluator` keeps per-zone masked
sums cached so greedy sweeps and swap scans run without re-summing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .choice_models import ChoiceModel, MultinomialLogit, NestedLogit

__all__ = [
    "Zone",
    "Instance",
    "Solution",
    "mask",
    "objective",
    "objective_relaxed",
    "objective_gradient",
    "marginal_gain",
    "IncrementalEvaluator",
]

# Strict-improvement slack used by the solver when comparing objectives;
# avoids oscillation on floating-point ties.
IMPROVEMENT_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class Zone:
    """One demand zone: weight q > 0 and attraction per location (>= 0)."""

    q: float
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if not self.q > 0.0:
            raise ValueError(f"zone weight must be positive, got {self.q}")
        if self.y.ndim != 1:
            raise ValueError("zone attraction must be a 1-d vector")
        if np.any(self.y < 0.0) or not np.all(np.isfinite(self.y)):
            raise ValueError("zone attraction entries must be finite and non-negative")


class Instance:
    """Immutable problem data: zones plus a shared choice model.

    Zone data is stacked once into ``q`` (weights, shape ``(n_zones,)``) and
    ``Y`` (attractions, shape ``(n_zones, m)``) for vectorized evaluation.
    """

    def __init__(self, zones, model: ChoiceModel):
        zones = tuple(zones)
        if not zones:
            raise ValueError("instance needs at least one zone")
        m = zones[0].y.size
        if m < 1:
            raise ValueError("instance needs at least one location")
        for z in zones:
            if z.y.size != m:
                raise ValueError("all zones must price the same number of locations")
        model.check_dimension(m)
        self.zones = zones
        self.model = model
        self.m = m
        self.q = np.array([z.q for z in zones])
        self.Y = np.vstack([z.y for z in zones])
        self.total_demand = float(self.q.sum())

    @property
    def n_zones(self) -> int:
        return len(self.zones)

    def __repr__(self) -> str:
        return f"Instance(zones={self.n_zones}, m={self.m}, model={self.model!r})"


@dataclass(frozen=True)
class Solution:
    """A subset of opened locations (ascending indices) with its objective."""

    selected: tuple
    objective: float | None = None

    def __post_init__(self):
        sel = tuple(int(j) for j in self.selected)
        if any(b <= a for a, b in zip(sel, sel[1:])):
            raise ValueError("selected indices must be strictly increasing")
        if sel and sel[0] < 0:
            raise ValueError("selected indices must be non-negative")
        object.__setattr__(self, "selected", sel)


def _check_indices(selected, m: int) -> np.ndarray:
    idx = np.asarray(sorted(int(j) for j in selected), dtype=np.intp)
    if idx.size != len(set(idx.tolist())):
        raise ValueError("selected indices must be distinct")
    if idx.size and (idx[0] < 0 or idx[-1] >= m):
        raise ValueError(f"selected indices must lie in [0, {m})")
    return idx


def mask(y: np.ndarray, selected) -> np.ndarray:
    """Zero out every entry of ``y`` whose index is not in ``selected``."""
    y = np.asarray(y, dtype=float)
    idx = _check_indices(selected, y.size)
    out = np.zeros_like(y)
    out[idx] = y[idx]
    return out


def _indicator(selected, m: int) -> np.ndarray:
    x = np.zeros(m)
    x[_check_indices(selected, m)] = 1.0
    return x


def _objective_of_effective(inst: Instance, effective_rows: np.ndarray) -> float:
    g = inst.model.value_rows(effective_rows)
    return float(inst.total_demand - (inst.q / (1.0 + g)).sum())


def objective(inst: Instance, selected) -> float:
    """Captured demand f(S); f(empty set) is exactly 0."""
    return objective_relaxed(inst, _indicator(selected, inst.m))


def objective_relaxed(inst: Instance, x: np.ndarray) -> float:
    """Binary-relaxation objective f(x) for x in [0, 1]^m.

    On indicator vectors this coincides with :func:`objective` (same code
    path, so the agreement is exact).
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.m,):
        raise ValueError(f"x must have shape ({inst.m},), got {x.shape}")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("relaxation point entries must lie in [0, 1]")
    return _objective_of_effective(inst, inst.Y * x)


def objective_gradient(inst: Instance, x: np.ndarray) -> np.ndarray:
    """Gradient of the relaxed objective at x; entries are always >= 0."""
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.m,):
        raise ValueError(f"x must have shape ({inst.m},), got {x.shape}")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("relaxation point entries must lie in [0, 1]")
    effective = inst.Y * x
    g = inst.model.value_rows(effective)
    dg = inst.model.grad_rows(effective)
    weight = inst.q / (1.0 + g) ** 2
    return (inst.Y * dg * weight[:, None]).sum(axis=0)


def marginal_gain(inst: Instance, selected, j: int) -> float:
    """f(S + j) - f(S); strictly positive whenever location j attracts anyone."""
    idx = _check_indices(selected, inst.m)
    j = int(j)
    if j < 0 or j >= inst.m:
        raise ValueError(f"location index {j} out of range [0, {inst.m})")
    if j in set(idx.tolist()):
        raise ValueError(f"location {j} already selected")
    return objective(inst, list(idx) + [j]) - objective(inst, idx)


class IncrementalEvaluator:
    """Cached per-zone masked sums for one solver run.

    Holds the current selection's per-zone generating-function values (and,
    for nested models, per-nest power sums) so that candidate additions and
    single swaps can be priced with one vectorized pass instead of a full
    re-evaluation.  State belongs to a single run; it is not shared across
    threads.  ``reset`` rebuilds the cache from scratch after every accepted
    move, which keeps drift out of the accepted trajectory.
    """

    def __init__(self, inst: Instance):
        self.inst = inst
        self.model = inst.model
        self.Y = inst.Y
        self.q = inst.q
        self.m = inst.m
        self._nested = isinstance(inst.model, NestedLogit)
        if self._nested:
            model = inst.model
            self._mu = model.mu
            self._nest_cols = model.nest_cols
            self._nest_of = model.nest_of
            # attraction raised to its nest's exponent, precomputed per column
            self._Yp = self.Y ** self._mu[self._nest_of][None, :]
        elif not isinstance(inst.model, MultinomialLogit):
            raise TypeError("incremental evaluation supports the bundled models only")
        self.reset(())

    # -- state ---------------------------------------------------------------

    def reset(self, selected) -> None:
        """Rebuild cached sums from scratch for the given selection."""
        idx = _check_indices(selected, self.m)
        self.selected = tuple(idx.tolist())
        self._in = np.zeros(self.m, dtype=bool)
        self._in[idx] = True
        if self._nested:
            n, L = self.Y.shape[0], self._mu.size
            self._T = np.zeros((n, L))
            self._V = np.zeros((n, L))
            for l, cols in enumerate(self._nest_cols):
                chosen = cols[self._in[cols]]
                if chosen.size:
                    self._T[:, l] = self._Yp[:, chosen].sum(axis=1)
                    self._V[:, l] = self._T[:, l] ** (1.0 / self._mu[l])
            self._G = self._V.sum(axis=1)
        else:
            if idx.size:
                self._G = self.Y[:, idx].sum(axis=1)
            else:
                self._G = np.zeros(self.Y.shape[0])

    def current_objective(self) -> float:
        return float(self.inst.total_demand - (self.q / (1.0 + self._G)).sum())

    # -- candidate pricing ---------------------------------------------------

    def _objective_from_g(self, g_rows: np.ndarray) -> np.ndarray:
        """Objective for a batch of per-zone G columns, shape (n_zones, k)."""
        # entries at to-be-masked positions may be junk (e.g. G minus an
        # unselected column); suppress the exact-zero-denominator warning
        with np.errstate(divide="ignore"):
            return self.inst.total_demand - (self.q[:, None] / (1.0 + g_rows)).sum(axis=0)

    def objectives_with_additions(self) -> np.ndarray:
        """f(S + j) for every location j; -inf at already-selected entries."""
        if self._nested:
            g_new = np.empty_like(self.Y)
            for l, cols in enumerate(self._nest_cols):
                grown = np.maximum(self._T[:, l][:, None] + self._Yp[:, cols], 0.0)
                g_new[:, cols] = (self._G - self._V[:, l])[:, None] + grown ** (1.0 / self._mu[l])
        else:
            g_new = self._G[:, None] + self.Y
        vals = self._objective_from_g(g_new)
        vals[self._in] = -np.inf
        return vals

    def objectives_with_swap(self, j_out: int) -> np.ndarray:
        """f(S - j_out + t) for every t outside S; -inf at selected entries."""
        if not self._in[j_out]:
            raise ValueError(f"location {j_out} is not selected")
        if self._nested:
            lo = int(self._nest_of[j_out])
            t_removed = np.maximum(self._T[:, lo] - self._Yp[:, j_out], 0.0)
            g_base = self._G - self._V[:, lo] + t_removed ** (1.0 / self._mu[lo])
            g_new = np.empty_like(self.Y)
            for l, cols in enumerate(self._nest_cols):
                nest_sum = t_removed if l == lo else self._T[:, l]
                nest_val = nest_sum ** (1.0 / self._mu[l])
                grown = np.maximum(nest_sum[:, None] + self._Yp[:, cols], 0.0)
                g_new[:, cols] = (g_base - nest_val)[:, None] + grown ** (1.0 / self._mu[l])
        else:
            g_base = self._G - self.Y[:, j_out]
            g_new = g_base[:, None] + self.Y
        vals = self._objective_from_g(g_new)
        vals[self._in] = -np.inf
        return vals

    def objectives_with_removals(self) -> np.ndarray:
        """f(S - j) for every selected j; +inf at unselected entries."""
        if self._nested:
            g_new = np.empty_like(self.Y)
            for l, cols in enumerate(self._nest_cols):
                shrunk = np.maximum(self._T[:, l][:, None] - self._Yp[:, cols], 0.0)
                g_new[:, cols] = (self._G - self._V[:, l])[:, None] + shrunk ** (1.0 / self._mu[l])
        else:
            g_new = self._G[:, None] - self.Y
        vals = self._objective_from_g(g_new)
        vals[~self._in] = np.inf
        return vals

    # -- local-search coefficients --------------------------------------------

    def coefficients(self, mode: str = "gradient") -> np.ndarray:
        """Linear-model coefficients d_j at the current selection's indicator.

        ``gradient`` is the relaxation gradient evaluated at the binary point:
        for nested models with mu > 1 this assigns 0 to unselected locations
        whose nest already holds a selected one (the true one-sided
        derivative) and 1 to members of empty nests (directional limit).
        ``marginal`` prices j outside S by f(S + j) - f(S) and j inside S by
        f(S) - f(S - j) instead.
        """
        if mode == "marginal":
            f_cur = self.current_objective()
            d = np.empty(self.m)
            adds = self.objectives_with_additions()
            rems = self.objectives_with_removals()
            d[~self._in] = adds[~self._in] - f_cur
            d[self._in] = f_cur - rems[self._in]
            # monotonicity makes these non-negative; clip the last-ulp rounding
            return np.maximum(d, 0.0)
        if mode != "gradient":
            raise ValueError(f"unknown coefficient mode {mode!r}")
        weight = self.q / (1.0 + self._G) ** 2
        if not self._nested:
            return weight @ self.Y
        d = np.empty(self.m)
        for l, cols in enumerate(self._nest_cols):
            mu_l = self._mu[l]
            if mu_l == 1.0:
                d[cols] = weight @ self.Y[:, cols]
                continue
            s = self._T[:, l]
            live = s > 0.0
            outer = np.ones_like(s)
            outer[live] = s[live] ** (1.0 / mu_l - 1.0)
            for j in cols:
                if self._in[j]:
                    dg = np.where(live, self.Y[:, j] ** (mu_l - 1.0) * outer, 1.0)
                else:
                    dg = np.where(live, 0.0, 1.0)
                d[j] = weight @ (self.Y[:, j] * dg)
        return d
