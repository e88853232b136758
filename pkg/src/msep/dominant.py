"""Exact solver for absolute dominant costs and cost generation from preference orders."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

import numpy as np

from .errors import PreconditionError
from .msp_core import (
    STAR,
    MspInstance,
    PartialAssignment,
    consistency_one_star,
    consistency_zero_star,
)

__all__ = [
    "PreferenceSpec",
    "is_absolute_dominant",
    "costs_from_preference",
    "instance_from_preference",
    "solve_dominant",
    "DominantResult",
]


@dataclass(frozen=True)
class PreferenceSpec:
    """Strict priority order over variables plus the attractive subset.

    Variables are ("n", v) for nodes and ("i", k) for interaction index k.
    """

    order: tuple
    attractive: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if len(set(self.order)) != len(self.order):
            raise PreconditionError("preference order must not repeat variables")
        if not set(self.attractive) <= set(self.order):
            raise PreconditionError("attractive set must be a subset of the ordered variables")


def _all_costs(instance: MspInstance) -> list[float]:
    return instance.node_costs.tolist() + instance.ic.tolist()


def is_absolute_dominant(instance_or_costs) -> bool:
    """Every |c_g| must exceed the exact sum of all strictly smaller magnitudes."""
    costs = _all_costs(instance_or_costs) if isinstance(instance_or_costs, MspInstance) else list(instance_or_costs)
    mags = sorted((abs(Fraction(c)) for c in costs))
    below = Fraction(0)  # sum of magnitudes strictly below the current group
    i = 0
    while i < len(mags):
        j = i
        while j < len(mags) and mags[j] == mags[i]:
            j += 1
        if not mags[i] > below:
            return False
        below += mags[i] * (j - i)
        i = j
    return True


def costs_from_preference(spec: PreferenceSpec) -> dict:
    """Map g_i to +2^(n-i) when attractive and -2^(n-i) otherwise (1-based i)."""
    n = len(spec.order)
    if n > 52:
        raise PreconditionError("at most 52 variables keep 2^(n-i) exact in double precision")
    return {g: (1.0 if g in spec.attractive else -1.0) * 2.0 ** (n - 1 - i) for i, g in enumerate(spec.order)}


def instance_from_preference(instance: MspInstance, spec: PreferenceSpec) -> MspInstance:
    """Copy of `instance` whose costs come from the preference spec."""
    costs = costs_from_preference(spec)
    expect = {("n", v) for v in range(instance.node_count)} | {("i", k) for k in range(instance.interaction_count)}
    if set(costs) != expect:
        raise PreconditionError("preference order must enumerate every node and interaction")
    nc = np.array([costs[("n", v)] for v in range(instance.node_count)])
    ic = np.array([costs[("i", k)] for k in range(instance.interaction_count)])
    return instance.with_costs(nc, ic)


@dataclass
class DominantResult:
    separator: frozenset
    regime: str  # "zero_star" or "one_star"
    checks: int
    revoked: list


def solve_dominant(instance: MspInstance) -> DominantResult:
    """Optimal separator for absolute dominant costs in the two tractable regimes.

    Variables are fixed in order of decreasing |c|; equal nonzero magnitudes
    are rejected. An assignment that makes the partial labeling inconsistent
    is revoked; the opposite value is then implied for every extension.
    """
    if not is_absolute_dominant(instance):
        raise PreconditionError("costs are not absolute dominant")
    mags = [abs(c) for c in _all_costs(instance) if c != 0]
    if len(set(mags)) != len(mags):
        # equal magnitudes are dominant by definition but leave the order ambiguous
        raise PreconditionError("costs with equal magnitude do not define a strict preference order")
    ic = instance.ic
    outside = ~instance.interaction_is_edge()
    if np.all(ic >= 0):
        regime, decide = "zero_star", consistency_zero_star
    elif np.all(ic[outside] <= 0):
        regime, decide = "one_star", consistency_one_star
    else:
        raise PreconditionError(
            "need c_f >= 0 on all interactions or c_f <= 0 on interactions outside E"
        )

    n, k = instance.node_count, instance.interaction_count
    variables = [("n", v, float(c)) for v, c in enumerate(instance.node_costs.tolist())]
    variables += [("i", j, float(c)) for j, c in enumerate(ic.tolist())]
    order = sorted(variables, key=lambda t: -abs(t[2]))

    x = PartialAssignment.all_star(instance)
    final_nodes = np.zeros(n, dtype=np.int8)
    checks = 0
    revoked = []
    for kind, idx, c in order:
        want = 0 if c >= 0 else 1
        arr = x.node_labels if kind == "n" else x.interaction_labels
        arr[idx] = want
        checks += 1
        if decide(instance, x):
            value = want
        else:
            arr[idx] = STAR
            value = 1 - want
            revoked.append((kind, idx))
        if kind == "n":
            final_nodes[idx] = value
    S = frozenset(np.flatnonzero(final_nodes).tolist())
    return DominantResult(S, regime, checks, revoked)
