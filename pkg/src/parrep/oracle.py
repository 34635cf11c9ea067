"""Exact brute-force expectations, entropies, and threshold sets.

Everything here enumerates finite question spaces directly and is the
ground truth the bound checkers are validated against.  Conditional and
nested expectations require product-form question distributions (the joint
measure factorizes into per-player marginals); correlated distributions are
rejected rather than silently approximated.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .games import Distribution, MuTable

PRODUCT_TOL = 1e-9


class NonProductDistribution(ValueError):
    """The joint question distribution does not factorize into marginals."""


class ShapeMismatch(ValueError):
    """Distribution support and mu-table alphabets disagree."""


@dataclass(frozen=True)
class EntropyReport:
    """Shannon entropy in bits plus the literal signed sum it negates.

    ``paper_signed`` keeps the un-negated sum of p*log2(p) so both sign
    conventions stay testable; ``shannon_bits`` is its exact negation.
    """

    shannon_bits: float
    paper_signed: float


@dataclass(frozen=True)
class ThresholdSet:
    """Questions of one player whose conditional expectation clears a floor."""

    player_index: int
    threshold: float
    members: tuple[str, ...]


def dist_to_array(mu: MuTable, dist: Distribution) -> np.ndarray:
    """Probabilities of ``dist`` reshaped to the mu-table axes.

    Requires the distribution support to be exactly the lexicographic
    product of the mu alphabets.
    """
    expected = tuple(itertools.product(*mu.alphabets))
    if dist.support != expected:
        raise ShapeMismatch("distribution support does not match mu alphabets")
    shape = tuple(len(a) for a in mu.alphabets)
    return np.asarray(dist.probs, dtype=float).reshape(shape)


def marginals_of(mu: MuTable, dist: Distribution) -> list[np.ndarray]:
    """Per-player marginals; raises unless ``dist`` is product-form."""
    joint = dist_to_array(mu, dist)
    n = mu.n_coords
    margs = []
    for i in range(n):
        axes = tuple(k for k in range(n) if k != i)
        margs.append(joint.sum(axis=axes) if axes else joint)
    product = margs[0]
    for m in margs[1:]:
        product = np.multiply.outer(product, m)
    if np.max(np.abs(product - joint)) > PRODUCT_TOL:
        raise NonProductDistribution("joint question distribution is not product-form")
    return margs


def expect(mu: MuTable, dist: Distribution) -> float:
    """Full expectation of the mu table under the joint distribution."""
    joint = dist_to_array(mu, dist)
    return float(np.sum(joint * mu.values))


def expect_inner(
    mu: MuTable,
    dist: Distribution,
    inner_players: Iterable[int],
    fixed: Mapping[int, str],
    margs: list[np.ndarray] | None = None,
) -> float:
    """Expectation over the inner players' marginals, outer coordinates fixed.

    ``fixed`` must assign a symbol to every coordinate not in
    ``inner_players``.  Precomputed marginals may be passed to skip the
    product-form check on repeated calls.
    """
    inner = frozenset(inner_players)
    n = mu.n_coords
    outer = [i for i in range(n) if i not in inner]
    missing = [i for i in outer if i not in fixed]
    if missing:
        raise ValueError(f"fixed tuple incomplete: coordinates {missing} unassigned")
    if margs is None:
        margs = marginals_of(mu, dist)

    slicer: list[object] = [0] * n
    for i in outer:
        slicer[i] = mu.alphabets[i].index(fixed[i])
    for i in inner:
        slicer[i] = slice(None)
    sub = mu.values[tuple(slicer)]
    if not inner:
        return float(sub)
    weight = None
    for i in sorted(inner):
        weight = margs[i] if weight is None else np.multiply.outer(weight, margs[i])
    return float(np.sum(weight * sub))


def nested_expect_subset(
    mu: MuTable,
    dist: Distribution,
    inner_players: Iterable[int],
    concave: Callable[[float], float],
    margs: list[np.ndarray] | None = None,
) -> float:
    """Outer expectation of ``concave`` applied to the inner expectation.

    The outer coordinates are the complement of ``inner_players``; the
    distribution must be product-form so both marginals are well defined.
    """
    inner = frozenset(inner_players)
    n = mu.n_coords
    outer = [i for i in range(n) if i not in inner]
    if margs is None:
        margs = marginals_of(mu, dist)
    total = 0.0
    for combo in itertools.product(*(range(len(mu.alphabets[i])) for i in outer)):
        p_outer = 1.0
        fixed = {}
        for coord, idx in zip(outer, combo):
            p_outer *= float(margs[coord][idx])
            fixed[coord] = mu.alphabets[coord][idx]
        total += p_outer * concave(expect_inner(mu, dist, inner, fixed, margs=margs))
    return total


def nested_expect(
    mu: MuTable,
    dist: Distribution,
    inner_player: int,
    concave: Callable[[float], float],
    margs: list[np.ndarray] | None = None,
) -> float:
    """Single inner player form: E_outer[ psi( E_{Q_i}[mu] ) ]."""
    return nested_expect_subset(mu, dist, (inner_player,), concave, margs=margs)


def entropy(dist: Distribution) -> EntropyReport:
    """Base-2 entropy of a distribution, with 0*log(0) taken as 0."""
    problems = dist.validate()
    if problems:
        raise ValueError("; ".join(problems))
    signed = 0.0
    for p in dist.probs:
        if p > 0.0:
            signed += p * math.log2(p)
    return EntropyReport(shannon_bits=-signed, paper_signed=signed)


def threshold_set(mu: MuTable, dist: Distribution, player: int, delta: float) -> ThresholdSet:
    """Questions of ``player`` whose all-other-players expectation is >= delta.

    Ties at exactly delta are included.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    inner = [i for i in range(mu.n_coords) if i != player]
    members = []
    for sym in mu.alphabets[player]:
        val = expect_inner(mu, dist, inner, {player: sym})
        if val >= delta:
            members.append(sym)
    return ThresholdSet(player_index=player, threshold=delta, members=tuple(members))
