"""Game-to-game transforms: anchoring, parallel repetition, restrictions.

The anchoring transform adds a reserved anchor question per player, delivered
independently with probability alpha, and awards the win outright whenever
any player holds the anchor.  Parallel repetition plays n independent rounds
simultaneously and requires a win in every round.  Repeated-game predicates
are evaluated lazily per tuple; no exponential table is materialized.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .games import ANCHOR, Distribution, Game, Predicate, Strategy, ValidationError
from .oracle import entropy

DEFAULT_MAX_JOINT_TUPLES = 10**6

# Separator used to encode per-round question/answer components of a repeated
# game as single symbols, so repeated games serialize with the ordinary format.
ROUND_SEP = "|"


class CapExceededError(RuntimeError):
    """A desk-scale resource cap was exceeded (not a math error)."""


@dataclass(frozen=True)
class CoordinateSet:
    """Subset of repetition coordinates, used to condition win events."""

    indices: frozenset[int]

    @staticmethod
    def of(indices: Iterable[int]) -> "CoordinateSet":
        return CoordinateSet(frozenset(int(i) for i in indices))


@dataclass(frozen=True)
class RestrictionFilter:
    """Strategy admission gate.

    Kinds:
      * ``none`` admits everything.
      * ``entropy_floor`` compares the Shannon entropy (bits) of the round-j
        joint question distribution against ``delta``.  This depends only on
        the referee distribution, so it acts as a per-game gate.
      * ``predicate`` delegates to an arbitrary callback over the strategy.
    """

    kind: str
    round_index: int = 0
    delta: float = 0.0
    strategy_pred: Callable[[Strategy], bool] | None = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("none", "entropy_floor", "predicate"):
            raise ValidationError(f"unknown restriction kind {self.kind!r}")
        if self.kind == "entropy_floor":
            if self.delta < 0:
                raise ValidationError("entropy floor must be nonnegative")
            if self.round_index < 0:
                raise ValidationError("round index must be nonnegative")
        if self.kind == "predicate" and self.strategy_pred is None:
            raise ValidationError("predicate restriction needs a callback")


def no_restriction() -> RestrictionFilter:
    return RestrictionFilter(kind="none", label="none")


def entropy_floor(round_index: int, delta: float) -> RestrictionFilter:
    return RestrictionFilter(
        kind="entropy_floor",
        round_index=round_index,
        delta=delta,
        label=f"entropy>={delta!r}@{round_index}",
    )


def strategy_filter(pred: Callable[[Strategy], bool], label: str = "predicate") -> RestrictionFilter:
    return RestrictionFilter(kind="predicate", strategy_pred=pred, label=label)


def const_answer_filter(player: int, answer: str) -> RestrictionFilter:
    """Admit strategies where ``player`` answers ``answer`` on every question."""

    def pred(s: Strategy) -> bool:
        return all(v == answer for v in s.answer_maps[player].values())

    return strategy_filter(pred, label=f"const:{player}={answer}")


@dataclass(frozen=True)
class RepeatedGame(Game):
    """Game produced by ``repeat``; remembers the base game and round count."""

    base: Game = None  # type: ignore[assignment]
    rounds: int = 0

    def round_slice(self, joined: tuple[str, ...], r: int) -> tuple[str, ...]:
        return tuple(sym.split(ROUND_SEP)[r] for sym in joined)


def anchor(g: Game, alpha: float) -> Game:
    """Alpha-anchored expansion of ``g``.

    Each player's question alphabet gains the anchor symbol; the referee
    independently replaces each player's question by the anchor with
    probability alpha, and any anchored player wins the round outright.
    The probability of a tuple whose anchored set is S and whose visible
    part is q is alpha^|S| (1-alpha)^(N-|S|) times the marginal of the
    original distribution on the visible coordinates.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha must satisfy 0 < alpha < 1")
    for i, alph in enumerate(g.question_alphabets):
        if ANCHOR in alph:
            raise ValidationError(f"anchor symbol already present in questions of player {i}")

    n = g.n_players
    new_alphabets = tuple(tuple(a) + (ANCHOR,) for a in g.question_alphabets)
    support = tuple(itertools.product(*new_alphabets))

    # Marginals of the base distribution on each visible coordinate subset.
    marg_cache: dict[frozenset, dict[tuple[str, ...], float]] = {}

    def visible_marginal(visible: tuple[int, ...]) -> dict[tuple[str, ...], float]:
        key = frozenset(visible)
        if key not in marg_cache:
            acc: dict[tuple[str, ...], float] = {}
            for q, p in zip(g.question_dist.support, g.question_dist.probs):
                sub = tuple(q[i] for i in visible)
                acc[sub] = acc.get(sub, 0.0) + p
            marg_cache[key] = acc
        return marg_cache[key]

    probs = []
    for q in support:
        anchored = [i for i in range(n) if q[i] == ANCHOR]
        visible = tuple(i for i in range(n) if q[i] not in (ANCHOR,))
        weight = alpha ** len(anchored) * (1.0 - alpha) ** (n - len(anchored))
        if visible:
            weight *= visible_marginal(visible).get(tuple(q[i] for i in visible), 0.0)
        probs.append(weight)

    base_pred = g.predicate

    def wins(q: tuple[str, ...], a: tuple[str, ...]) -> bool:
        if any(sym == ANCHOR for sym in q):
            return True
        return base_pred.wins(q, a)

    return Game(
        n_players=n,
        question_alphabets=new_alphabets,
        answer_alphabets=g.answer_alphabets,
        question_dist=Distribution(support, tuple(probs)),
        predicate=Predicate(wins, "anchored"),
    )


def repeat(g: Game, n: int, max_joint_tuples: int = DEFAULT_MAX_JOINT_TUPLES) -> RepeatedGame:
    """n-fold parallel repetition: n independent rounds, win them all."""
    if n < 1:
        raise ValidationError("repetition count must be >= 1")
    joint = 1
    for alph in g.question_alphabets:
        joint *= len(alph) ** n
    if joint > max_joint_tuples:
        raise CapExceededError(
            f"repeat(g, {n}) needs {joint} joint question tuples (cap {max_joint_tuples})"
        )
    for alph in itertools.chain(g.question_alphabets, g.answer_alphabets):
        for sym in alph:
            if ROUND_SEP in sym:
                raise ValidationError(f"symbol {sym!r} contains the round separator {ROUND_SEP!r}")

    def lift(alph: Sequence[str]) -> tuple[str, ...]:
        return tuple(ROUND_SEP.join(c) for c in itertools.product(alph, repeat=n))

    q_alph = tuple(lift(a) for a in g.question_alphabets)
    a_alph = tuple(lift(a) for a in g.answer_alphabets)

    base_prob = {q: p for q, p in zip(g.question_dist.support, g.question_dist.probs)}
    support = tuple(itertools.product(*q_alph))
    probs = []
    for q in support:
        parts = [sym.split(ROUND_SEP) for sym in q]
        p = 1.0
        for r in range(n):
            p *= base_prob[tuple(parts[i][r] for i in range(g.n_players))]
        probs.append(p)

    base_pred = g.predicate

    def wins(q: tuple[str, ...], a: tuple[str, ...]) -> bool:
        q_parts = [sym.split(ROUND_SEP) for sym in q]
        a_parts = [sym.split(ROUND_SEP) for sym in a]
        for r in range(n):
            qr = tuple(q_parts[i][r] for i in range(len(q)))
            ar = tuple(a_parts[i][r] for i in range(len(a)))
            if not base_pred.wins(qr, ar):
                return False
        return True

    return RepeatedGame(
        n_players=g.n_players,
        question_alphabets=q_alph,
        answer_alphabets=a_alph,
        question_dist=Distribution(support, tuple(probs)),
        predicate=Predicate(wins, f"repeat-{n}"),
        base=g,
        rounds=n,
    )


def conditional_win_prob(g_rep: RepeatedGame, s: Strategy, coords: CoordinateSet) -> float:
    """P[win every round | win every round in ``coords``], exactly.

    Raises if the conditioning event has probability zero.
    """
    if not isinstance(g_rep, RepeatedGame):
        raise ValidationError("conditional_win_prob needs a game produced by repeat()")
    n = g_rep.rounds
    bad = [i for i in coords.indices if not 0 <= i < n]
    if bad:
        raise ValidationError(f"coordinates {bad} out of range for {n} rounds")

    base_pred = g_rep.base.predicate
    num = 0.0
    den = 0.0
    for q, p in zip(g_rep.question_dist.support, g_rep.question_dist.probs):
        if p == 0.0:
            continue
        a = s.answers(q)
        q_parts = [sym.split(ROUND_SEP) for sym in q]
        a_parts = [sym.split(ROUND_SEP) for sym in a]
        round_win = []
        for r in range(n):
            qr = tuple(q_parts[i][r] for i in range(len(q)))
            ar = tuple(a_parts[i][r] for i in range(len(a)))
            round_win.append(base_pred.wins(qr, ar))
        if all(round_win[i] for i in coords.indices):
            den += p
            if all(round_win):
                num += p
    if den == 0.0:
        raise ValidationError("conditioning event has probability zero")
    if num == den:
        return 1.0
    return num / den


def round_question_dist(g: Game, round_index: int) -> Distribution:
    """Joint question distribution of one round (rounds are i.i.d.)."""
    if isinstance(g, RepeatedGame):
        if not 0 <= round_index < g.rounds:
            raise ValidationError(f"round index {round_index} out of range for {g.rounds} rounds")
        return g.base.question_dist
    if round_index != 0:
        raise ValidationError("round index out of range for an unrepeated game")
    return g.question_dist


def admits(filt: RestrictionFilter, s: Strategy, g: Game) -> bool:
    """Whether the strategy passes one restriction for this game."""
    if filt.kind == "none":
        return True
    if filt.kind == "predicate":
        return bool(filt.strategy_pred(s))
    # entropy_floor: a gate on the referee's round distribution.
    h = entropy(round_question_dist(g, filt.round_index)).shannon_bits
    return h >= filt.delta


def admits_any(filters: Sequence[RestrictionFilter], s: Strategy, g: Game) -> bool:
    """Disjunctive reading: an empty list admits all, otherwise any one gate suffices."""
    if not filters:
        return True
    return any(admits(f, s, g) for f in filters)
