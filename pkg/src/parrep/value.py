"""Exact optimal values by exhaustive enumeration of deterministic strategies.

The search enumerates the answer maps of all players but the last as a
mixed-radix counter (player-major, question-major, first digit most
significant) and completes each prefix with the per-question optimal answers
of the last player, which is exact.  Reported values always equal the win
probability of the returned strategy; ties resolve to the first maximizer in
lexicographic enumeration order.

A greedy local search with restarts is provided for instances above the
exhaustive cap; its result is a realized strategy's win probability, hence a
lower bound, and is labeled ``exact=False``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .games import Game, Strategy
from .transforms import CapExceededError, RestrictionFilter, admits_any, repeat

DEFAULT_MAX_STRATEGY_PROFILES = 10**8
# Guard on the materialized (question tuple) x (answer tuple) win table.
MAX_WIN_TABLE_ENTRIES = 2 * 10**7


@dataclass(frozen=True)
class ValueReport:
    value: float
    argmax_strategy: Strategy | None
    strategies_searched: int
    exact: bool
    admitted_count: int | None = None


@dataclass(frozen=True)
class _GameArrays:
    q_sizes: np.ndarray      # int64[N]
    a_sizes: np.ndarray      # int64[N]
    pi: np.ndarray           # float64[JQ], lexicographic order
    win: np.ndarray          # uint8[JQ, JA]
    q_of: np.ndarray         # int64[JQ, N], per-player question index
    a_strides: np.ndarray    # int64[N], answer strides in the joint index


def profile_count(g: Game) -> int:
    """Number of deterministic strategy profiles of the game."""
    total = 1
    for q_alph, a_alph in zip(g.question_alphabets, g.answer_alphabets):
        total *= len(a_alph) ** len(q_alph)
    return total


def game_arrays(g: Game) -> _GameArrays:
    n = g.n_players
    q_sizes = np.array([len(a) for a in g.question_alphabets], dtype=np.int64)
    a_sizes = np.array([len(a) for a in g.answer_alphabets], dtype=np.int64)
    jq = int(np.prod(q_sizes))
    ja = int(np.prod(a_sizes))
    if jq * ja > MAX_WIN_TABLE_ENTRIES:
        raise CapExceededError(
            f"win table needs {jq * ja} entries (cap {MAX_WIN_TABLE_ENTRIES})"
        )
    pi = np.asarray(g.question_dist.probs, dtype=np.float64)

    q_of = np.empty((jq, n), dtype=np.int64)
    for idx, combo in enumerate(itertools.product(*(range(s) for s in q_sizes))):
        q_of[idx] = combo

    win = np.zeros((jq, ja), dtype=np.uint8)
    q_tuples = list(g.question_tuples())
    a_tuples = list(g.answer_tuples())
    for qi, q in enumerate(q_tuples):
        row = win[qi]
        for ai, a in enumerate(a_tuples):
            if g.predicate.wins(q, a):
                row[ai] = 1

    a_strides = np.empty(n, dtype=np.int64)
    a_strides[n - 1] = 1
    for i in range(n - 2, -1, -1):
        a_strides[i] = a_strides[i + 1] * a_sizes[i + 1]
    return _GameArrays(q_sizes, a_sizes, pi, win, q_of, a_strides)


def _digit_layout(arrays: _GameArrays, players: range) -> tuple[np.ndarray, np.ndarray]:
    """Mixed-radix layout over the given players' (question -> answer) digits."""
    opts = []
    offsets = []
    off = 0
    for i in players:
        offsets.append(off)
        opts.extend([int(arrays.a_sizes[i])] * int(arrays.q_sizes[i]))
        off += int(arrays.q_sizes[i])
    return np.array(opts, dtype=np.int64), np.array(offsets, dtype=np.int64)


def _strategy_from_digits(g: Game, digits: np.ndarray) -> Strategy:
    maps = []
    pos = 0
    for q_alph, a_alph in zip(g.question_alphabets, g.answer_alphabets):
        maps.append({q: a_alph[int(digits[pos + k])] for k, q in enumerate(q_alph)})
        pos += len(q_alph)
    return Strategy(tuple(maps))


def _digits_from_strategy(g: Game, s: Strategy) -> np.ndarray:
    digits = []
    for q_alph, a_alph, m in zip(g.question_alphabets, g.answer_alphabets, s.answer_maps):
        for q in q_alph:
            digits.append(a_alph.index(m[q]))
    return np.array(digits, dtype=np.int64)


def _eval_digits(arrays: _GameArrays, dig_off_all: np.ndarray, digits: np.ndarray) -> float:
    ja = np.zeros(arrays.pi.shape[0], dtype=np.int64)
    for i in range(arrays.q_of.shape[1]):
        ja += digits[dig_off_all[i] + arrays.q_of[:, i]] * arrays.a_strides[i]
    return float(np.dot(arrays.pi, arrays.win[np.arange(arrays.pi.shape[0]), ja]))


def win_probability(g: Game, s: Strategy) -> float:
    """Exact winning probability of a deterministic strategy."""
    total = 0.0
    for q, p in zip(g.question_dist.support, g.question_dist.probs):
        if p != 0.0 and g.predicate.wins(q, s.answers(q)):
            total += p
    return total


@njit(cache=True, parallel=True)
def _search_prefix(opts, pi, win, q_of, a_strides, deep_off, group_start, group_jq,
                   nq_last, na_last, n_blocks):  # pragma: no cover - jit
    """Scan all prefix strategies; return per-block (best value, best leaf).

    The last level of answer maps (last player) is optimized per question.
    Partial win-mass tables are kept per deepest-prefix-player question so an
    odometer increment at digit c only refreshes the levels at or below c;
    every level is a fresh sum, so no floating-point drift accumulates.
    """
    n_dig = opts.shape[0]
    n_players = q_of.shape[1]
    jq_count = pi.shape[0]
    n_levels = group_start.shape[0] - 1

    total = np.int64(1)
    for d in range(n_dig):
        total *= opts[d]

    block_val = np.full(n_blocks, -1.0)
    block_leaf = np.full(n_blocks, -1, dtype=np.int64)

    for b in prange(n_blocks):
        lo = b * total // n_blocks
        hi = (b + 1) * total // n_blocks
        if lo >= hi:
            continue
        digits = np.zeros(n_dig, dtype=np.int64)
        rem = lo
        for d in range(n_dig - 1, -1, -1):
            digits[d] = rem % opts[d]
            rem //= opts[d]

        # levels[l+1] = levels[l] + win mass of the deepest player's question l
        levels = np.zeros((n_levels + 1, nq_last, na_last))
        refresh_from = 0

        best_v = -1.0
        best_leaf = np.int64(-1)
        leaf = lo
        while leaf < hi:
            for lvl in range(refresh_from, n_levels):
                for ql in range(nq_last):
                    for al in range(na_last):
                        levels[lvl + 1, ql, al] = levels[lvl, ql, al]
                for gi in range(group_start[lvl], group_start[lvl + 1]):
                    jq = group_jq[gi]
                    p = pi[jq]
                    if p == 0.0:
                        continue
                    ja_base = np.int64(0)
                    for i in range(n_players - 1):
                        ja_base += digits[deep_off[i] + q_of[jq, i]] * a_strides[i]
                    ql = q_of[jq, n_players - 1]
                    for al in range(na_last):
                        levels[lvl + 1, ql, al] += p * win[jq, ja_base + al]

            v = 0.0
            for ql in range(nq_last):
                m = levels[n_levels, ql, 0]
                for al in range(1, na_last):
                    if levels[n_levels, ql, al] > m:
                        m = levels[n_levels, ql, al]
                v += m
            if v > best_v:
                best_v = v
                best_leaf = leaf

            # odometer increment; find the most significant changed digit
            c = n_dig - 1
            while c >= 0:
                digits[c] += 1
                if digits[c] < opts[c]:
                    break
                digits[c] = 0
                c -= 1
            deep_first = deep_off[n_players - 2]
            if c < deep_first:
                refresh_from = 0
            else:
                refresh_from = c - deep_first
            leaf += 1

        block_val[b] = best_v
        block_leaf[b] = best_leaf

    return block_val, block_leaf


def _last_player_groups(arrays: _GameArrays) -> tuple[np.ndarray, np.ndarray]:
    """Joint-question indices grouped by the deepest prefix player's question."""
    n = arrays.q_of.shape[1]
    deep = n - 2
    n_levels = int(arrays.q_sizes[deep])
    buckets: list[list[int]] = [[] for _ in range(n_levels)]
    for jq in range(arrays.q_of.shape[0]):
        buckets[int(arrays.q_of[jq, deep])].append(jq)
    group_start = np.zeros(n_levels + 1, dtype=np.int64)
    flat: list[int] = []
    for lvl, bucket in enumerate(buckets):
        flat.extend(bucket)
        group_start[lvl + 1] = len(flat)
    return group_start, np.array(flat, dtype=np.int64)


def _complete_last_player(g: Game, arrays: _GameArrays, prefix_digits: np.ndarray) -> np.ndarray:
    """Lex-first optimal answer digits of the last player for a fixed prefix."""
    n = g.n_players
    nq_last = int(arrays.q_sizes[n - 1])
    na_last = int(arrays.a_sizes[n - 1])
    deep_offs = np.zeros(n, dtype=np.int64)
    for i in range(1, n):
        deep_offs[i] = deep_offs[i - 1] + arrays.q_sizes[i - 1]
    m = np.zeros((nq_last, na_last))
    for jq in range(arrays.pi.shape[0]):
        p = arrays.pi[jq]
        if p == 0.0:
            continue
        ja_base = 0
        for i in range(n - 1):
            ja_base += int(prefix_digits[deep_offs[i] + arrays.q_of[jq, i]]) * int(arrays.a_strides[i])
        ql = int(arrays.q_of[jq, n - 1])
        for al in range(na_last):
            m[ql, al] += p * arrays.win[jq, ja_base + al]
    best = np.zeros(nq_last, dtype=np.int64)
    for ql in range(nq_last):
        best[ql] = int(np.argmax(m[ql]))  # argmax keeps the first maximizer
    return best


def optimal_value(g: Game, max_profiles: int | None = DEFAULT_MAX_STRATEGY_PROFILES) -> ValueReport:
    """Exact optimal (classical) value of the game over deterministic strategies."""
    total = profile_count(g)
    if max_profiles is not None and total > max_profiles:
        raise CapExceededError(
            f"{total} strategy profiles exceed the exhaustive cap {max_profiles}"
        )
    arrays = game_arrays(g)
    n = g.n_players

    if n == 1:
        nq, na = int(arrays.q_sizes[0]), int(arrays.a_sizes[0])
        digits = np.zeros(nq, dtype=np.int64)
        for ql in range(nq):
            row = [arrays.pi[ql] * arrays.win[ql, al] for al in range(na)]
            digits[ql] = int(np.argmax(row))
        strat = _strategy_from_digits(g, digits)
        return ValueReport(win_probability(g, strat), strat, total, True)

    opts, deep_off = _digit_layout(arrays, range(n - 1))
    group_start, group_jq = _last_player_groups(arrays)
    prefix_total = 1
    for o in opts:
        prefix_total *= int(o)
    if prefix_total >= 2**62:
        raise CapExceededError("prefix strategy space exceeds the 64-bit counter range")
    n_blocks = min(prefix_total, 64)
    block_val, block_leaf = _search_prefix(
        opts, arrays.pi, arrays.win, arrays.q_of, arrays.a_strides,
        deep_off, group_start, group_jq,
        int(arrays.q_sizes[n - 1]), int(arrays.a_sizes[n - 1]), n_blocks,
    )
    best_b = 0
    for b in range(1, n_blocks):
        if block_leaf[b] >= 0 and (block_leaf[best_b] < 0 or block_val[b] > block_val[best_b]):
            best_b = b
    leaf = int(block_leaf[best_b])

    prefix_digits = np.zeros(opts.shape[0], dtype=np.int64)
    rem = leaf
    for d in range(opts.shape[0] - 1, -1, -1):
        prefix_digits[d] = rem % opts[d]
        rem //= opts[d]
    last_digits = _complete_last_player(g, arrays, prefix_digits)
    strat = _strategy_from_digits(g, np.concatenate([prefix_digits, last_digits]))
    return ValueReport(win_probability(g, strat), strat, total, True)


def iter_strategies(g: Game):
    """All deterministic strategies in canonical lexicographic order."""
    digit_ranges = []
    for q_alph, a_alph in zip(g.question_alphabets, g.answer_alphabets):
        digit_ranges.extend([range(len(a_alph))] * len(q_alph))
    for combo in itertools.product(*digit_ranges):
        yield _strategy_from_digits(g, np.array(combo, dtype=np.int64))


def restricted_value(
    g: Game,
    filters: list[RestrictionFilter],
    max_profiles: int | None = DEFAULT_MAX_STRATEGY_PROFILES,
) -> ValueReport:
    """Maximum win probability over the strategies admitted by the filters.

    Admission is disjunctive over a non-empty filter list; an empty list
    admits every strategy.  With no admitted strategy the value is 0 and the
    argmax is the empty sentinel (None).
    """
    total = profile_count(g)
    if max_profiles is not None and total > max_profiles:
        raise CapExceededError(
            f"{total} strategy profiles exceed the exhaustive cap {max_profiles}"
        )
    arrays = game_arrays(g)
    dig_off_all = np.zeros(g.n_players, dtype=np.int64)
    for i in range(1, g.n_players):
        dig_off_all[i] = dig_off_all[i - 1] + arrays.q_sizes[i - 1]

    best_val = -1.0
    best_strat = None
    admitted = 0
    for s in iter_strategies(g):
        if not admits_any(filters, s, g):
            continue
        admitted += 1
        v = _eval_digits(arrays, dig_off_all, _digits_from_strategy(g, s))
        if v > best_val:
            best_val = v
            best_strat = s
    if best_strat is None:
        return ValueReport(0.0, None, total, True, admitted_count=0)
    return ValueReport(best_val, best_strat, total, True, admitted_count=admitted)


def repeated_value(
    g: Game,
    n: int,
    max_profiles: int | None = DEFAULT_MAX_STRATEGY_PROFILES,
    max_joint_tuples: int | None = None,
) -> ValueReport:
    """Exact optimal value of the n-fold parallel repetition."""
    kwargs = {} if max_joint_tuples is None else {"max_joint_tuples": max_joint_tuples}
    return optimal_value(repeat(g, n, **kwargs), max_profiles=max_profiles)


def local_search_value(g: Game, seed: int = 0, iterations: int = 1000) -> ValueReport:
    """Greedy single-flip hill climbing with restarts; a seeded lower bound.

    The returned value is the win probability of a realized strategy, so it
    never exceeds the exhaustive optimum.  ``iterations`` caps the number of
    strategy evaluations; the result is deterministic given the seed.
    """
    arrays = game_arrays(g)
    rng = np.random.default_rng(seed)
    opts, _ = _digit_layout(arrays, range(g.n_players))
    dig_off_all = np.zeros(g.n_players, dtype=np.int64)
    for i in range(1, g.n_players):
        dig_off_all[i] = dig_off_all[i - 1] + arrays.q_sizes[i - 1]

    evals = 0
    best_val = -1.0
    best_digits = None
    while evals < iterations:
        digits = np.array([rng.integers(0, o) for o in opts], dtype=np.int64)
        val = _eval_digits(arrays, dig_off_all, digits)
        evals += 1
        improved = True
        while improved and evals < iterations:
            improved = False
            for d in range(opts.shape[0]):
                current = digits[d]
                for a in range(opts[d]):
                    if a == current or evals >= iterations:
                        continue
                    digits[d] = a
                    v = _eval_digits(arrays, dig_off_all, digits)
                    evals += 1
                    if v > val:
                        val = v
                        current = a
                        improved = True
                digits[d] = current
        if val > best_val:
            best_val = val
            best_digits = digits.copy()

    strat = _strategy_from_digits(g, best_digits)
    return ValueReport(best_val, strat, evals, False)
