"""Data model for multiplayer nonlocal games over finite alphabets.

A game is a referee question distribution over a product of finite question
alphabets, one answer alphabet per player, and a win predicate over
(question tuple, answer tuple) pairs.  All types are immutable after
construction and all operations here are pure, so values can be shared
freely between workers.

File formats (UTF-8 JSON):

* Game: object with "n_players", "questions" (list of per-player symbol
  lists), "answers", "pi" (list of {"q": [...], "p": decimal-string}) and
  "predicate" (list of {"q": [...], "a": [...], "win": bool}).  Predicate
  rows that are omitted default to win=false; pi rows that are omitted
  default to probability zero.
* MuTable: object with "questions" and "mu" (list of
  {"q": [...], "v": decimal-string}); omitted rows default to 0.0.

Probabilities travel as decimal strings so a save/load round trip is exact.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

# Reserved anchor question symbol; must not appear in ordinary alphabets
# handed to the anchoring transform.
ANCHOR = "⊥"

PROB_TOL = 1e-12


class GameFormatError(ValueError):
    """A game/mu/distribution file does not conform to the format."""


class ValidationError(ValueError):
    """A constructed object violates its invariants."""


@dataclass(frozen=True)
class Distribution:
    """Exact probability table over a finite outcome space.

    ``support`` is an ordered tuple of outcome tuples and ``probs`` the
    matching probabilities.  Ordering is lexicographic in the alphabets as
    listed, which keeps iteration and CSV output reproducible.
    """

    support: tuple[tuple[str, ...], ...]
    probs: tuple[float, ...]

    def validate(self) -> list[str]:
        problems = []
        if len(self.support) != len(self.probs):
            problems.append("support/probs length mismatch")
            return problems
        if len(set(self.support)) != len(self.support):
            problems.append("support entries not distinct")
        if any(p < 0 for p in self.probs):
            problems.append("negative probability")
        if abs(sum(self.probs) - 1.0) > PROB_TOL:
            problems.append("distribution not normalized")
        return problems

    def prob_of(self, outcome: tuple[str, ...]) -> float:
        try:
            return self.probs[self.support.index(outcome)]
        except ValueError:
            return 0.0

    def marginal(self, coords: Sequence[int]) -> "Distribution":
        """Marginal distribution on the given outcome coordinates."""
        coords = tuple(coords)
        acc: dict[tuple[str, ...], float] = {}
        order: list[tuple[str, ...]] = []
        for outcome, p in zip(self.support, self.probs):
            key = tuple(outcome[c] for c in coords)
            if key not in acc:
                acc[key] = 0.0
                order.append(key)
            acc[key] += p
        return Distribution(tuple(order), tuple(acc[k] for k in order))


def uniform_dist(alphabets: Sequence[Sequence[str]]) -> Distribution:
    """Uniform distribution over the lexicographic product of ``alphabets``."""
    if any(len(a) == 0 for a in alphabets):
        raise ValidationError("empty alphabet")
    support = tuple(itertools.product(*alphabets))
    p = 1.0 / len(support)
    return Distribution(support, (p,) * len(support))


def product_dist(
    alphabets: Sequence[Sequence[str]],
    marginals: Sequence[Sequence[float]],
) -> Distribution:
    """Product distribution with one marginal per coordinate."""
    if len(alphabets) != len(marginals):
        raise ValidationError("one marginal per alphabet required")
    for a, m in zip(alphabets, marginals):
        if len(a) != len(m):
            raise ValidationError("marginal length does not match alphabet")
        if abs(sum(m) - 1.0) > PROB_TOL or any(x < 0 for x in m):
            raise ValidationError("marginal is not a distribution")
    support = tuple(itertools.product(*alphabets))
    probs = []
    for combo in itertools.product(*(range(len(a)) for a in alphabets)):
        p = 1.0
        for coord, idx in enumerate(combo):
            p *= marginals[coord][idx]
        probs.append(p)
    return Distribution(support, tuple(probs))


class Predicate:
    """Total win predicate V(answers | questions).

    Backed either by an explicit set of winning rows (file-loaded games) or
    by a callable (transformed games evaluate lazily, no exponential table).
    """

    def __init__(
        self,
        fn: Callable[[tuple[str, ...], tuple[str, ...]], bool],
        description: str = "",
    ):
        self._fn = fn
        self.description = description

    def wins(self, questions: tuple[str, ...], answers: tuple[str, ...]) -> bool:
        return bool(self._fn(questions, answers))

    @staticmethod
    def from_win_set(win_rows: Iterable[tuple[tuple[str, ...], tuple[str, ...]]]) -> "Predicate":
        rows = frozenset((tuple(q), tuple(a)) for q, a in win_rows)
        return Predicate(lambda q, a: (q, a) in rows, "table")

    @staticmethod
    def always(win: bool) -> "Predicate":
        return Predicate(lambda q, a: win, f"always-{int(win)}")


@dataclass(frozen=True)
class Game:
    """An N-player one-round game (question alphabets, answers, pi, predicate)."""

    n_players: int
    question_alphabets: tuple[tuple[str, ...], ...]
    answer_alphabets: tuple[tuple[str, ...], ...]
    question_dist: Distribution
    predicate: Predicate

    def question_tuples(self) -> Iterable[tuple[str, ...]]:
        return itertools.product(*self.question_alphabets)

    def answer_tuples(self) -> Iterable[tuple[str, ...]]:
        return itertools.product(*self.answer_alphabets)

    def joint_question_count(self) -> int:
        n = 1
        for a in self.question_alphabets:
            n *= len(a)
        return n

    def structurally_equal(self, other: "Game", tol: float = 0.0) -> bool:
        """Field-by-field equality, with the predicate compared pointwise."""
        if self.n_players != other.n_players:
            return False
        if self.question_alphabets != other.question_alphabets:
            return False
        if self.answer_alphabets != other.answer_alphabets:
            return False
        if self.question_dist.support != other.question_dist.support:
            return False
        for p, q in zip(self.question_dist.probs, other.question_dist.probs):
            if abs(p - q) > tol:
                return False
        for q in self.question_tuples():
            for a in self.answer_tuples():
                if self.predicate.wins(q, a) != other.predicate.wins(q, a):
                    return False
        return True


@dataclass(frozen=True)
class Strategy:
    """One deterministic answer map per player (question symbol -> answer)."""

    answer_maps: tuple[dict[str, str], ...]

    def answers(self, questions: tuple[str, ...]) -> tuple[str, ...]:
        return tuple(m[q] for m, q in zip(self.answer_maps, questions))


@dataclass(frozen=True)
class MuTable:
    """Dense table for a function on a product of finite question alphabets.

    ``values`` has one axis per alphabet, indexed in alphabet listing order,
    and every entry lies in [0, 1].
    """

    alphabets: tuple[tuple[str, ...], ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        shape = tuple(len(a) for a in self.alphabets)
        arr = np.asarray(self.values, dtype=float)
        if arr.shape != shape:
            raise ValidationError(f"mu table shape {arr.shape} does not match alphabets {shape}")
        if np.any(arr < -PROB_TOL) or np.any(arr > 1.0 + PROB_TOL):
            raise ValidationError("mu entries must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n_coords(self) -> int:
        return len(self.alphabets)

    def lookup(self, outcome: tuple[str, ...]) -> float:
        idx = tuple(a.index(s) for a, s in zip(self.alphabets, outcome))
        return float(self.values[idx])


@dataclass(frozen=True)
class ValidationReport:
    problems: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.problems


def validate_game(g: Game) -> ValidationReport:
    """Collect every violated invariant of ``g`` (empty report means valid)."""
    problems: list[str] = []
    if g.n_players < 1:
        problems.append("n_players must be positive")
    if len(g.question_alphabets) != g.n_players or len(g.answer_alphabets) != g.n_players:
        problems.append("alphabet count does not match n_players")
    for i, alph in enumerate(g.question_alphabets):
        if len(alph) == 0:
            problems.append(f"empty alphabet: questions of player {i}")
        if len(set(alph)) != len(alph):
            problems.append(f"duplicate symbols in question alphabet of player {i}")
    for i, alph in enumerate(g.answer_alphabets):
        if len(alph) == 0:
            problems.append(f"empty alphabet: answers of player {i}")
        if len(set(alph)) != len(alph):
            problems.append(f"duplicate symbols in answer alphabet of player {i}")
    problems.extend(g.question_dist.validate())
    expected = tuple(itertools.product(*g.question_alphabets))
    if g.question_dist.support != expected:
        problems.append("question_dist support is not the lexicographic product of the alphabets")
    # Predicate totality: a table predicate raising on any in-range pair is a
    # construction bug, so probe every pair at desk scale.
    try:
        for q in g.question_tuples():
            for a in g.answer_tuples():
                g.predicate.wins(q, a)
    except Exception as exc:  # noqa: BLE001 - report, don't crash
        problems.append(f"predicate not total: {exc!r}")
    return ValidationReport(tuple(problems))


def _format_prob(p: float) -> str:
    return repr(float(p))


def game_to_dict(g: Game) -> dict:
    pi_rows = [
        {"q": list(q), "p": _format_prob(p)}
        for q, p in zip(g.question_dist.support, g.question_dist.probs)
        if p != 0.0
    ]
    win_rows = []
    for q in g.question_tuples():
        for a in g.answer_tuples():
            if g.predicate.wins(q, a):
                win_rows.append({"q": list(q), "a": list(a), "win": True})
    return {
        "n_players": g.n_players,
        "questions": [list(a) for a in g.question_alphabets],
        "answers": [list(a) for a in g.answer_alphabets],
        "pi": pi_rows,
        "predicate": win_rows,
    }


def save_game(g: Game, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(game_to_dict(g), fh, ensure_ascii=False, indent=1)
        fh.write("\n")


def _require(data: dict, key: str, where: str):
    if key not in data:
        raise GameFormatError(f"missing field '{key}' in {where}")
    return data[key]


def _parse_alphabets(raw, n_players: int, what: str) -> tuple[tuple[str, ...], ...]:
    if not isinstance(raw, list) or len(raw) != n_players:
        raise GameFormatError(f"'{what}' must list one alphabet per player")
    out = []
    for i, alph in enumerate(raw):
        if not isinstance(alph, list) or not all(isinstance(s, str) for s in alph):
            raise GameFormatError(f"'{what}[{i}]' must be a list of strings")
        out.append(tuple(alph))
    return tuple(out)


def _parse_symbol_tuple(raw, alphabets, row: str, key: str) -> tuple[str, ...]:
    if not isinstance(raw, list) or len(raw) != len(alphabets):
        raise GameFormatError(f"'{key}' in {row} must list one symbol per player")
    for sym, alph in zip(raw, alphabets):
        if sym not in alph:
            raise GameFormatError(f"unknown symbol {sym!r} in {row}")
    return tuple(raw)


def game_from_dict(data: dict, validate: bool = True) -> Game:
    n_players = _require(data, "n_players", "game file")
    if not isinstance(n_players, int) or n_players < 1:
        raise GameFormatError("'n_players' must be a positive integer")
    questions = _parse_alphabets(_require(data, "questions", "game file"), n_players, "questions")
    answers = _parse_alphabets(_require(data, "answers", "game file"), n_players, "answers")

    support = tuple(itertools.product(*questions))
    prob_by_tuple = {q: 0.0 for q in support}
    pi_rows = _require(data, "pi", "game file")
    for k, row in enumerate(pi_rows):
        q = _parse_symbol_tuple(_require(row, "q", f"pi[{k}]"), questions, f"pi[{k}]", "q")
        p_raw = _require(row, "p", f"pi[{k}]")
        try:
            p = float(p_raw)
        except (TypeError, ValueError) as exc:
            raise GameFormatError(f"bad probability {p_raw!r} in pi[{k}]") from exc
        prob_by_tuple[q] = p
    dist = Distribution(support, tuple(prob_by_tuple[q] for q in support))

    win_rows = set()
    pred_rows = _require(data, "predicate", "game file")
    for k, row in enumerate(pred_rows):
        q = _parse_symbol_tuple(_require(row, "q", f"predicate[{k}]"), questions, f"predicate[{k}]", "q")
        a = _parse_symbol_tuple(_require(row, "a", f"predicate[{k}]"), answers, f"predicate[{k}]", "a")
        if bool(row.get("win", False)):
            win_rows.add((q, a))
    g = Game(n_players, questions, answers, dist, Predicate.from_win_set(win_rows))

    if validate:
        report = validate_game(g)
        if not report.ok:
            raise ValidationError("; ".join(report.problems))
    return g


def load_game(path: str, validate: bool = True) -> Game:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GameFormatError(f"{path}: not valid JSON (line {exc.lineno})") from exc
    return game_from_dict(data, validate=validate)


def mu_to_dict(mu: MuTable) -> dict:
    rows = []
    for combo in itertools.product(*(range(len(a)) for a in mu.alphabets)):
        syms = [mu.alphabets[i][j] for i, j in enumerate(combo)]
        rows.append({"q": syms, "v": _format_prob(float(mu.values[combo]))})
    return {"questions": [list(a) for a in mu.alphabets], "mu": rows}


def save_mu(mu: MuTable, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(mu_to_dict(mu), fh, ensure_ascii=False, indent=1)
        fh.write("\n")


def mu_from_dict(data: dict) -> MuTable:
    raw_alph = _require(data, "questions", "mu file")
    if not isinstance(raw_alph, list) or not raw_alph:
        raise GameFormatError("'questions' must be a non-empty list of alphabets")
    alphabets = _parse_alphabets(raw_alph, len(raw_alph), "questions")
    shape = tuple(len(a) for a in alphabets)
    values = np.zeros(shape, dtype=float)
    for k, row in enumerate(_require(data, "mu", "mu file")):
        q = _parse_symbol_tuple(_require(row, "q", f"mu[{k}]"), alphabets, f"mu[{k}]", "q")
        v_raw = _require(row, "v", f"mu[{k}]")
        try:
            v = float(v_raw)
        except (TypeError, ValueError) as exc:
            raise GameFormatError(f"bad value {v_raw!r} in mu[{k}]") from exc
        idx = tuple(a.index(s) for a, s in zip(alphabets, q))
        values[idx] = v
    return MuTable(alphabets, values)


def load_mu(path: str) -> MuTable:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GameFormatError(f"{path}: not valid JSON (line {exc.lineno})") from exc
    return mu_from_dict(data)


def chsh_game() -> Game:
    """Uniform questions on {0,1} x {0,1}; win iff a1 XOR a2 == q1 AND q2."""
    bits = ("0", "1")

    def wins(q: tuple[str, ...], a: tuple[str, ...]) -> bool:
        return (int(a[0]) ^ int(a[1])) == (int(q[0]) & int(q[1]))

    return Game(
        n_players=2,
        question_alphabets=(bits, bits),
        answer_alphabets=(bits, bits),
        question_dist=uniform_dist((bits, bits)),
        predicate=Predicate(wins, "chsh"),
    )
