"""Concave amplification functions and numerical checkers for the bound family.

The scalar family is psi(x) = 1 - (1-x)^q for positive integer q; the
multiplayer family is Psi(x_1..x_N) = N - prod_i exp(-q_i x_i), monotone and
jointly concave on the unit cube.  The pullback used by the sharpened bound
inverts the diagonal restriction Psi_diag(x) = N - exp(-(sum q_i) x) and is
analytically extended below N-1; every extended-domain evaluation is flagged
in the reports instead of being clamped.

Checkers compute both sides of each inequality with the exact oracle and
report lhs, rhs, slack, and premise status.  Violations are findings, not
errors: the inequalities themselves are under test.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import oracle
from .games import Distribution, Game, MuTable, product_dist, Predicate
from .value import repeated_value

DEFAULT_TOL = 1e-9

BOUND_NAMES = (
    "system1", "b2", "b3", "b4", "b5_6",
    "lm_t1", "lm_t2", "lm_t3", "lm_c4", "lm_p1", "lm_c2",
    "main_t1",
)

FINDINGS_CSV_COLUMNS = (
    "name", "lhs", "rhs", "satisfied", "slack",
    "premise_ok", "extended_domain_flag", "seed", "trial",
)


@dataclass(frozen=True)
class ConcaveFn:
    """Monotone concave amplification function.

    kind "power": psi(x) = 1 - (1-x)^q on [0,1], q = rate[0] a positive int.
    kind "mult":  Psi(x) = N - prod_i exp(-rate[i] x_i) on [0,1]^N.
    kind "custom": piecewise-linear interpolation through (x, y) knots.
    """

    kind: str
    rate: tuple[float, ...] = ()
    knots: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind == "power":
            if len(self.rate) != 1 or self.rate[0] < 1 or self.rate[0] != int(self.rate[0]):
                raise ValueError("power kind needs a single positive integer rate")
        elif self.kind == "mult":
            if not self.rate or any(q <= 0 for q in self.rate):
                raise ValueError("mult kind needs positive per-coordinate rates")
        elif self.kind == "custom":
            if len(self.knots) < 2:
                raise ValueError("custom kind needs at least two knots")
            xs = [k[0] for k in self.knots]
            if sorted(xs) != xs or len(set(xs)) != len(xs):
                raise ValueError("custom knots must have strictly increasing x")
        else:
            raise ValueError(f"unknown concave function kind {self.kind!r}")

    @property
    def arity(self) -> int:
        return len(self.rate) if self.kind == "mult" else 1

    def __call__(self, x):
        return psi_eval(self, x)


def power(q: int) -> ConcaveFn:
    return ConcaveFn("power", (float(q),))


def mult(rates: Sequence[float]) -> ConcaveFn:
    return ConcaveFn("mult", tuple(float(r) for r in rates))


def custom(knots: Sequence[tuple[float, float]]) -> ConcaveFn:
    return ConcaveFn("custom", knots=tuple((float(a), float(b)) for a, b in knots))


_DOMAIN_SLACK = 1e-9


def psi_eval(f: ConcaveFn, x) -> float:
    """Evaluate the function, enforcing its declared domain."""
    if f.kind == "power":
        x = float(x)
        if not -_DOMAIN_SLACK <= x <= 1.0 + _DOMAIN_SLACK:
            raise ValueError(f"power function argument {x} outside [0, 1]")
        return 1.0 - (1.0 - x) ** int(f.rate[0])
    if f.kind == "mult":
        vec = np.asarray(x, dtype=float).reshape(-1)
        if vec.shape[0] != len(f.rate):
            raise ValueError("argument length does not match the rate vector")
        if np.any(vec < -_DOMAIN_SLACK) or np.any(vec > 1.0 + _DOMAIN_SLACK):
            raise ValueError("mult function argument outside the unit cube")
        n = len(f.rate)
        return float(n - math.exp(-float(np.dot(f.rate, vec))))
    # custom
    x = float(x)
    xs = [k[0] for k in f.knots]
    ys = [k[1] for k in f.knots]
    if not xs[0] - _DOMAIN_SLACK <= x <= xs[-1] + _DOMAIN_SLACK:
        raise ValueError(f"custom function argument {x} outside [{xs[0]}, {xs[-1]}]")
    return float(np.interp(x, xs, ys))


def psi_inverse_diag(f: ConcaveFn, y: float) -> float:
    """Inverse of the diagonal restriction Psi_diag(x) = N - exp(-(sum q) x).

    Defined for every y < N by analytic extension; results below 0 signal an
    argument under N-1 (outside the range of the diagonal on [0, 1]).
    """
    if f.kind != "mult":
        raise ValueError("diagonal pullback is defined for mult functions only")
    n = len(f.rate)
    if y >= n:
        raise ValueError(f"pullback argument {y} must be < {n}")
    q_total = float(sum(f.rate))
    return -math.log(n - y) / q_total


def amp_constant(n_players: int, n: int) -> int:
    """N * sum_{i=0..n} binom(N, i), exactly."""
    if n_players < 1 or n < 0:
        raise ValueError("need n_players >= 1 and n >= 0")
    return n_players * sum(math.comb(n_players, i) for i in range(n + 1))


def xi_inverse(psi: ConcaveFn, y: float, tol: float = 1e-12) -> float:
    """Inverse of xi(x) = x psi(x) on [0, 1] by monotone bisection."""
    def xi(x: float) -> float:
        return x * psi(x)

    top = xi(1.0)
    if y < -tol or y > top + tol:
        raise ValueError(f"xi-inverse argument {y} outside the attained range [0, {top}]")
    y = min(max(y, 0.0), top)
    lo, hi = 0.0, 1.0
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if xi(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class AmpParams:
    """Per-index parameters for the amplification bounds.

    eps and delta entries live in [0, 1]; q entries are positive rates and
    hint_h nonnegative hint-query weights.  Which indices a checker reads
    (players 0..N-1 or repetition indices 0..n) is documented per checker.
    """

    eps: tuple[float, ...]
    delta: tuple[float, ...]
    q: tuple[float, ...] = ()
    hint_h: tuple[float, ...] = ()
    n: int = 1
    n_players: int = 2

    def __post_init__(self):
        if any(not 0.0 <= e <= 1.0 for e in self.eps):
            raise ValueError("eps entries must lie in [0, 1]")
        if any(not 0.0 <= d <= 1.0 for d in self.delta):
            raise ValueError("delta entries must lie in [0, 1]")
        if any(v <= 0 for v in self.q):
            raise ValueError("q entries must be positive")
        if any(v < 0 for v in self.hint_h):
            raise ValueError("hint_h entries must be nonnegative")
        if self.n < 0 or self.n_players < 1:
            raise ValueError("n must be >= 0 and n_players >= 1")


@dataclass(frozen=True)
class BoundReport:
    """Two sides of one inequality plus its verdict.

    ``direction`` is the claimed relation of lhs to rhs (le/lt/ge/gt);
    ``satisfied`` applies the stated tolerance in the forgiving direction and
    ``slack`` is always rhs - lhs.  ``premise_ok`` false means the verdict is
    reported but non-probative.
    """

    name: str
    lhs: float
    rhs: float
    satisfied: bool
    slack: float
    premise_ok: bool
    tol: float
    direction: str = "le"
    extended_domain: bool = False
    extra: dict = field(default_factory=dict, compare=False)


def _verdict(lhs: float, rhs: float, direction: str, tol: float) -> bool:
    if direction == "le":
        return lhs <= rhs + tol
    if direction == "lt":
        return lhs < rhs + tol
    if direction == "ge":
        return lhs >= rhs - tol
    if direction == "gt":
        return lhs > rhs - tol
    raise ValueError(f"unknown direction {direction!r}")


def _report(name, lhs, rhs, premise_ok, tol, direction="le", extended=False, extra=None):
    return BoundReport(
        name=name,
        lhs=float(lhs),
        rhs=float(rhs),
        satisfied=_verdict(lhs, rhs, direction, tol),
        slack=float(rhs) - float(lhs),
        premise_ok=bool(premise_ok),
        tol=tol,
        direction=direction,
        extended_domain=extended,
        extra=extra or {},
    )


def _delta_product(delta: Sequence[float], upto: int, excluded: Iterable[int]) -> float:
    """prod of delta_l over l in {0..upto} minus the excluded indices."""
    excl = set(excluded)
    out = 1.0
    for l in range(upto + 1):
        if l not in excl:
            out *= delta[l]
    return out


def check_system1(
    mu: MuTable,
    dist: Distribution,
    fam: Sequence[ConcaveFn],
    p: AmpParams,
    subset: Sequence[int],
    tol: float = DEFAULT_TOL,
) -> BoundReport:
    """Joint amplification inequality over a subset of m players.

    lhs averages, over the players outside the subset, the product of each
    member's concave-transformed single-player expectation (the member's
    remaining subset coordinates are averaged inside its factor).  rhs is
    (1/sqrt(m)) times the sum of eps_i psi_i(prod of delta over {0..n} with
    the previously listed subset indices excluded cumulatively).  The premise
    records whether every single-player inequality holds on its own.
    """
    subset = list(subset)
    n_coords = mu.n_coords
    if len(set(subset)) != len(subset) or any(not 0 <= i < n_coords for i in subset):
        raise ValueError("subset must be distinct player indices")
    if not subset:
        raise ValueError("subset must be non-empty")
    if len(p.delta) < p.n + 1:
        raise ValueError(f"system1 needs delta entries for indices 0..{p.n}")
    if len(p.eps) < max(subset) + 1:
        raise ValueError("system1 needs one eps entry per subset player")
    for i in subset:
        if fam[i].arity != 1:
            raise ValueError("system1 family members must be scalar functions")

    margs = oracle.marginals_of(mu, dist)
    m = len(subset)
    outer = [i for i in range(n_coords) if i not in subset]

    def factor(member: int, fixed_outer: dict[int, str]) -> float:
        rest = [j for j in subset if j != member]
        total = 0.0
        for combo in itertools.product(*(range(len(mu.alphabets[j])) for j in rest)):
            p_rest = 1.0
            fixed = dict(fixed_outer)
            for coord, idx in zip(rest, combo):
                p_rest *= float(margs[coord][idx])
                fixed[coord] = mu.alphabets[coord][idx]
            inner = oracle.expect_inner(mu, dist, (member,), fixed, margs=margs)
            total += p_rest * fam[member](inner)
        return total

    lhs = 0.0
    for combo in itertools.product(*(range(len(mu.alphabets[i])) for i in outer)):
        p_outer = 1.0
        fixed_outer = {}
        for coord, idx in zip(outer, combo):
            p_outer *= float(margs[coord][idx])
            fixed_outer[coord] = mu.alphabets[coord][idx]
        prod_val = 1.0
        for member in subset:
            prod_val *= factor(member, fixed_outer)
        lhs += p_outer * prod_val

    rhs = 0.0
    excluded: list[int] = []
    for member in subset:
        excluded.append(member)
        rhs += p.eps[member] * fam[member](_delta_product(p.delta, p.n, excluded))
    rhs /= math.sqrt(m)

    premise_ok = True
    for member in subset:
        single = oracle.nested_expect(mu, dist, member, fam[member], margs=margs)
        cap = p.eps[member] * fam[member](_delta_product(p.delta, p.n, (member,)))
        if single > cap + tol:
            premise_ok = False
    return _report(
        "system1", lhs, rhs, premise_ok, tol,
        extra={"m": m, "delta_index_set": f"[0..{p.n}] minus cumulative subset indices"},
    )


def check_bound2(
    mu: MuTable,
    dist: Distribution,
    p: AmpParams,
    big_c: float,
    tol: float = DEFAULT_TOL,
) -> BoundReport:
    """E[mu] <= C sup{eps prefix products, partial sums of eps_i delta_i}."""
    if big_c <= 0:
        raise ValueError("C must be positive")
    candidates = []
    acc = 1.0
    for k, e in enumerate(p.eps):
        acc *= e
        if k >= 1:
            candidates.append(acc)
    acc = 0.0
    for e, d in zip(p.eps, p.delta):
        acc += e * d
        candidates.append(acc)
    if len(candidates) < 2:
        raise ValueError("bound 2 needs at least two eps entries or eps-delta pairs")
    sup = max(candidates)
    lhs = oracle.expect(mu, dist)
    min_c = math.inf if sup == 0.0 else lhs / sup
    return _report("b2", lhs, big_c * sup, True, tol,
                   extra={"sup_candidate": sup, "min_C": min_c})


def _bound3_candidates(
    mu: MuTable,
    dist: Distribution,
    scalars: Sequence[ConcaveFn],
    margs,
) -> list[float]:
    n = mu.n_coords
    out = []
    for f in scalars:
        for j in range(n):
            out.append(oracle.nested_expect_subset(mu, dist, (j,), f, margs=margs))
        if n > 2:
            for i in range(n):
                inner = tuple(k for k in range(n) if k != i)
                out.append(oracle.nested_expect_subset(mu, dist, inner, f, margs=margs))
    return out


def check_bound3(
    mu: MuTable,
    dist: Distribution,
    fam: Sequence[ConcaveFn],
    p: AmpParams,
    tol: float = DEFAULT_TOL,
) -> BoundReport:
    """Sharpened pullback bound: C(N,n) Psi^-1[2^-N sup{...}]^(2^N).

    The sup ranges over single-inner and single-outer nested expectations for
    every scalar family member; the pullback inverts the diagonal restriction
    of the mult member and flags arguments below N-1 as extended-domain.
    """
    n = mu.n_coords
    scalars = [f for f in fam if f.kind != "mult"]
    mults = [f for f in fam if f.kind == "mult"]
    if not scalars or not mults:
        raise ValueError("bound 3 needs at least one scalar and one mult family member")
    mult_f = mults[0]
    if len(mult_f.rate) != n:
        raise ValueError("mult member arity must match the number of players")
    margs = oracle.marginals_of(mu, dist)
    sup = max(_bound3_candidates(mu, dist, scalars, margs))
    arg = sup / (2 ** n)
    inv = psi_inverse_diag(mult_f, arg)
    rhs = amp_constant(n, p.n) * inv ** (2 ** n)
    lhs = oracle.expect(mu, dist)
    return _report("b3", lhs, rhs, True, tol, extended=arg < n - 1,
                   extra={"sup": sup, "pullback_arg": arg, "pullback": inv})


def check_bound4_5_6(
    mu: MuTable,
    dist: Distribution,
    p: AmpParams,
    tol: float = DEFAULT_TOL,
) -> tuple[BoundReport, BoundReport]:
    """Quantity (6) against the distinct-tuple bounds (4) and (5).

    Tuples are the N-element subsets of {0..n} in lexicographic order; both
    comparisons are strict per the stated results.
    """
    n_players = mu.n_coords
    if p.n + 1 < n_players:
        raise ValueError(f"need n+1 >= {n_players} distinct indices, got n={p.n}")
    if len(p.eps) < p.n + 1 or len(p.delta) < p.n + 1:
        raise ValueError("eps and delta must cover indices 0..n")
    tuples = list(itertools.combinations(range(p.n + 1), n_players))

    b4_prod = 1.0
    b4_sum = 0.0
    for t in tuples:
        b4_prod *= sum(p.eps[k] for k in t)
        b4_sum += sum(p.delta[k] for k in t)
    b4 = b4_prod + b4_sum

    b5 = -math.inf
    for t in tuples:
        inner = 1.0
        for k in t:
            for k2 in t:
                inner *= p.delta[k] * p.eps[k2]
        b5 = max(b5, inner ** n_players)

    lhs = oracle.expect(mu, dist)
    rep4 = _report("b4", lhs, b4, True, tol, direction="lt",
                   extra={"tuple_count": len(tuples)})
    rep5 = _report("b5_6", lhs, b5, True, tol, direction="lt",
                   extra={"tuple_count": len(tuples)})
    return rep4, rep5


LM_KINDS = ("T1", "T2", "T3", "C4", "P1", "C2")


def check_lm_theorems(
    mu: MuTable,
    dist: Distribution,
    fam: Sequence[ConcaveFn],
    p: AmpParams,
    which: str,
    tol: float = DEFAULT_TOL,
) -> BoundReport:
    """Two-player results of the concave-amplification framework.

    T1:  premises E_X[psi(E_Y mu)] <= eps psi(delta), E_Y[psi'(E_X mu)] <=
         eps' psi'(delta'); conclusion E <= eps eps' + delta + delta'.
    T2:  n-coordinate version; premises per coordinate with the inner
         expectation over all other coordinates; conclusion prod eps + sum
         delta.
    T3:  same premises as T1; conclusion max{eps eps', eps delta + eps'
         delta'}.
    C4:  premises with delta -> eps' and delta' -> eps; conclusion 2 eps eps'.
    P1:  same premises as C4; claimed strict lower bound E > eps eps'.
    C2:  conclusion 4 xi^-1[ (1/2) sup of the two nested expectations ]^2
         with xi(x) = x psi(x); no premise.
    """
    which = which.upper()
    if which not in LM_KINDS:
        raise ValueError(f"unknown result {which!r}; pick one of {LM_KINDS}")
    n = mu.n_coords
    margs = oracle.marginals_of(mu, dist)
    lhs = oracle.expect(mu, dist)

    if which == "T2":
        if len(p.eps) < n or len(p.delta) < n or len(fam) < n:
            raise ValueError("T2 needs eps/delta/family entries per coordinate")
        premise_ok = True
        for i in range(n):
            others = tuple(k for k in range(n) if k != i)
            left = oracle.nested_expect_subset(mu, dist, others, fam[i], margs=margs)
            if left > p.eps[i] * fam[i](p.delta[i]) + tol:
                premise_ok = False
        rhs = math.prod(p.eps[:n]) + sum(p.delta[:n])
        return _report("lm_t2", lhs, rhs, premise_ok, tol)

    if n != 2:
        raise ValueError(f"{which} applies to two-player tables only")
    eps, eps2 = p.eps[0], p.eps[1]
    psi = fam[0]
    psi2 = fam[1] if len(fam) > 1 else fam[0]
    nested_x = oracle.nested_expect_subset(mu, dist, (1,), psi, margs=margs)
    nested_y = oracle.nested_expect_subset(mu, dist, (0,), psi2, margs=margs)

    if which in ("T1", "T3"):
        delta, delta2 = p.delta[0], p.delta[1]
        premise_ok = (nested_x <= eps * psi(delta) + tol
                      and nested_y <= eps2 * psi2(delta2) + tol)
        if which == "T1":
            return _report("lm_t1", lhs, eps * eps2 + delta + delta2, premise_ok, tol)
        rhs = max(eps * eps2, eps * delta + eps2 * delta2)
        return _report("lm_t3", lhs, rhs, premise_ok, tol)

    if which in ("C4", "P1"):
        premise_ok = (nested_x <= eps * psi(eps2) + tol
                      and nested_y <= eps2 * psi2(eps) + tol)
        if which == "C4":
            return _report("lm_c4", lhs, 2.0 * eps * eps2, premise_ok, tol)
        return _report("lm_p1", lhs, eps * eps2, premise_ok, tol, direction="gt")

    # C2: both nested expectations use the same psi.
    nested_y_same = oracle.nested_expect_subset(mu, dist, (0,), psi, margs=margs)
    y = 0.5 * max(nested_x, nested_y_same)
    root = xi_inverse(psi, y)
    return _report("lm_c2", lhs, 4.0 * root * root, True, tol,
                   extra={"xi_arg": y, "xi_root": root})


def main_t1_rhs(p: AmpParams, i: int) -> float:
    """(1 - eps_i) delta_i / (exp(-N q_i) + N H_i)."""
    n_players = p.n_players
    return ((1.0 - p.eps[i]) * p.delta[i]
            / (math.exp(-n_players * p.q[i]) + n_players * p.hint_h[i]))


def main_t1_premise(p: AmpParams, i: int) -> tuple[bool, float]:
    """Premise of the parallel-repetition lower bound.

    Parameters must be strictly positive and distinct within each family, and
    q_i must stay below n! ln(1/eps_i) times the telescoping delta products
    (each bracket drops one more of the remaining indices, mirroring the
    n, n-1, ... prefactor).
    """
    idx = range(p.n + 1)
    eps = [p.eps[k] for k in idx]
    delta = [p.delta[k] for k in idx]
    ok = all(e > 0 for e in eps) and all(d > 0 for d in delta)
    ok = ok and len(set(eps)) == len(eps) and len(set(delta)) == len(delta)
    rest = [l for l in idx if l != i]
    threshold = math.factorial(p.n) * math.log(1.0 / p.eps[i]) if p.eps[i] > 0 else 0.0
    for start in range(len(rest)):
        bracket = 1.0
        for l in rest[start:]:
            bracket *= delta[l] if l < len(delta) else 1.0
        threshold *= bracket
    ok = ok and p.q[i] < threshold
    return ok, threshold


def check_main_theorem1(
    g: Game,
    p: AmpParams,
    i: int,
    tol: float = DEFAULT_TOL,
    max_profiles: int | None = None,
    max_joint_tuples: int | None = None,
) -> BoundReport:
    """Exhaustive omega(repeat(g, n)) against the concave lower bound."""
    if g.n_players != p.n_players:
        raise ValueError("params n_players does not match the game")
    if p.n < 1:
        raise ValueError("the repeated-value bound needs n >= 1 rounds")
    needed = max(p.n + 1, i + 1)
    if len(p.eps) < needed or len(p.delta) < needed or len(p.q) < needed or len(p.hint_h) < needed:
        raise ValueError("eps/delta/q/hint_h must cover indices 0..n")
    kwargs = {}
    if max_profiles is not None:
        kwargs["max_profiles"] = max_profiles
    if max_joint_tuples is not None:
        kwargs["max_joint_tuples"] = max_joint_tuples
    lhs = repeated_value(g, p.n, **kwargs).value
    rhs = main_t1_rhs(p, i)
    premise_ok, q_cap = main_t1_premise(p, i)
    return _report("main_t1", lhs, rhs, premise_ok, tol, direction="ge",
                   extra={"q_premise_cap": q_cap, "index": i})


@dataclass(frozen=True)
class DecayValue:
    """A decay-bound evaluation; values above 1 bound nothing (vacuous)."""

    value: float
    vacuous: bool


LOG2_E = math.log2(math.e)


def multiplayer_c_cap(n_players: int) -> float:
    return 1.0 / (n_players ** (2 * n_players) * LOG2_E)


def decay_bound_multiplayer(p: AmpParams, alpha: float, c: float, s: float) -> DecayValue:
    """(10/eps) exp(-c alpha^(20N+1) eps^(6N) n / s) for the anchored game.

    Uses eps = p.eps[0], N = p.n_players, n = p.n; c must stay below
    1/(N^(2N) log2(e)) and logs are base 2 throughout.
    """
    eps = p.eps[0]
    n_players = p.n_players
    if eps <= 0:
        raise ValueError("eps must be strictly positive")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    if s < 1.0:
        raise ValueError("s must be >= 1")
    cap = multiplayer_c_cap(n_players)
    if not 0.0 < c < cap:
        raise ValueError(f"c must lie in (0, {cap})")
    rate = c * alpha ** (20 * n_players + 1) * eps ** (6 * n_players) * p.n / s
    val = (10.0 / eps) * math.exp(-rate)
    return DecayValue(val, val > 1.0)


def decay_bound_kplayer(gamma: float, c: float, alpha: float, k: int, n: int, s: float) -> DecayValue:
    """(1 - gamma^9 / 2)^(c alpha^(8k) n / s), the polynomial-rate decay."""
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    if c <= 0 or s <= 0:
        raise ValueError("c and s must be positive")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    if k < 0 or n < 0:
        raise ValueError("k and n must be nonnegative")
    base = 1.0 - gamma ** 9 / 2.0
    val = base ** (c * alpha ** (8 * k) * n / s)
    return DecayValue(val, val > 1.0)


def s_param(g: Game) -> float:
    """max{prod_i log2 |Q_i|, 1}, the response-length normalizer (base 2)."""
    prod = 1.0
    for alph in g.question_alphabets:
        prod *= math.log2(len(alph)) if len(alph) > 0 else 0.0
    return max(prod, 1.0)


# ---------------------------------------------------------------------------
# Seeded counterexample search


@dataclass(frozen=True)
class SamplerConfig:
    """Shape of the sampled instances for the counterexample search."""

    n_players: int = 2
    alphabet_size: int = 2
    n: int = 1
    answer_size: int = 2
    bound2_c: float = 1.0
    premise_targeted: bool = True


@dataclass(frozen=True)
class Finding:
    report: BoundReport
    seed: int
    trial: int

    def csv_row(self) -> list[str]:
        r = self.report
        return [
            r.name,
            repr(r.lhs),
            repr(r.rhs),
            "true" if r.satisfied else "false",
            repr(r.slack),
            "true" if r.premise_ok else "false",
            "true" if r.extended_domain else "false",
            str(self.seed),
            str(self.trial),
        ]


@dataclass
class FindingsTable:
    bound: str
    seed: int
    config: SamplerConfig
    rows: list[Finding]

    @property
    def trials(self) -> int:
        return len(self.rows)

    @property
    def premise_satisfying(self) -> int:
        return sum(1 for f in self.rows if f.report.premise_ok)

    @property
    def violations(self) -> list[Finding]:
        return [f for f in self.rows if f.report.premise_ok and not f.report.satisfied]

    @property
    def min_slack_witness(self) -> Finding | None:
        candidates = [f for f in self.rows if f.report.premise_ok] or self.rows
        if not candidates:
            return None
        return min(candidates, key=lambda f: (f.report.slack, f.trial))

    def csv_lines(self) -> list[str]:
        lines = [",".join(FINDINGS_CSV_COLUMNS)]
        lines.extend(",".join(f.csv_row()) for f in self.rows)
        return lines


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    key = np.array([seed, trial], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _alphabets(n_players: int, size: int) -> tuple[tuple[str, ...], ...]:
    syms = tuple(str(k) for k in range(size))
    return tuple(syms for _ in range(n_players))


def _sample_marginal(rng: np.random.Generator, size: int) -> list[float]:
    w = rng.random(size) + 0.05
    w = w / w.sum()
    return [float(x) for x in w]


def _sample_mu_dist(rng: np.random.Generator, n_players: int, size: int,
                    fixed_mu: MuTable | None = None):
    if fixed_mu is not None:
        dist = product_dist(
            fixed_mu.alphabets,
            [_sample_marginal(rng, len(a)) for a in fixed_mu.alphabets],
        )
        return fixed_mu, dist
    alphabets = _alphabets(n_players, size)
    mu = MuTable(alphabets, rng.random(tuple(size for _ in range(n_players))))
    dist = product_dist(alphabets, [_sample_marginal(rng, size) for _ in range(n_players)])
    return mu, dist


def _targeted_eps(rng: np.random.Generator, needed: float) -> float:
    """A uniform eps in [needed, 1], or 1.0 if the need is already above 1."""
    if needed >= 1.0:
        return 1.0
    return float(needed + rng.random() * (1.0 - needed))


def _sample_game(rng: np.random.Generator, n_players: int, q_size: int, a_size: int) -> Game:
    q_alph = _alphabets(n_players, q_size)
    a_alph = _alphabets(n_players, a_size)
    dist = product_dist(q_alph, [_sample_marginal(rng, q_size) for _ in range(n_players)])
    n_q = q_size ** n_players
    n_a = a_size ** n_players
    bits = rng.integers(0, 2, size=(n_q, n_a))
    q_index = {q: k for k, q in enumerate(itertools.product(*q_alph))}
    a_index = {a: k for k, a in enumerate(itertools.product(*a_alph))}

    def wins(q, a):
        return bool(bits[q_index[q], a_index[a]])

    return Game(n_players, q_alph, a_alph, dist, Predicate(wins, "sampled"))


def _one_trial(bound: str, cfg: SamplerConfig, rng: np.random.Generator,
               tol: float, fixed_mu: MuTable | None = None) -> BoundReport:
    n_players = cfg.n_players
    size = cfg.alphabet_size

    if bound == "main_t1":
        if fixed_mu is not None:
            raise ValueError("main_t1 samples games, not mu tables")
        rounds = int(rng.integers(1, cfg.n + 1))
        g = _sample_game(rng, n_players, size, cfg.answer_size)
        count = rounds + 1
        p = AmpParams(
            eps=tuple(rng.uniform(0.05, 0.95, count)),
            delta=tuple(rng.uniform(0.05, 0.95, count)),
            q=tuple(rng.uniform(0.1, 2.0, count)),
            hint_h=tuple(rng.uniform(0.0, 2.0, count)),
            n=rounds,
            n_players=n_players,
        )
        i = int(rng.integers(0, count))
        return check_main_theorem1(g, p, i, tol=tol)

    mu, dist = _sample_mu_dist(rng, n_players, size, fixed_mu)
    n_players = mu.n_coords
    margs = oracle.marginals_of(mu, dist)

    if bound == "system1":
        fam = [power(int(rng.integers(1, 4))) for _ in range(n_players)]
        delta = tuple(rng.uniform(0.05, 1.0, cfg.n + 1))
        eps = []
        for i in range(n_players):
            cap = fam[i](_delta_product(delta, cfg.n, (i,)))
            if cfg.premise_targeted and cap > 0:
                t_i = oracle.nested_expect(mu, dist, i, fam[i], margs=margs)
                eps.append(_targeted_eps(rng, t_i / cap))
            else:
                eps.append(float(rng.random()))
        p = AmpParams(eps=tuple(eps), delta=delta, n=cfg.n, n_players=n_players)
        return check_system1(mu, dist, fam, p, list(range(n_players)), tol=tol)

    if bound == "b2":
        p = AmpParams(
            eps=tuple(rng.random(n_players)),
            delta=tuple(rng.random(n_players)),
            n=cfg.n,
            n_players=n_players,
        )
        return check_bound2(mu, dist, p, cfg.bound2_c, tol=tol)

    if bound == "b3":
        fam = [power(int(rng.integers(1, 4))), mult(rng.uniform(0.3, 2.5, n_players))]
        p = AmpParams(eps=(), delta=(), n=cfg.n, n_players=n_players)
        return check_bound3(mu, dist, fam, p, tol=tol)

    if bound in ("b4", "b5_6"):
        n = max(cfg.n, n_players - 1)
        p = AmpParams(
            eps=tuple(rng.random(n + 1)),
            delta=tuple(rng.random(n + 1)),
            n=n,
            n_players=n_players,
        )
        rep4, rep5 = check_bound4_5_6(mu, dist, p, tol=tol)
        return rep4 if bound == "b4" else rep5

    if bound == "lm_t2":
        n = mu.n_coords
        fam = [power(int(rng.integers(1, 4))) for _ in range(n)]
        delta = tuple(rng.uniform(0.05, 1.0, n))
        eps = []
        for i in range(n):
            others = tuple(k for k in range(n) if k != i)
            t_i = oracle.nested_expect_subset(mu, dist, others, fam[i], margs=margs)
            cap = fam[i](delta[i])
            if cfg.premise_targeted and cap > 0:
                eps.append(_targeted_eps(rng, t_i / cap))
            else:
                eps.append(float(rng.random()))
        p = AmpParams(eps=tuple(eps), delta=delta, n=cfg.n, n_players=n_players)
        return check_lm_theorems(mu, dist, fam, p, "T2", tol=tol)

    if bound in ("lm_t1", "lm_t3", "lm_c4", "lm_p1", "lm_c2"):
        fam = [power(int(rng.integers(1, 4))), power(int(rng.integers(1, 4)))]
        nested_x = oracle.nested_expect_subset(mu, dist, (1,), fam[0], margs=margs)
        nested_y = oracle.nested_expect_subset(mu, dist, (0,), fam[1], margs=margs)
        if bound in ("lm_t1", "lm_t3"):
            delta = tuple(rng.uniform(0.05, 1.0, 2))
            if cfg.premise_targeted:
                eps = (
                    _targeted_eps(rng, nested_x / fam[0](delta[0])),
                    _targeted_eps(rng, nested_y / fam[1](delta[1])),
                )
            else:
                eps = tuple(rng.random(2))
        elif bound in ("lm_c4", "lm_p1"):
            # The premises couple the eps pair through the concave functions:
            # eps >= nested_x / psi(eps'), eps' >= nested_y / psi'(eps).
            # Raising eps' only loosens the first premise, so one adjustment
            # pass lands on a valid pair whenever one exists below 1.
            eps2 = float(rng.uniform(0.05, 1.0))
            if cfg.premise_targeted:
                eps1 = _targeted_eps(rng, nested_x / fam[0](eps2))
                need2 = nested_y / fam[1](eps1) if fam[1](eps1) > 0 else 1.0
                if eps2 < need2:
                    eps2 = min(1.0, need2)
            else:
                eps1 = float(rng.random())
            eps = (eps1, eps2)
            delta = eps
        else:  # lm_c2 has no premise parameters to target
            eps = tuple(rng.random(2))
            delta = tuple(rng.random(2))
        p = AmpParams(eps=eps, delta=delta, n=cfg.n, n_players=2)
        kind = {"lm_t1": "T1", "lm_t3": "T3", "lm_c4": "C4",
                "lm_p1": "P1", "lm_c2": "C2"}[bound]
        return check_lm_theorems(mu, dist, fam, p, kind, tol=tol)

    raise ValueError(f"unknown bound {bound!r}; valid names: {', '.join(BOUND_NAMES)}")


def search_counterexamples(
    bound: str,
    cfg: SamplerConfig,
    seed: int,
    trials: int,
    tol: float = DEFAULT_TOL,
    fixed_mu: MuTable | None = None,
) -> FindingsTable:
    """Sample instances and record each checker verdict, deterministically.

    Every trial draws from its own counter-based substream of the seed, so
    the table is bit-identical for a fixed (seed, config) regardless of how
    trials are scheduled.  With ``fixed_mu`` the mu table is held fixed and
    only distributions and parameters are sampled.
    """
    if bound not in BOUND_NAMES:
        raise ValueError(f"unknown bound {bound!r}; valid names: {', '.join(BOUND_NAMES)}")
    rows = []
    for t in range(trials):
        rng = _trial_rng(seed, t)
        report = _one_trial(bound, cfg, rng, tol, fixed_mu=fixed_mu)
        rows.append(Finding(report=report, seed=seed, trial=t))
    return FindingsTable(bound=bound, seed=seed, config=cfg, rows=rows)
