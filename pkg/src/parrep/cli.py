"""Batch front door: load games, run transforms/values/checkers, emit CSV.

Exit codes are a contract: 0 success, 1 input error (parsing, validation,
bad flags), 2 resource cap exceeded.  All CSV output uses '.' decimals, LF
line endings, '#'-prefixed comment headers embedding the run configuration,
and is byte-identical across repeated runs with the same inputs and seed,
regardless of PARREP_THREADS.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace

from . import __version__
from .games import (
    Distribution,
    Game,
    GameFormatError,
    ValidationError,
    game_from_dict,
    load_game,
    load_mu,
    save_game,
)
from .oracle import entropy
from .transforms import (
    CapExceededError,
    anchor,
    const_answer_filter,
    entropy_floor,
    repeat,
)
from .value import local_search_value, optimal_value, restricted_value
from .amplification import (
    AmpParams,
    BOUND_NAMES,
    FINDINGS_CSV_COLUMNS,
    SamplerConfig,
    decay_bound_kplayer,
    decay_bound_multiplayer,
    main_t1_rhs,
    multiplayer_c_cap,
    s_param,
    search_counterexamples,
)

DEFAULT_SEED = 0
DEFAULT_TOL = 1e-9
DEFAULT_MAX_JOINT_TUPLES = 10**6
DEFAULT_MAX_STRATEGY_PROFILES = 10**8


@dataclass(frozen=True)
class RunConfig:
    seed: int = DEFAULT_SEED
    tol: float = DEFAULT_TOL
    max_joint_tuples: int = DEFAULT_MAX_JOINT_TUPLES
    max_strategy_profiles: int = DEFAULT_MAX_STRATEGY_PROFILES
    log_base: int = 2
    output_dir: str = "."

    def header_lines(self) -> list[str]:
        return [
            f"parrep {__version__}",
            f"seed={self.seed} tol={self.tol!r} log_base={self.log_base}",
            f"caps: max_joint_tuples={self.max_joint_tuples} "
            f"max_strategy_profiles={self.max_strategy_profiles}",
        ]


def _apply_thread_env() -> None:
    """Honor PARREP_THREADS for the parallel kernels; results never depend on it."""
    raw = os.environ.get("PARREP_THREADS")
    if not raw:
        return
    try:
        want = max(1, int(raw))
    except ValueError:
        return
    try:
        import numba

        numba.set_num_threads(min(want, numba.config.NUMBA_NUM_THREADS))
    except ImportError:  # pragma: no cover
        pass


def _load_config(path: str | None) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        return cfg
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    fields = {}
    for key in ("seed", "tol", "max_joint_tuples", "max_strategy_profiles", "output_dir"):
        if key in data:
            fields[key] = data[key]
    return replace(cfg, **fields)


def write_csv(path: str, cfg: RunConfig, extra_comments: list[str],
              columns: tuple[str, ...], rows: list[list[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in cfg.header_lines() + extra_comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _parse_restrict_spec(spec: str):
    """Mini-language: 'entropy>=DELTA@ROUND' or 'const:PLAYER=ANSWER'."""
    if spec.startswith("entropy>="):
        body = spec[len("entropy>="):]
        if "@" not in body:
            raise ValueError(f"bad restriction spec {spec!r}: expected entropy>=DELTA@ROUND")
        delta_s, round_s = body.split("@", 1)
        return entropy_floor(int(round_s), float(delta_s))
    if spec.startswith("const:"):
        body = spec[len("const:"):]
        if "=" not in body:
            raise ValueError(f"bad restriction spec {spec!r}: expected const:PLAYER=ANSWER")
        player_s, answer = body.split("=", 1)
        return const_answer_filter(int(player_s), answer)
    raise ValueError(f"bad restriction spec {spec!r}")


def _fmt(x: float) -> str:
    return repr(float(x))


def _bool(b: bool) -> str:
    return "true" if b else "false"


def cmd_value(args, cfg: RunConfig) -> int:
    g = load_game(args.game)
    filters = [_parse_restrict_spec(s) for s in args.restrict or []]
    if args.repeat and args.repeat > 1:
        g = repeat(g, args.repeat, max_joint_tuples=cfg.max_joint_tuples)
    if filters:
        report = restricted_value(g, filters, max_profiles=cfg.max_strategy_profiles)
    else:
        report = optimal_value(g, max_profiles=cfg.max_strategy_profiles)

    os.makedirs(cfg.output_dir, exist_ok=True)
    columns = ("value", "exact", "strategies_searched", "admitted_count")
    row = [
        _fmt(report.value),
        _bool(report.exact),
        str(report.strategies_searched),
        "" if report.admitted_count is None else str(report.admitted_count),
    ]
    comments = [f"command=value game={os.path.basename(args.game)} "
                f"repeat={args.repeat or 1} restrict={';'.join(args.restrict or []) or 'none'}"]
    csv_path = os.path.join(cfg.output_dir, "value_report.csv")
    write_csv(csv_path, cfg, comments, columns, [row])

    txt_path = os.path.join(cfg.output_dir, "value_report.txt")
    with open(txt_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"value = {report.value!r}\n")
        fh.write(f"exact = {report.exact}\n")
        fh.write(f"strategies_searched = {report.strategies_searched}\n")
        if report.admitted_count is not None:
            fh.write(f"admitted_count = {report.admitted_count}\n")
        if report.argmax_strategy is not None:
            for i, m in enumerate(report.argmax_strategy.answer_maps):
                entries = " ".join(f"{q}->{a}" for q, a in m.items())
                fh.write(f"player {i}: {entries}\n")
    print(f"value = {report.value!r} (exact={report.exact}); wrote {csv_path}")
    return 0


def cmd_anchor(args, cfg: RunConfig) -> int:
    g = load_game(args.game)
    anchored = anchor(g, args.alpha)
    save_game(anchored, args.out)
    print(f"anchored game written to {args.out}")
    return 0


def _sampler_config(path: str | None) -> SamplerConfig:
    cfg = SamplerConfig()
    if path is None:
        return cfg
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    allowed = {"n_players", "alphabet_size", "n", "answer_size", "bound2_c", "premise_targeted"}
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown sampler config keys: {sorted(unknown)}")
    return replace(cfg, **data)


def cmd_check(args, cfg: RunConfig) -> int:
    if args.bound not in BOUND_NAMES:
        print(f"unknown bound {args.bound!r}; valid names: {', '.join(BOUND_NAMES)}",
              file=sys.stderr)
        return 1
    sampler = _sampler_config(args.params)
    fixed_mu = load_mu(args.mu) if args.mu else None
    table = search_counterexamples(
        args.bound, sampler, seed=args.seed if args.seed is not None else cfg.seed,
        trials=args.trials, tol=cfg.tol, fixed_mu=fixed_mu,
    )
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, f"findings_{args.bound}.csv")
    comments = [
        f"command=check bound={args.bound} trials={args.trials}",
        f"sampler: n_players={sampler.n_players} alphabet_size={sampler.alphabet_size} "
        f"n={sampler.n} answer_size={sampler.answer_size} "
        f"premise_targeted={_bool(sampler.premise_targeted)}",
        "system1 delta products run over {0..n} minus the cumulative subset indices",
        f"summary: premise_satisfying={table.premise_satisfying} "
        f"violations={len(table.violations)}",
    ]
    rows = [f.csv_row() for f in table.rows]
    write_csv(path, cfg, comments, FINDINGS_CSV_COLUMNS, rows)
    print(f"{table.trials} trials, {table.premise_satisfying} premise-satisfying, "
          f"{len(table.violations)} violations; wrote {path}")
    return 0


def _decay_params(path: str | None) -> dict:
    defaults = {
        "eps": 0.25,
        "c": None,          # filled from the multiplayer c-cap
        "gamma": 0.9,
        "c_k": 1.0,
        "k": None,          # defaults to the player count
        "q": 1.0,
        "hint_h": 1.0,
        "eps_i": 0.5,
        "delta_i": 0.5,
    }
    if path is None:
        return defaults
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    unknown = set(data) - set(defaults)
    if unknown:
        raise ValueError(f"unknown bound-params keys: {sorted(unknown)}")
    defaults.update(data)
    return defaults


def cmd_decay_curve(args, cfg: RunConfig) -> int:
    g = load_game(args.game)
    anchored = anchor(g, args.alpha)
    params = _decay_params(args.bound_params)
    n_players = anchored.n_players
    c_mult = params["c"] if params["c"] is not None else 0.5 * multiplayer_c_cap(n_players)
    k_val = params["k"] if params["k"] is not None else n_players
    s_val = s_param(anchored)

    columns = ("n", "omega", "exact", "bound_multiplayer", "multiplayer_vacuous",
               "bound_kplayer", "kplayer_vacuous", "main_t1_rhs")
    rows = []
    for n in range(1, args.n_max + 1):
        g_rep = repeat(anchored, n, max_joint_tuples=cfg.max_joint_tuples)
        try:
            report = optimal_value(g_rep, max_profiles=cfg.max_strategy_profiles)
        except CapExceededError:
            report = local_search_value(g_rep, seed=cfg.seed, iterations=args.local_iterations)
        amp = AmpParams(eps=(params["eps"],), delta=(params["delta_i"],),
                        n=n, n_players=n_players)
        mult_bound = decay_bound_multiplayer(amp, args.alpha, c_mult, s_val)
        kp_bound = decay_bound_kplayer(params["gamma"], params["c_k"], args.alpha,
                                       int(k_val), n, s_val)
        t1 = AmpParams(eps=(params["eps_i"],), delta=(params["delta_i"],),
                       q=(params["q"],), hint_h=(params["hint_h"],),
                       n=n, n_players=n_players)
        rhs = main_t1_rhs(t1, 0)
        rows.append([
            str(n),
            _fmt(report.value),
            _bool(report.exact),
            _fmt(mult_bound.value),
            _bool(mult_bound.vacuous),
            _fmt(kp_bound.value),
            _bool(kp_bound.vacuous),
            _fmt(rhs),
        ])

    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, "decay_curve.csv")
    comments = [
        f"command=decay-curve game={os.path.basename(args.game)} alpha={args.alpha!r} "
        f"n_max={args.n_max}",
        f"bound params: eps={params['eps']!r} c={c_mult!r} gamma={params['gamma']!r} "
        f"c_k={params['c_k']!r} k={k_val} s={s_val!r} "
        f"q={params['q']!r} hint_h={params['hint_h']!r} "
        f"eps_i={params['eps_i']!r} delta_i={params['delta_i']!r}",
    ]
    write_csv(path, cfg, comments, columns, rows)
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def cmd_entropy(args, cfg: RunConfig) -> int:
    with open(args.file, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GameFormatError(f"{args.file}: not valid JSON (line {exc.lineno})") from exc
    if "predicate" in data:
        dist = game_from_dict(data).question_dist
    else:
        # bare distribution file: questions + pi only
        stub = dict(data)
        stub.setdefault("n_players", len(data.get("questions", [])))
        stub["answers"] = [["0"] for _ in range(stub["n_players"])]
        stub["predicate"] = []
        dist = game_from_dict(stub).question_dist
    report = entropy(dist)
    print(f"shannon_bits = {report.shannon_bits!r}")
    print(f"paper_signed = {report.paper_signed!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parrep",
        description="Multiplayer games: exact values, anchoring/repetition, "
                    "amplification bound checks.",
    )
    parser.add_argument("--config", help="optional JSON run-config file")
    parser.add_argument("--out-dir", help="output directory (default '.')")
    parser.add_argument("--tol", type=float, help="bound-report tolerance")
    parser.add_argument("--max-joint-tuples", type=int, help="repetition cap")
    parser.add_argument("--max-strategy-profiles", type=int, help="exhaustive search cap")
    sub = parser.add_subparsers(dest="command", required=True)

    p_value = sub.add_parser("value", help="exact optimal value of a game file")
    p_value.add_argument("game")
    p_value.add_argument("--restrict", action="append",
                         help="restriction spec: entropy>=DELTA@ROUND or const:PLAYER=ANSWER")
    p_value.add_argument("--repeat", type=int, default=1, help="parallel repetition count")
    p_value.set_defaults(func=cmd_value)

    p_anchor = sub.add_parser("anchor", help="write the alpha-anchored game")
    p_anchor.add_argument("game")
    p_anchor.add_argument("--alpha", type=float, required=True)
    p_anchor.add_argument("--out", required=True)
    p_anchor.set_defaults(func=cmd_anchor)

    p_check = sub.add_parser("check", help="seeded counterexample search for one bound")
    p_check.add_argument("--bound", required=True)
    p_check.add_argument("--mu", help="optional fixed mu-table file")
    p_check.add_argument("--params", help="optional sampler-config JSON")
    p_check.add_argument("--trials", type=int, default=1000)
    p_check.add_argument("--seed", type=int, default=None)
    p_check.set_defaults(func=cmd_check)

    p_curve = sub.add_parser("decay-curve", help="omega and decay bounds vs repetition count")
    p_curve.add_argument("game")
    p_curve.add_argument("--alpha", type=float, required=True)
    p_curve.add_argument("--n-max", type=int, required=True)
    p_curve.add_argument("--bound-params", help="optional JSON with decay parameters")
    p_curve.add_argument("--local-iterations", type=int, default=2000,
                         help="local-search budget above the exhaustive cap")
    p_curve.set_defaults(func=cmd_decay_curve)

    p_entropy = sub.add_parser("entropy", help="entropy of a game or distribution file")
    p_entropy.add_argument("file")
    p_entropy.set_defaults(func=cmd_entropy)
    return parser


def main(argv: list[str] | None = None) -> int:
    _apply_thread_env()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        overrides = {}
        if args.out_dir is not None:
            overrides["output_dir"] = args.out_dir
        if args.tol is not None:
            overrides["tol"] = args.tol
        if args.max_joint_tuples is not None:
            overrides["max_joint_tuples"] = args.max_joint_tuples
        if args.max_strategy_profiles is not None:
            overrides["max_strategy_profiles"] = args.max_strategy_profiles
        if getattr(args, "seed", None) is not None:
            overrides["seed"] = args.seed
        cfg = replace(cfg, **overrides)
        return args.func(args, cfg)
    except CapExceededError as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return 2
    except (GameFormatError, ValidationError, FileNotFoundError, ValueError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
