"""``gaplab`` command line.

Exit codes: 0 success, 1 numerical or validation failure, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import constructions, montecarlo
from .centrality import bonacich, graph_misspec_centrality, shock_misspec_centrality
from .demo import bonacich_counterexample
from .game import AssumptionError, SingularSystemError, nash_equilibrium, validate_game
from .gap import (
    DirectOnlyError,
    PreconditionError,
    UndefinedRelativeGap,
    analyze_profile,
    relative_gap,
    write_sweep_csv,
)
from .io import SchemaError, dump_json, game_from_dict, profile_from_dict, profile_to_dict
from .quadrature import QuadratureError

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _read_json(path: str):
    try:
        with open(path) as f:
            text = f.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _write_text(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# ---------------------------------------------------------------- subcommands


def cmd_solve(args) -> int:
    game = game_from_dict(_read_json(args.game))
    report = validate_game(game)
    u = nash_equilibrium(game.P, game.epsilon)
    out = {
        "equilibrium": [float(x) for x in u.u],
        "blocks": [[float(x) for x in u.block(i)] for i in range(game.structure.n)],
        "validation": report.to_dict(),
    }
    _write_text(_json_text(out), args.out)
    return EXIT_OK if report.passed else EXIT_NUMERIC


def cmd_gap(args) -> int:
    profile = profile_from_dict(_read_json(args.profile))
    reports = analyze_profile(profile, closed_form=args.closed_form, bound=args.bound, delta=args.delta)
    if args.format == "json":
        _write_text(_json_text([r.to_dict() for r in reports]), args.out)
    elif args.format == "csv":
        buf = io.StringIO()
        write_sweep_csv(((0, r) for r in reports), buf)
        _write_text(buf.getvalue(), args.out)
    else:
        lines = [f"profile shape: {profile.shape}"]
        head = f"{'player':>6} {'predicted':>14} {'realized':>14} {'gap':>14} {'closed':>14} {'bound':>14} {'rel_gap':>10}"
        lines.append(head)
        for r in reports:
            try:
                rel = f"{relative_gap(r):10.4g}"
            except UndefinedRelativeGap:
                rel = f"{'undef':>10}"
            cf = "" if r.gap_closed_form is None else f"{r.gap_closed_form:.8g}"
            bd = "" if r.bound is None else f"{r.bound:.8g}"
            lines.append(
                f"{r.player:>6} {r.predicted_cost:>14.8g} {r.realized_cost:>14.8g} {r.gap_direct:>14.8g} "
                f"{cf:>14} {bd:>14} {rel}"
            )
            if args.per_pair and r.per_pair_terms:
                for j, t in r.per_pair_terms:
                    lines.append(f"{'':>6}   j={j}: {t:.8g}")
        _write_text("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_centrality(args, parser) -> int:
    data = _read_json(args.file)
    if args.kind == "bonacich":
        P = (profile_from_dict(data).matrices[0] if "base" in data else game_from_dict(data).P)
        _write_text(_json_text([c.to_dict() for c in bonacich(P)]), args.out)
        return EXIT_OK
    if args.i is None or args.j is None:
        parser.error(f"--kind {args.kind} requires --i and --j")
    if args.kind == "shock":
        P = profile_from_dict(data).matrices[0] if "base" in data else game_from_dict(data).P
        pair = shock_misspec_centrality(P, args.i, args.j)
    else:
        if "base" not in data:
            raise InputError("--kind graph needs a conjecture-profile file")
        prof = profile_from_dict(data)
        pair = graph_misspec_centrality(prof.matrices[args.i], prof.matrices[args.j], args.i, args.j)
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\r\n")
            for row in pair.matrix:
                w.writerow([repr(float(x)) for x in row])
    out = {"kind": pair.kind, "i": pair.i, "j": pair.j, "matrix": [[float(x) for x in r] for r in pair.matrix]}
    _write_text(_json_text(out), args.out)
    return EXIT_OK


def cmd_construct(args) -> int:
    if args.which == "shock":
        profile, cert = constructions.build_shock_cycle(args.delta, args.M, gamma=args.gamma, beta=args.beta)
    else:
        profile, cert = constructions.build_graph_cycle(args.delta, args.M, gamma=args.gamma, pattern=args.pattern)
    cert["invocation"] = {k: v for k, v in vars(args).items() if k not in ("func", "verbose")}
    if args.profile_out:
        with open(args.profile_out, "w") as f:
            dump_json(profile_to_dict(profile), f)
    text = _json_text(cert)
    if args.certificate_out:
        Path(args.certificate_out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK if cert["passed"] else EXIT_NUMERIC


def cmd_replay(args) -> int:
    cert = _read_json(args.certificate)
    _, gaps = constructions.replay_certificate(cert)
    ok = all(g > cert["M"] for g in gaps)
    _write_text(_json_text({"gap_direct": gaps, "M": cert["M"], "passed": ok}), None)
    return EXIT_OK if ok else EXIT_NUMERIC


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


MC_FLAGS = {
    "n": "n",
    "block_sizes": "block_sizes",
    "mode": "mode",
    "delta_s": "delta_s",
    "delta_g": "delta_g",
    "target_sv": "target_sv",
    "trials": "trials",
    "seed": "master_seed",
    "fixed_network": "fixed_network",
}


def mc_config(args) -> montecarlo.McConfig:
    """Merge flags over the optional JSON config over defaults."""
    cfg: dict = {}
    if args.config:
        data = _read_json(args.config)
        if not isinstance(data, dict):
            raise InputError(f"{args.config}: config must be a JSON object")
        cfg.update(data)
        if "seed" in cfg:
            cfg["master_seed"] = cfg.pop("seed")
    for flag, key in MC_FLAGS.items():
        v = getattr(args, flag)
        if v is not None:
            cfg[key] = v
    if args.n is not None and args.block_sizes is None:
        cfg.pop("block_sizes", None)
    elif cfg.get("block_sizes") is not None:
        cfg.pop("n", None)
    return montecarlo.McConfig.from_dict(cfg)


def cmd_mc(args) -> int:
    config = mc_config(args)
    if args.sweep_delta_s is not None:
        records = montecarlo.run_sweep(config, args.sweep_delta_s, "delta_s", threads=args.threads)
    elif args.sweep_delta_g is not None:
        records = montecarlo.run_sweep(config, args.sweep_delta_g, "delta_g", threads=args.threads)
    else:
        records = montecarlo.run_trials(config, threads=args.threads)
    buf = io.StringIO()
    montecarlo.write_records_csv(records, buf)
    _write_text(buf.getvalue(), args.out)
    if args.summary:
        with open(args.summary, "w", newline="") as f:
            montecarlo.summarize(records).write_csv(f)
    failed = [r for r in records if r.error is not None]
    for r in failed[:5]:
        print(f"trial {r.trial_id} failed: {r.error}", file=sys.stderr)
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_demo(args) -> int:
    _write_text(_json_text(bonacich_counterexample()), args.out)
    return EXIT_OK


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaplab", description="Game-to-real gap analysis for quadratic network games.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="Nash equilibrium and validation report of a game file")
    s.add_argument("game")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("gap", help="per-player gaps of a conjecture profile")
    g.add_argument("profile")
    g.add_argument("--closed-form", action="store_true")
    g.add_argument("--bound", action="store_true")
    g.add_argument("--per-pair", action="store_true")
    g.add_argument("--delta", type=float, help="misalignment level for the bound (default: measured)")
    g.add_argument("--format", choices=("table", "json", "csv"), default="table")
    g.add_argument("-o", "--out")
    g.set_defaults(func=cmd_gap)

    c = sub.add_parser("centrality", help="Bonacich or pairwise misspecification centrality")
    c.add_argument("file", help="game file, or profile file for --kind graph")
    c.add_argument("--kind", choices=("bonacich", "shock", "graph"), default="bonacich")
    c.add_argument("--i", type=int)
    c.add_argument("--j", type=int)
    c.add_argument("--csv", help="also dump the pair matrix as CSV")
    c.add_argument("-o", "--out")
    c.set_defaults(func=lambda a: cmd_centrality(a, c))

    k = sub.add_parser("construct", help="adversarial 3-player instances with a certificate")
    k.add_argument("which", choices=("shock", "graph"))
    k.add_argument("--delta", type=float, required=True)
    k.add_argument("--M", type=float, required=True)
    k.add_argument("--gamma", type=float, help="force gamma (diagnostic mode)")
    k.add_argument("--beta", type=float, help="shock construction only: override beta")
    k.add_argument("--pattern", choices=tuple(constructions.SHOCK_PATTERNS), default="symmetric",
                   help="graph construction only: shared shock direction")
    k.add_argument("--profile-out")
    k.add_argument("--certificate-out")
    k.set_defaults(func=cmd_construct)

    r = sub.add_parser("replay", help="re-simulate a construction certificate")
    r.add_argument("certificate")
    r.set_defaults(func=cmd_replay)

    m = sub.add_parser("mc", help="Monte Carlo misalignment experiments (CSV)")
    m.add_argument("--config", help="JSON file with McConfig fields; flags take precedence")
    m.add_argument("--mode", choices=montecarlo.MODES)
    m.add_argument("--n", type=int)
    m.add_argument("--block-sizes", type=_ints)
    m.add_argument("--delta-s", type=float)
    m.add_argument("--delta-g", type=float)
    m.add_argument("--target-sv", type=float)
    m.add_argument("--trials", type=int)
    m.add_argument("--seed", type=int)
    m.add_argument("--fixed-network", action="store_const", const=True, default=None)
    m.add_argument("--sweep-delta-s", type=_floats, help="comma-separated levels")
    m.add_argument("--sweep-delta-g", type=_floats, help="comma-separated levels")
    m.add_argument("--threads", type=int, help="worker threads (default: $GAPLAB_THREADS or 1)")
    m.add_argument("--summary", help="write the quantile table CSV here")
    m.add_argument("-o", "--out")
    m.set_defaults(func=cmd_mc)

    d = sub.add_parser("demo", help="constructed example where Bonacich centrality misranks gap impact")
    d.add_argument("-o", "--out")
    d.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (InputError, SchemaError, DirectOnlyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SingularSystemError, AssumptionError, PreconditionError, QuadratureError,
            constructions.ConstructionError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
