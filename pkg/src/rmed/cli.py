"""Command-line front end: ``rmed list | validate | analyze | run``.

Exit codes: 0 success, 1 usage or config error, 2 data or validation error,
3 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import _backend
from .config import PRESETS, ConfigError, ExperimentConfig, load_config, parse_config
from .preference import (
    DATASETS,
    MatrixError,
    MatrixValidationError,
    NoCondorcetWinnerError,
    PreferenceMatrix,
    build,
    condorcet_winner,
    from_csv,
    true_lb_coefficient,
)
from .rng import run_seeds
from .simulator import RunSpec, aggregate, run_many

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    pass


def _fail(code: int, msg: str) -> int:
    print(f"rmed: {msg}", file=sys.stderr)
    return code


def _read_matrix(path: str) -> PreferenceMatrix:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return from_csv(text)
    except MatrixError as e:
        raise MatrixError(f"{path}: {e}") from None


# ------------------------------------------------------------------ list


def cmd_list(args) -> int:
    listing = [
        ("six_rankers", {}, "-"),
        ("cyclic", {}, "-"),
        ("arithmetic", {}, "k=8 (2..11)"),
        ("example1(q)", {"q": 0.7}, "q in (0,1), required"),
    ]
    for name, sample, params in listing:
        m = build(name.split("(")[0], **sample)
        print(f"{name:<13} K={m.k:<3} params: {params:<22} Condorcet winner: {condorcet_winner(m)}")
    return EXIT_OK


# ------------------------------------------------------------------ validate


def cmd_validate(args) -> int:
    try:
        text = Path(args.path).read_text(encoding="utf-8")
    except OSError as e:
        return _fail(EXIT_DATA, f"{args.path}: cannot read: {e.strerror}")
    try:
        m = from_csv(text)
    except MatrixValidationError as e:
        print(f"invalid, {len(e.violations)} violation(s):")
        for v in e.violations:
            print(f"  {v}")
        return EXIT_DATA
    except MatrixError as e:
        return _fail(EXIT_DATA, f"{args.path}: {e}")
    w = condorcet_winner(m)
    winner = f"Condorcet winner: {w}" if w is not None else "no Condorcet winner"
    print(f"valid, K={m.k}, {winner}")
    return EXIT_OK


# ------------------------------------------------------------------ analyze


def _resolve_source(args) -> tuple[str, PreferenceMatrix]:
    src = args.source
    if src in DATASETS:
        params = {}
        if src == "example1":
            if args.q is None:
                raise UsageError("example1 requires --q")
            params["q"] = args.q
        elif args.q is not None:
            raise UsageError(f"--q does not apply to {src}")
        if src == "arithmetic" and args.k is not None:
            params["k"] = args.k
        elif args.k is not None:
            raise UsageError(f"--k does not apply to {src}")
        label = src + "".join(f" {k}={v}" for k, v in params.items())
        return label, build(src, **params)
    if args.q is not None or args.k is not None:
        raise UsageError("--q/--k only apply to builder datasets")
    return src, _read_matrix(src)


def cmd_analyze(args) -> int:
    try:
        label, m = _resolve_source(args)
    except UsageError as e:
        return _fail(EXIT_USAGE, str(e))
    except ValueError as e:
        return _fail(EXIT_DATA, str(e))
    except OSError as e:
        return _fail(EXIT_DATA, f"{args.source}: cannot read: {e.strerror}")
    try:
        rep = true_lb_coefficient(m)
    except NoCondorcetWinnerError:
        return _fail(EXIT_DATA, f"{label}: no Condorcet winner; bounds are undefined")
    if args.json:
        print(json.dumps({
            "dataset": label,
            "k": m.k,
            "winner": rep.winner,
            "best_opponent": {str(i): b for i, b in rep.minimizers.items()},
            "terms": {str(i): x for i, x in rep.terms.items()},
            "true_lb": rep.true_lb,
            "lb1": rep.lb1,
        }, indent=2))
        return EXIT_OK
    print(f"dataset: {label}, K={m.k}, Condorcet winner: {rep.winner}")
    print("arm  b*  term")
    for i, b in rep.minimizers.items():
        print(f"{i:<4} {b:<3} {rep.terms[i]!r}")
    print("b*: " + ", ".join(f"{i}->{b}" for i, b in rep.minimizers.items()))
    print(f"TrueLB: {rep.true_lb!r}")
    print(f"LB1: {rep.lb1!r}")
    return EXIT_OK


# ------------------------------------------------------------------ run


def _threads(flag: int | None) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("RMED_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _csv_float(x) -> str:
    return repr(float(x))


def execute(cfg: ExperimentConfig, threads: int = 1, raw: bool = False, out_dir=None) -> list[Path]:
    """Run every policy of ``cfg`` and write CSVs; returns the written paths."""
    m = cfg.load_matrix()
    dataset = cfg.dataset_id()
    out = Path(out_dir if out_dir is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    seeds = run_seeds(cfg.base_seed, cfg.runs)
    written = []
    summary = []
    for entry in cfg.policies:
        pcfg = entry.to_config(cfg.horizon)
        specs = [RunSpec(m, pcfg, cfg.horizon, s, dataset, cfg.checkpoints) for s in seeds]
        traces = sorted(run_many(specs, threads), key=lambda tr: tr.seed)
        agg = aggregate(traces)
        rows = [
            f"{entry.label},{dataset},{int(t)},{_csv_float(mu)},{_csv_float(sd)},{agg.runs}\n"
            for t, mu, sd in zip(agg.rounds, agg.mean, agg.sd)
        ]
        summary.extend(rows)
        path = out / f"{dataset}__{entry.label}.csv"
        _write(path, "policy,dataset,t,mean_regret,sd_regret,runs\n", rows)
        written.append(path)
        if raw:
            raw_rows = [
                f"{entry.label},{dataset},{tr.seed},{int(t)},{_csv_float(r)}\n"
                for tr in traces
                for t, r in zip(tr.rounds, tr.regret)
            ]
            path = out / f"{dataset}__{entry.label}__runs.csv"
            _write(path, "policy,dataset,seed,t,cum_regret\n", raw_rows)
            written.append(path)
    path = out / f"{dataset}__summary.csv"
    _write(path, "policy,dataset,t,mean_regret,sd_regret,runs\n", summary)
    written.append(path)
    return written


def _write(path: Path, header: str, rows: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header)
        fh.writelines(rows)


def cmd_run(args) -> int:
    if (args.config is None) == (args.preset is None):
        return _fail(EXIT_USAGE, "give exactly one of CONFIG or --preset")
    try:
        if args.preset is not None:
            cfg = parse_config(PRESETS[args.preset])
        else:
            cfg = load_config(args.config)
    except ConfigError as e:
        print("rmed: invalid config:", file=sys.stderr)
        for err in e.errors:
            print(f"  - {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        return _fail(EXIT_USAGE, f"{args.config}: cannot read: {e.strerror}")
    if args.print_config:
        print(json.dumps(cfg.to_dict(), indent=2))
        return EXIT_OK
    try:
        cfg.load_matrix()
    except (ValueError, OSError) as e:
        return _fail(EXIT_DATA, f"dataset: {e}")
    threads = _threads(args.threads)
    try:
        paths = execute(cfg, threads, args.raw, args.output)
    except NoCondorcetWinnerError as e:
        return _fail(EXIT_DATA, str(e))
    except (RuntimeError, ValueError, OSError) as e:
        return _fail(EXIT_RUNTIME, f"run failed: {e}")
    backend = "compiled" if _backend.HAVE_CORE else "python"
    print(f"{len(cfg.policies)} policies x {cfg.runs} runs, T={cfg.horizon}, "
          f"{threads} thread(s), {backend} core")
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


# ------------------------------------------------------------------ entry


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rmed", description="RMED dueling-bandit experiments")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("list", help="list built-in datasets")
    s.set_defaults(func=cmd_list)

    s = sub.add_parser("validate", help="check a preference-matrix CSV")
    s.add_argument("path")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("analyze", help="regret lower-bound constants of a matrix")
    s.add_argument("source", help="builder name or CSV path")
    s.add_argument("--q", type=float, help="example1 parameter")
    s.add_argument("--k", type=int, help="arithmetic arm count")
    s.add_argument("--json", action="store_true", help="machine-readable output")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("run", help="run an experiment and write regret CSVs")
    s.add_argument("config", nargs="?", help="JSON config file")
    s.add_argument("--preset", choices=sorted(PRESETS))
    s.add_argument("--threads", type=int, help="worker threads (default: $RMED_THREADS or CPU count)")
    s.add_argument("--raw", action="store_true", help="also write per-run regret CSVs")
    s.add_argument("--output", help="override the output directory")
    s.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    s.set_defaults(func=cmd_run)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
