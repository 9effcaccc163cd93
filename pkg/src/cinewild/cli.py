"""Command-line front end.

Subcommands::

    cinewild run      --preset e1 | --config FILE  [--mode M] [--seed S] --out DIR
    cinewild compare  --preset e1 | --config FILE  [--seeds N] --out DIR
    cinewild plot     --in metrics.csv --out DIR [--which PANEL ...]
    cinewild presets  [--dump NAME]

Exit status is 0 on success, 1 when a run fails, and 2 for invalid input
(bad flags, config validation errors, malformed metrics files).
``CINEWILD_THREADS`` sets the worker count for kernels and for ``compare``.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import kernels
from .config import ConfigError, dumps, load_scenario, loads, save_scenario
from .harness import Scenario, run
from .output import (
    METRICS_FILE,
    SCENARIO_FILE,
    SUMMARY_FILE,
    SchemaError,
    read_metrics_csv,
    read_summary,
    summary_document,
    write_json,
    write_metrics_csv,
    write_summary,
)
from .presets import PRESETS

log = logging.getLogger("cinewild")

EXIT_OK, EXIT_RUNTIME, EXIT_INVALID = 0, 1, 2
MODES = ("cinewild", "baseline")

# Columns of the comparison table, in order.
COMPARE_METRICS = (
    "d_dt", "f", "e_im_x", "e_im_y", "a_norm", "v_norm", "j_prox",
    "pct_inside_fov", "im_d_x", "im_d_x_cent", "e_yaw", "abs_e_yaw",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cinewild", description="Wildlife-aware drone cinematography MPC simulator.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def source(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--config", type=Path, help="scenario JSON file")
        g.add_argument("--preset", choices=sorted(PRESETS), help="built-in experiment")

    r = sub.add_parser("run", help="simulate one scenario in one mode")
    source(r)
    r.add_argument("--mode", choices=MODES, help="default: the config's mode (cinewild for presets)")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", type=Path, required=True)

    c = sub.add_parser("compare", help="run both modes over several seeds")
    source(c)
    c.add_argument("--seeds", type=int, default=10, help="seeds 0..N-1 (default 10)")
    c.add_argument("--out", type=Path, required=True)

    pl = sub.add_parser("plot", help="draw SVG panels from a metrics CSV")
    pl.add_argument("--in", dest="csv", type=Path, required=True)
    pl.add_argument("--out", type=Path, required=True)
    pl.add_argument("--which", action="append", choices=_panels(),
                    help="panel to draw; repeat for several (default: all)")

    ps = sub.add_parser("presets", help="list the built-in experiments")
    ps.add_argument("--dump", choices=sorted(PRESETS), help="print a preset as a scenario file")
    return p


def _panels():
    from .plots import PANELS

    return PANELS


def _scenario(args) -> Scenario:
    if args.config is not None:
        return load_scenario(args.config)
    return PRESETS[args.preset]()


def _write_run(sc: Scenario, seed: int, out: Path) -> dict:
    records, summary = run(sc, seed)
    out.mkdir(parents=True, exist_ok=True)
    write_metrics_csv(records, out / METRICS_FILE)
    write_summary(summary, sc, seed, out / SUMMARY_FILE)
    save_scenario(sc, out / SCENARIO_FILE)
    return summary_document(summary, sc, seed)


def cmd_run(args) -> int:
    sc = _scenario(args)
    if args.mode:
        sc = replace(sc, mode=args.mode)
    doc = _write_run(sc, args.seed, args.out)
    o = doc["overall"]
    print(f"{sc.name} {sc.mode} seed {args.seed}: {o['n_steps']} steps, "
          f"mean d_dt {o['d_dt']:.2f} m, mean f {o['f']:.1f} mm -> {args.out}")
    return EXIT_OK


def _compare_job(text: str, mode: str, seed: int, out: str) -> dict:
    sc = replace(loads(text), mode=mode)
    return _write_run(sc, seed, Path(out))


def _worker_init():
    # One process per run; the kernel inside each stays single-threaded.
    os.environ["CINEWILD_THREADS"] = "1"


def _stats(values) -> dict:
    vals = np.array([v for v in values if v is not None], dtype=float)
    if vals.size == 0:
        return {"mean": None, "std": None, "n": 0}
    return {"mean": float(vals.mean()), "std": float(vals.std()), "n": int(vals.size)}


def _fmt(s: dict) -> str:
    if s["mean"] is None:
        return "n/a"
    return f"{s['mean']:.3f} ± {s['std']:.3f}"


def comparison_table(docs: dict[str, list[dict]]) -> tuple[dict, str]:
    """Mean ± std (population) per metric and mode over the seeds."""
    table = {m: {k: _stats([d["overall"][k] for d in docs[m]]) for k in COMPARE_METRICS} for m in docs}
    lines = ["| metric | " + " | ".join(docs) + " |", "|---|" + "---|" * len(docs)]
    for k in COMPARE_METRICS:
        lines.append(f"| {k} | " + " | ".join(_fmt(table[m][k]) for m in docs) + " |")
    return table, "\n".join(lines) + "\n"


def cmd_compare(args) -> int:
    if args.seeds < 1:
        raise UsageError("--seeds must be >= 1")
    sc = _scenario(args)
    text = dumps(sc)
    jobs = [(m, s, str(args.out / m / f"seed_{s}")) for m in MODES for s in range(args.seeds)]
    workers = min(kernels.thread_count(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_worker_init) as pool:
            futs = [pool.submit(_compare_job, text, m, s, o) for m, s, o in jobs]
            results = [f.result() for f in futs]
    else:
        results = [_compare_job(text, m, s, o) for m, s, o in jobs]
    docs = {m: [r for (jm, _, _), r in zip(jobs, results) if jm == m] for m in MODES}
    table, md = comparison_table(docs)
    write_json({"scenario": sc.name, "seeds": list(range(args.seeds)), "metrics": table},
               args.out / "comparison.json")
    (args.out / "comparison.md").write_text(md, encoding="utf-8")
    print(md, end="")
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plots import PANELS, plot_panel

    cols = read_metrics_csv(args.csv)
    doc = read_summary(args.csv.parent / SUMMARY_FILE)
    th = doc.get("thresholds") if doc else None
    title = f"{doc['scenario']} ({doc['mode']}, seed {doc['seed']})" if doc else None
    args.out.mkdir(parents=True, exist_ok=True)
    for which in args.which or PANELS:
        path = plot_panel(cols, which, args.out / f"{which}.svg", th, title)
        print(path)
    return EXIT_OK


def cmd_presets(args) -> int:
    if args.dump:
        sys.stdout.write(dumps(PRESETS[args.dump]()))
        return EXIT_OK
    for name in sorted(PRESETS):
        sc = PRESETS[name]()
        total = sum(s.duration for s in sc.sequences)
        labels = "; ".join(s.label for s in sc.sequences)
        print(f"{name}: {total:g} s at dt {sc.sim.dt:g} s, sequences: {labels}")
    return EXIT_OK


_COMMANDS = {"run": cmd_run, "compare": cmd_compare, "plot": cmd_plot, "presets": cmd_presets}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"cinewild: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, SchemaError, UsageError) as exc:
        print(f"cinewild: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except KeyboardInterrupt:
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - reported, mapped to exit 1
        log.debug("run failed", exc_info=True)
        print(f"cinewild: run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
