"""Command-line entry point: ``msana run`` and ``msana compare``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ConfigError, load_config
from .evaluation import EvaluationError, PipelineFault
from .runner import DataError, compare_row, format_table, run_experiment, write_compare, \
    write_reports

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4

log = logging.getLogger("msana")


def _parser():
    p = argparse.ArgumentParser(prog="msana", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="hold-out fit, prequential run, write reports")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int)
    run.add_argument("--threads", type=int)

    cmp_ = sub.add_parser("compare", help="run several methods on the same stream and seed")
    cmp_.add_argument("--config", required=True)
    cmp_.add_argument("--methods", required=True, help="comma-separated, e.g. msana,arf-adwin")
    cmp_.add_argument("--out", help="directory for compare.csv / compare.txt")
    cmp_.add_argument("--seed", type=int)
    return p


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "threads", None) is not None:
        cfg.threads = args.threads
    return cfg.validate()


def _run(args):
    cfg = _load(args)
    results, artifacts = run_experiment(cfg, "msana")
    write_reports(args.out, results, artifacts)
    m = results["metrics"]
    print(f"accuracy={m['accuracy']:.4f} f1={m['f1']:.4f} drifts={len(results['drift_arr'])} "
          f"mean_latency_ms={results['timing']['mean_latency_ms']:.3f} -> {args.out}")


def _compare(args):
    cfg = _load(args)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise ConfigError("--methods is empty")
    from .pipeline import make_pipeline

    for m in methods:  # reject unknown names before any work starts
        make_pipeline(m, cfg, 2, 1)
    rows, full = [], {}
    for m in methods:
        results, _ = run_experiment(cfg, m)
        rows.append(compare_row(m, results))
        full[m] = results
    print(format_table(rows))
    if args.out:
        write_compare(args.out, rows, full)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            _run(args)
        else:
            _compare(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, EvaluationError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PipelineFault as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValueError as exc:
        # unknown or out-of-scope method names
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.debug("unhandled", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
