"""Config-driven experiment execution and report writing."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .evaluation import COMPONENTS, holdout_split, metrics, prequential_run, qos_report
from .pipeline import MSANA, make_pipeline
from .stream import (
    StreamSchema,
    generate_abrupt_drift_stream,
    generate_gradual_drift_stream,
    read_csv_stream,
)

log = logging.getLogger(__name__)


class DataError(RuntimeError):
    """The configured stream could not be read or is unusable."""


def load_stream(cfg: PipelineConfig):
    """Materialize the configured stream. Returns ``(samples, n_classes, n_features)``."""
    s = cfg.stream
    if s.source == "synthetic":
        if s.generator == "abrupt":
            samples = generate_abrupt_drift_stream(cfg.seed, s.n_pre, s.n_post, s.noise)
        else:
            samples = generate_gradual_drift_stream(cfg.seed, s.n_total, s.drift_center,
                                                    s.drift_width, s.noise)
        return samples, 2, samples[0].sample.features.shape[0]
    try:
        schema = StreamSchema.from_file(s.schema) if s.schema else StreamSchema(())
        stream = read_csv_stream(s.path, schema)
        samples = list(stream)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read stream {s.path}: {exc}") from exc
    if not samples:
        raise DataError(f"stream {s.path} has no data rows")
    if stream.missing_values:
        log.warning("%d non-numeric feature cells replaced by 0.0", stream.missing_values)
    return samples, schema.c, samples[0].sample.features.shape[0]


def _canonical_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def run_experiment(cfg: PipelineConfig, method: str = "msana", samples=None):
    """Hold-out fit plus prequential run of ``method``. Returns ``(results, artifacts)``."""
    if samples is None:
        samples, n_classes, n_features = load_stream(cfg)
    else:
        n_classes, n_features = 2, samples[0].sample.features.shape[0]
    ev = cfg.evaluation
    try:
        train, test = holdout_split(samples, ev.train_fraction)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    pipe = make_pipeline(method, cfg, n_classes, n_features)
    pipe.fit_holdout(train)
    res = prequential_run(pipe, test, ev.curve_stride, ev.warmup, n_classes)
    counts = res.counts
    tail_start = test[max(0, len(test) - ev.tail_window)].index
    drift_arr = list(pipe.state.drift_arr) if isinstance(pipe, MSANA) else []
    event_counts = {}
    for e in res.events:
        event_counts[e["event"]] = event_counts.get(e["event"], 0) + 1
    body = {
        "method": method,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "n_train": len(train),
        "n_test": len(test),
        "metrics": metrics(counts, ev.positive_class),
        "tail_accuracy": counts.accuracy_since(tail_start),
        "tail_window": ev.tail_window,
        "confusion": counts.matrix.tolist(),
        "drift_arr": drift_arr,
        "event_counts": event_counts,
        "final_mask": list(pipe.mask.selected),
    }
    if isinstance(pipe, MSANA):
        body["final_followers"] = list(pipe.state.active_followers)
        body["detector"] = {"adwin_drifts": len(pipe.detector.adwin_drifts),
                            "eddm_drifts": len(pipe.detector.eddm_drifts)}
    balancer = pipe.balancer
    body["balancing"] = {"oversampled": balancer.n_oversampled, "dropped": balancer.n_dropped}
    body["determinism_hash"] = _canonical_hash(body)
    body["timing"] = qos_report(res.latency, ev.pdf_bins)
    artifacts = {"curve": counts.curve, "events": res.events, "masks": pipe.mask_history,
                 "predictions": counts.predictions}
    return body, artifacts


def write_reports(out_dir, results: dict, artifacts: dict):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "results.json", "w") as fh:
        json.dump(results, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out / "curve.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "accuracy"])
        w.writerows((i, f"{a:.6f}") for i, a in artifacts["curve"])
    pdf = results["timing"]["latency_pdf"]
    edges = pdf["edges_ms"]
    with open(out / "latency_pdf.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_lo_ms", "bin_hi_ms", "density"])
        for lo, hi, d in zip(edges[:-1], edges[1:], pdf["density"]):
            w.writerow([f"{lo:.6f}", f"{hi:.6f}", f"{d:.6f}"])
    with open(out / "breakdown.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["component", "mean_ms"])
        for c in COMPONENTS:
            w.writerow([c, f"{results['timing']['component_breakdown'][c]:.6f}"])
    with open(out / "events.jsonl", "w") as fh:
        for e in artifacts["events"]:
            fh.write(json.dumps(e, sort_keys=True) + "\n")
    with open(out / "masks.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["fitted_at", "selected"])
        for at, sel in artifacts["masks"]:
            w.writerow([at, " ".join(map(str, sel))])


COMPARE_COLUMNS = ("method", "accuracy", "precision", "recall", "f1", "mean_latency_ms",
                   "throughput_sps")


def compare_row(method: str, results: dict) -> dict:
    m, t = results["metrics"], results["timing"]
    return {"method": method, "accuracy": m["accuracy"], "precision": m["precision"],
            "recall": m["recall"], "f1": m["f1"], "mean_latency_ms": t["mean_latency_ms"],
            "throughput_sps": t["throughput_sps"]}


def format_table(rows) -> str:
    cells = [list(COMPARE_COLUMNS)]
    for r in rows:
        cells.append([r["method"]] + [f"{r[c]:.4f}" if c != "throughput_sps" else f"{r[c]:.1f}"
                                      for c in COMPARE_COLUMNS[1:]])
    widths = [max(len(row[i]) for row in cells) for i in range(len(COMPARE_COLUMNS))]
    lines = []
    for k, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                               for i, (c, w) in enumerate(zip(row, widths))))
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def write_compare(out_dir, rows, full_results=None):
    """``compare.csv`` and ``compare.txt``, plus ``<method>.json`` per method when given."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for method, res in (full_results or {}).items():
        with open(out / f"{method}.json", "w") as fh:
            json.dump(res, fh, indent=2, sort_keys=True)
    with open(out / "compare.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=COMPARE_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in r.items()})
    (out / "compare.txt").write_text(format_table(rows) + "\n")


def accuracy_of(predictions, start_index=None) -> float:
    hits = [t == p for i, t, p in predictions if start_index is None or i >= start_index]
    return float(np.mean(hits)) if hits else 0.0
