"""Delimited report files written by the experiment command and read back by ``report``."""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from .evaluation import RunReport, summarize, table1

REP_COLUMNS = ("scheme", "hidden", "rep", "seed", "tp", "fp", "fn", "tn", "sen", "spe", "pre", "acc", "auc", "epochs")


def fmt(v) -> str:
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    v = float(v)
    return "nan" if math.isnan(v) else f"{v:.6f}"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def repetition_rows(report: RunReport):
    for r in report.results:
        if r.diverged:
            yield (r.scheme, r.hidden, r.rep, r.seed, "", "", "", "", "nan", "nan", "nan", "nan", "nan", r.epochs)
            continue
        m = r.metrics
        yield (r.scheme, r.hidden, r.rep, r.seed, m.tp, m.fp, m.fn, m.tn,
               fmt(m.sen), fmt(m.spe), fmt(m.pre), fmt(m.acc), fmt(r.auc), r.epochs)


def best_rows(report: RunReport):
    """One row per scheme (best accuracy) plus an ``overall`` row."""
    rows, overall = [], None
    for kind in dict.fromkeys(r.scheme for r in report.results):
        b = report.best(kind)
        if b is None:
            continue
        rows.append((kind, b))
        if overall is None or b.metrics.acc > overall[1].metrics.acc:
            overall = (kind, b)
    return rows, overall


def write_report(out_dir, report: RunReport, input_names: dict) -> dict:
    """Write every report file into ``out_dir``; returns name -> path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}

    def put(name, text):
        p = out / name
        atomic_write(p, text)
        paths[name] = p

    put("repetitions.csv", _csv_text(REP_COLUMNS, repetition_rows(report)))
    summary, hist = summarize(report)
    put("summary.csv", _csv_text(
        ("scheme", "hidden", "index", "max", "mean", "sd", "n"),
        ((k, h, i, fmt(mx), fmt(mn), fmt(sd), n) for k, h, i, mx, mn, sd, n in summary),
    ))
    put("distribution.csv", _csv_text(
        ("scheme", "hidden", "index", "bin_lo", "bin_hi", "count"),
        ((k, h, i, f"{lo:g}", f"{hi:g}", c) for k, h, i, lo, hi, c in hist),
    ))
    cols, rows = table1(report)
    put("table1.csv", _csv_text(
        ("index", "stat") + tuple(f"{k} (h={h})" for k, h in cols),
        ((idx, stat, *cells) for idx, stat, cells in rows),
    ))
    best, overall = best_rows(report)
    roc_rows = []
    for kind, b in best:
        for j, (f, t, th) in enumerate(zip(b.roc.fpr, b.roc.tpr, b.roc.thresholds)):
            roc_rows.append((kind, b.hidden, b.rep, j, fmt(f), fmt(t), "inf" if math.isinf(th) else fmt(th)))
    put("roc_best.csv", _csv_text(("scheme", "hidden", "rep", "point", "fpr", "tpr", "threshold"), roc_rows))
    sel = [(k, b.hidden, b.rep, b.seed, fmt(b.metrics.acc), fmt(b.auc), " ".join(input_names.get(k, [])), int(overall is not None and overall[0] == k))
           for k, b in best]
    put("selected.csv", _csv_text(("scheme", "hidden", "rep", "seed", "acc", "auc", "inputs", "overall_best"), sel))
    return paths


def read_csv(path):
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def format_table1(rows) -> str:
    """Plain-text rendering of ``table1.csv`` rows (list of dicts)."""
    if not rows:
        return ""
    cols = list(rows[0].keys())
    width = [max(len(c), *(len(r[c]) for r in rows)) for c in cols]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, width))]
    prev = None
    for r in rows:
        cells = [r[c] for c in cols]
        if cells[0] == prev:
            cells[0] = ""
        else:
            prev = cells[0]
        lines.append("  ".join(v.ljust(w) for v, w in zip(cells, width)))
    return "\n".join(lines)

