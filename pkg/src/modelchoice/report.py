"""Report records, histograms and their serialization.

Outputs are deterministic: fixed field order, floats rounded to 12
significant digits, and every file carries the package version.
Structured records are JSON; tables and histograms are CSV preceded by
``#``-prefixed metadata lines.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .aitkin import dic, lr_product_draws
from .joint import ModelPairConfig, bayes_factor, bayes_decision, lr_joint_draws, posterior_model_probs
from .models import as_dataset, derive_seed, marginal_likelihood, sample_posterior

FORMATS = ("json", "csv")
RNG_NOTE = "numpy PCG64, streams from SeedSequence(seed, subcommand, stream name)"


@dataclass
class ComparisonReport:
    model1: str
    model2: str
    marginal1: float
    marginal2: float
    bayes_factor: float
    post_prob1: float
    post_prob2: float
    dic1: dict
    dic2: dict
    pr_lr_gt1_product: float
    pr_lr_gt1_joint: float
    decision: dict
    draws: int
    seed: int
    wall_time: float | None
    version: str = __version__


@dataclass
class HistogramData:
    label: str
    edges: np.ndarray
    counts: np.ndarray
    total: int
    below: int = 0
    above: int = 0

    def __post_init__(self):
        if np.any(np.diff(self.edges) <= 0):
            raise ValueError("histogram edges must be strictly increasing")
        if int(self.counts.sum()) != self.total:
            raise ValueError("histogram counts must sum to the total")


def compare(pair: ModelPairConfig, data, draws: int, seed: int, timed: bool = False):
    """All criteria for one model pair, plus the two log-LR samples behind them."""
    start = time.perf_counter()
    data = as_dataset(data)
    m1, m2 = pair.model1, pair.model2
    w1, w2 = posterior_model_probs(pair, data)
    dics = [
        dic(m, data, sample_posterior(m, data, draws, derive_seed(seed, "dic", j)))
        for j, m in ((1, m1), (2, m2))
    ]
    product = lr_product_draws(m1, m2, data, draws, derive_seed(seed, "product"))
    joint = lr_joint_draws(pair, data, draws, derive_seed(seed, "joint"))
    decision = bayes_decision(pair, data, draws, derive_seed(seed, "joint"))
    report = ComparisonReport(
        model1=m1.label,
        model2=m2.label,
        marginal1=marginal_likelihood(m1, data),
        marginal2=marginal_likelihood(m2, data),
        bayes_factor=bayes_factor(m1, m2, data),
        post_prob1=w1,
        post_prob2=w2,
        dic1=asdict(dics[0]),
        dic2=asdict(dics[1]),
        pr_lr_gt1_product=product.prob_gt1(),
        pr_lr_gt1_joint=joint.prob_gt1(),
        decision=asdict(decision),
        draws=draws,
        seed=seed,
        wall_time=round(time.perf_counter() - start, 3) if timed else None,
    )
    return report, product, joint


def shared_histograms(samples: dict, bins: int = 200, quantiles=(0.001, 0.999)) -> list[HistogramData]:
    """Equal-width histograms on one common grid spanning the pooled quantile range."""
    pooled = np.concatenate([np.asarray(v, dtype=float) for v in samples.values()])
    lo, hi = np.quantile(pooled, quantiles)
    if not hi > lo:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)
    out = []
    for label, values in samples.items():
        v = np.asarray(values, dtype=float)
        inside = (v >= lo) & (v <= hi)
        counts, _ = np.histogram(v[inside], bins=edges)
        out.append(HistogramData(label, edges, counts, int(inside.sum()),
                                 int((v < lo).sum()), int((v > hi).sum())))
    return out


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

def fmt(x) -> str:
    return f"{x:.12g}"


def _round(obj):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return str(obj)
        return float(fmt(obj))
    if isinstance(obj, np.floating):
        return _round(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _atomic_write(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def record_text(record: dict) -> str:
    body = {"version": __version__}
    body.update({k: v for k, v in record.items() if k != "version"})
    return json.dumps(_round(body), indent=2) + "\n"


def table_text(meta: dict, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# version: {__version__}\n")
    for key, value in meta.items():
        buf.write(f"# {key}: {fmt(value) if isinstance(value, float) else value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def emit(obj, path, fmt_flag: str = "json", meta: dict | None = None) -> Path:
    """Write a report, table or histogram; returns the path written.

    ``obj`` may be a ``ComparisonReport``, a ``HistogramData`` (always CSV), a
    dict record, or a ``(columns, rows)`` table.
    """
    if fmt_flag not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    meta = dict(meta or {})
    path = Path(path)
    if isinstance(obj, HistogramData):
        meta.update({"construction": obj.label, "total": obj.total, "below_range": obj.below,
                     "above_range": obj.above, "bins": len(obj.counts)})
        rows = list(zip(obj.edges[:-1].tolist(), obj.counts.tolist()))
        text = table_text(meta, ["edge", "count"], rows)
        path = path.with_suffix(".csv")
    elif isinstance(obj, tuple):
        columns, rows = obj
        if fmt_flag == "csv":
            text = table_text(meta, columns, rows)
        else:
            text = record_text({**meta, "rows": [dict(zip(columns, r)) for r in rows]})
        path = path.with_suffix("." + fmt_flag)
    else:
        record = {f.name: getattr(obj, f.name) for f in fields(obj)} if isinstance(obj, ComparisonReport) else obj
        if fmt_flag == "csv":
            flat = _flatten(record)
            text = table_text(meta, ["field", "value"], list(flat.items()))
        else:
            text = record_text({**record, **meta})
        path = path.with_suffix("." + fmt_flag)
    _atomic_write(path, text)
    return path


def _flatten(record: dict, prefix: str = "") -> dict:
    out = {}
    for key, value in record.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, name + "."))
        else:
            out[name] = "" if value is None else value
    return out
