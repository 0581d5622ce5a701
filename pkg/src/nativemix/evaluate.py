"""Scoring, seed aggregation, significance testing, and report rendering.

Hate is the positive class throughout. Metrics are stored at full
precision and rounded to two decimals only when a table is rendered.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from .corpus import Label
from .errors import DegenerateVariance, LengthMismatch, MixedCell


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


class Metrics(NamedTuple):
    acc: float
    pre: float
    rec: float
    f1: float


class ScoreResult(NamedTuple):
    cm: ConfusionMatrix
    acc: float
    pre: float
    rec: float
    f1: float

    @property
    def metrics(self) -> Metrics:
        return Metrics(self.acc, self.pre, self.rec, self.f1)


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def score(gold: list[Label], pred: list[Label]) -> ScoreResult:
    """Confusion matrix and accuracy/precision/recall/F1; 0/0 ratios are 0."""
    if len(gold) != len(pred):
        raise LengthMismatch(len(gold), len(pred))
    if not gold:
        raise ValueError("cannot score an empty prediction list")

    tp = fp = fn = tn = 0
    for g, p in zip(gold, pred):
        if p == Label.HATE:
            if g == Label.HATE:
                tp += 1
            else:
                fp += 1
        else:
            if g == Label.HATE:
                fn += 1
            else:
                tn += 1

    acc = (tp + tn) / len(gold)
    pre = _safe_div(tp, tp + fp)
    rec = _safe_div(tp, tp + fn)
    f1 = _safe_div(2 * pre * rec, pre + rec)
    return ScoreResult(ConfusionMatrix(tp, fp, fn, tn), acc, pre, rec, f1)


# --- Welch's t-test -------------------------------------------------------
#
# The p-value comes from the regularized incomplete beta function, evaluated
# with the modified Lentz continued fraction.

def _betacf(a: float, b: float, x: float) -> float:
    max_iter = 300
    eps = 3.0e-16
    fpmin = 1.0e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


def _betainc(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


class WelchResult(NamedTuple):
    t: float
    df: float
    p: float


def welch_t_test(a: list[float], b: list[float]) -> WelchResult:
    """Unequal-variance t statistic, Welch-Satterthwaite df, two-tailed p."""
    if len(a) < 2 or len(b) < 2:
        raise ValueError("both samples need at least two observations")

    def _mean_var(xs):
        m = sum(xs) / len(xs)
        v = sum((x - m) ** 2 for x in xs) / (len(xs) - 1)
        return m, v

    m1, v1 = _mean_var(a)
    m2, v2 = _mean_var(b)
    if v1 == 0.0 and v2 == 0.0:
        raise DegenerateVariance("both samples have zero variance")

    se1 = v1 / len(a)
    se2 = v2 / len(b)
    t = (m1 - m2) / math.sqrt(se1 + se2)
    df = (se1 + se2) ** 2 / (
        se1 ** 2 / (len(a) - 1) + se2 ** 2 / (len(b) - 1)
    )
    p = _betainc(df / 2.0, 0.5, df / (df + t * t))
    return WelchResult(t=t, df=df, p=p)


# --- Per-cell aggregation -------------------------------------------------

@dataclass(frozen=True)
class RunReport:
    """Metrics for one (model, training set, seed) cell, plus the raw
    per-sample predictions they were computed from."""

    model_name: str
    train_set_name: str
    seed: int
    metrics: Metrics
    per_sample: tuple[tuple[str, Label, Label], ...]

    @classmethod
    def from_predictions(
        cls,
        model_name: str,
        train_set_name: str,
        seed: int,
        per_sample: list[tuple[str, Label, Label]],
    ) -> "RunReport":
        result = score([g for _, g, _ in per_sample], [p for _, _, p in per_sample])
        return cls(model_name, train_set_name, seed,
                   result.metrics, tuple(per_sample))


@dataclass(frozen=True)
class CellSummary:
    reports: tuple[RunReport, ...]
    mean_f1: float
    f1_spread: float

    @property
    def model_name(self) -> str:
        return self.reports[0].model_name

    @property
    def train_set_name(self) -> str:
        return self.reports[0].train_set_name

    def mean_metrics(self) -> Metrics:
        n = len(self.reports)
        return Metrics(
            acc=sum(r.metrics.acc for r in self.reports) / n,
            pre=sum(r.metrics.pre for r in self.reports) / n,
            rec=sum(r.metrics.rec for r in self.reports) / n,
            f1=self.mean_f1,
        )


def summarize_cell(reports: list[RunReport]) -> CellSummary:
    """Mean F1 and max-min spread across one cell's seeds."""
    if not reports:
        raise ValueError("a cell needs at least one report")
    keys = {(r.model_name, r.train_set_name) for r in reports}
    if len(keys) > 1:
        raise MixedCell(f"reports span multiple cells: {sorted(keys)}")
    f1s = [r.metrics.f1 for r in reports]
    return CellSummary(
        reports=tuple(reports),
        mean_f1=sum(f1s) / len(f1s),
        f1_spread=max(f1s) - min(f1s),
    )


# --- Rendering ------------------------------------------------------------

SIGNIFICANCE_LEVEL = 0.05


def render_report(
    cells: list[CellSummary],
    significance: dict[tuple[str, str], float] | None = None,
    baseline_set: str | None = None,
) -> tuple[str, str]:
    """Render (summary_csv, text_table) from cell summaries.

    Per training set the highest mean F1 is flagged; a cell improving on
    the baseline training set with p < 0.05 gets a star. Table values are
    rounded to two decimals here only.
    """
    if not cells:
        raise ValueError("nothing to render")
    significance = significance or {}

    models = []
    sets = []
    for cell in cells:
        if cell.model_name not in models:
            models.append(cell.model_name)
        if cell.train_set_name not in sets:
            sets.append(cell.train_set_name)
    grid = {(c.model_name, c.train_set_name): c for c in cells}
    best_per_set = {
        s: max((c for c in cells if c.train_set_name == s),
               key=lambda c: c.mean_f1).model_name
        for s in sets
    }

    csv_buf = io.StringIO()
    csv_buf.write("model,train_set,seeds,mean_acc,mean_pre,mean_rec,"
                  "mean_f1,f1_spread,p_vs_baseline,significant,best_in_set\n")
    for model in models:
        for set_name in sets:
            cell = grid.get((model, set_name))
            if cell is None:
                continue
            mm = cell.mean_metrics()
            p = significance.get((model, set_name))
            starred = p is not None and p < SIGNIFICANCE_LEVEL
            csv_buf.write(
                f"{model},{set_name},{len(cell.reports)},"
                f"{mm.acc!r},{mm.pre!r},{mm.rec!r},{mm.f1!r},"
                f"{cell.f1_spread!r},"
                f"{'' if p is None else repr(p)},"
                f"{str(starred).lower()},"
                f"{str(best_per_set[set_name] == model).lower()}\n"
            )

    lines = []
    header = ["model"] + [f"{s} F1" for s in sets]
    rows = []
    for model in models:
        row = [model]
        for set_name in sets:
            cell = grid.get((model, set_name))
            if cell is None:
                row.append("-")
                continue
            text = f"{cell.mean_f1:.2f} (±{cell.f1_spread / 2:.2f})"
            p = significance.get((model, set_name))
            if p is not None and p < SIGNIFICANCE_LEVEL:
                text += "*"
            if best_per_set[set_name] == model:
                text = f"[{text}]"
            row.append(text)
        rows.append(row)

    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    for row in [header] + rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    lines.append("")
    lines.append("[...] best F1 per training set; * improvement over "
                 f"{baseline_set or 'the baseline'} with p < {SIGNIFICANCE_LEVEL}")
    return csv_buf.getvalue(), "\n".join(lines) + "\n"


# --- Prediction files -----------------------------------------------------

def write_predictions(
    path: str | Path, per_sample: list[tuple[str, Label, Label]]
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for sample_id, gold, pred in per_sample:
            fh.write(json.dumps(
                {"id": sample_id, "gold": gold.value, "pred": pred.value}))
            fh.write("\n")


def read_predictions(path: str | Path) -> list[tuple[str, Label, Label]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            out.append((str(record["id"]),
                        Label(record["gold"]), Label(record["pred"])))
    return out
