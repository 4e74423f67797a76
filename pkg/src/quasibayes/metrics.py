"""Per-replication errors and their aggregation into table rows."""

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

METHODS = ("LMC", "MALA", "OLS", "OLS_imp")
METRICS = ("est", "nmse", "pred")


@dataclass(frozen=True)
class ErrorReport:
    est: float
    nmse: float
    pred: float
    method: str
    replication_seed: int = 0
    acceptance_rate: float = 1.0
    diverged: bool = False

    def to_dict(self):
        d = asdict(self)
        for key in METRICS + ("acceptance_rate",):
            if not math.isfinite(d[key]):
                d[key] = None
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in METRICS + ("acceptance_rate",):
            if d.get(key) is None:
                d[key] = float("nan")
        return cls(**d)


@dataclass(frozen=True)
class AggregateRow:
    method: str
    est_mean: float
    est_sd: float
    nmse_mean: float
    nmse_sd: float
    pred_mean: float
    pred_sd: float
    n_replications: int
    n_diverged: int = 0

    def to_dict(self):
        return asdict(self)


def compute_errors(M_hat, truth, designs, method="MALA", replication_seed=0,
                   acceptance_rate=1.0, diverged=False, predictor=None):
    """Est, Nmse and Pred of an estimate.

    Pred is ``||X (M_hat - M*) Z||_F^2 / (n q)``; pass ``predictor`` (an n x q
    matrix) to measure ``||predictor - X M* Z||_F^2 / (n q)`` instead.
    """
    M_star = getattr(truth, "M_star", truth)
    M_hat = np.asarray(M_hat, dtype=float)
    if M_hat.shape != M_star.shape:
        raise ValueError(f"estimate shape {M_hat.shape} differs from truth {M_star.shape}")
    ref = float(np.sum(M_star * M_star))
    if ref == 0.0:
        raise ValueError("normalised error undefined for a zero true coefficient")
    D = M_hat - M_star
    err = float(np.sum(D * D))
    p, k = M_star.shape
    if predictor is None:
        R = designs.X @ D @ designs.Z
    else:
        R = np.asarray(predictor, dtype=float) - designs.X @ M_star @ designs.Z
    pred = float(np.sum(R * R)) / R.size
    return ErrorReport(err / (p * k), err / ref, pred, method, int(replication_seed),
                       float(acceptance_rate), bool(diverged))


def aggregate(reports):
    """Mean and sample standard deviation (divisor n - 1) per method.

    Diverged replications are excluded from the statistics and counted in
    ``n_diverged``.  A single replication gets standard deviations of 0.
    Rows follow the canonical method order.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to aggregate")
    present = [m for m in METHODS if any(r.method == m for r in reports)]
    present += sorted({r.method for r in reports} - set(METHODS))
    rows = []
    for method in present:
        group = [r for r in reports if r.method == method]
        ok = [r for r in group if not r.diverged]
        stats = {}
        for key in METRICS:
            vals = np.array([getattr(r, key) for r in ok], dtype=float)
            if vals.size == 0:
                stats[key] = (float("nan"), float("nan"))
            elif vals.size == 1:
                stats[key] = (float(vals[0]), 0.0)
            else:
                stats[key] = (float(vals.mean()), float(vals.std(ddof=1)))
        rows.append(AggregateRow(method, *stats["est"], *stats["nmse"], *stats["pred"],
                                 len(ok), len(group) - len(ok)))
    return rows


def format_table(rows, title: Optional[str] = None):
    """Fixed-width text table: one block of metrics, one column per method."""
    width = 18
    lines = []
    if title:
        lines.append(title)
    lines.append("Errors".ljust(8) + "".join(r.method.rjust(width) for r in rows))
    for key, label in (("est", "Est"), ("pred", "Pred"), ("nmse", "Nmse")):
        cells = []
        for r in rows:
            mean, sd = getattr(r, f"{key}_mean"), getattr(r, f"{key}_sd")
            cells.append(f"{mean:.4f} ({sd:.4f})".rjust(width))
        lines.append(label.ljust(8) + "".join(cells))
    lines.append("reps".ljust(8) + "".join(
        f"{r.n_replications}{'+' + str(r.n_diverged) + 'div' if r.n_diverged else ''}".rjust(width)
        for r in rows))
    return "\n".join(lines) + "\n"
