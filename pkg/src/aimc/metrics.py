"""External clustering metrics: ACC, NMI, Purity and pairwise F-score."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass(frozen=True)
class MetricReport:
    acc: float
    nmi: float
    purity: float
    fscore: float

    def as_dict(self):
        return {"ACC": self.acc, "NMI": self.nmi, "Purity": self.purity, "Fscore": self.fscore}

    def summary(self):
        return " ".join(f"{k}={v:.4f}" for k, v in self.as_dict().items())


def contingency(pred, truth):
    """Counts table with predicted clusters as rows and true classes as columns."""
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.shape != truth.shape:
        raise ValueError(f"label vectors differ in length: {pred.shape[0]} vs {truth.shape[0]}")
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(truth, return_inverse=True)
    table = np.zeros((pi.max() + 1 if pi.size else 0, ti.max() + 1 if ti.size else 0), dtype=np.int64)
    np.add.at(table, (pi, ti), 1)
    return table


def hungarian_max(weights):
    """
    Maximum-weight one-to-one matching between rows and columns.

    Rectangular tables are matched on ``min(rows, cols)`` pairs. Returns
    ``(rows, cols, total_weight)``.
    """
    W = np.asarray(weights, dtype=np.float64)
    r, c = linear_sum_assignment(W, maximize=True)
    return r, c, float(W[r, c].sum())


def accuracy(pred, truth):
    table = contingency(pred, truth)
    n = table.sum()
    if n == 0:
        return 0.0
    return hungarian_max(table)[2] / n


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(pred, truth):
    """Mutual information over ``sqrt(H(pred) H(truth))``, natural logs."""
    table = contingency(pred, truth).astype(np.float64)
    n = table.sum()
    a, b = table.sum(axis=1), table.sum(axis=0)
    ha, hb = _entropy(a, n), _entropy(b, n)
    if ha == 0.0 and hb == 0.0:
        return 1.0
    if ha == 0.0 or hb == 0.0:
        return 0.0
    nz = table > 0
    if nz.sum(axis=0).max() == 1 and nz.sum(axis=1).max() == 1:
        # same partition up to renaming; skip the rounding of the log sums
        return 1.0
    pij = table[nz] / n
    outer = np.outer(a, b)[nz] / (n * n)
    mi = float(np.sum(pij * np.log(pij / outer)))
    return max(0.0, min(1.0, mi / np.sqrt(ha * hb)))


def purity(pred, truth):
    table = contingency(pred, truth)
    return float(table.max(axis=1).sum() / table.sum())


def _pairs(x):
    x = np.asarray(x, dtype=np.float64)
    return float(np.sum(x * (x - 1) / 2))


def fscore_pairwise(pred, truth):
    """
    Pairwise F-measure over all sample pairs, from contingency sums.

    A pair is a true positive when both labelings put it together. Zero
    true positives give 0, except when neither labeling groups any pair
    (both all singletons), where the two agree on every pair and the score
    is 1.
    """
    table = contingency(pred, truth)
    tp = _pairs(table)
    same_pred, same_truth = _pairs(table.sum(axis=1)), _pairs(table.sum(axis=0))
    if tp == 0:
        return 1.0 if same_pred == 0 and same_truth == 0 else 0.0
    precision = tp / same_pred
    recall = tp / same_truth
    return 2 * precision * recall / (precision + recall)


def evaluate(pred, truth):
    return MetricReport(
        acc=float(accuracy(pred, truth)),
        nmi=float(nmi(pred, truth)),
        purity=float(purity(pred, truth)),
        fscore=float(fscore_pairwise(pred, truth)),
    )
