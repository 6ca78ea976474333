"""Wireframe evaluation metrics.

Protocol, fixed here so results are unambiguous:

* everything is evaluated in a 128x128 frame (inputs are rescaled by the
  caller or via :func:`scale_lines` / :func:`scale_points`);
* line matching uses the structural distance: sum of squared endpoint
  distances, minimized over the two endpoint pairings;
* matching is greedy in descending score order; a prediction takes the
  nearest still-unmatched ground-truth item within the threshold, ties
  broken toward the smaller index; each ground-truth item matches once;
* average precision is the unsmoothed rectangle rule over recall
  increments (no interpolation);
* score ties keep input order (stable sort);
* dataset-level numbers concatenate every image's predictions into one
  global ranked list against the summed ground-truth count
  (micro-average); a macro mode averaging per-image APs is also
  available.

Heatmap AP rasterizes predictions above each score threshold and greedily
matches predicted pixels to ground-truth pixels within a tolerance
radius; by default the thresholds are 10 equally spaced quantiles of the
prediction scores and the radius is 1.5 px.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyGT
from .geometry import Junction, LineSegment, rasterize_segment

EVAL_SIZE = 128
DEFAULT_SAP_THRESHOLDS = (5.0, 10.0)
DEFAULT_JUNCTION_THRESHOLDS = (0.5, 1.0, 2.0)


class PRPoint(NamedTuple):
    rank: int
    score: float
    precision: float
    recall: float


@dataclass
class PRCurve:
    points: list[PRPoint]
    ap: float
    max_f: float


def max_f(curve: PRCurve) -> float:
    """Best F1 over the curve's points; 0 where precision + recall is 0."""
    best = 0.0
    for p in curve.points:
        s = p.precision + p.recall
        if s > 0:
            best = max(best, 2.0 * p.precision * p.recall / s)
    return best


def _f_scores(precision: np.ndarray, recall: np.ndarray) -> np.ndarray:
    s = precision + recall
    out = np.zeros_like(s)
    np.divide(2.0 * precision * recall, s, out=out, where=s > 0)
    return out


def pr_curve(scores: np.ndarray, tp: np.ndarray, n_gt: int) -> PRCurve:
    """Curve over a score-descending trace of true-positive flags.

    ``scores``/``tp`` must already be in descending-score order.  AP is
    the rectangle rule over recall increments.
    """
    scores = np.asarray(scores, dtype=np.float64)
    tp = np.asarray(tp, dtype=np.float64)
    if len(scores) == 0:
        return PRCurve(points=[], ap=0.0, max_f=0.0)
    cum = np.cumsum(tp)
    ranks = np.arange(1, len(tp) + 1, dtype=np.float64)
    precision = cum / ranks
    recall = cum / n_gt
    ap = float(np.sum(precision * np.diff(recall, prepend=0.0)))
    points = [
        PRPoint(int(r), float(s), float(p), float(rc))
        for r, s, p, rc in zip(ranks, scores, precision, recall)
    ]
    return PRCurve(points=points, ap=ap, max_f=float(_f_scores(precision, recall).max()))


def lines_array(lines: Sequence[LineSegment]) -> tuple[np.ndarray, np.ndarray]:
    """(N, 4) endpoint array plus scores (missing scores default to 1.0)."""
    arr = np.array(
        [[s.p1[0], s.p1[1], s.p2[0], s.p2[1]] for s in lines], dtype=np.float64
    ).reshape(-1, 4)
    scores = np.array([1.0 if s.score is None else s.score for s in lines], dtype=np.float64)
    return arr, scores


def junctions_array(junctions: Sequence[Junction]) -> tuple[np.ndarray, np.ndarray]:
    arr = np.array([[j.position[0], j.position[1]] for j in junctions], dtype=np.float64)
    arr = arr.reshape(-1, 2)
    scores = np.array(
        [1.0 if j.score is None else j.score for j in junctions], dtype=np.float64
    )
    return arr, scores


def scale_lines(lines: np.ndarray, width: int, height: int, size: int = EVAL_SIZE) -> np.ndarray:
    out = np.asarray(lines, dtype=np.float64).copy().reshape(-1, 4)
    out[:, 0::2] *= size / width
    out[:, 1::2] *= size / height
    return out


def scale_points(points: np.ndarray, width: int, height: int, size: int = EVAL_SIZE) -> np.ndarray:
    out = np.asarray(points, dtype=np.float64).copy().reshape(-1, 2)
    out[:, 0] *= size / width
    out[:, 1] *= size / height
    return out


def structural_distances(pred: np.ndarray, gt: np.ndarray) -> np.ndarray:
    """(N_pred, N_gt) matrix of endpoint-pairing-minimized squared distances."""
    p = pred.reshape(-1, 2, 2)
    g = gt.reshape(-1, 2, 2)
    d = lambda a, b: ((a - b) ** 2).sum(axis=-1)
    straight = d(p[:, None, 0], g[None, :, 0]) + d(p[:, None, 1], g[None, :, 1])
    flipped = d(p[:, None, 0], g[None, :, 1]) + d(p[:, None, 1], g[None, :, 0])
    return np.minimum(straight, flipped)


def _greedy_match(
    dist: np.ndarray, scores: np.ndarray, threshold: float
) -> list[tuple[int, int | None]]:
    """Greedy score-descending matching on a precomputed distance matrix."""
    order = np.argsort(-scores, kind="stable")
    taken = np.zeros(dist.shape[1], dtype=bool)
    result: list[tuple[int, int | None]] = []
    for i in order:
        match: int | None = None
        if dist.shape[1] and not taken.all():
            row = np.where(taken, np.inf, dist[i])
            j = int(np.argmin(row))
            if row[j] <= threshold:
                taken[j] = True
                match = j
        result.append((int(i), match))
    return result


def match_segments(
    pred: np.ndarray, scores: np.ndarray, gt: np.ndarray, threshold: float
) -> list[tuple[int, int | None]]:
    """Match predicted segments to ground truth under the structural distance.

    Returns (pred_index, gt_index or None) pairs in processing order
    (descending score, ties by input order).
    """
    pred = np.asarray(pred, dtype=np.float64).reshape(-1, 4)
    gt = np.asarray(gt, dtype=np.float64).reshape(-1, 4)
    return _greedy_match(structural_distances(pred, gt), np.asarray(scores), threshold)


def match_trace(
    pred: np.ndarray, scores: np.ndarray, gt: np.ndarray, threshold: float
) -> tuple[np.ndarray, np.ndarray]:
    """(scores_desc, tp_flags) of the greedy match, ready for pr_curve."""
    matches = match_segments(pred, scores, gt, threshold)
    scores = np.asarray(scores, dtype=np.float64)
    ordered = np.array([scores[i] for i, _ in matches], dtype=np.float64)
    tp = np.array([m is not None for _, m in matches], dtype=bool)
    return ordered, tp


def sap(
    pred: np.ndarray, scores: np.ndarray, gt: np.ndarray, threshold: float
) -> tuple[float, PRCurve]:
    """Structural average precision for one image."""
    gt = np.asarray(gt, dtype=np.float64).reshape(-1, 4)
    if len(gt) == 0:
        raise EmptyGT("structural AP is undefined without ground-truth lines")
    ordered, tp = match_trace(pred, scores, gt, threshold)
    curve = pr_curve(ordered, tp, len(gt))
    return curve.ap, curve


def sap_dataset(
    items: Sequence[tuple[np.ndarray, np.ndarray, np.ndarray]],
    threshold: float,
    macro: bool = False,
) -> tuple[float, PRCurve | None]:
    """Dataset structural AP over (pred, scores, gt) per image.

    Micro mode ranks all predictions globally; macro mode averages
    per-image APs (images without ground truth are skipped).
    """
    if macro:
        aps = [
            sap(pred, scores, gt, threshold)[0]
            for pred, scores, gt in items
            if len(np.asarray(gt).reshape(-1, 4)) > 0
        ]
        if not aps:
            raise EmptyGT("no image in the dataset has ground-truth lines")
        return float(np.mean(aps)), None

    traces = []
    n_gt = 0
    for pred, scores, gt in items:
        gt = np.asarray(gt, dtype=np.float64).reshape(-1, 4)
        n_gt += len(gt)
        traces.append(match_trace(pred, scores, gt, threshold))
    if n_gt == 0:
        raise EmptyGT("no image in the dataset has ground-truth lines")
    all_scores = np.concatenate([t[0] for t in traces]) if traces else np.empty(0)
    all_tp = np.concatenate([t[1] for t in traces]) if traces else np.empty(0, bool)
    order = np.argsort(-all_scores, kind="stable")
    curve = pr_curve(all_scores[order], all_tp[order], n_gt)
    return curve.ap, curve


def match_junctions(
    pred: np.ndarray, scores: np.ndarray, gt: np.ndarray, threshold: float
) -> list[tuple[int, int | None]]:
    """Greedy junction matching under plain Euclidean distance."""
    pred = np.asarray(pred, dtype=np.float64).reshape(-1, 2)
    gt = np.asarray(gt, dtype=np.float64).reshape(-1, 2)
    dist = np.sqrt(((pred[:, None, :] - gt[None, :, :]) ** 2).sum(axis=-1))
    return _greedy_match(dist, np.asarray(scores), threshold)


def _junction_trace(pred, scores, gt, threshold):
    matches = match_junctions(pred, scores, gt, threshold)
    scores = np.asarray(scores, dtype=np.float64)
    ordered = np.array([scores[i] for i, _ in matches], dtype=np.float64)
    tp = np.array([m is not None for _, m in matches], dtype=bool)
    return ordered, tp


def mapj(
    pred: np.ndarray,
    scores: np.ndarray,
    gt: np.ndarray,
    thresholds: Sequence[float] = DEFAULT_JUNCTION_THRESHOLDS,
) -> float:
    """Mean junction AP over distance thresholds, for one image."""
    return mapj_dataset([(pred, scores, gt)], thresholds)


def mapj_dataset(
    items: Sequence[tuple[np.ndarray, np.ndarray, np.ndarray]],
    thresholds: Sequence[float] = DEFAULT_JUNCTION_THRESHOLDS,
    macro: bool = False,
) -> float:
    aps = []
    for t in thresholds:
        if macro:
            per_image = []
            for pred, scores, gt in items:
                gt = np.asarray(gt, dtype=np.float64).reshape(-1, 2)
                if len(gt) == 0:
                    continue
                ordered, tp = _junction_trace(pred, scores, gt, t)
                per_image.append(pr_curve(ordered, tp, len(gt)).ap)
            if not per_image:
                raise EmptyGT("no image in the dataset has ground-truth junctions")
            aps.append(float(np.mean(per_image)))
            continue
        traces = []
        n_gt = 0
        for pred, scores, gt in items:
            gt = np.asarray(gt, dtype=np.float64).reshape(-1, 2)
            n_gt += len(gt)
            traces.append(_junction_trace(pred, scores, gt, t))
        if n_gt == 0:
            raise EmptyGT("no image in the dataset has ground-truth junctions")
        all_scores = np.concatenate([tr[0] for tr in traces]) if traces else np.empty(0)
        all_tp = np.concatenate([tr[1] for tr in traces]) if traces else np.empty(0, bool)
        order = np.argsort(-all_scores, kind="stable")
        aps.append(pr_curve(all_scores[order], all_tp[order], n_gt).ap)
    return float(np.mean(aps))


@dataclass
class HeatmapConfig:
    """Rasterized-heatmap AP parameters."""

    size: int = EVAL_SIZE
    rho: float = 1.5
    taus: Sequence[float] | None = None  # None: quantiles of the scores
    tau_count: int = 10


def _line_pixels(lines: np.ndarray, size: int) -> list[np.ndarray]:
    out = []
    for x1, y1, x2, y2 in np.asarray(lines, dtype=np.float64).reshape(-1, 4):
        pix = rasterize_segment(LineSegment((x1, y1), (x2, y2)), size, size)
        out.append(np.array(sorted(pix), dtype=np.int64).reshape(-1, 2))
    return out


def _union_pixels(per_line: list[np.ndarray], keep: np.ndarray) -> np.ndarray:
    sel = [p for p, k in zip(per_line, keep) if k and len(p)]
    if not sel:
        return np.empty((0, 2), dtype=np.int64)
    return np.unique(np.concatenate(sel, axis=0), axis=0)


def match_heatmap_pixels(pred_pixels: np.ndarray, gt_pixels: np.ndarray, rho: float) -> int:
    """Greedy nearest-neighbor pixel matching; each gt pixel used once.

    Predicted pixels are visited in lexicographic order; each takes its
    nearest unused ground-truth pixel within ``rho`` (ties toward the
    smaller gt index).
    """
    if len(pred_pixels) == 0 or len(gt_pixels) == 0:
        return 0
    tree = cKDTree(gt_pixels.astype(np.float64))
    used = np.zeros(len(gt_pixels), dtype=bool)
    matched = 0
    for p in pred_pixels.astype(np.float64):
        best = -1
        best_d = np.inf
        for j in sorted(tree.query_ball_point(p, rho)):
            if used[j]:
                continue
            d = float(((gt_pixels[j] - p) ** 2).sum())
            if d < best_d:
                best, best_d = j, d
        if best >= 0:
            used[best] = True
            matched += 1
    return matched


def aph_dataset(
    items: Sequence[tuple[np.ndarray, np.ndarray, np.ndarray]],
    cfg: HeatmapConfig | None = None,
) -> tuple[float, PRCurve]:
    """Heatmap AP over (pred, scores, gt) per image (micro-average)."""
    cfg = cfg or HeatmapConfig()
    all_scores = np.concatenate(
        [np.asarray(s, dtype=np.float64).reshape(-1) for _, s, _ in items]
    ) if items else np.empty(0)
    if cfg.taus is not None:
        taus = [float(t) for t in cfg.taus]
    elif len(all_scores):
        taus = [
            float(t)
            for t in np.quantile(all_scores, np.linspace(0.0, 1.0, cfg.tau_count, endpoint=False))
        ]
    else:
        taus = [0.0]

    prepared = []
    total_gt_pixels = 0
    for pred, scores, gt in items:
        pred_lines = _line_pixels(pred, cfg.size)
        gt_lines = _line_pixels(gt, cfg.size)
        gt_pixels = _union_pixels(gt_lines, np.ones(len(gt_lines), dtype=bool))
        total_gt_pixels += len(gt_pixels)
        prepared.append((pred_lines, np.asarray(scores, dtype=np.float64).reshape(-1), gt_pixels))
    if total_gt_pixels == 0:
        raise EmptyGT("no ground-truth line pixels to match against")

    raw = []
    for tau in taus:
        matched = n_pred = 0
        for pred_lines, scores, gt_pixels in prepared:
            pred_pixels = _union_pixels(pred_lines, scores >= tau)
            n_pred += len(pred_pixels)
            matched += match_heatmap_pixels(pred_pixels, gt_pixels, cfg.rho)
        precision = matched / n_pred if n_pred else 0.0
        recall = matched / total_gt_pixels
        raw.append((recall, precision, tau))

    raw.sort(key=lambda r: (r[0], -r[1]))
    recalls = np.array([r[0] for r in raw])
    precisions = np.array([r[1] for r in raw])
    ap = float(np.sum(precisions * np.diff(recalls, prepend=0.0)))
    points = [
        PRPoint(i + 1, float(tau), float(p), float(r))
        for i, (r, p, tau) in enumerate(raw)
    ]
    return ap, PRCurve(points=points, ap=ap, max_f=float(_f_scores(precisions, recalls).max()))


def aph(
    pred: np.ndarray, scores: np.ndarray, gt: np.ndarray, cfg: HeatmapConfig | None = None
) -> tuple[float, PRCurve]:
    """Heatmap AP for one image."""
    return aph_dataset([(pred, scores, gt)], cfg)
