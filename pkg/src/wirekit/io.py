"""File formats and reports.

* annotations: JSON documents with ``width``, ``height``, ``lines``
  ([[x1, y1, x2, y2], ...]), ``junctions`` ([[x, y], ...]) and optional
  parallel ``scores`` / ``junction_scores`` arrays;
* bitmaps: binary netpbm only -- PGM (P5) for masks/silhouettes (255 =
  hole/object), PPM (P6) for images, maxval 255; masks binarize at 128
  on read;
* tensors: little-endian header of unsigned 64-bit words (rank, then one
  word per dim) followed by row-major float64 values;
* mask pools: a directory of PGM files plus a JSON index listing
  (image_id, interval, candidate, path, hole_fraction, hole_type);
* run configs: ``key = value`` lines, ``#`` comments, flags override.

Writers emit canonical bytes, so write -> read -> write round-trips are
bit-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import metrics
from .errors import (
    BoundsError,
    ConfigError,
    EmptyGT,
    FormatError,
    MissingPair,
    ParseError,
)
from .geometry import Junction, LineSegment, MaskBitmap, WireframeAnnotation
from .maskgen import HoleType, MaskPool, PlacedMask

# --------------------------------------------------------------------------
# annotations


def _require(cond: bool, path, msg: str):
    if not cond:
        raise ParseError(f"{path}: {msg}")


def load_annotation(path) -> WireframeAnnotation:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    _require(isinstance(doc, dict), path, "top-level value must be an object")
    for key in ("width", "height", "lines", "junctions"):
        _require(key in doc, path, f"missing field {key!r}")
    width, height = doc["width"], doc["height"]
    _require(
        isinstance(width, int) and isinstance(height, int) and width > 0 and height > 0,
        path,
        "width/height must be positive integers",
    )

    raw_lines = doc["lines"]
    raw_junctions = doc["junctions"]
    _require(isinstance(raw_lines, list), path, "'lines' must be an array")
    _require(isinstance(raw_junctions, list), path, "'junctions' must be an array")
    scores = doc.get("scores")
    jscores = doc.get("junction_scores")
    if scores is not None:
        _require(
            isinstance(scores, list) and len(scores) == len(raw_lines),
            path,
            "'scores' must parallel 'lines'",
        )
    if jscores is not None:
        _require(
            isinstance(jscores, list) and len(jscores) == len(raw_junctions),
            path,
            "'junction_scores' must parallel 'junctions'",
        )

    def number(v, where):
        _require(isinstance(v, (int, float)) and math.isfinite(v), path, f"{where}: not a finite number")
        return float(v)

    lines = []
    for i, row in enumerate(raw_lines):
        _require(isinstance(row, list) and len(row) == 4, path, f"lines[{i}]: expected [x1, y1, x2, y2]")
        x1, y1, x2, y2 = (number(v, f"lines[{i}]") for v in row)
        for x, y in ((x1, y1), (x2, y2)):
            if not (0 <= x <= width and 0 <= y <= height):
                raise BoundsError(f"{path}: lines[{i}] endpoint ({x}, {y}) outside {width}x{height}")
        s = number(scores[i], f"scores[{i}]") if scores is not None else None
        lines.append(LineSegment((x1, y1), (x2, y2), score=s))

    junctions = []
    for i, row in enumerate(raw_junctions):
        _require(isinstance(row, list) and len(row) == 2, path, f"junctions[{i}]: expected [x, y]")
        x, y = (number(v, f"junctions[{i}]") for v in row)
        if not (0 <= x <= width and 0 <= y <= height):
            raise BoundsError(f"{path}: junctions[{i}] position ({x}, {y}) outside {width}x{height}")
        s = number(jscores[i], f"junction_scores[{i}]") if jscores is not None else None
        junctions.append(Junction((x, y), score=s))

    return WireframeAnnotation(width=width, height=height, lines=lines, junctions=junctions)


def annotation_to_doc(ann: WireframeAnnotation) -> dict:
    doc = {
        "width": ann.width,
        "height": ann.height,
        "lines": [[float(s.p1[0]), float(s.p1[1]), float(s.p2[0]), float(s.p2[1])] for s in ann.lines],
        "junctions": [[float(j.position[0]), float(j.position[1])] for j in ann.junctions],
    }
    line_scores = [s.score for s in ann.lines]
    if any(s is not None for s in line_scores):
        if any(s is None for s in line_scores):
            raise ValueError("either every line has a score or none does")
        doc["scores"] = [float(s) for s in line_scores]
    jscores = [j.score for j in ann.junctions]
    if any(s is not None for s in jscores):
        if any(s is None for s in jscores):
            raise ValueError("either every junction has a score or none does")
        doc["junction_scores"] = [float(s) for s in jscores]
    return doc


def save_annotation(path, ann: WireframeAnnotation):
    Path(path).write_text(json.dumps(annotation_to_doc(ann), indent=2) + "\n")


# --------------------------------------------------------------------------
# netpbm bitmaps


def _parse_netpbm(data: bytes, path) -> tuple[str, int, int, int, int]:
    """Header fields (magic, width, height, maxval) and the raster offset."""
    if len(data) < 2:
        raise FormatError(f"{path}: truncated header")
    magic = data[:2].decode("ascii", errors="replace")
    if magic in ("P1", "P2", "P3"):
        raise FormatError(f"{path}: ASCII netpbm variant {magic} is not supported")
    if magic not in ("P5", "P6"):
        raise FormatError(f"{path}: not a binary PGM/PPM file (magic {magic!r})")
    pos = 2
    fields = []
    while len(fields) < 3:
        if pos >= len(data):
            raise FormatError(f"{path}: truncated header")
        c = data[pos : pos + 1]
        if c.isspace():
            pos += 1
        elif c == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isdigit():
            start = pos
            while pos < len(data) and data[pos : pos + 1].isdigit():
                pos += 1
            fields.append(int(data[start:pos]))
        else:
            raise FormatError(f"{path}: unexpected byte {c!r} in header")
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise FormatError(f"{path}: missing whitespace after maxval")
    pos += 1
    width, height, maxval = fields
    if maxval != 255:
        raise FormatError(f"{path}: only maxval 255 is supported, got {maxval}")
    if width <= 0 or height <= 0:
        raise FormatError(f"{path}: non-positive dimensions {width}x{height}")
    return magic, width, height, maxval, pos


def _read_raster(path, magic: str, channels: int) -> np.ndarray:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    got, width, height, _, pos = _parse_netpbm(data, path)
    if got != magic:
        raise FormatError(f"{path}: expected {magic}, found {got}")
    expected = width * height * channels
    raster = data[pos:]
    if len(raster) != expected:
        raise FormatError(f"{path}: raster has {len(raster)} bytes, expected {expected}")
    arr = np.frombuffer(raster, dtype=np.uint8)
    shape = (height, width) if channels == 1 else (height, width, channels)
    return arr.reshape(shape).copy()


def read_pgm(path) -> np.ndarray:
    return _read_raster(path, "P5", 1)


def write_pgm(path, arr: np.ndarray):
    arr = np.asarray(arr, dtype=np.uint8)
    if arr.ndim != 2:
        raise ValueError(f"PGM data must be 2-D, got shape {arr.shape}")
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + arr.tobytes())


def read_ppm(path) -> np.ndarray:
    return _read_raster(path, "P6", 3)


def write_ppm(path, arr: np.ndarray):
    arr = np.asarray(arr)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"PPM data must be (H, W, 3), got shape {arr.shape}")
    if arr.dtype != np.uint8:
        arr = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    header = f"P6\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + arr.tobytes())


def read_mask(path) -> MaskBitmap:
    return MaskBitmap(read_pgm(path) >= 128)


def write_mask(path, mask: MaskBitmap):
    write_pgm(path, mask.bits.astype(np.uint8) * 255)


# --------------------------------------------------------------------------
# tensors

_MAX_TENSOR_RANK = 32


def write_tensor(path, arr: np.ndarray):
    arr = np.asarray(arr, dtype=np.float64)
    header = np.array([arr.ndim, *arr.shape], dtype="<u8").tobytes()
    Path(path).write_bytes(header + arr.astype("<f8").tobytes(order="C"))


def read_tensor(path) -> np.ndarray:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 8:
        raise FormatError(f"{path}: truncated tensor header")
    rank = int(np.frombuffer(data[:8], dtype="<u8")[0])
    if rank > _MAX_TENSOR_RANK:
        raise FormatError(f"{path}: implausible tensor rank {rank}")
    need = 8 + 8 * rank
    if len(data) < need:
        raise FormatError(f"{path}: truncated tensor dims")
    dims = tuple(int(d) for d in np.frombuffer(data[8:need], dtype="<u8"))
    count = int(np.prod(dims, dtype=np.uint64)) if dims else 1
    body = data[need:]
    if len(body) != count * 8:
        raise FormatError(f"{path}: tensor body has {len(body)} bytes, expected {count * 8}")
    return np.frombuffer(body, dtype="<f8").reshape(dims).astype(np.float64)


# --------------------------------------------------------------------------
# run configuration


def load_config(path) -> dict[str, str]:
    """Parse a ``key = value`` file; quotes around values are stripped."""
    out: dict[str, str] = {}
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "'\"":
            value = value[1:-1]
        out[key] = value
    return out


# --------------------------------------------------------------------------
# mask-pool manifests


def mask_filename(image_id: str, interval: int, candidate: int) -> str:
    return f"{image_id}_i{interval:02d}_c{candidate:02d}.pgm"


def pool_manifest_row(
    image_id: str, interval: int, candidate: int, placed: PlacedMask, path: str
) -> dict:
    return {
        "image_id": image_id,
        "interval": interval,
        "candidate": candidate,
        "path": path,
        "hole_fraction": placed.mask.hole_fraction(),
        "hole_type": placed.hole_type.value,
        "fallback": placed.fallback,
    }


def write_pool_manifest(path, seed: int, mode: str, n: int, rows: list[dict]):
    rows = sorted(rows, key=lambda r: (r["image_id"], r["interval"], r["candidate"]))
    doc = {"seed": seed, "mode": mode, "n": n, "masks": rows}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_pool_manifest(path) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    for key in ("seed", "mode", "n", "masks"):
        _require(key in doc, path, f"missing field {key!r}")
    return doc


def load_mask_pool(manifest_path) -> MaskPool:
    """Materialize a MaskPool (bitmaps included) from its manifest."""
    manifest_path = Path(manifest_path)
    doc = load_pool_manifest(manifest_path)
    base = manifest_path.parent
    placements: dict[tuple[str, int], list[PlacedMask]] = {}
    rows = sorted(doc["masks"], key=lambda r: (r["image_id"], r["interval"], r["candidate"]))
    for row in rows:
        mask = read_mask(base / row["path"])
        placed = PlacedMask(
            mask=mask, hole_type=HoleType(row["hole_type"]), fallback=row.get("fallback", False)
        )
        placements.setdefault((row["image_id"], row["interval"]), []).append(placed)
    return MaskPool(seed=doc["seed"], mode=doc["mode"], n=doc["n"], placements=placements)


# --------------------------------------------------------------------------
# evaluation report


@dataclass
class EvalConfig:
    sap_thresholds: tuple[float, ...] = metrics.DEFAULT_SAP_THRESHOLDS
    junction_thresholds: tuple[float, ...] = metrics.DEFAULT_JUNCTION_THRESHOLDS
    tau_count: int = 10
    rho: float = 1.5
    size: int = metrics.EVAL_SIZE
    macro: bool = False


def _fmt_threshold(t: float) -> str:
    return f"{t:g}"


def _paired_stems(pred_dir, gt_dir) -> tuple[list[str], bool]:
    """Matched stems, plus whether the prediction dir is completely empty.

    A fully empty prediction dir means the detector produced nothing: every
    ground-truth stem is evaluated against empty predictions.  A partial
    mismatch is a data error.
    """
    pred = {p.stem for p in Path(pred_dir).glob("*.json")}
    gt = {p.stem for p in Path(gt_dir).glob("*.json")}
    if not pred and gt:
        return sorted(gt), True
    if pred != gt:
        only_pred = sorted(pred - gt)
        only_gt = sorted(gt - pred)
        raise MissingPair(
            f"unmatched annotation stems; only in predictions: {only_pred}, only in ground truth: {only_gt}"
        )
    return sorted(pred), False


def _write_curve_csv(path, curve: metrics.PRCurve):
    lines = ["rank,score,precision,recall"]
    for p in curve.points:
        lines.append(f"{p.rank},{p.score!r},{p.precision!r},{p.recall!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def run_eval_report(pred_dir, gt_dir, out_dir, cfg: EvalConfig | None = None) -> dict:
    """Evaluate prediction annotations against ground truth.

    Writes ``report.json`` plus one PR CSV per structural threshold and
    one for the heatmap metric into ``out_dir``; returns the report
    mapping.  Metrics whose ground truth is entirely absent are reported
    as null.
    """
    cfg = cfg or EvalConfig()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stems, no_predictions = _paired_stems(pred_dir, gt_dir)

    line_items = []
    junction_items = []
    for stem in stems:
        gt_ann = load_annotation(Path(gt_dir) / f"{stem}.json")
        if no_predictions:
            pred_ann = WireframeAnnotation(gt_ann.width, gt_ann.height)
        else:
            pred_ann = load_annotation(Path(pred_dir) / f"{stem}.json")
        pred_lines, pred_scores = metrics.lines_array(pred_ann.lines)
        gt_lines, _ = metrics.lines_array(gt_ann.lines)
        pred_lines = metrics.scale_lines(pred_lines, pred_ann.width, pred_ann.height, cfg.size)
        gt_lines = metrics.scale_lines(gt_lines, gt_ann.width, gt_ann.height, cfg.size)
        line_items.append((pred_lines, pred_scores, gt_lines))

        pred_j, pred_js = metrics.junctions_array(pred_ann.junctions)
        gt_j, _ = metrics.junctions_array(gt_ann.junctions)
        pred_j = metrics.scale_points(pred_j, pred_ann.width, pred_ann.height, cfg.size)
        gt_j = metrics.scale_points(gt_j, gt_ann.width, gt_ann.height, cfg.size)
        junction_items.append((pred_j, pred_js, gt_j))

    report: dict = {}
    curves: dict[str, metrics.PRCurve] = {}
    sf: dict[str, float | None] = {}
    for t in cfg.sap_thresholds:
        key = _fmt_threshold(t)
        try:
            if cfg.macro:
                per = [
                    metrics.sap(pred, scores, gt, t)[1]
                    for pred, scores, gt in line_items
                    if len(gt)
                ]
                if not per:
                    raise EmptyGT("no ground-truth lines")
                ap = float(sum(c.ap for c in per) / len(per))
                sf[key] = float(sum(c.max_f for c in per) / len(per))
            else:
                ap, curve = metrics.sap_dataset(line_items, t)
                sf[key] = curve.max_f
                curves[f"pr_sap@{key}.csv"] = curve
        except EmptyGT:
            ap, sf[key] = None, None
        report[f"sap@{key}"] = ap
    for t in cfg.sap_thresholds:
        key = _fmt_threshold(t)
        report[f"sf@{key}"] = sf[key]

    try:
        report["mapj"] = metrics.mapj_dataset(
            junction_items, cfg.junction_thresholds, macro=cfg.macro
        )
    except EmptyGT:
        report["mapj"] = None

    hm_cfg = metrics.HeatmapConfig(size=cfg.size, rho=cfg.rho, tau_count=cfg.tau_count)
    try:
        if cfg.macro:
            per_h = []
            for item in line_items:
                try:
                    per_h.append(metrics.aph_dataset([item], hm_cfg))
                except EmptyGT:
                    continue
            if not per_h:
                raise EmptyGT("no ground-truth line pixels")
            report["aph"] = float(sum(a for a, _ in per_h) / len(per_h))
            report["fh"] = float(sum(c.max_f for _, c in per_h) / len(per_h))
        else:
            ap_h, curve_h = metrics.aph_dataset(line_items, hm_cfg)
            report["aph"] = ap_h
            report["fh"] = curve_h.max_f
            curves["pr_aph.csv"] = curve_h
    except EmptyGT:
        report["aph"] = None
        report["fh"] = None

    for name, curve in curves.items():
        _write_curve_csv(out_dir / name, curve)
    (out_dir / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    return report
