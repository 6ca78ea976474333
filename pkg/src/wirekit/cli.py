"""Command-line surface tying the pipeline together.

Commands: ``pool build``, ``pool sample``, ``masks gen``, ``apply``,
``light``, ``schedule``, ``pseudo filter``, ``pseudo hist``, ``eval``,
``loss check``.  Every option can also come from a ``key = value``
config file given with ``--config``; explicit flags win.  Randomized
commands require an explicit seed.  Exit codes: 0 success, 2 config
error, 3 data error, 4 internal error; failures print
``error[<code>]: <message>`` to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import conditioning, io, losses, maskgen, pseudo
from .errors import ConfigError, EmptyDataset, EmptyInterval, WirekitError
from .pseudo import Criterion, FilterThresholds
from .rng import derive_rng


class Settings:
    """Flag/config resolution: explicit flags beat config-file values."""

    def __init__(self, args: argparse.Namespace):
        self.args = vars(args)
        config_path = self.args.get("config")
        self.config = io.load_config(config_path) if config_path else {}

    def get(self, name: str, cast=str, default=None, required=False):
        value = self.args.get(name.replace("-", "_"))
        if value is None and name in self.config:
            raw = self.config[name]
            try:
                value = cast(raw)
            except (TypeError, ValueError):
                raise ConfigError(f"config key {name!r}: cannot interpret {raw!r}") from None
        if value is None:
            if required:
                raise ConfigError(f"missing required setting {name!r} (--{name} or config key)")
            return default
        return value


def _parse_intervals(text: str) -> list[int]:
    text = text.strip()
    try:
        if "-" in text:
            lo, hi = text.split("-")
            out = list(range(int(lo), int(hi) + 1))
        else:
            out = [int(t) for t in text.split(",") if t.strip() != ""]
    except ValueError:
        raise ConfigError(f"cannot parse interval list {text!r} (use '0-9' or '0,1,2')") from None
    if not out:
        raise ConfigError("interval list is empty")
    return out


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip() != ""]
    except ValueError:
        raise ConfigError(f"cannot parse number list {text!r}") from None


def _parse_rgb(text: str) -> np.ndarray:
    vals = _parse_floats(text)
    if len(vals) != 3:
        raise ConfigError(f"fill must be 'r,g,b', got {text!r}")
    return np.array(vals, dtype=np.float64)


def _parse_range(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"range must be 'lo:hi', got {text!r}")
    return float(parts[0]), float(parts[1])


def _parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _load_annotation_dir(path) -> list[tuple[str, "object"]]:
    files = sorted(Path(path).glob("*.json"))
    if not files:
        raise EmptyDataset(f"no annotation files found in {path}")
    return [(f.stem, io.load_annotation(f)) for f in files]


def _load_silhouette_pool(manifest_path) -> list[maskgen.SilhouetteEntry]:
    manifest_path = Path(manifest_path)
    doc = json.loads(manifest_path.read_text())
    entries = []
    for row in doc["silhouettes"]:
        bitmap = io.read_mask(manifest_path.parent / row["path"]).bits
        entries.append(maskgen.SilhouetteEntry.from_bitmap(bitmap))
    return entries


# --------------------------------------------------------------------------
# commands


def cmd_pool_build(args) -> int:
    st = Settings(args)
    sil_dir = Path(st.get("silhouettes", required=True))
    out_path = Path(st.get("out", required=True))
    per_interval = st.get("per-interval", int)

    kept, rejected = [], 0
    for path in sorted(sil_dir.glob("*.pgm")):
        bits = io.read_mask(path).bits
        try:
            entry = maskgen.SilhouetteEntry.from_bitmap(bits)
        except WirekitError:
            rejected += 1
            continue
        if not maskgen.filter_silhouette(entry):
            rejected += 1
            continue
        kept.append((path, entry))

    if per_interval is not None:
        seed = st.get("seed", int, required=True)
        by_interval: dict[int, list] = {}
        for item in kept:
            by_interval.setdefault(item[1].interval, []).append(item)
        kept = []
        for interval in sorted(by_interval):
            group = by_interval[interval]
            if len(group) > per_interval:
                rng = derive_rng(seed, "pool-build", interval)
                idx = rng.choice(len(group), size=per_interval, replace=False)
                group = [group[i] for i in sorted(idx)]
            kept.extend(group)

    rows = [
        {
            "path": str(path.resolve().relative_to(out_path.resolve().parent))
            if path.resolve().is_relative_to(out_path.resolve().parent)
            else str(path.resolve()),
            "area": entry.area,
            "bbox": list(entry.bbox),
            "interval": entry.interval,
        }
        for path, entry in kept
    ]
    doc = {"frame": maskgen.REFERENCE_SIDE, "rejected": rejected, "silhouettes": rows}
    out_path.write_text(json.dumps(doc, indent=2) + "\n")
    print(f"kept {len(rows)} silhouettes, rejected {rejected}")
    return 0


def cmd_pool_sample(args) -> int:
    st = Settings(args)
    manifest = io.load_pool_manifest(st.get("manifest", required=True))
    image_id = st.get("image-id", required=True)
    interval = st.get("interval", int, required=True)
    scope = st.get("scope", default="per-image")
    seed = st.get("seed", int, required=True)
    if scope not in ("per-image", "cross-image"):
        raise ConfigError(f"scope must be per-image or cross-image, got {scope!r}")

    rows = [r for r in manifest["masks"] if r["interval"] == interval]
    if scope == "per-image":
        rows = [r for r in rows if r["image_id"] == image_id]
    rows.sort(key=lambda r: (r["image_id"], r["candidate"]))
    if not rows:
        raise EmptyInterval(f"no masks at interval {interval} for scope {scope!r}")
    rng = derive_rng(seed, "sample", image_id, interval)
    print(rows[int(rng.integers(0, len(rows)))]["path"])
    return 0


def cmd_masks_gen(args) -> int:
    st = Settings(args)
    seed = st.get("seed", int, required=True)
    n = st.get("n", int, default=10)
    intervals = _parse_intervals(st.get("intervals", default="0-9"))
    mode = st.get("mode", default="avoid-isolation")
    if mode not in ("avoid-isolation", "random"):
        raise ConfigError(f"mode must be avoid-isolation or random, got {mode!r}")
    workers = st.get("workers", int, default=1)
    max_attempts = st.get("max-attempts", int, default=maskgen.DEFAULT_MAX_ATTEMPTS)
    out_dir = Path(st.get("out", required=True))

    images = _load_annotation_dir(st.get("annotations", required=True))
    pool = _load_silhouette_pool(st.get("silhouettes", required=True))
    by_interval = maskgen.group_by_interval(pool)
    for i in intervals:
        if not by_interval.get(i):
            raise EmptyInterval(f"no silhouettes available for interval {i}")

    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [
        (image_id, ann, i, c) for image_id, ann in images for i in intervals for c in range(n)
    ]

    def run(task):
        image_id, ann, i, c = task
        placed = maskgen.generate_pool_candidate(
            ann, by_interval[i], seed, image_id, i, c, mode, max_attempts
        )
        name = io.mask_filename(image_id, i, c)
        io.write_mask(out_dir / name, placed.mask)
        return io.pool_manifest_row(image_id, i, c, placed, name)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool_exec:
            rows = list(pool_exec.map(run, tasks))
    else:
        rows = [run(t) for t in tasks]

    io.write_pool_manifest(out_dir / "masks.json", seed, mode, n, rows)
    print(f"wrote {len(rows)} masks to {out_dir}")
    return 0


def cmd_apply(args) -> int:
    st = Settings(args)
    img = io.read_ppm(st.get("image", required=True)).astype(np.float64)
    mask = io.read_mask(st.get("mask", required=True))
    fill_text = st.get("fill")
    mean_from = st.get("mean-from")
    if fill_text is not None:
        fill = _parse_rgb(fill_text)
    elif mean_from is not None:
        paths = sorted(Path(mean_from).glob("*.ppm"))
        fill = conditioning.mean_rgb(io.read_ppm(p) for p in paths)
    else:
        raise ConfigError("either --fill r,g,b or --mean-from DIR is required")
    out = conditioning.apply_hole(img, mask, fill)
    io.write_ppm(st.get("out", required=True), out)
    return 0


def cmd_light(args) -> int:
    st = Settings(args)
    img = io.read_ppm(st.get("image", required=True)).astype(np.float64)
    mode = st.get("mode", required=True)
    if mode not in ("dim", "over"):
        raise ConfigError(f"mode must be dim or over, got {mode!r}")
    scale = st.get("scale", float)
    shot_noise = not st.get("no-noise", _parse_bool, default=False)
    randomized = scale is None or (mode == "dim" and shot_noise)
    rng = None
    if randomized:
        seed = st.get("seed", int, required=True)
        rng = derive_rng(seed, "light", mode)
    out = conditioning.simulate_lighting(img, mode, rng, scale=scale, shot_noise=shot_noise)
    io.write_ppm(st.get("out", required=True), out)
    return 0


def cmd_schedule(args) -> int:
    st = Settings(args)
    cfg = conditioning.ScheduleConfig(
        epochs_per_interval=st.get("epochs-per-interval", int, required=True),
        num_intervals=st.get("num-intervals", int, default=10),
    )
    table = st.get("table", int)
    if table is not None:
        for epoch in range(table):
            print(f"{epoch},{conditioning.schedule_interval(epoch, cfg)}")
    else:
        epoch = st.get("epoch", int, required=True)
        print(conditioning.schedule_interval(epoch, cfg))
    return 0


def cmd_pseudo_filter(args) -> int:
    st = Settings(args)
    th = FilterThresholds(
        min_lines=st.get("min-lines", float, default=pseudo.DEFAULT_MIN_LINES),
        min_total_length=st.get("min-length", float, default=pseudo.DEFAULT_MIN_TOTAL_LENGTH),
        max_ratio=st.get("max-ratio", float, default=pseudo.DEFAULT_MAX_RATIO),
    )
    results = []
    passed = 0
    for stem, ann in _load_annotation_dir(st.get("annotations", required=True)):
        stats = pseudo.criteria_stats(ann)
        ok = pseudo.passes_filter(stats, th)
        passed += ok
        results.append(
            {
                "id": stem,
                "num_lines": stats.num_lines,
                "total_length": stats.total_length,
                "junction_line_ratio": stats.junction_line_ratio,
                "pass": ok,
            }
        )
    doc = {
        "thresholds": {
            "min_lines": th.min_lines,
            "min_total_length": th.min_total_length,
            "max_ratio": th.max_ratio,
        },
        "passed": passed,
        "total": len(results),
        "results": results,
    }
    Path(st.get("out", required=True)).write_text(json.dumps(doc, indent=2) + "\n")
    print(f"passed {passed} of {len(results)}")
    return 0


def cmd_pseudo_hist(args) -> int:
    st = Settings(args)
    criterion = Criterion(st.get("criterion", required=True))
    bins = st.get("bins", int, required=True)
    lo, hi = _parse_range(st.get("range", required=True))
    stats = [
        pseudo.criteria_stats(ann)
        for _, ann in _load_annotation_dir(st.get("annotations", required=True))
    ]
    hist = pseudo.histogram(stats, criterion, bins, (lo, hi))
    lines = ["bin_lo,bin_hi,count"]
    for bin_lo, bin_hi, count in hist.rows():
        lines.append(f"{bin_lo!r},{bin_hi!r},{count}")
    Path(st.get("out", required=True)).write_text("\n".join(lines) + "\n")
    return 0


def cmd_eval(args) -> int:
    st = Settings(args)
    cfg = io.EvalConfig(
        sap_thresholds=tuple(_parse_floats(st.get("sap-thresholds", default="5,10"))),
        junction_thresholds=tuple(_parse_floats(st.get("mapj-thresholds", default="0.5,1,2"))),
        tau_count=st.get("tau-count", int, default=10),
        rho=st.get("rho", float, default=1.5),
        size=st.get("eval-size", int, default=128),
        macro=st.get("macro", _parse_bool, default=False),
    )
    report = io.run_eval_report(
        st.get("pred", required=True),
        st.get("gt", required=True),
        st.get("out", required=True),
        cfg,
    )
    print(json.dumps(report, indent=2))
    return 0


def cmd_loss_check(args) -> int:
    st = Settings(args)
    kernel = args.kernel
    eps = st.get("eps", float, default=1e-6)
    gamma = st.get("gamma", float, default=losses.DEFAULT_GAMMA)

    def tensors(flag, expect_many=False):
        paths = getattr(args, flag, None)
        if not paths:
            raise ConfigError(f"kernel {kernel!r} requires --{flag.replace('_', '-')}")
        arrs = [io.read_tensor(p) for p in paths]
        if not expect_many and len(arrs) != 1:
            raise ConfigError(f"--{flag.replace('_', '-')} takes exactly one tensor for {kernel!r}")
        return arrs if expect_many else arrs[0]

    if kernel == "reconstruction":
        inputs = {"x": tensors("x"), "xt": tensors("xt"), "m": tensors("m")}
        value = losses.reconstruction_loss(inputs["x"], inputs["xt"], inputs["m"])
    elif kernel in ("perceptual", "style"):
        inputs = {"feats_x": tensors("x", True), "feats_xt": tensors("xt", True)}
        fn = losses.perceptual_loss if kernel == "perceptual" else losses.style_loss
        value = fn(inputs["feats_x"], inputs["feats_xt"])
    elif kernel == "adversarial":
        inputs = {"d_real": tensors("d_real"), "d_fake": tensors("d_fake"), "gamma": gamma}
        value = losses.adversarial_loss(inputs["d_real"], inputs["d_fake"], gamma)
    elif kernel == "generator":
        inputs = {"d_fake": tensors("d_fake")}
        value = losses.generator_adv_loss(inputs["d_fake"])
    else:
        raise ConfigError(f"unknown kernel {kernel!r}")

    err = losses.grad_check(kernel, inputs, eps)
    print(json.dumps({"kernel": kernel, "value": value, "max_rel_err": err, "eps": eps}, indent=2))
    return 0


# --------------------------------------------------------------------------
# parser


def _add_config(p):
    p.add_argument("--config", help="key = value config file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wirekit")
    sub = parser.add_subparsers(dest="command", required=True)

    pool = sub.add_parser("pool", help="silhouette pools and mask sampling")
    pool_sub = pool.add_subparsers(dest="subcommand", required=True)
    p = pool_sub.add_parser("build", help="index silhouette PGMs into a filtered pool")
    _add_config(p)
    p.add_argument("--silhouettes", help="directory of silhouette .pgm files")
    p.add_argument("--out", help="output pool manifest JSON")
    p.add_argument("--per-interval", type=int, help="cap silhouettes per interval (needs --seed)")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_pool_build)

    p = pool_sub.add_parser("sample", help="draw one mask path from a mask-pool manifest")
    _add_config(p)
    p.add_argument("--manifest", help="mask-pool manifest from 'masks gen'")
    p.add_argument("--image-id")
    p.add_argument("--interval", type=int)
    p.add_argument("--scope", choices=["per-image", "cross-image"])
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_pool_sample)

    masks = sub.add_parser("masks", help="mask-pool generation")
    masks_sub = masks.add_subparsers(dest="subcommand", required=True)
    p = masks_sub.add_parser("gen", help="generate N masks per image and interval")
    _add_config(p)
    p.add_argument("--annotations", help="directory of annotation JSON files")
    p.add_argument("--silhouettes", help="silhouette pool manifest from 'pool build'")
    p.add_argument("--out", help="output directory (PGMs + masks.json)")
    p.add_argument("--n", type=int)
    p.add_argument("--intervals", help="e.g. 0-9 or 0,2,4")
    p.add_argument("--mode", choices=["avoid-isolation", "random"])
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--max-attempts", type=int)
    p.set_defaults(func=cmd_masks_gen)

    p = sub.add_parser("apply", help="fill hole pixels of an image with a color")
    _add_config(p)
    p.add_argument("--image", help="input PPM")
    p.add_argument("--mask", help="hole mask PGM")
    p.add_argument("--out", help="output PPM")
    p.add_argument("--fill", help="fill color r,g,b")
    p.add_argument("--mean-from", help="directory of PPMs whose mean becomes the fill")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("light", help="simulate dim or over-lit capture")
    _add_config(p)
    p.add_argument("--image", help="input PPM")
    p.add_argument("--mode", choices=["dim", "over"])
    p.add_argument("--out", help="output PPM")
    p.add_argument("--seed", type=int)
    p.add_argument("--scale", type=float, help="fix the intensity scale factor")
    p.add_argument(
        "--no-noise", action="store_const", const=True, default=None,
        help="disable shot noise (dim mode)",
    )
    p.set_defaults(func=cmd_light)

    p = sub.add_parser("schedule", help="progressive hole-size schedule lookup")
    _add_config(p)
    p.add_argument("--epoch", type=int)
    p.add_argument("--table", type=int, help="print epoch,interval rows for this many epochs")
    p.add_argument("--epochs-per-interval", type=int)
    p.add_argument("--num-intervals", type=int)
    p.set_defaults(func=cmd_schedule)

    ps = sub.add_parser("pseudo", help="pseudo-label quality filtering")
    ps_sub = ps.add_subparsers(dest="subcommand", required=True)
    p = ps_sub.add_parser("filter", help="apply the three quality criteria")
    _add_config(p)
    p.add_argument("--annotations")
    p.add_argument("--out", help="output pass/fail manifest JSON")
    p.add_argument("--min-lines", type=float)
    p.add_argument("--min-length", type=float)
    p.add_argument("--max-ratio", type=float)
    p.set_defaults(func=cmd_pseudo_filter)

    p = ps_sub.add_parser("hist", help="criterion histogram CSV")
    _add_config(p)
    p.add_argument("--annotations")
    p.add_argument("--criterion", choices=[c.value for c in Criterion])
    p.add_argument("--bins", type=int)
    p.add_argument("--range", help="lo:hi")
    p.add_argument("--out", help="output CSV")
    p.set_defaults(func=cmd_pseudo_hist)

    p = sub.add_parser("eval", help="evaluate predictions against ground truth")
    _add_config(p)
    p.add_argument("--pred", help="directory of prediction annotation JSONs")
    p.add_argument("--gt", help="directory of ground-truth annotation JSONs")
    p.add_argument("--out", help="output directory for report.json and PR CSVs")
    p.add_argument("--sap-thresholds")
    p.add_argument("--mapj-thresholds")
    p.add_argument("--tau-count", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--eval-size", type=int)
    p.add_argument(
        "--macro", action="store_const", const=True, default=None,
        help="average per-image APs instead",
    )
    p.set_defaults(func=cmd_eval)

    loss = sub.add_parser("loss", help="loss kernels")
    loss_sub = loss.add_subparsers(dest="subcommand", required=True)
    p = loss_sub.add_parser("check", help="evaluate a kernel and verify its gradient")
    _add_config(p)
    p.add_argument(
        "kernel",
        choices=["reconstruction", "perceptual", "style", "adversarial", "generator"],
    )
    p.add_argument("--x", nargs="+", help="tensor file(s): reference side")
    p.add_argument("--xt", nargs="+", help="tensor file(s): generated side")
    p.add_argument("--m", nargs="+", help="tensor file: binary mask")
    p.add_argument("--d-real", nargs="+", help="tensor file: discriminator output on real")
    p.add_argument("--d-fake", nargs="+", help="tensor file: discriminator output on fake")
    p.add_argument("--gamma", type=float)
    p.add_argument("--eps", type=float)
    p.set_defaults(func=cmd_loss_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except WirekitError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001 -- invariant violations exit 4
        print(f"error[internal]: {exc}", file=sys.stderr)
        return 4


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
