"""``radiocal`` command line.

Exit status is 0 on success, 2 when no usable patch exists and 1 for any
other error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from .estimator import EmptyPatchSet, EstimatorConfig, estimate
from .evaluation import rmse, run_ablation
from .grid import X_GRID
from .imageio import load_image, read_curve, save_image, write_curve
from .imageio import _atomic_write
from .model import GgcmParams
from .patches import SelectionThresholds
from .synth import clean_scene, mixed_scene

log = logging.getLogger("radiocal")

EXIT_OK, EXIT_ERROR, EXIT_EMPTY = 0, 1, 2

_THRESHOLD_KEYS = {f.name for f in fields(SelectionThresholds)}
_CONFIG_KEYS = {f.name for f in fields(EstimatorConfig)} - {"thresholds"}


def _coerce(key, raw: str):
    kind = {f.name: f.type for f in fields(EstimatorConfig) + fields(SelectionThresholds)}[key]
    kind = str(kind)
    if "bool" in kind:
        lowered = raw.strip().lower()
        if lowered not in {"1", "0", "true", "false", "yes", "no", "on", "off"}:
            raise ValueError(f"{key}: expected a boolean, got {raw!r}")
        return lowered in {"1", "true", "yes", "on"}
    if "tuple" in kind:
        return tuple(int(v) for v in raw.split(",") if v.strip())
    if "int" in kind:
        return None if raw.strip().lower() == "none" else int(raw)
    return float(raw)


def load_config(path, base: EstimatorConfig | None = None) -> EstimatorConfig:
    """Read ``key = value`` lines (``#`` starts a comment) over ``base``."""
    cfg = base or EstimatorConfig()
    top, th = {}, {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in _THRESHOLD_KEYS:
            th[key] = _coerce(key, value)
        elif key in _CONFIG_KEYS:
            top[key] = _coerce(key, value)
        else:
            raise ValueError(f"{path}:{n}: unknown key {key!r}")
    return replace(cfg, thresholds=replace(cfg.thresholds, **th), **top)


def _config_from_args(args) -> EstimatorConfig:
    cfg = load_config(args.config) if args.config else EstimatorConfig()
    top = {}
    for flag, key in [("stages", "stages"), ("seed", "seed"), ("prior_weight", "prior_weight"),
                      ("prune", "prune_threshold"), ("grid", "grid_size"), ("stride", "stride"),
                      ("max_patches", "max_patches"), ("jobs", "n_jobs")]:
        value = getattr(args, flag)
        if value is not None:
            top[key] = value
    if args.night:
        top["night_mode"] = True
    if args.literal_staircase:
        top["subcell"] = False
    if "stages" in top and cfg.stage_orders is not None and len(cfg.stage_orders) != top["stages"]:
        top["stage_orders"] = None
    return replace(cfg, **top)


def _add_estimator_flags(p):
    p.add_argument("--config", help="plain-text 'key = value' file; flags override it")
    p.add_argument("--night", action="store_true", help="relax the dark-pixel threshold to 0.02")
    p.add_argument("--stages", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--prior-weight", dest="prior_weight", type=float)
    p.add_argument("--prune", type=float, help="reliability pruning threshold")
    p.add_argument("--grid", type=int, help="vote grid resolution")
    p.add_argument("--stride", type=int)
    p.add_argument("--max-patches", dest="max_patches", type=int)
    p.add_argument("--jobs", type=int, help="worker processes for per-patch work")
    p.add_argument("--literal-staircase", action="store_true",
                   help="fuse votes with cell midpoints instead of in-cell means")


def _dump_json(obj, path):
    text = json.dumps(obj, indent=2) + "\n"
    _atomic_write(path, lambda tmp: Path(tmp).write_text(text))


def cmd_estimate(args) -> int:
    cfg = _config_from_args(args)
    img = load_image(args.image, min_size=cfg.selection.size)
    result = estimate(img, cfg)
    write_curve(result.curve, args.out)
    if args.report:
        _dump_json(result.report(), args.report)
    print("coefficients: " + ", ".join(f"{c:.6g}" for c in result.params.coeffs))
    return EXIT_OK


def cmd_linearize(args) -> int:
    img = load_image(args.image)
    curve = read_curve(args.crf)
    out = np.interp(img, X_GRID, curve.values)
    save_image(args.out, out, bits=args.bits)
    return EXIT_OK


def cmd_synth(args) -> int:
    coeffs = [float(v) for v in args.coeffs.split(",")] if args.coeffs else [args.gamma]
    truth = GgcmParams(tuple(coeffs)).validate()
    build = mixed_scene if args.mixed else clean_scene
    img, curve = build(truth, args.noise, args.seed)
    save_image(args.out, img, bits=args.bits)
    write_curve(curve, args.truth)
    return EXIT_OK


def cmd_eval(args) -> int:
    print(f"rmse: {rmse(read_curve(args.pred), read_curve(args.truth)):.6f}")
    return EXIT_OK


def _scene_pairs(folder: Path):
    pairs = []
    for img_path in sorted(folder.glob("*.png")):
        for cand in (img_path.with_suffix(".csv"), img_path.with_name(img_path.stem + "_truth.csv")):
            if cand.is_file():
                pairs.append((img_path, cand))
                break
        else:
            log.warning("%s: no truth curve next to it, skipped", img_path.name)
    return pairs


def cmd_ablate(args) -> int:
    cfg = _config_from_args(args)
    pairs = _scene_pairs(Path(args.scenes))
    if not pairs:
        raise ValueError(f"{args.scenes}: no scene/truth pairs found")
    dataset = [(load_image(i), read_curve(t)) for i, t in pairs]
    reports = run_ablation(dataset, cfg, n_jobs=cfg.n_jobs)
    out = {
        "scenes": [p.name for p, _ in pairs],
        "variants": {name: {**rep.summary(), "errors": list(rep.errors)} for name, rep in reports.items()},
    }
    _dump_json(out, args.out)
    for name, rep in reports.items():
        print(f"{name:18s} mean {rep.mean:.4f}  median {rep.median:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radiocal", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate the inverse response of one image")
    p.add_argument("image")
    p.add_argument("--out", required=True, help="curve CSV to write")
    p.add_argument("--report", help="diagnostics JSON to write")
    _add_estimator_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("linearize", help="apply an inverse response curve to an image")
    p.add_argument("image")
    p.add_argument("--crf", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bits", type=int, choices=(8, 16), default=16)
    p.set_defaults(func=cmd_linearize)

    p = sub.add_parser("synth", help="render a synthetic scene with a known response")
    p.add_argument("--gamma", type=float, default=0.4)
    p.add_argument("--coeffs", help="comma-separated coefficients; overrides --gamma")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mixed", action="store_true", help="add near-gray distractor edges")
    p.add_argument("--bits", type=int, choices=(8, 16), default=16)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="RMSE between two curve files")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="compare the full method with its ablations")
    p.add_argument("--scenes", required=True, help="folder of <name>.png with <name>.csv truths")
    p.add_argument("--out", required=True)
    _add_estimator_flags(p)
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except EmptyPatchSet as exc:
        print(f"radiocal: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"radiocal: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
