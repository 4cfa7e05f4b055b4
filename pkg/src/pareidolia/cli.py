"""``pareidolia`` command line entry point.

Exit status is 0 on success, 1 on a usage error and 2 when input data are
malformed. Every run writes a metadata sidecar (command, version, seed,
parameters, wall time) to ``--meta`` if given, else ``<output>.meta.json``
beside the primary output, else ``./pareidolia-<command>.meta.json``.
"""

import argparse
import io
import json
import logging
import math
import os
import sys
import time

import numpy as np

from . import __version__, feature_model, gaussian_model, montecarlo, psycho, stimuli
from ._errors import DataError, DegenerateRangeError, ParameterError, ShapeError
from ._io import atomic_write, read_image, write_image, write_json
from .curve import Curve, curve_to_csv, peak_of_curve
from .evalkit import annotations as ann
from .evalkit import ap as ap_mod
from .evalkit.faces import average_face
from .svg import render_svg


log = logging.getLogger("pareidolia")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def parse_grid(text, default_scale="lin"):
    """``a:b:n[:log|:lin]`` or a comma-separated list of numbers."""
    parts = text.split(":")
    if len(parts) == 1:
        try:
            vals = [float(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"bad number list {text!r}") from None
        if not vals:
            raise UsageError("empty grid")
        return vals
    if len(parts) not in (3, 4):
        raise UsageError(f"grid must look like a:b:n[:log], got {text!r}")
    scale = parts[3] if len(parts) == 4 else default_scale
    n_text = parts[2]
    if n_text.endswith("(log)"):
        n_text, scale = n_text[:-5], "log"
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(n_text)
    except ValueError:
        raise UsageError(f"bad grid {text!r}") from None
    if n < 1:
        raise UsageError("grid needs at least one point")
    if scale == "log":
        if a <= 0 or b <= 0:
            raise UsageError("log grid bounds must be > 0")
        return np.geomspace(a, b, n).tolist()
    if scale != "lin":
        raise UsageError(f"unknown grid scale {scale!r}")
    return np.linspace(a, b, n).tolist()


def _emit(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write(path, text)


def _maybe_svg(args, curve, log_y=False, log_x=False):
    if getattr(args, "svg", None):
        atomic_write(args.svg, render_svg(curve, log_y=log_y, log_x=log_x))


# -- subcommands -----------------------------------------------------------------


def cmd_gen_noise(args):
    spec = stimuli.NoiseSpec(args.size, args.width, args.seed)
    files = []
    for k, child in enumerate(stimuli.batch_specs(spec, args.count)):
        name = f"noise_w{args.width:g}_s{args.seed}_{k}.pgm"
        write_image(os.path.join(args.out, name), stimuli.quantize(stimuli.gen_noise(child)))
        files.append({"file": name, "index": k, "size": child.size,
                      "width": child.width, "seed": child.seed})
    write_json(os.path.join(args.out, "manifest.json"),
               {"parent": {"size": spec.size, "width": spec.width, "seed": spec.seed},
                "images": files})
    return {"n_images": len(files)}


def cmd_model_curve(args):
    if args.model == "gaussian":
        widths = parse_grid(args.widths, "log")
        curve = gaussian_model.curve_over_widths(
            widths, args.modes, args.amplitude, args.s0,
            gaussian_model.GaussianDetectionParams(args.gamma))
        out = Curve(curve.x, [y / math.log(10) for y in curve.y],
                    x_name="width", y_name="log10_density")
        _emit(args.out, curve_to_csv(out))
        _maybe_svg(args, out, log_x=True)
    else:
        lambdas = parse_grid(args.lambdas, "lin")
        out = feature_model.feature_curve(lambdas, args.regions, args.area)
        _emit(args.out, curve_to_csv(out))
        _maybe_svg(args, out)
    x, y = peak_of_curve(out)
    return {"peak_x": x, "peak_y": y}


def cmd_simulate(args):
    if args.kind == "mode-density":
        est = montecarlo.mc_mode_density(args.a, args.sigma, args.gamma, args.trials, args.seed)
        exact = gaussian_model.mode_match_density(args.a, args.sigma, args.gamma)
    elif args.kind == "feature":
        params = feature_model.FeatureModelParams(args.lam, args.regions, args.area)
        est = montecarlo.mc_feature_detect(params, args.trials, args.seed)
        exact = feature_model.template_detect_prob(params)
    else:
        widths = parse_grid(args.widths, "log")
        curve = montecarlo.detection_curve(widths, args.per_width, args.size,
                                           threshold=args.threshold, seed=args.seed)
        _emit(args.out, curve_to_csv(curve))
        _maybe_svg(args, curve, log_x=True)
        x, y = peak_of_curve(curve)
        return {"peak_x": x, "peak_y": y}
    buf = io.StringIO()
    buf.write("estimate,std_error,trials,seed,analytic,z_score\n")
    buf.write(f"{est.mean:.17g},{est.std_error:.17g},{est.trials},{est.seed},"
              f"{exact:.17g},{est.z_score(exact):.6g}\n")
    _emit(args.out, buf.getvalue())
    return {"estimate": est.mean, "std_error": est.std_error, "analytic": exact}


def cmd_eval_ap(args):
    gts = ann.load_annotations(args.gt)
    dets = ann.load_detections(args.dets)
    ignore = None
    if args.subset:
        if "=" not in args.subset:
            raise UsageError("--subset must look like attribute=value")
        attr, value = args.subset.split("=", 1)
        if attr not in ann.ATTRIBUTES or value not in ann.ATTRIBUTES[attr]:
            raise UsageError(f"unknown subset {args.subset!r}")
        ignore = ap_mod.subset_ignore(gts, attr, value)
    value = ap_mod.average_precision(dets, gts, args.iou, ignore)
    print(f"AP {value:.4f}")
    if args.out:
        write_json(args.out, {"ap": value, "iou": args.iou, "subset": args.subset})
    return {"ap": value}


def cmd_stats(args):
    report = ann.dataset_stats(ann.load_annotations(args.gt))
    body = report.to_dict()
    body["reference"] = [
        {"attribute": a, "value": v, "observed": o, "expected": e}
        for (a, v), (o, e) in ann.compare_to_reference(report).items()
    ]
    if args.out:
        write_json(args.out, body)
    else:
        print(json.dumps(body, indent=2, sort_keys=True))
    return {"n_images": report.n_images, "n_faces": report.n_faces}


def _find_image(directory, image_id):
    direct = os.path.join(directory, image_id)
    if os.path.isfile(direct):
        return direct
    for ext in (".png", ".jpg", ".jpeg", ".ppm", ".pgm", ".bmp"):
        if os.path.isfile(direct + ext):
            return direct + ext
    raise DataError(f"no image file for {image_id!r} in {directory}")


def cmd_avg_face(args):
    items = []
    for rec in ann.load_annotations(args.gt):
        if not rec.boxes:
            continue
        image = read_image(_find_image(args.images, rec.image_id))
        items.extend((image, b.box) for b in rec.boxes)
    if not items:
        raise DataError("annotations contain no boxes")
    face = average_face(items, args.size)
    write_image(args.out, face.raw_uint8)
    if args.equalized:
        write_image(args.equalized, face.equalized)
    return {"n_faces": len(items)}


def _load_trials(args):
    trials = psycho.read_trials(args.trials)
    if getattr(args, "no_clean", False):
        return trials
    return psycho.clean_trials(trials)[0]


def cmd_psycho(args):
    if args.action == "synth":
        trials = psycho.synth_trials(psycho.Design(), args.seed)
        buf = io.StringIO()
        psycho.write_trials(trials, buf)
        _emit(args.out, buf.getvalue())
        return {"n_trials": len(trials)}
    if not args.trials:
        raise UsageError("--trials is required")
    if args.action == "clean":
        kept, dropped = psycho.clean_trials(psycho.read_trials(args.trials))
        buf = io.StringIO()
        psycho.write_trials(kept, buf)
        _emit(args.out, buf.getvalue())
        if args.dropped:
            rows = io.StringIO()
            psycho.write_trials([t for t, _ in dropped], rows)
            lines = rows.getvalue().splitlines()
            reasons = ["reason"] + [r for _, r in dropped]
            atomic_write(args.dropped, "".join(f"{a},{b}\n" for a, b in zip(lines, reasons)))
        return {"kept": len(kept), "dropped": len(dropped)}
    trials = _load_trials(args)
    if args.action == "curve":
        band = args.band or "ci95"
        if args.level == "subject":
            curves = psycho.aggregate_curve(trials, "subject", band)
            buf = io.StringIO()
            buf.write("subject_id,width,mean_response,n_trials\n")
            for sid, c in curves.items():
                for x, y, n in zip(c.x, c.y, c.meta["n_trials"]):
                    buf.write(f"{sid},{x:.17g},{y:.17g},{n}\n")
            _emit(args.out, buf.getvalue())
            return {"n_subjects": len(curves)}
        curve = psycho.aggregate_curve(trials, "population", band)
        _emit(args.out, curve_to_csv(curve))
        _maybe_svg(args, curve, log_x=True)
        x, y = peak_of_curve(curve)
        return {"peak_x": x, "peak_y": y}
    if args.action == "rt":
        curve = psycho.rt_curve(trials, args.band or "sd")
        _emit(args.out, curve_to_csv(curve))
        _maybe_svg(args, curve, log_x=True)
        return {"peak_x": peak_of_curve(curve)[0]}
    if args.action == "groups":
        cmp = psycho.compare_groups(trials, args.factor, args.band or "sd")
        buf = io.StringIO()
        buf.write("level,width,mean_response,band\n")
        for level, c in cmp.curves.items():
            for x, y, b in zip(c.x, c.y, c.ci):
                buf.write(f"{level},{x:.17g},{y:.17g},{b:.17g}\n")
        buf.write("\nwidth,level_a,level_b,abs_diff,pooled_sd\n")
        for w, a, b, d, s in cmp.differences:
            buf.write(f"{w:.17g},{a},{b},{d:.17g},{s:.17g}\n")
        _emit(args.out, buf.getvalue())
        return {"levels": list(cmp.curves), "flagged": cmp.flagged}
    # fit
    curve = psycho.aggregate_curve(trials, "population")
    cfg = gaussian_model.GaussianModelConfig(args.modes, args.amplitude, args.s0)
    fit = psycho.fit_gaussian_model(curve, parse_grid(args.gammas, "lin"), cfg)
    buf = io.StringIO()
    buf.write("gamma,rss\n")
    for g, r in fit.grid:
        buf.write(f"{g:.17g},{r:.17g}\n")
    _emit(args.out, buf.getvalue())
    print(f"gamma_hat {fit.gamma_hat:g} scale_hat {fit.scale_hat:.6g} rss {fit.rss:.6g}",
          file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return {"gamma_hat": fit.gamma_hat, "scale_hat": fit.scale_hat, "rss": fit.rss,
            "skipped": list(fit.skipped)}


# -- parser ------------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="pareidolia", description="Models and measurements of face pareidolia.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--meta", help="path of the run metadata sidecar")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    # the same flags after the subcommand; SUPPRESS keeps them from resetting the global value
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--meta", default=argparse.SUPPRESS, help="path of the run metadata sidecar")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gen-noise", parents=[common], help="write Gaussian-envelope noise images as PGM")
    g.add_argument("--size", type=int, default=256)
    g.add_argument("--width", type=float, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_gen_noise)

    m = sub.add_parser("model-curve", parents=[common], help="closed-form pareidolia curves")
    m.add_argument("--model", choices=("gaussian", "feature"), required=True)
    m.add_argument("--gamma", type=float, default=10.0)
    m.add_argument("--modes", type=int, default=64)
    m.add_argument("--amplitude", type=float, default=gaussian_model.GaussianModelConfig.amplitude)
    m.add_argument("--s0", type=float, default=gaussian_model.GaussianModelConfig.s0)
    m.add_argument("--widths", default="0.25:64:25:log")
    m.add_argument("--regions", type=int, default=4)
    m.add_argument("--area", type=float, default=1.0)
    m.add_argument("--lambdas", default="0:2:201")
    m.add_argument("--out")
    m.add_argument("--svg")
    m.set_defaults(func=cmd_model_curve)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo oracles and the toy detector")
    s.add_argument("kind", choices=("mode-density", "feature", "detect-curve"))
    s.add_argument("--trials", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.add_argument("--svg")
    s.add_argument("--a", type=float, default=1.0)
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--regions", type=int, default=4)
    s.add_argument("--lam", "--lambda", dest="lam", type=float, default=0.25)
    s.add_argument("--area", type=float, default=1.0)
    s.add_argument("--widths", default=",".join(f"{w:g}" for w in montecarlo.DEFAULT_WIDTHS))
    s.add_argument("--per-width", type=int, default=100)
    s.add_argument("--size", type=int, default=256)
    s.add_argument("--threshold", type=float, default=montecarlo.DEFAULT_THRESHOLD)
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("eval-ap", parents=[common], help="average precision of detections")
    e.add_argument("--gt", required=True)
    e.add_argument("--dets", required=True)
    e.add_argument("--iou", type=float, default=0.5)
    e.add_argument("--subset")
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval_ap)

    st = sub.add_parser("stats", parents=[common], help="annotation attribute statistics")
    st.add_argument("--gt", required=True)
    st.add_argument("--out")
    st.set_defaults(func=cmd_stats)

    a = sub.add_parser("avg-face", parents=[common], help="average face image from annotated boxes")
    a.add_argument("--gt", required=True)
    a.add_argument("--images", required=True)
    a.add_argument("--size", type=int, default=128)
    a.add_argument("--out", required=True)
    a.add_argument("--equalized")
    a.set_defaults(func=cmd_avg_face)

    ps = sub.add_parser("psycho", parents=[common], help="psychophysics trial analysis")
    ps.add_argument("action", choices=("clean", "curve", "rt", "groups", "fit", "synth"))
    ps.add_argument("--trials")
    ps.add_argument("--out")
    ps.add_argument("--svg")
    ps.add_argument("--dropped", help="clean: also write dropped trials with reasons")
    ps.add_argument("--no-clean", action="store_true", help="skip the RT cuts before analysis")
    ps.add_argument("--level", choices=("population", "subject"), default="population")
    ps.add_argument("--band", choices=("ci95", "sd"))
    ps.add_argument("--factor", choices=("group", "gender"), default="group")
    ps.add_argument("--gammas", default="1:20:20")
    ps.add_argument("--modes", type=int, default=64)
    ps.add_argument("--amplitude", type=float, default=gaussian_model.GaussianModelConfig.amplitude)
    ps.add_argument("--s0", type=float, default=gaussian_model.GaussianModelConfig.s0)
    ps.add_argument("--design", choices=("appendix",), default="appendix")
    ps.add_argument("--seed", type=int, default=0)
    ps.set_defaults(func=cmd_psycho)
    return p


def _sidecar_path(args):
    if args.meta:
        return args.meta
    out = getattr(args, "out", None)
    if out and out != "-":
        if args.command == "gen-noise":
            return os.path.join(out, "run.meta.json")
        return out + ".meta.json"
    return f"pareidolia-{args.command}.meta.json"


def _jsonable(v):
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return str(v)


def _configure_logging(verbose):
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(logging.INFO if verbose else logging.WARNING)
    log.propagate = False


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError(parser.format_help())
        _configure_logging(args.verbose)
        log.info("running %s", args.command)
        start = time.perf_counter()
        result = args.func(args)
        elapsed = time.perf_counter() - start
    except UsageError as exc:
        sys.stderr.write(str(exc).rstrip() + "\n")
        return 1
    except (ParameterError, ShapeError) as exc:
        sys.stderr.write(f"pareidolia: invalid parameter: {exc}\n")
        return 1
    except (DataError, DegenerateRangeError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"pareidolia: data error: {exc}\n")
        return 2
    log.info("%s finished in %.3f s", args.command, elapsed)
    params = {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in ("func", "meta")}
    write_json(_sidecar_path(args), {
        "command": args.command,
        "argv": argv,
        "version": __version__,
        "seed": params.get("seed"),
        "parameters": params,
        "result": {k: _jsonable(v) for k, v in (result or {}).items()},
        "wall_time_s": elapsed,
    })
    log.info("metadata written to %s", _sidecar_path(args))
    return 0


if __name__ == "__main__":
    sys.exit(main())
