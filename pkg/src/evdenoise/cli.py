"""Command-line driver: ``synth``, ``denoise``, ``eval``, ``plot`` and ``bench``.

Every subcommand writes a JSON config echo next to its main output. Feeding
that echo back through ``--config`` reproduces the run; explicit flags
override values from the config file.

Exit codes: 0 success, 2 parse or configuration error, 3 numerical failure.

Report schema (``eval``): the text report is one ``key=value`` line per
field of :class:`~evdenoise.metrics.ConfusionReport`; the JSON report is an
object with keys ``tp fp tn fn tpr tnr acc ct_seconds undefined`` where
``undefined`` lists the rates whose denominator was zero (reported as 1).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, fields
from pathlib import Path
from xml.etree import ElementTree as ET

import numpy as np

from . import __version__
from .events import EventFormatError, EventStream, load_events, save_events
from .metrics import evaluate
from .noise import RNG_ALGORITHM, NoiseSpec, add_noise
from .pipeline import GAMMA_MODES, GRAPHS, MODES, SOLVERS, PipelineConfig, denoise
from .spectral import SpectralError
from .synthetic import moving_shape_stream

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

BENCH_RATIOS = ((0.06, 0.06), (0.08, 0.04), (0.10, 0.02))

# class -> (colour, legend text); naming follows metrics.ConfusionReport
PLOT_CLASSES = (
    ("tp", "red", "detected real (TP)"),
    ("fp", "orange", "undetected real (FP)"),
    ("tn", "blue", "detected noise (TN)"),
    ("fn", "green", "undetected noise (FN)"),
)
PROJECTIONS = {"xy": ("x", "y"), "xt": ("t", "x"), "yt": ("t", "y")}


class ConfigError(ValueError):
    pass


# --- configuration -------------------------------------------------------------

_PIPELINE_FLAGS = {
    "beta": float, "density_k": int, "omega": int, "power_iters": int, "power_tol": float,
    "num_eigvecs": int, "support_threshold_rel": float, "eig_cutoff": float,
    "knng_k": int, "gamma": float, "seed": int, "dense_cap": int,
}
_PIPELINE_CHOICES = {"graph": GRAPHS, "solver": SOLVERS, "mode": MODES, "gamma_mode": GAMMA_MODES}


def _flag(name):
    return "--" + name.replace("_", "-")


def _add_pipeline_flags(p):
    g = p.add_argument_group("pipeline (defaults from PipelineConfig)")
    for name, typ in _PIPELINE_FLAGS.items():
        g.add_argument(_flag(name), dest=f"pipe_{name}", type=typ, default=None)
    for name, choices in _PIPELINE_CHOICES.items():
        g.add_argument(_flag(name), dest=f"pipe_{name}", choices=choices, default=None)


def _add_noise_flags(p, seed_flag="--seed"):
    g = p.add_argument_group("noise (defaults from NoiseSpec)")
    g.add_argument("--ba-ratio", "--ba", dest="noise_ba_ratio", type=float, default=None,
                   help="background-activity events as a fraction of the clean count")
    g.add_argument("--hot-ratio", "--hot", dest="noise_hot_ratio", type=float, default=None,
                   help="hot-pixel events as a fraction of the clean count")
    g.add_argument("--hot-pixels", dest="noise_hot_pixel_count", type=int, default=None)
    g.add_argument(seed_flag, dest="noise_seed", type=int, default=None, help="noise RNG seed")


def _read_config(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _section(data: dict, name: str, keys) -> dict:
    """Keys for one section: the nested object wins over top-level keys."""
    out = {k: data[k] for k in keys if k in data and not isinstance(data[k], dict)}
    nested = data.get(name, {})
    if not isinstance(nested, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    out.update(nested)
    return out


def _collect(args, prefix: str) -> dict:
    return {k[len(prefix):]: v for k, v in vars(args).items()
            if k.startswith(prefix) and v is not None}


def pipeline_config(args, file_cfg: dict) -> PipelineConfig:
    known = {f.name for f in fields(PipelineConfig)}
    merged = _section(file_cfg, "pipeline", known)
    merged.pop("rng_algorithm", None)
    merged.update(_collect(args, "pipe_"))
    try:
        return PipelineConfig.from_dict(merged)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid pipeline config: {exc}") from exc


def noise_spec(args, file_cfg: dict) -> NoiseSpec:
    known = {f.name for f in fields(NoiseSpec)}
    merged = _section(file_cfg, "noise", ())
    unknown = set(merged) - known
    if unknown:
        raise ConfigError(f"unknown noise keys: {sorted(unknown)}")
    merged.update(_collect(args, "noise_"))
    try:
        return NoiseSpec(**merged)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid noise spec: {exc}") from exc


def echo_path(output) -> Path:
    out = Path(output)
    return out.with_name(out.name + ".config.json")


def write_echo(target, command: str, **sections) -> Path:
    body = {"command": command, "version": __version__, "rng_algorithm": RNG_ALGORITHM}
    body.update(sections)
    path = echo_path(target)
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
    return path


# --- subcommands ---------------------------------------------------------------

def _input_stream(args, file_cfg) -> tuple[EventStream, dict]:
    """Events from ``--input`` or a generated moving-shape stream."""
    gen = _section(file_cfg, "generate", ())
    if args.generate is not None:
        gen["n_events"] = args.generate
    if args.duration is not None:
        gen["duration"] = args.duration
    if args.gen_seed is not None:
        gen["seed"] = args.gen_seed
    if args.input is not None:
        return load_events(args.input, time_unit=args.time_unit), {"input": str(args.input)}
    if "n_events" not in gen:
        raise ConfigError("give --input or --generate")
    try:
        stream = moving_shape_stream(int(gen["n_events"]), duration=float(gen.get("duration", 1.0)),
                                     seed=int(gen.get("seed", 0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid generator settings: {exc}") from exc
    gen.setdefault("duration", 1.0)
    gen.setdefault("seed", 0)
    return stream, {"generate": gen}


def cmd_synth(args) -> int:
    file_cfg = _read_config(args.config)
    spec = noise_spec(args, file_cfg)
    stream, source = _input_stream(args, file_cfg)
    noisy = add_noise(stream, spec)
    save_events(noisy, args.output, format=args.format)
    write_echo(args.output, "synth", noise=asdict(spec), output=str(args.output), **source)
    print(f"wrote {len(noisy)} events ({len(stream)} input) to {args.output}")
    return EXIT_OK


def write_labels(stream: EventStream, labels, path, format="csv"):
    save_events(stream.with_labels(np.asarray(labels, dtype=np.int8)), path, format=format)


def cmd_denoise(args) -> int:
    file_cfg = _read_config(args.config)
    cfg = pipeline_config(args, file_cfg)
    stream = load_events(args.input, time_unit=args.time_unit)
    result = denoise(stream, cfg)
    write_labels(stream, result.labels, args.output, args.format)
    diag_path = args.diagnostics or Path(str(args.output) + ".diagnostics.json")
    Path(diag_path).write_text(json.dumps(result.diagnostics(), indent=2) + "\n")
    write_echo(args.output, "denoise", pipeline=cfg.to_dict(), input=str(args.input),
               output=str(args.output))
    print(f"eps*={result.eps_star:.6g} (radius {result.eps_lin:.6g}) "
          f"edges={result.n_edges} isolated={result.n_isolated}")
    for p in result.pairs:
        print(f"  eigenpair value={p.value:.6g} residual={p.residual:.2e}")
    print(f"real={int(result.labels.sum())}/{len(stream)} CT={result.ct_seconds:.3f}s")
    return EXIT_OK


def _labels_of(path, time_unit="s") -> np.ndarray:
    return np.asarray(load_events(path, time_unit=time_unit).label)


def cmd_eval(args) -> int:
    pred = _labels_of(args.pred)
    truth = _labels_of(args.truth)
    elapsed = 0.0
    if args.diagnostics:
        try:
            elapsed = float(json.loads(Path(args.diagnostics).read_text())["ct_seconds"])
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot read CT from {args.diagnostics}: {exc}") from exc
    report = evaluate(pred, truth, elapsed)
    base = Path(args.output)
    base.with_suffix(".txt").write_text(report.to_text())
    base.with_suffix(".json").write_text(report.to_json())
    write_echo(base.with_suffix(".json"), "eval", pred=str(args.pred), truth=str(args.truth))
    sys.stdout.write(report.to_text())
    return EXIT_OK


def classify(pred, truth) -> np.ndarray:
    """Per-event class name under the metrics naming (tp/fp/tn/fn)."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.shape[0]} predictions vs {truth.shape[0]} labels")
    real, said_real = truth == 1, pred == 1
    return np.select([real & said_real, real & ~said_real, ~real & ~said_real],
                     ["tp", "fp", "tn"], "fn")


def render_svg(stream: EventStream, pred, truth, projection="xy", size=(640, 480)) -> bytes:
    """SVG 1.1 scatter of one 2-D projection with a group per confusion class."""
    if projection not in PROJECTIONS:
        raise ValueError(f"projection must be one of {sorted(PROJECTIONS)}")
    if len(stream) != len(np.asarray(pred)):
        raise ValueError("events and predictions differ in length")
    cls = classify(pred, truth)
    hname, vname = PROJECTIONS[projection]
    h = np.asarray(getattr(stream, hname), dtype=float)
    v = np.asarray(getattr(stream, vname), dtype=float)
    w, ht = size
    left, right, top, bottom = 60, 170, 20, 50
    pw, ph = w - left - right, ht - top - bottom

    def scale(a, lo_px, span_px, flip=False):
        lo, hi = (float(a.min()), float(a.max())) if a.size else (0.0, 1.0)
        frac = (a - lo) / (hi - lo) if hi > lo else np.full(a.shape, 0.5)
        return lo_px + span_px * (1 - frac if flip else frac)

    px = scale(h, left, pw)
    py = scale(v, top, ph, flip=True)

    ET.register_namespace("", "http://www.w3.org/2000/svg")
    ns = "{http://www.w3.org/2000/svg}"
    svg = ET.Element(f"{ns}svg", {"version": "1.1", "width": str(w), "height": str(ht),
                                  "viewBox": f"0 0 {w} {ht}"})
    ET.SubElement(svg, f"{ns}rect", {"x": str(left), "y": str(top), "width": str(pw),
                                     "height": str(ph), "fill": "none", "stroke": "black"})
    xl = ET.SubElement(svg, f"{ns}text", {"x": str(left + pw / 2), "y": str(ht - 15),
                                          "text-anchor": "middle", "id": "xlabel"})
    xl.text = hname
    yl = ET.SubElement(svg, f"{ns}text", {"x": "20", "y": str(top + ph / 2), "text-anchor": "middle",
                                          "transform": f"rotate(-90 20 {top + ph / 2})",
                                          "id": "ylabel"})
    yl.text = vname
    for name, colour, _ in PLOT_CLASSES:
        g = ET.SubElement(svg, f"{ns}g", {"id": name, "fill": colour})
        for a, b in zip(px[cls == name].tolist(), py[cls == name].tolist()):
            ET.SubElement(g, f"{ns}circle", {"cx": f"{a:.2f}", "cy": f"{b:.2f}", "r": "1.5"})
    legend = ET.SubElement(svg, f"{ns}g", {"id": "legend"})
    for row, (name, colour, text) in enumerate(PLOT_CLASSES):
        y0 = top + 10 + 20 * row
        ET.SubElement(legend, f"{ns}rect", {"x": str(w - right + 15), "y": str(y0), "width": "10",
                                            "height": "10", "fill": colour})
        t = ET.SubElement(legend, f"{ns}text", {"x": str(w - right + 30), "y": str(y0 + 9)})
        t.text = f"{text}: {int(np.sum(cls == name))}"
    return ET.tostring(svg, encoding="utf-8", xml_declaration=True)


def cmd_plot(args) -> int:
    stream = load_events(args.events, time_unit=args.time_unit)
    pred = _labels_of(args.pred)
    truth = _labels_of(args.truth)
    if not (len(stream) == len(pred) == len(truth)):
        raise ConfigError(f"inconsistent lengths: events {len(stream)}, pred {len(pred)}, "
                          f"truth {len(truth)}")
    Path(args.output).write_bytes(render_svg(stream, pred, truth, args.projection))
    write_echo(args.output, "plot", events=str(args.events), pred=str(args.pred),
               truth=str(args.truth), projection=args.projection)
    print(f"wrote {args.output}")
    return EXIT_OK


def bench_table(rows) -> str:
    """Methods down, ratio splits across, TPR/TNR/Acc/CT per split."""
    splits = list(dict.fromkeys(r["split"] for r in rows))
    methods = list(dict.fromkeys(r["method"] for r in rows))
    head = f"{'method':<10}" + "".join(f"| ({s})%{'':<{31 - len(s) - 4}}" for s in splits)
    sub = f"{'':<10}" + "".join("| TPR    TNR    Acc    CT[s]   " for _ in splits)
    lines = [head.rstrip(), sub.rstrip()]
    for m in methods:
        cells = []
        for s in splits:
            r = next(r for r in rows if r["method"] == m and r["split"] == s)
            cells.append(f"| {r['tpr']:.3f}  {r['tnr']:.3f}  {r['acc']:.3f}  {r['ct_seconds']:<7.2f} ")
        lines.append((f"{m:<10}" + "".join(cells)).rstrip())
    return "\n".join(lines) + "\n"


def run_bench(stream: EventStream, cfg: PipelineConfig, solvers, hot_pixel_count, seed,
              ratios=BENCH_RATIOS) -> list:
    rows = []
    for ba, hot in ratios:
        noisy = add_noise(stream, NoiseSpec(ba, hot, hot_pixel_count, seed))
        truth = np.asarray(noisy.label)
        for solver in solvers:
            c = PipelineConfig.from_dict({**asdict(cfg), "solver": solver})
            res = denoise(noisy, c)
            rep = evaluate(res.labels, truth, res.ct_seconds)
            rows.append({"method": solver, "split": f"{ba * 100:g}/{hot * 100:g}",
                         "ba_ratio": ba, "hot_ratio": hot, "n_events": len(noisy),
                         **rep.to_dict()})
    return rows


def cmd_bench(args) -> int:
    file_cfg = _read_config(args.config)
    cfg = pipeline_config(args, file_cfg)
    spec = noise_spec(args, file_cfg)
    stream, source = _input_stream(args, file_cfg)
    solvers = [s for s in args.solvers.split(",") if s]
    bad = set(solvers) - set(SOLVERS)
    if bad or not solvers:
        raise ConfigError(f"--solvers must list values from {SOLVERS}")
    rows = run_bench(stream, cfg, solvers, spec.hot_pixel_count, spec.seed)
    table = bench_table(rows)
    out = Path(args.output)
    out.with_suffix(".txt").write_text(table)
    out.with_suffix(".json").write_text(json.dumps(rows, indent=2) + "\n")
    write_echo(out.with_suffix(".json"), "bench", pipeline=cfg.to_dict(), noise=asdict(spec),
               solvers=solvers, **source)
    sys.stdout.write(table)
    return EXIT_OK


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evdenoise", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def io_common(p):
        p.add_argument("--time-unit", choices=("s", "ms", "us"), default="s",
                       help="timestamp unit of CSV inputs")

    def source(p):
        p.add_argument("--input", type=Path, help="clean event file")
        p.add_argument("--generate", type=int, metavar="N",
                       help="use a synthetic moving-ring stream of N events instead")
        p.add_argument("--duration", type=float, help="generated stream length in seconds")
        p.add_argument("--gen-seed", type=int)
        io_common(p)

    p = sub.add_parser("synth", help="inject labelled noise into an event stream")
    source(p)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--format", choices=("csv", "binary"), default="csv")
    p.add_argument("--config", type=Path)
    _add_noise_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("denoise", help="label events real (1) or noise (0)")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True, help="labelled event file")
    p.add_argument("--diagnostics", type=Path, help="JSON diagnostics (default: <output>.diagnostics.json)")
    p.add_argument("--format", choices=("csv", "binary"), default="csv")
    p.add_argument("--config", type=Path)
    io_common(p)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("eval", help="confusion report of predicted against true labels")
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--truth", type=Path, required=True)
    p.add_argument("--diagnostics", type=Path, help="denoise diagnostics to take CT from")
    p.add_argument("--output", type=Path, required=True, help="report base name (.txt and .json)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("plot", help="SVG scatter coloured by confusion class")
    p.add_argument("--events", type=Path, required=True)
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--truth", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--projection", choices=sorted(PROJECTIONS), default="xy")
    io_common(p)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("bench", help="sweep the three BA/hot-pixel splits and tabulate")
    source(p)
    p.add_argument("--output", type=Path, required=True, help="table base name (.txt and .json)")
    p.add_argument("--solvers", default="power,evd")
    p.add_argument("--config", type=Path)
    _add_pipeline_flags(p)
    _add_noise_flags(p, seed_flag="--noise-seed")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # usage errors exit with status 2
    try:
        return args.func(args)
    except SpectralError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, EventFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
