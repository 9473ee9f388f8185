"""Command-line front end.

Configuration comes from an optional JSON file (``--config``) with flags
taking precedence.  Errors exit with code 2 (invalid input) or 3 (numerical
failure: divergence, inadmissibility) and print a JSON object with a
``reason`` field on stderr.  All numbers in reports are written with 17
significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import MellinWaveError, ParameterError, ParseError
from .filters import (
    DifferentialOperatorSpec,
    check_admissibility,
    derive_scale_filter,
    filter_from_spec,
    load_filter_spec,
)
from .harness import compare_paths, denoise_power_law, estimate_spectral_exponent, relative_l2
from .mellin import MellinContour
from .signal_core import Signal, analytic_part, generate_test_signal, load_signal, save_signal
from .transform import ScaleTimeGrid, apply_scale_filter, cwt_forward, export_scaleogram_csv, reconstruct, save_scaleogram
from .wavelets import cauchy_wavelet, parse_wavelet

__all__ = ["RunConfig", "main", "dumps"]


# ---------------------------------------------------------------- json output


def _num(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == int(x) and abs(x) < 2**53 and not (x == 0 and math.copysign(1, x) < 0):
        return repr(float(x))
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats at 17 significant digits and sorted keys.

    Complex numbers become ``[re, im]``; non-finite floats become strings.
    """
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        return "[\n" + ",\n".join(inner + dumps(v, indent, _level + 1) for v in seq) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps([obj.real, obj.imag], indent, _level)
    return json.dumps(str(obj))


def _write_json(obj, path):
    text = dumps(obj) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ---------------------------------------------------------------- config


@dataclass
class RunConfig:
    """Everything a run needs; see ``--help`` of each subcommand."""

    wavelet: str = "cauchy:1"
    octaves: int | None = None
    voices: int = 16
    sigma_min: float | None = None
    include_negative_scales: bool = False
    real_output: bool | None = None
    coverage_tol: float = 1e-6
    contour_c: float | None = None
    u_max: float = 40.0
    n_points: int = 4097
    filter: dict | str | None = None
    input: str | None = None
    output: str | None = None
    report: str | None = None
    csv: str | None = None
    csv_stride: int = 1
    format: str = "csv"
    sample_rate: float | None = None
    seed: int | None = None
    compare: bool = False
    signal_exponent: float = -2.0
    noise_exponent: float = 0.0
    kind: str = "chirp"
    n: int = 4096
    params: dict = field(default_factory=dict)

    @classmethod
    def from_sources(cls, path, overrides: dict) -> "RunConfig":
        data = {}
        if path:
            try:
                raw = json.loads(Path(path).read_text())
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: {exc.msg}", exc.lineno) from None
            data = _flatten(raw)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None and k in known})
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self):
        parse_wavelet(self.wavelet)
        if self.voices is not None and (int(self.voices) != self.voices or self.voices < 1):
            raise ParameterError("voices must be a positive integer")
        if self.octaves is not None and (int(self.octaves) != self.octaves or self.octaves < 1):
            raise ParameterError("octaves must be a positive integer")
        if self.sigma_min is not None and not self.sigma_min > 0:
            raise ParameterError("sigma_min must be positive")
        if self.format not in ("csv", "f64le"):
            raise ParameterError(f"unknown format {self.format!r}")
        if self.sample_rate is not None and not self.sample_rate > 0:
            raise ParameterError("sample_rate must be positive")
        MellinContour(0.0 if self.contour_c is None else self.contour_c, self.u_max, self.n_points)

    def contour(self):
        return None if self.contour_c is None else MellinContour(self.contour_c, self.u_max, self.n_points)


def _flatten(raw: dict) -> dict:
    """Accept nested ``wavelet``/``grid``/``contour`` sections as well as flat keys."""
    out = {}
    for k, v in raw.items():
        if k == "wavelet" and isinstance(v, dict):
            fam = v.get("family", "cauchy")
            out["wavelet"] = f"{fam}:{v.get('alpha', 1)}"
        elif k == "grid" and isinstance(v, dict):
            out.update(v)
        elif k == "contour" and isinstance(v, dict):
            out.update({"contour_c": v.get("c"), "u_max": v.get("u_max", 40.0), "n_points": v.get("n_points", 4097)})
        elif k == "denoise" and isinstance(v, dict):
            out.update(v)
        else:
            out[k] = v
    return out


# ---------------------------------------------------------------- helpers


def _load_input(cfg: RunConfig) -> Signal:
    if not cfg.input:
        raise ParameterError("--input is required")
    path = Path(cfg.input)
    if not path.exists():
        raise ParameterError(f"input file {path} does not exist")
    return load_signal(path, cfg.format, cfg.sample_rate)


def _filter(cfg: RunConfig):
    spec = cfg.filter if cfg.filter is not None else {"type": "identity"}
    if isinstance(spec, str):
        text = spec.strip()
        if text.startswith("{"):
            try:
                spec = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ParseError(f"--filter: {exc.msg}") from None
        else:
            return load_filter_spec(text)
    return filter_from_spec(spec, Path(cfg.input).parent if cfg.input else None)


def _moments(W):
    if W.symbolic:
        return tuple(sorted({t.power for t in W.positive_terms + W.negative_terms if t.coef != 0})) or (0.0,)
    return (0.0,)


def _grid(cfg: RunConfig, signal: Signal, wavelet, moments=(0.0,)) -> ScaleTimeGrid:
    if cfg.sigma_min is not None:
        if cfg.octaves is None:
            raise ParameterError("sigma_min needs octaves")
        return ScaleTimeGrid(cfg.sigma_min, cfg.octaves, cfg.voices, cfg.include_negative_scales, signal.sample_rate)
    return ScaleTimeGrid.for_signal(signal, wavelet, cfg.voices, cfg.octaves, cfg.include_negative_scales,
                                    tol=cfg.coverage_tol, moments=moments)


def _output(cfg: RunConfig, default_suffix: str) -> Path:
    if cfg.output:
        return Path(cfg.output)
    if cfg.input:
        p = Path(cfg.input)
        return p.with_name(p.stem + default_suffix)
    raise ParameterError("--output is required")


def _save(signal: Signal, path: Path, cfg: RunConfig):
    save_signal(signal, path, cfg.format)


# ---------------------------------------------------------------- commands


def cmd_transform(cfg: RunConfig) -> int:
    x = _load_input(cfg)
    wavelet = parse_wavelet(cfg.wavelet)
    grid = _grid(cfg, x, wavelet)
    sg = cwt_forward(x, wavelet, grid)
    out = _output(cfg, ".mwsg")
    save_scaleogram(sg, out)
    csv_path = Path(cfg.csv) if cfg.csv else out.with_name(out.stem + ".scaleogram.csv")
    if cfg.input and csv_path.resolve() == Path(cfg.input).resolve():
        raise ParameterError("scaleogram CSV would overwrite the input file")
    export_scaleogram_csv(sg, csv_path, cfg.csv_stride)
    _write_json({"scaleogram": str(out), "csv": str(csv_path), "grid": grid.describe(), "wavelet": wavelet.name,
                 "shape": list(sg.coefficients.shape)}, cfg.report)
    return 0


def _design_grid(cfg: RunConfig) -> np.ndarray:
    if cfg.sigma_min is not None:
        g = ScaleTimeGrid(cfg.sigma_min, cfg.octaves or 16, cfg.voices, cfg.include_negative_scales)
    else:
        g = ScaleTimeGrid(2.0 ** -8, cfg.octaves or 16, cfg.voices, cfg.include_negative_scales)
    return g.signed_scales


def cmd_design(cfg: RunConfig) -> int:
    wavelet = parse_wavelet(cfg.wavelet)
    W = _filter(cfg)
    report = check_admissibility(W, wavelet, cfg.contour())
    result = {"admissibility": report.as_dict(), "frequency_filter": W.describe()}
    if not report.admissible:
        _write_json(result, cfg.report)
        raise _Inadmissible(report.summary())
    sigma = _design_grid(cfg)
    w = derive_scale_filter(W, wavelet, cfg.contour(), np.abs(sigma))
    if w.domain is not None:
        lo, hi = w.domain
        sigma = sigma[(np.abs(sigma) >= lo) & (np.abs(sigma) <= hi)]
    out = _output(cfg, ".scale_filter.csv")
    w.to_csv(out, sigma)
    result.update({"scale_filter": w.describe(), "csv": str(out),
                   "residual": w.info.get("residual"), "check_band": w.info.get("check_band")})
    _write_json(result, cfg.report)
    return 0


class _Inadmissible(MellinWaveError):
    reason = "inadmissible"
    exit_code = 3


def cmd_apply(cfg: RunConfig) -> int:
    x = _load_input(cfg)
    wavelet = parse_wavelet(cfg.wavelet)
    W = _filter(cfg)
    w = derive_scale_filter(W, wavelet, cfg.contour())
    grid = _grid(cfg, x, wavelet, _moments(W))
    real = x.is_real if cfg.real_output is None else cfg.real_output
    sg = cwt_forward(x, wavelet, grid)
    y = apply_scale_filter(sg, w, wavelet, real_output=real)
    out = _output(cfg, ".filtered.csv")
    _save(y, out, cfg)
    result = {"output": str(out), "grid": grid.describe(), "wavelet": wavelet.name, "real_output": real,
              "filter": W.describe()}
    if cfg.compare:
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result["comparison"] = compare_paths(x, w, W, wavelet, grid, real_output=real, scaleogram=sg).as_dict()
    _write_json(result, cfg.report)
    return 0


def cmd_denoise(cfg: RunConfig) -> int:
    x = _load_input(cfg)
    wavelet = parse_wavelet(cfg.wavelet)
    n = len(x.padded())
    if cfg.sigma_min is not None:
        grid = _grid(cfg, x, wavelet)
    else:
        grid = ScaleTimeGrid.covering(wavelet, x.sample_rate / n, x.sample_rate / 2, cfg.voices, cfg.octaves,
                                      tol=1e-3, sample_rate=x.sample_rate)
    y, details = denoise_power_law(x, cfg.signal_exponent, cfg.noise_exponent, wavelet, grid,
                                   real_output=cfg.real_output, return_details=True)
    out = _output(cfg, ".denoised.csv")
    _save(y, out, cfg)
    result = {"output": str(out), "grid": grid.describe(), "wavelet": wavelet.name, "denoise": details}
    try:
        result["exponent_estimate"] = estimate_spectral_exponent(cwt_forward(x, wavelet, grid)).as_dict()
    except MellinWaveError as exc:
        result["exponent_estimate"] = {"error": exc.reason, "message": str(exc)}
    _write_json(result, cfg.report)
    return 0


def cmd_admissibility(cfg: RunConfig) -> int:
    wavelet = parse_wavelet(cfg.wavelet)
    W = _filter(cfg)
    report = check_admissibility(W, wavelet, cfg.contour())
    _write_json(report.as_dict(), cfg.report)
    return 0 if report.admissible else 3


def cmd_generate(cfg: RunConfig) -> int:
    params = dict(cfg.params)
    if cfg.kind == "power_law_noise" and "seed" not in params:
        if cfg.seed is None:
            raise ParameterError("power_law_noise needs --seed")
        params["seed"] = cfg.seed
    x = generate_test_signal(cfg.kind, cfg.n, cfg.sample_rate, **params)
    if not cfg.output:
        raise ParameterError("--output is required")
    _save(x, Path(cfg.output), cfg)
    return 0


def cmd_selftest(cfg: RunConfig) -> int:
    """Small end-to-end checks; prints one record per check."""
    checks = []
    w1 = cauchy_wavelet(1.0)
    c0 = complex(w1.mellin(0.0, numeric=True)).real
    checks.append(("wavelet_constant", abs(c0 * 16 * math.pi**2 - 1), 1e-8))
    x = generate_test_signal("chirp", 4096, f0=40, f1=100, band=(32, 128))
    grid = ScaleTimeGrid.covering(w1, 32, 128, 16, 10)
    sg = cwt_forward(x, w1, grid)
    checks.append(("reconstruction", relative_l2(reconstruct(sg, w1, real_output=True).samples, x.samples), 1e-2))
    from .filters import hilbert_filter

    h, _ = hilbert_filter(w1)
    y = apply_scale_filter(sg, h, w1, real_output=True).samples
    ref = analytic_part(x).samples.imag
    checks.append(("hilbert", relative_l2(y, ref), 1e-2))
    bad = check_admissibility(DifferentialOperatorSpec((0, 0, 0, 1)), w1)
    checks.append(("inadmissible_cubic", 0.0 if "Psi_mellin(3)" in bad.failing else 1.0, 0.5))
    records = [{"check": n, "value": v, "tolerance": t, "passed": bool(v < t)} for n, v, t in checks]
    _write_json({"checks": records, "passed": all(r["passed"] for r in records)}, cfg.report)
    return 0 if all(r["passed"] for r in records) else 3


COMMANDS = {
    "transform": cmd_transform,
    "design": cmd_design,
    "apply": cmd_apply,
    "denoise": cmd_denoise,
    "admissibility": cmd_admissibility,
    "selftest": cmd_selftest,
    "generate": cmd_generate,
}


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {s!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParameterError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--config", help="JSON configuration file (flags override it)")
    g.add_argument("--input", help="input signal file")
    g.add_argument("--output", help="output file")
    g.add_argument("--report", help="write the JSON report here instead of stdout")
    g.add_argument("--format", choices=["csv", "f64le"], help="signal file format (default csv)")
    g.add_argument("--sample-rate", type=float, dest="sample_rate", help="sample rate for f64le or 1-column CSV")
    g.add_argument("--wavelet", help="wavelet, e.g. cauchy:1")
    g.add_argument("--voices", type=int, help="voices per octave")
    g.add_argument("--octaves", type=int, help="number of octaves")
    g.add_argument("--sigma-min", type=float, dest="sigma_min", help="smallest scale (default: fit to the signal band)")
    g.add_argument("--negative-scales", type=_bool, dest="include_negative_scales", metavar="BOOL",
                   help="also analyse negative scales")
    g.add_argument("--real-output", type=_bool, dest="real_output", metavar="BOOL",
                   help="return a real signal (default: when the input is real)")
    g.add_argument("--filter", help="filter spec: path to JSON or inline JSON")
    g.add_argument("--contour-c", type=float, dest="contour_c", help="Mellin contour abscissa")
    g.add_argument("--u-max", type=float, dest="u_max", help="contour half-length")
    g.add_argument("--n-points", type=int, dest="n_points", help="contour nodes (odd)")
    g.add_argument("--compare", action="store_true", default=None, help="also run the frequency-domain reference")
    g.add_argument("--seed", type=int, help="random seed")
    g.add_argument("--csv", help="scaleogram CSV path (transform)")
    g.add_argument("--csv-stride", type=int, dest="csv_stride", help="keep every N-th time sample in CSV")
    g.add_argument("--signal-exponent", type=float, dest="signal_exponent", help="denoise: signal power-law exponent")
    g.add_argument("--noise-exponent", type=float, dest="noise_exponent", help="denoise: noise exponent (-inf: none)")
    g.add_argument("--kind", help="generate: chirp, multitone, power_law_noise or impulse")
    g.add_argument("--n", type=int, help="generate: number of samples")
    g.add_argument("--params", type=json.loads, help="generate: JSON object of signal parameters")

    parser = _Parser(prog="mellinwave", description="Scale-domain filtering with analytic wavelets.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "transform": "wavelet transform to a binary scaleogram plus CSV",
        "design": "derive the scale filter of a frequency filter (CSV + JSON report)",
        "apply": "filter a signal in the scale domain (--compare adds the reference path)",
        "denoise": "power-law denoising with an exponent estimate",
        "admissibility": "admissibility report for a filter and wavelet",
        "selftest": "quick end-to-end checks",
        "generate": "write a synthetic test signal",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def _error(exc: MellinWaveError | Exception, code: int, reason: str) -> int:
    sys.stderr.write(json.dumps({"error": reason, "type": type(exc).__name__, "message": str(exc),
                                 "exit_code": code}, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
        cfg = RunConfig.from_sources(args.config, overrides)
        return COMMANDS[args.command](cfg)
    except MellinWaveError as exc:
        return _error(exc, exc.exit_code, exc.reason)
    except OSError as exc:
        return _error(exc, 2, "io")
    except (ValueError, TypeError) as exc:
        return _error(exc, 2, "validation")


if __name__ == "__main__":
    sys.exit(main())
