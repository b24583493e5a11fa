"""Command-line experiment runner.

Commands
--------
gate          one analytic gate run (optionally with a Monte Carlo column pair)
sweep-target  fidelity/squeezing vs target squeezing at fixed EPR level
sweep-epr     fidelity/squeezing vs EPR level at fixed target
complex       Fourier rotation followed by the squeezing gate
tomo          shot run + state reconstruction, emitting dataset and state files
validate      brute-force oracle suite; exit 2 if any scenario fails

Sweep-style commands emit the row schema
``target_db,epr_db,R,gx,gp,fidelity,sq_out_db,antisq_out_db,mc_fidelity,mc_stderr``
as CSV (shortest round-trip floats) or as a JSON list of row objects.
Exit codes: 0 success, 1 config error, 2 validation failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import metrics, oracle, protocol, states, tomography
from .metrics import GridSpec

OUT_DIR_ENV = "EPRGATE_OUT_DIR"

COMMANDS = ("gate", "sweep-target", "sweep-epr", "complex", "tomo", "validate")
ROW_COLUMNS = (
    "target_db", "epr_db", "R", "gx", "gp",
    "fidelity", "sq_out_db", "antisq_out_db", "mc_fidelity", "mc_stderr",
)
STATE_COLUMNS = ("label", "source", "mu_x", "mu_p", "v_xx", "v_xp", "v_pp")

DEFAULT_PHASES = (0.0, np.pi / 4.0, np.pi / 2.0)
DEFAULT_TOMO_SHOTS = 20000
WIGNER_EMIT_GRID = GridSpec(step=0.1)


class ConfigError(ValueError):
    """Bad experiment spec: unknown command, malformed config, invalid field."""


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: command plus every knob the commands share."""

    command: str
    target_db: float = 10.0
    epr_db: float = 12.0
    axis: str = protocol.AMPLITUDE
    gain_x: float | None = None
    gain_p: float | None = None
    coupler_rd: float = 1.0
    detection_eta: float = 1.0
    in_dx: float = 0.0
    in_dp: float = 0.0
    sweep_start: float | None = None
    sweep_stop: float | None = None
    sweep_step: float | None = None
    n_shots: int = 0
    seed: int = 0
    phases: tuple = DEFAULT_PHASES
    out: str | None = None
    format: str = "csv"
    wigner_out: str | None = None
    label: str = "run"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.target_db < 0:
            raise ConfigError("negative target")
        if self.epr_db < 0:
            raise ConfigError("negative EPR level")
        if self.axis not in (protocol.AMPLITUDE, protocol.PHASE):
            raise ConfigError(f"axis must be amplitude or phase, got {self.axis!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.n_shots < 0:
            raise ConfigError("shot count must be >= 0")
        if self.command.startswith("sweep"):
            start, stop, step = self.sweep_range()
            if step <= 0:
                raise ConfigError("sweep step must be > 0")
            if stop < start:
                raise ConfigError("empty sweep range")
        if not self.phases:
            raise ConfigError("phase list must be non-empty")

    def sweep_range(self) -> tuple[float, float, float]:
        defaults = (1.0, 15.0, 0.5) if self.command == "sweep-target" else (0.0, 20.0, 1.0)
        start = defaults[0] if self.sweep_start is None else self.sweep_start
        stop = defaults[1] if self.sweep_stop is None else self.sweep_stop
        step = defaults[2] if self.sweep_step is None else self.sweep_step
        return start, stop, step

    def gate_config(self, target_db=None, epr_db=None) -> protocol.GateConfig:
        return protocol.GateConfig.for_target(
            self.target_db if target_db is None else target_db,
            self.axis,
            epr_db=self.epr_db if epr_db is None else epr_db,
            gain_x=self.gain_x,
            gain_p=self.gain_p,
            coupler_rd=self.coupler_rd,
            detection_eta=self.detection_eta,
        )

    def input_state(self) -> states.GaussianState:
        return states.displace(states.vacuum(1), 0, self.in_dx, self.in_dp)

    def out_path(self) -> Path:
        if self.out is not None:
            return Path(self.out)
        name = self.command.replace("-", "_")
        suffix = ".json" if self.format == "json" or self.command == "validate" else ".csv"
        return Path(os.environ.get(OUT_DIR_ENV, ".")) / f"{name}{suffix}"


_FIELD_TYPES = {f.name: f for f in fields(ExperimentSpec)}
_FLOAT_FIELDS = {
    "target_db", "epr_db", "gain_x", "gain_p", "coupler_rd", "detection_eta",
    "in_dx", "in_dp", "sweep_start", "sweep_stop", "sweep_step",
}
_INT_FIELDS = {"n_shots", "seed"}
_STR_FIELDS = {"command", "axis", "out", "format", "wigner_out", "label"}


def load_config(path) -> ExperimentSpec:
    """Parse a JSON config file into a spec; unknown keys are rejected."""
    return ExperimentSpec(**_read_config_dict(path))


def _read_config_dict(path) -> dict:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}:{err.lineno}:{err.colno}: {err.msg}")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    values = {}
    for key, value in raw.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}: unknown key {key!r}")
        values[key] = _coerce(path, key, value)
    return values


def _coerce(path, key, value):
    if value is None:
        return None
    if key == "phases":
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) for v in value):
            raise ConfigError(f"{path}: key 'phases' must be a list of numbers")
        return tuple(float(v) for v in value)
    if key in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: key {key!r} must be an integer")
        return value
    if key in _FLOAT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: key {key!r} must be a number")
        return float(value)
    if key in _STR_FIELDS:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: key {key!r} must be a string")
        return value
    raise ConfigError(f"{path}: unknown key {key!r}")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return repr(float(value)) if isinstance(value, float) else str(value)


def _write_rows(path: Path, columns, rows, fmt: str):
    if fmt == "csv":
        lines = [",".join(columns)]
        lines += [",".join(_fmt(row[c]) for c in columns) for row in rows]
        path.write_text("\n".join(lines) + "\n")
    else:
        payload = [{c: row[c] for c in columns} for row in rows]
        path.write_text(json.dumps(payload, indent=2) + "\n")


def _sweep_values(start: float, stop: float, step: float) -> np.ndarray:
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 9)


def _mc_estimate(spec, config, input_state, target, seed):
    dataset = protocol.run_gate_shots(config, input_state, spec.n_shots, spec.phases, seed)
    recon = tomography.reconstruct(dataset)
    mu = recon.state.mean
    cov = recon.state.cov
    fid = metrics.fidelity(target, recon.state).fidelity

    def overlap_of(params):
        mean = params[:2]
        vxx, vpp, vxp = params[2:]
        return metrics.gaussian_overlap(
            target.mean, target.cov, mean, np.array([[vxx, vxp], [vxp, vpp]])
        )[0]

    params = np.array([mu[0], mu[1], cov[0, 0], cov[1, 1], cov[0, 1]])
    grad = np.empty(5)
    for i in range(5):
        h = max(1e-7, 1e-5 * abs(params[i]))
        up, down = params.copy(), params.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (overlap_of(up) - overlap_of(down)) / (2.0 * h)
    param_cov = np.zeros((5, 5))
    param_cov[:2, :2] = recon.mean_cov
    param_cov[2:, 2:] = recon.var_cov
    stderr = float(np.sqrt(max(grad @ param_cov @ grad, 0.0)))
    return float(fid), stderr


def _gate_row(spec, target_db, epr_db, seed, complex_op=False) -> dict:
    config = spec.gate_config(target_db, epr_db)
    input_state = spec.input_state()
    if complex_op:
        result = protocol.run_complex(config, input_state)
        shot_input = protocol.fourier(input_state)
    else:
        result = protocol.run_gate_analytic(config, input_state)
        shot_input = input_state
    gx, gp = config.gains()
    report = metrics.squeezing_db(result.output)
    mc_fidelity = mc_stderr = None
    if spec.n_shots > 0:
        mc_fidelity, mc_stderr = _mc_estimate(spec, config, shot_input, result.target, seed)
    return {
        "target_db": float(target_db),
        "epr_db": float(epr_db),
        "R": config.reflectivity_r,
        "gx": gx,
        "gp": gp,
        "fidelity": metrics.fidelity(result.target, result.output).fidelity,
        "sq_out_db": report.min_variance_db,
        "antisq_out_db": report.max_variance_db,
        "mc_fidelity": mc_fidelity,
        "mc_stderr": mc_stderr,
        "_result": result,
    }


def _emit_wigner(spec, result):
    prefix = Path(spec.wigner_out)
    input_field = metrics.wigner(spec.input_state(), WIGNER_EMIT_GRID)
    output_field = metrics.wigner(result.output, WIGNER_EMIT_GRID)
    for tag, field in (("input", input_field), ("output", output_field)):
        path = prefix.parent / f"{prefix.name}_{tag}.csv"
        lines = ["x,p,w"]
        for i, x in enumerate(field.x):
            for j, p in enumerate(field.p):
                lines.append(f"{_fmt(float(x))},{_fmt(float(p))},{_fmt(float(field.values[i, j]))}")
        path.write_text("\n".join(lines) + "\n")


def _run_rows(spec) -> int:
    if spec.command == "gate":
        rows = [_gate_row(spec, spec.target_db, spec.epr_db, spec.seed)]
    elif spec.command == "complex":
        rows = [_gate_row(spec, spec.target_db, spec.epr_db, spec.seed, complex_op=True)]
    elif spec.command == "sweep-target":
        start, stop, step = spec.sweep_range()
        rows = [
            _gate_row(spec, t, spec.epr_db, (spec.seed, k))
            for k, t in enumerate(_sweep_values(start, stop, step))
        ]
    else:  # sweep-epr
        start, stop, step = spec.sweep_range()
        rows = [
            _gate_row(spec, spec.target_db, e, (spec.seed, k))
            for k, e in enumerate(_sweep_values(start, stop, step))
        ]
    if spec.wigner_out is not None and spec.command in ("gate", "complex"):
        _emit_wigner(spec, rows[0]["_result"])
    for row in rows:
        row.pop("_result")
    _write_rows(spec.out_path(), ROW_COLUMNS, rows, spec.format)
    return 0


def _run_tomo(spec) -> int:
    config = spec.gate_config()
    input_state = spec.input_state()
    n_shots = spec.n_shots or DEFAULT_TOMO_SHOTS
    dataset = protocol.run_gate_shots(config, input_state, n_shots, spec.phases, spec.seed)
    out = spec.out_path()
    dataset.save(out.parent / f"{out.stem}_shots.csv")
    recon = tomography.reconstruct(dataset)
    theory = protocol.run_gate_analytic(config, input_state).output
    rows = []
    for source, state in (("measured", recon.state), ("theory", theory)):
        rows.append({
            "label": spec.label,
            "source": source,
            "mu_x": float(state.mean[0]),
            "mu_p": float(state.mean[1]),
            "v_xx": float(state.cov[0, 0]),
            "v_xp": float(state.cov[0, 1]),
            "v_pp": float(state.cov[1, 1]),
        })
    _write_rows(out, STATE_COLUMNS, rows, spec.format)
    return 0


def _run_validate(spec) -> int:
    verdicts = oracle.validation_suite(seed=spec.seed or 2024)
    payload = {
        "verdicts": [v.to_dict() for v in verdicts],
        "all_pass": all(v.passed for v in verdicts),
    }
    out = spec.out_path()
    out.write_text(json.dumps(payload, indent=2) + "\n")
    return 0 if payload["all_pass"] else 2


def run(spec: ExperimentSpec) -> int:
    """Execute one experiment spec; returns the process exit code."""
    out = spec.out_path()
    if out.parent and not out.parent.exists():
        raise ConfigError(f"output directory does not exist: {out.parent}")
    if spec.command == "validate":
        return _run_validate(spec)
    if spec.command == "tomo":
        return _run_tomo(spec)
    return _run_rows(spec)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eprgate",
        description="EPR-assisted squeezing gate experiments",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--target-db", type=float, dest="target_db")
    parser.add_argument("--epr-db", type=float, dest="epr_db")
    parser.add_argument("--axis", choices=(protocol.AMPLITUDE, protocol.PHASE))
    parser.add_argument("--gain-x", type=float, dest="gain_x")
    parser.add_argument("--gain-p", type=float, dest="gain_p")
    parser.add_argument("--coupler-rd", type=float, dest="coupler_rd")
    parser.add_argument("--detection-eta", type=float, dest="detection_eta")
    parser.add_argument("--in-dx", type=float, dest="in_dx")
    parser.add_argument("--in-dp", type=float, dest="in_dp")
    parser.add_argument("--sweep-start", type=float, dest="sweep_start")
    parser.add_argument("--sweep-stop", type=float, dest="sweep_stop")
    parser.add_argument("--sweep-step", type=float, dest="sweep_step")
    parser.add_argument("--shots", type=int, dest="n_shots")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--phases", help="comma-separated LO phases in radians")
    parser.add_argument("--out")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--wigner-out", dest="wigner_out")
    parser.add_argument("--label")
    return parser


def build_spec(argv) -> ExperimentSpec:
    args = build_parser().parse_args(argv)
    values = _read_config_dict(args.config) if args.config else {}
    for name in _FIELD_TYPES:
        if name in ("command", "phases"):
            continue
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    if args.phases is not None:
        try:
            values["phases"] = tuple(float(v) for v in args.phases.split(","))
        except ValueError:
            raise ConfigError(f"bad --phases value {args.phases!r}")
    values["command"] = args.command
    return ExperimentSpec(**values)


def main(argv=None) -> int:
    try:
        spec = build_spec(sys.argv[1:] if argv is None else argv)
        return run(spec)
    except SystemExit as err:
        # argparse exits 2 on usage errors; 2 is reserved for validation failure
        return 0 if err.code in (0, None) else 1
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
