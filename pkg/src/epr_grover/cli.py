"""Command line front end: ``verify``, ``synth``, ``sweep`` and ``presets``.

Exit codes: 0 success, 1 verification failure, 2 bad input.
"""

from __future__ import annotations

import argparse
import ast
import json
import math
import operator
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import grover, nmr, spectra
from .linalg import fidelity, haar_unitary, projector, rotation
from .verification import run_checks


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    system: nmr.SpinSystem = field(default_factory=nmr.SpinSystem)
    job: str = "preset"
    preset: dict | None = None
    custom: dict | None = None
    outputs: str = "out"
    delay_mode: str = "coupled"
    tolerance: float = 1e-9
    seed: int = 0
    n_range: tuple | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        unknown = set(d) - {"system", "job", "preset", "custom", "outputs", "delay_mode", "tolerances", "tolerance", "seed", "n_range"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            system = nmr.SpinSystem(**d.get("system", {}))
        except TypeError as exc:
            raise ConfigError(f"bad system block: {exc}") from None
        tol = d.get("tolerance", d.get("tolerances", {}).get("equivalence", 1e-9))
        cfg = cls(
            system=system,
            job=d.get("job", "preset" if "custom" not in d else "custom"),
            preset=d.get("preset"),
            custom=d.get("custom"),
            outputs=d.get("outputs", "out"),
            delay_mode=d.get("delay_mode", "coupled"),
            tolerance=float(tol),
            seed=int(d.get("seed", 0)),
            n_range=tuple(d["n_range"]) if "n_range" in d else None,
        )
        return cfg

    def validate(self) -> None:
        if self.job not in ("preset", "custom"):
            raise ConfigError(f"job must be 'preset' or 'custom', got {self.job!r}")
        if self.job == "preset":
            if self.custom is not None:
                raise ConfigError("give exactly one of preset / custom")
            self.preset = {"j": 3, "source_index": 0, "family": "Y", "n": 1, **(self.preset or {})}
        else:
            if self.preset is not None:
                raise ConfigError("give exactly one of preset / custom")
            if not self.custom:
                raise ConfigError("custom job needs a 'custom' block")
        if self.delay_mode not in nmr.MODES:
            raise ConfigError(f"delay_mode must be one of {nmr.MODES}")


# -- custom unitaries -----------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def eval_angle(text: str) -> float:
    """Arithmetic on numbers and ``pi`` only."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        raise ConfigError(f"unsupported angle expression {text!r}")

    try:
        return ev(ast.parse(text, mode="eval"))
    except SyntaxError:
        raise ConfigError(f"unparsable angle expression {text!r}") from None


_FACTOR = re.compile(r"\s*\*?\s*([XY])([12])\(")


def parse_pulse_product(expr: str) -> np.ndarray:
    """``"X1(pi/4) * Y2(3*pi/4)"`` -> the operator product, written left to right."""
    u = np.eye(4, dtype=complex)
    pos = 0
    expr = expr.strip()
    if not expr:
        raise ConfigError("empty pulse-product expression")
    while pos < len(expr):
        m = _FACTOR.match(expr, pos)
        if not m:
            raise ConfigError(f"cannot parse pulse product at {expr[pos:]!r}")
        depth, i = 1, m.end()
        while i < len(expr) and depth:
            depth += {"(": 1, ")": -1}.get(expr[i], 0)
            i += 1
        if depth:
            raise ConfigError(f"unbalanced parentheses in {expr!r}")
        angle = eval_angle(expr[m.end():i - 1])
        u = u @ rotation(int(m.group(2)), m.group(1).lower(), angle)
        pos = i
        while pos < len(expr) and expr[pos].isspace():
            pos += 1
    return u


def parse_unitary(value, dim: int, seed: int) -> np.ndarray:
    if value == "random" or (isinstance(value, dict) and "random" in value):
        s = value.get("seed", seed) if isinstance(value, dict) else seed
        return haar_unitary(dim, np.random.default_rng(s))
    if isinstance(value, str):
        if dim != 4:
            raise ConfigError("pulse-product unitaries need dim = 4")
        return parse_pulse_product(value)
    try:
        m = np.array([[complex(*e) if isinstance(e, (list, tuple)) else complex(e) for e in row] for row in value])
    except (TypeError, ValueError):
        raise ConfigError("unitary must be 'random', a pulse-product string or rows of [re, im] pairs") from None
    return m


def custom_spec(custom: dict, seed: int) -> grover.SearchSpec:
    try:
        dim = int(custom["dim"])
        unitary = parse_unitary(custom.get("unitary", "random"), dim, seed)
        return grover.SearchSpec(dim, int(custom.get("source", 0)), frozenset(custom["marked"]), unitary)
    except KeyError as exc:
        raise ConfigError(f"custom block is missing {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def preset_spec(preset: dict) -> grover.SearchSpec:
    try:
        return grover.epr_presets(int(preset["j"]), int(preset["source_index"]), preset["family"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


# -- outputs --------------------------------------------------------------------


def complex_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def write_spectra_outputs(out: Path, rho_read: np.ndarray, system: nmr.SpinSystem) -> str:
    refs = [spectra.make_reference(1, system), spectra.make_reference(2, system)]
    peaks = spectra.calibrate(spectra.peak_table(rho_read, system), refs)
    _write(out / "peaks.json", nmr.dumps(spectra.peaks_to_records(peaks)))
    for spin, spec in spectra.render(peaks, system).items():
        _write(out / f"spectrum_spin{spin}.csv", spec.to_csv())
    cls = spectra.classify(peaks)
    _write(out / "classification.json", nmr.dumps({"label": cls.label, "sign_quadruple": list(cls.sign_quadruple)}))
    return cls.label


def synth_preset(cfg: RunConfig, out: Path) -> dict:
    p, system = cfg.preset, cfg.system
    j, n, family, source = int(p["j"]), int(p["n"]), p["family"], int(p["source_index"])
    spec = preset_spec(p)
    seq = nmr.pseudo_pure_sequence(system)
    if source == 1:
        # |uu> -> |ud> population transfer
        seq = seq + nmr.PulseSequence((nmr.Pulse(2, "x", math.pi),))
    seq = seq + nmr.compile_grover(j, n, family, source)
    readout_pulse = nmr.Pulse(1, "y", math.pi / 2)
    _write(out / "sequence.json", nmr.sequence_dumps(seq + nmr.PulseSequence((readout_pulse,))))

    rho = nmr.apply_sequence(nmr.equilibrium_deviation(system), seq, system, cfg.delay_mode) / system.gamma_ratio
    rho_read = nmr.readout(rho, readout_pulse)
    _write(out / "density.json", nmr.dumps({"synthesized": complex_matrix(rho), "after_readout": complex_matrix(rho_read)}))
    label = write_spectra_outputs(out, rho_read, system)

    op = grover.synthesize(spec, n)
    best_n, best_f = grover.best_iteration(spec, 10)
    return {
        "job": "preset",
        "j": j, "n": n, "family": grover.normalize_family(family), "source_index": source,
        "target": grover.STATE_LABELS[(grover.normalize_family(family), j)],
        "delay_mode": cfg.delay_mode,
        "pulse_level_fidelity": fidelity(rho, grover.target_state(spec)),
        "operator_level": {"fidelity": op.fidelity_to_target, "global_phase": [op.global_phase.real, op.global_phase.imag]},
        "best_iteration": {"n": best_n, "fidelity": best_f},
        "classification": label,
    }


def synth_custom(cfg: RunConfig, out: Path) -> dict:
    c = cfg.custom
    spec = custom_spec(c, cfg.seed)
    u = grover.coupling_amplitude(spec)
    estimate = grover.iteration_estimate(u) if u > 0 else None
    n_max = int(c.get("n_max", max(10, 2 * (estimate or 0))))
    best_n, best_f = grover.best_iteration(spec, n_max) if u > 0 else (0, 0.0)
    n = int(c.get("n", best_n))
    report = {
        "job": "custom", "dim": spec.dim, "source": spec.source, "marked": sorted(spec.marked),
        "seed": cfg.seed, "coupling_amplitude": u, "iteration_estimate": estimate,
        "best_iteration": {"n": best_n, "fidelity": best_f}, "n": n,
    }
    state = grover.evolve(spec, n)
    _write(out / "state.json", nmr.dumps({"n": n, "amplitudes": [[float(z.real), float(z.imag)] for z in state]}))
    if u > 0:
        res = grover.synthesize(spec, n)
        report["fidelity"] = res.fidelity_to_target
        report["global_phase"] = [res.global_phase.real, res.global_phase.imag]
    if spec.dim == 4:
        rho = projector(state) - np.eye(4) / 4
        rho_read = nmr.readout(rho, nmr.Pulse(1, "y", math.pi / 2))
        _write(out / "density.json", nmr.dumps({"synthesized": complex_matrix(rho), "after_readout": complex_matrix(rho_read)}))
        report["classification"] = write_spectra_outputs(out, rho_read, cfg.system)
    return report


# -- commands ---------------------------------------------------------------------


def load_config(args) -> RunConfig:
    if args.config:
        try:
            cfg = RunConfig.from_dict(json.loads(Path(args.config).read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    else:
        cfg = RunConfig()
    if getattr(args, "out", None):
        cfg.outputs = args.out
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "delay_mode", None):
        cfg.delay_mode = args.delay_mode
    if getattr(args, "tolerance", None) is not None:
        cfg.tolerance = args.tolerance
    overrides = {k: getattr(args, k, None) for k in ("j", "n", "family", "source_index")}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if overrides:
        if cfg.job != "preset":
            raise ConfigError("preset flags given for a custom job")
        cfg.preset = {**(cfg.preset or {}), **overrides}
    cfg.validate()
    return cfg


def cmd_verify(args) -> int:
    cfg = load_config(args)
    sign = -1 if args.flip_rotation_sign else 1
    results = run_checks(cfg.tolerance, cfg.system, cfg.delay_mode, sign)
    report = {
        "tolerance": cfg.tolerance,
        "delay_mode": cfg.delay_mode,
        "rotation_sign": sign,
        "checks": [r.as_dict() for r in results],
        "all_pass": all(r.passed for r in results),
    }
    text = nmr.dumps(report)
    if args.out:
        _write(Path(args.out) / "verify.json", text)
    sys.stdout.write(text)
    failed = [r.check_name for r in results if not r.passed]
    if failed:
        print("failing checks: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0


def cmd_synth(args) -> int:
    cfg = load_config(args)
    out = Path(cfg.outputs)
    report = synth_preset(cfg, out) if cfg.job == "preset" else synth_custom(cfg, out)
    text = nmr.dumps(report)
    _write(out / "report.json", text)
    sys.stdout.write(text)
    return 0


def parse_n_range(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        if len(text) != 2:
            raise ConfigError("n_range needs [start, stop]")
        lo, hi = int(text[0]), int(text[1])
    else:
        m = re.fullmatch(r"\s*(\d+)\s*:\s*(\d+)\s*", text)
        if not m:
            raise ConfigError(f"n range must look like START:STOP, got {text!r}")
        lo, hi = int(m.group(1)), int(m.group(2))
    if lo < 0 or hi < lo:
        raise ConfigError(f"empty or negative n range {lo}:{hi}")
    return list(range(lo, hi + 1))


def sweep_csv(spec: grover.SearchSpec, ns: list[int]) -> str:
    lines = ["n,fidelity,phase_re,phase_im"]
    for r in grover.fidelity_sweep(spec, ns):
        lines.append(f"{r.iterations},{r.fidelity_to_target:.17g},{r.global_phase.real:.17g},{r.global_phase.imag:.17g}")
    return "\n".join(lines) + "\n"


def cmd_sweep(args) -> int:
    cfg = load_config(args)
    ns = parse_n_range(args.n_range if args.n_range is not None else (cfg.n_range or (0, 9)))
    spec = preset_spec(cfg.preset) if cfg.job == "preset" else custom_spec(cfg.custom, cfg.seed)
    text = sweep_csv(spec, ns)
    if args.out or args.config:
        _write(Path(cfg.outputs) / "sweep.csv", text)
    sys.stdout.write(text)
    return 0


def cmd_presets(args) -> int:
    for source, family, j in grover.preset_keys():
        rots = grover.preset_rotations(j, source, family)
        u = " ".join(f"{ax.upper()}{k}({a / math.pi:+g}pi)" for k, ax, a in rots)
        marked = "{0,3}" if j in (1, 2) else "{1,2}"
        print(f"source={source} family={family} j={j}  U={u}  marked={marked}  target={grover.STATE_LABELS[(family, j)]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epr-grover", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, preset_flags=True):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="seed for random unitaries")
        p.add_argument("--delay-mode", choices=nmr.MODES, help="delay propagator (default coupled)")
        p.add_argument("--tolerance", type=float, help="comparison tolerance (default 1e-9)")
        if preset_flags:
            p.add_argument("--j", type=int, choices=(1, 2, 3, 4))
            p.add_argument("--n", type=int)
            p.add_argument("--family", choices=grover.FAMILIES)
            p.add_argument("--source-index", type=int, choices=(0, 1))

    p = sub.add_parser("verify", help="run the fixture checks")
    common(p, preset_flags=False)
    p.add_argument("--flip-rotation-sign", action="store_true", help="negative control: use exp(-i phi I) rotations")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("synth", help="synthesize one state and write sequence, density, peaks, spectra")
    common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sweep", help="fidelity and phase over a range of iteration counts")
    common(p)
    p.add_argument("--n-range", help="inclusive START:STOP (default 0:9)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("presets", help="list the pseudo-EPR preset tables")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
