"""Command line: ``spikefloat mul | verify | sweep``.

Exit codes: 0 success, 1 usage or input error, 2 verification mismatch.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from spikefloat.analysis import sweep_neurons, write_csv
from spikefloat.fields import FULL_MANTISSA_WIDTH, Float32Fields, UnsupportedOperandError, parse_operand
from spikefloat.fpmul import COMPONENTS, DEFAULT_BUDGET, MultiplierCircuit
from spikefloat.gates import GateConfig, derive_seed
from spikefloat.nef import SimConfig
from spikefloat.oracle import ieee_mul_truncate

EXIT_OK, EXIT_USAGE, EXIT_MISMATCH = 0, 1, 2
LONG_RUN_WIDTH = 8


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    mode: str = "rate"
    width: int = FULL_MANTISSA_WIDTH
    neurons: dict[str, int] = field(default_factory=dict)
    seed: int = 0
    trials: int = 5
    settle_ms: float = 200.0
    readout_ms: float = 50.0
    dt_ms: float = 1.0
    probe_ms: float = 10.0
    out: str = "sweep.csv"

    def to_text(self) -> str:
        lines = []
        for k, v in asdict(self).items():
            if k == "neurons":
                v = ",".join(f"{c}={n}" for c, n in sorted(v.items()))
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cfg = cls()
        known = {f.name: f for f in fields(cls)}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"bad config line: {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in known:
                raise UsageError(f"unknown config key: {key}")
            cfg = replace(cfg, **{key: _coerce(key, value)})
        return cfg

    def gate_config(self) -> GateConfig:
        sim = SimConfig(
            dt=self.dt_ms / 1000,
            probe_interval=self.probe_ms / 1000,
            settle_time=self.settle_ms / 1000,
            readout_window=self.readout_ms / 1000,
            master_seed=self.seed,
        )
        return GateConfig(mode=self.mode, sim=sim, seed=self.seed)

    def budget(self) -> dict[str, int]:
        b = dict(DEFAULT_BUDGET)
        b.update(self.neurons)
        return b


def parse_neurons(text: str) -> dict[str, int]:
    """``300`` applies to every component; ``a=1,b=2`` overrides some."""
    text = text.strip()
    if not text:
        return {}
    if "=" not in text:
        n = int(text)
        return {c: n for c in COMPONENTS}
    out = {}
    for part in text.split(","):
        name, _, count = part.partition("=")
        name = name.strip()
        if name not in COMPONENTS:
            raise UsageError(f"unknown component {name!r}; expected one of {', '.join(COMPONENTS)}")
        out[name] = int(count)
    return out


def _coerce(key: str, value: str):
    try:
        if key == "neurons":
            return parse_neurons(value)
        if key in ("width", "seed", "trials"):
            return int(value)
        if key.endswith("_ms"):
            return float(value)
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {value!r}") from exc
    if key == "mode" and value not in ("rate", "spiking"):
        raise UsageError(f"mode must be rate or spiking, got {value!r}")
    return value


def parse_counts(text: str) -> list[int]:
    """``100,200`` or ``100:800:100`` (inclusive)."""
    if ":" in text:
        lo, hi, step = (int(v) for v in text.split(":"))
        return list(range(lo, hi + 1, step))
    return [int(v) for v in text.split(",") if v.strip()]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--mode", choices=("rate", "spiking"))
    p.add_argument("--width", type=int, help="mantissa width W (1..23)")
    p.add_argument("--neurons", help="N for all components, or component=N[,component=N]")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--settle-ms", type=float)
    p.add_argument("--readout-ms", type=float)
    p.add_argument("--dt-ms", type=float)
    p.add_argument("--probe-ms", type=float)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spikefloat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mul", help="multiply two operands on the neural circuit")
    p.add_argument("a")
    p.add_argument("b")
    _common(p)

    p = sub.add_parser("verify", help="compare the circuit against the integer oracle")
    _common(p)
    p.add_argument("--exhaustive", action="store_true", help="all mantissa pairs (W <= 4)")
    p.add_argument("--exp-pairs", type=int, default=1, help="random exponent pairs per mantissa pair")

    p = sub.add_parser("sweep", help="accuracy / bit-error sweep over neuron counts")
    _common(p)
    p.add_argument("--component", required=True)
    p.add_argument("--counts", default="100:800:100")
    p.add_argument("--inputs-per-trial", type=int, default=4)
    p.add_argument("--long-run", action="store_true", help=f"allow sweeps with W > {LONG_RUN_WIDTH}")
    return parser


def resolve_config(args) -> RunConfig:
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = RunConfig.from_text(fh.read())
        except OSError as exc:
            raise UsageError(str(exc)) from exc
    else:
        cfg = RunConfig()
        if args.command == "sweep":
            cfg = replace(cfg, mode="spiking", width=6)
    overrides = {}
    for key in ("mode", "width", "seed", "trials", "settle_ms", "readout_ms", "dt_ms", "probe_ms", "out"):
        v = getattr(args, key, None)
        if v is not None:
            overrides[key] = v
    if args.neurons is not None:
        overrides["neurons"] = parse_neurons(args.neurons)
    cfg = replace(cfg, **overrides)
    if not 1 <= cfg.width <= FULL_MANTISSA_WIDTH:
        raise UsageError("width must be in 1..23")
    try:
        cfg.gate_config()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return cfg


def _field_report(res, orc) -> list[tuple[str, object, object]]:
    f, g = res.fields, orc.fields
    return [
        ("sign", f.sign, g.sign),
        ("exponent", f.exponent, g.exponent),
        ("mantissa", f.mantissa, g.mantissa),
        ("norm_bit", res.normalization_bit, orc.norm_bit),
        ("of_uf_flag", res.of_uf_flag, orc.paper_flag),
    ]


def cmd_mul(args, cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        x = parse_operand(args.a, cfg.width)
        y = parse_operand(args.b, cfg.width)
    except UnsupportedOperandError as exc:
        raise UsageError(str(exc)) from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    circuit = MultiplierCircuit(cfg.width, cfg.gate_config(), cfg.budget())
    res = circuit.multiply(x, y, run_seed=cfg.seed)
    orc = ieee_mul_truncate(x, y)
    print(f"a        {x.to_hex()}  {x.triple()}  {x.value!r}", file=out)
    print(f"b        {y.to_hex()}  {y.triple()}  {y.value!r}", file=out)
    print(f"result   {res.fields.to_hex()}  {res.fields.triple()}  {res.value!r}", file=out)
    print(f"norm_bit {res.normalization_bit}", file=out)
    print(f"OF/UF    {res.of_uf_flag}  (true overflow {orc.true_overflow}, true underflow {orc.true_underflow})", file=out)
    ok = True
    for name, got, want in _field_report(res, orc):
        status = "MATCH" if got == want else "MISMATCH"
        ok &= got == want
        print(f"  {name:<11}{status}", file=out)
    if cfg.mode == "spiking":
        for comp, lines in res.lines.items():
            mae = float(np.mean([abs(b.analog_value - b.logical_value) for b in lines]))
            print(f"  {comp:<20} n={circuit.budget[comp]:<4} |analog - bit| = {mae:.4f}", file=out)
    print("MATCH" if ok else "MISMATCH", file=out)
    return EXIT_OK if ok else EXIT_MISMATCH


def verify_inputs(cfg: RunConfig, exhaustive: bool, exp_pairs: int = 1):
    W = cfg.width
    rng = np.random.default_rng(derive_seed(cfg.seed, 7))
    if exhaustive:
        if W > 4:
            raise UsageError("--exhaustive needs width <= 4")
        for m1 in range(1 << W):
            for m2 in range(1 << W):
                for s1 in (0, 1):
                    for s2 in (0, 1):
                        for _ in range(exp_pairs):
                            e1, e2 = (int(v) for v in rng.integers(1, 255, 2))
                            yield Float32Fields(s1, e1, m1, W), Float32Fields(s2, e2, m2, W)
    else:
        for _ in range(cfg.trials):
            s = rng.integers(0, 2, 2)
            e = rng.integers(1, 255, 2)
            m = rng.integers(0, 1 << W, 2)
            yield (
                Float32Fields(int(s[0]), int(e[0]), int(m[0]), W),
                Float32Fields(int(s[1]), int(e[1]), int(m[1]), W),
            )


def cmd_verify(args, cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    circuit = MultiplierCircuit(cfg.width, cfg.gate_config(), cfg.budget())
    n = bit_errors = 0
    bad = []
    for k, (x, y) in enumerate(verify_inputs(cfg, args.exhaustive, args.exp_pairs)):
        res = circuit.multiply(x, y, run_seed=derive_seed(cfg.seed, k))
        orc = ieee_mul_truncate(x, y)
        n += 1
        wrong = [name for name, got, want in _field_report(res, orc) if got != want]
        if wrong:
            bad.append((x, y, wrong))
        diff = res.fields.to_int() ^ orc.fields.to_int()
        bit_errors += bin(diff).count("1") + (res.of_uf_flag != orc.paper_flag)
    print(f"width={cfg.width} mode={cfg.mode} cases={n} mismatches={len(bad)} bit_errors={bit_errors}", file=out)
    for x, y, wrong in bad:
        print(f"  MISMATCH {x.to_hex()} x {y.to_hex()}: {', '.join(wrong)}", file=out)
    return EXIT_MISMATCH if bad else EXIT_OK


def cmd_sweep(args, cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    if args.component not in COMPONENTS:
        raise UsageError(f"unknown component {args.component!r}; expected one of {', '.join(COMPONENTS)}")
    if cfg.width > LONG_RUN_WIDTH and not args.long_run:
        raise UsageError(f"sweeps above width {LONG_RUN_WIDTH} need --long-run")
    try:
        counts = parse_counts(args.counts)
    except ValueError as exc:
        raise UsageError(f"bad --counts: {args.counts!r}") from exc
    if not counts:
        raise UsageError("--counts is empty")
    result = sweep_neurons(
        args.component,
        counts,
        cfg.trials,
        cfg.seed,
        width=cfg.width,
        cfg=cfg.gate_config(),
        inputs_per_trial=args.inputs_per_trial,
    )
    write_csv(result.rows, cfg.out)
    acc = result.accuracy()
    for rep in result.reports:
        n = rep.neurons_per_ensemble
        print(f"{n:>5}  accuracy {acc[n]:7.3f}%  bit errors {rep.bit_errors}/{rep.total_bits}", file=out)
    print(f"knee at {result.knee()} neurons; wrote {cfg.out}", file=out)
    return EXIT_OK


COMMANDS = {"mul": cmd_mul, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
