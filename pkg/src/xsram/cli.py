"""xsram command line: truth, mc, trace and aes subcommands.

Exit codes: 0 success, 1 verification failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import sys
from pathlib import Path

import numpy as np

from . import aesbench, kat, mcengine, schemes
from .config import ConfigError, load_toml
from .devicemodel import DeviceParams
from .memarray import MemArray, Topology
from .schemes import BoolFunc

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


# truth tables ----------------------------------------------------------------

def _cases(n):
    """All 2**n operand patterns, one per column: rows x columns bit matrix."""
    cols = list(itertools.product((0, 1), repeat=n))
    return np.array(cols, dtype=np.uint8).T


def _pair_array(topology, params, extra_rows=1):
    arr = MemArray(topology, 2 + extra_rows, 4, params)
    bits = _cases(2)
    arr.store(0, bits[0])
    arr.store(1, bits[1])
    return arr, bits[0], bits[1]


def _trace_path(trace_dir, name):
    return None if trace_dir is None else Path(trace_dir) / f"{name}.csv"


def _check_nor(params, cfg, trace_dir):
    rows = []
    for n in range(2, 9):
        bits = _cases(n)
        arr = MemArray(Topology.EightT, n, bits.shape[1], params)
        for r in range(n):
            arr.store(r, bits[r])
        res = schemes.nor_8t(arr, list(range(n)), cfg, _trace_path(trace_dir, f"nor_8t_n{n}"))
        want = 1 - np.bitwise_or.reduce(bits, axis=0)
        rows.append((f"nor_8t[n={n}]", "NOR", bool(np.array_equal(res.bits, want))))
    return rows


def _check_nand(params, cfg, trace_dir):
    arr, a, b = _pair_array(Topology.EightT, params)
    res = schemes.nand_8t(arr, 0, 1, None, cfg, _trace_path(trace_dir, "nand_8t"))
    return [("nand_8t", f, bool(np.array_equal(res.outputs[f.lower()], BoolFunc(f).apply(a, b))))
            for f in ("NAND", "AND")]


def _check_xor(params, cfg, trace_dir):
    arr, a, b = _pair_array(Topology.EightT, params)
    res = schemes.xor_8t(arr, 0, 1, None, cfg, _trace_path(trace_dir, "xor_8t"))
    return [("xor_8t", "XOR", bool(np.array_equal(res.bits, a ^ b)))]


def _check_divider(params, cfg, trace_dir):
    arr, a, b = _pair_array(Topology.EightTSourceLine, params)
    res = schemes.divider_compute(arr, 0, 1, cfg, trace=_trace_path(trace_dir, "divider"))
    rows = [("divider", f, bool(np.array_equal(res.outputs[f.lower()], BoolFunc(f).apply(a, b))))
            for f in ("IMP", "XOR")]
    want_aux = [None if x == y else (int(x), int(y)) for x, y in zip(a, b)]
    rows.append(("divider", "two-bit read", list(res.aux) == want_aux))
    return rows


def _check_8tplus(params, cfg, trace_dir):
    arr, a, b = _pair_array(Topology.EightTPlus, params)
    res = schemes.compute_8tplus(arr, 0, 1, cfg, trace=_trace_path(trace_dir, "compute_8tplus"))
    rows = [("compute_8tplus", f, bool(np.array_equal(res.outputs[f.lower()], BoolFunc(f).apply(a, b))))
            for f in ("AND", "NAND", "OR", "NOR", "XOR")]
    for r, want in ((0, a), (1, b)):
        res = schemes.read_8tplus(arr, r, cfg)
        ok = np.array_equal(res.bits, want) and bool(np.all(res.flags["read_check_ok"] == 1))
        rows.append(("read_8tplus", f"READ row {r}", bool(ok)))
    return rows


def _check_6t(params, cfg, trace_dir):
    arr, a, b = _pair_array(Topology.SixT, params)
    res = schemes.logic_6t(arr, 0, 1, None, cfg, trace=_trace_path(trace_dir, "logic_6t"))
    return [("logic_6t", f, bool(np.array_equal(res.outputs[f.lower()], BoolFunc(f).apply(a, b))))
            for f in ("NAND", "NOR", "XOR", "AND", "OR")]


def _check_rcs(params, cfg, trace_dir):
    rows = []
    for topo in (Topology.EightT, Topology.EightTSourceLine, Topology.EightTPlus):
        for func in sorted(schemes.SUPPORTED[topo] - {BoolFunc.COPY}, key=lambda f: f.value):
            arr, a, b = _pair_array(topo, params)
            schemes.rcs(arr, 0, 1, 2, func, cfg)
            ok = np.array_equal(arr.q[2], func.apply(a, b)) and arr.stats["inmem"] == 1
            rows.append((f"rcs[{topo.value}]", func.value, bool(ok)))
        arr, a, b = _pair_array(topo, params)
        schemes.rcs_copy(arr, 1, 2, cfg)
        rows.append((f"rcs_copy[{topo.value}]", "COPY", bool(np.array_equal(arr.q[2], b))))
    return rows


def _check_copy_6t(params, cfg, trace_dir):
    arr = MemArray(Topology.SixT, 2, 4, params)
    src, dst = _cases(2)
    arr.store(0, src)
    arr.store(1, dst)
    schemes.copy_6t(arr, 0, 1, 0.2, cfg)
    return [("copy_6t", "COPY", bool(np.array_equal(arr.q[1], src)))]


CHECKS = {
    "nor_8t": _check_nor,
    "nand_8t": _check_nand,
    "xor_8t": _check_xor,
    "divider": _check_divider,
    "compute_8tplus": _check_8tplus,
    "logic_6t": _check_6t,
    "rcs": _check_rcs,
    "copy_6t": _check_copy_6t,
}


def truth_suite(params: DeviceParams | None = None, cfg=None, names=None, trace_dir=None):
    """Exhaustive nominal truth-table check; returns (scheme, function, ok) rows."""
    params = params or DeviceParams()
    cfg = cfg or schemes.calibrate(params)
    names = list(CHECKS) if names is None else names
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown scheme {unknown[0]!r}; choose from {sorted(CHECKS)}")
    rows = []
    for n in names:
        try:
            rows += CHECKS[n](params, cfg, trace_dir)
        except schemes.MarginCollapse as exc:
            rows.append((n, f"margin collapse: {exc}", False))
    return rows


# helpers -----------------------------------------------------------------------

def _outputs(out: Path, names, force: bool):
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / n for n in names]
    clash = [p for p in paths if p.exists()]
    if clash and not force:
        raise ConfigError(f"{clash[0]} exists; pass --force to overwrite")
    return paths


def _sense_from(data, params):
    cfg = schemes.calibrate(params)
    overrides = data.get("sense", {})
    try:
        return cfg.replace(**overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sense: {exc}") from exc


def _params_from(data):
    try:
        return DeviceParams(**data.get("device", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"device: {exc}") from exc


# subcommands -------------------------------------------------------------------

def cmd_truth(args) -> int:
    data = load_toml(args.config) if args.config else {}
    params = _params_from(data)
    cfg = _sense_from(data, params)
    names = data.get("truth", {}).get("schemes", list(CHECKS))
    (table,) = _outputs(Path(args.out), ["truth.csv"], args.force)
    trace_dir = None
    if args.trace:
        trace_dir = Path(args.out) / "traces"
        trace_dir.mkdir(exist_ok=True)
    rows = truth_suite(params, cfg, names, trace_dir)
    with open(table, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scheme", "function", "result"])
        for scheme, func, ok in rows:
            w.writerow([scheme, func, "PASS" if ok else "FAIL"])
    for scheme, func, ok in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {scheme:<22} {func}")
    return EXIT_OK if all(ok for *_, ok in rows) else EXIT_FAIL


def cmd_mc(args) -> int:
    if not args.config:
        raise ConfigError("mc needs --config")
    camp = mcengine.load_campaign(args.config, args.seed)
    hist, summ = _outputs(Path(args.out), ["mc_hist.csv", "mc_summary.csv"], args.force)
    print(f"seed {camp.seed}")
    results = mcengine.run_mc(camp, jobs=args.jobs)
    mcengine.write_histograms(results, hist)
    mcengine.write_summary(results, summ)
    for res in results.values():
        print(f"{res.condition:<28} mean {res.mean:+.4f} std {res.std:.4f} "
              f"failures {res.failures}/{res.trials}")
    return EXIT_OK


TRACE_OPS = {
    "nor_8t": (Topology.EightT, lambda a, c, t: schemes.nor_8t(a, [0, 1], c, t)),
    "nand_8t": (Topology.EightT, lambda a, c, t: schemes.nand_8t(a, 0, 1, None, c, t)),
    "xor_8t": (Topology.EightT, lambda a, c, t: schemes.xor_8t(a, 0, 1, None, c, t)),
    "divider": (Topology.EightTSourceLine, lambda a, c, t: schemes.divider_compute(a, 0, 1, c, trace=t)),
    "compute_8tplus": (Topology.EightTPlus, lambda a, c, t: schemes.compute_8tplus(a, 0, 1, c, trace=t)),
    "logic_6t": (Topology.SixT, lambda a, c, t: schemes.logic_6t(a, 0, 1, None, c, trace=t)),
}


def cmd_trace(args) -> int:
    data = load_toml(args.config) if args.config else {}
    params = _params_from(data)
    cfg = _sense_from(data, params)
    spec = data.get("trace", {})
    scheme = spec.get("scheme", "nand_8t")
    if scheme not in TRACE_OPS:
        raise ConfigError(f"unknown scheme {scheme!r}; choose from {sorted(TRACE_OPS)}")
    case = str(spec.get("case", "01"))
    if len(case) != 2 or set(case) - {"0", "1"}:
        raise ConfigError(f"case {case!r} must be two operand bits")
    wave, _ = _outputs(Path(args.out), ["trace.csv", "trace_margins.csv"], args.force)
    topo, op = TRACE_OPS[scheme]
    arr = MemArray(topo, 3, 1, params)
    if spec.get("sigma_vt"):
        arr.sample_mismatch(args.seed if args.seed is not None else int(spec.get("seed", 1)),
                            sigma=float(spec["sigma_vt"]))
    arr.store(0, [int(case[0])])
    arr.store(1, [int(case[1])])
    res = op(arr, cfg, wave)
    print(f"{scheme} case {case}: bit {int(res.bits[0])} margin {float(res.margins[0]):+.4f} V")
    return EXIT_OK


def cmd_aes(args) -> int:
    if args.kat:
        rows = kat.check_oracle()
        for mode, keylen, ok in rows:
            print(f"{'PASS' if ok else 'FAIL'}  {mode}-{keylen}")
        return EXIT_OK if all(ok for *_, ok in rows) else EXIT_FAIL
    if not args.config:
        raise ConfigError("aes needs --config (or --kat)")
    jobs = aesbench.load_jobs(args.config)
    bench, detail = _outputs(Path(args.out), ["bench.csv", "bench_detail.csv"], args.force)
    try:
        reports = aesbench.bench_compare(jobs)
    except aesbench.BackendMismatch as exc:
        print(f"FAIL  {exc}", file=sys.stderr)
        return EXIT_FAIL
    aesbench.write_report(reports, bench)
    aesbench.write_detail(reports, detail)
    for r in reports:
        target = aesbench.REFERENCE_ECB_TARGET.get(r.job.keylen) if r.job.mode.value == "ECB" else None
        note = f" (reference figure {target:.1%})" if target else ""
        print(f"{r.job.label:<8} {r.job.keylen}b  reduction {r.reduction:.1%}{note}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xsram", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (("truth", cmd_truth, "exhaustive truth-table check"),
                            ("mc", cmd_mc, "Monte-Carlo campaign"),
                            ("trace", cmd_trace, "waveforms of one scheme operation"),
                            ("aes", cmd_aes, "AES access-count benchmark")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", type=Path)
        p.add_argument("--out", type=Path, default=Path("out"))
        p.add_argument("--seed", type=int)
        p.add_argument("--force", action="store_true")
        p.add_argument("--trace", action="store_true", help="write per-op waveform CSVs")
        p.add_argument("--jobs", type=int, default=1)
        if name == "aes":
            p.add_argument("--kat", action="store_true", help="check the reference AES only")
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
