"""Monte-Carlo campaigns over local Vt mismatch, corner, supply and temperature.

Trials run as one ensemble per chunk: a MemArray with ``trials=n`` holds
``n`` independent mismatch samples, each drawn from the (seed, trial)
stream, so the chunking and worker count never change the numbers.
"""

from __future__ import annotations

import csv
import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import schemes
from .config import ConfigError, load_toml
from .devicemodel import CORNER_NAMES, Corner, DeviceParams
from .memarray import MemArray, Topology

N_BINS = 64
CHUNK = 250


class Metric(str, Enum):
    RBL_AT_SENSE = "RBL_AT_SENSE"
    V_ERROR = "V_ERROR"
    V_DIFF = "V_DIFF"
    OUTPUT_BIT = "OUTPUT_BIT"


@dataclass(frozen=True)
class McCampaign:
    scheme: str = "nand_8t"
    cases: tuple = ("11",)
    metric: Metric = Metric.RBL_AT_SENSE
    trials: int = 1000
    seed: int = 1
    sigma_vt: float = 0.030
    corners: tuple = ("TT",)
    vdd_deltas: tuple = (0.0,)
    temperatures: tuple = (300.0,)
    func: str | None = None
    wl_boost: float = 0.0
    params: DeviceParams = DeviceParams()

    def __post_init__(self):
        object.__setattr__(self, "metric", Metric(self.metric))
        object.__setattr__(self, "cases", tuple(str(c) for c in self.cases))
        object.__setattr__(self, "corners", tuple(self.corners))
        object.__setattr__(self, "vdd_deltas", tuple(float(d) for d in self.vdd_deltas))
        object.__setattr__(self, "temperatures", tuple(float(t) for t in self.temperatures))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.sigma_vt < 0:
            raise ValueError("sigma_vt must be non-negative")
        if self.scheme not in RUNNERS:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {sorted(RUNNERS)}")
        for c in self.corners:
            if c not in CORNER_NAMES:
                raise ValueError(f"unknown corner {c!r}")
        for case in self.cases:
            if not case or set(case) - {"0", "1"}:
                raise ValueError(f"case {case!r} must be a string of 0/1 operand bits")

    def conditions(self):
        for corner in self.corners:
            for d in self.vdd_deltas:
                for t in self.temperatures:
                    yield corner, d, t


def condition_label(case: str, corner: str, delta: float, temp: float) -> str:
    return f"{case}@{corner}|{delta:+.2f}|{temp:g}K"


@dataclass
class McResult:
    condition: str
    values: np.ndarray
    failures: int
    edges: np.ndarray = field(init=False)
    counts: np.ndarray = field(init=False)

    def __post_init__(self):
        self.edges, self.counts = histogram(self.values)

    @property
    def trials(self) -> int:
        return int(self.values.size)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def std(self) -> float:
        return float(np.std(self.values))

    @property
    def min(self) -> float:
        return float(np.min(self.values))

    @property
    def max(self) -> float:
        return float(np.max(self.values))

    def summary(self) -> tuple:
        return (self.condition, self.mean, self.std, self.min, self.max, self.failures)


def histogram(values):
    """64 uniform bins over [min, max]; a zero-width population gets one bin."""
    lo, hi = float(np.min(values)), float(np.max(values))
    if lo == hi:
        return np.array([lo, hi]), np.array([values.size])
    counts, edges = np.histogram(values, bins=N_BINS, range=(lo, hi))
    return edges, counts


def v_error(v_11, v_00):
    """RDBL(1,1) minus RDBL(0,0) for the same mismatch sample."""
    return np.asarray(v_11) - np.asarray(v_00)


def v_diff(v_rbl, v_rblb):
    return np.abs(np.asarray(v_rbl) - np.asarray(v_rblb))


# per-scheme runners ----------------------------------------------------------
# each returns (metric value per trial, failure flag per trial)

def _array(topology, case, camp, params, corner, first, n):
    rows = max(len(case) + 1, 3)
    arr = MemArray(topology, rows, 1, params, corner=Corner(corner), trials=n)
    arr.sample_mismatch(camp.seed, first, camp.sigma_vt)
    for r, bit in enumerate(case):
        arr.store(r, [int(bit)])
    return arr


def _bitmetric(res, line, camp, want):
    out = res.bits[:, 0]
    fail = out != want
    if camp.metric is Metric.OUTPUT_BIT:
        return out.astype(np.float64), fail
    if camp.metric is Metric.V_DIFF:
        return v_diff(res.sensed["RBL" if "RBL" in res.sensed else "BL"],
                      res.sensed["RBLB" if "RBLB" in res.sensed else "BLB"])[:, 0], fail
    if camp.metric is Metric.RBL_AT_SENSE:
        return res.sensed[line][:, 0], fail
    raise ValueError(f"metric {camp.metric.value} does not apply to {camp.scheme}")


def _func(camp, default):
    return schemes.BoolFunc(camp.func or default)


def _run_8t(camp, case, params, corner, cfg, first, n):
    arr = _array(Topology.EightT, case, camp, params, corner, first, n)
    bits = [int(b) for b in case]
    if camp.scheme == "nor_8t":
        res = schemes.nor_8t(arr, list(range(len(case))), cfg)
        func = _func(camp, "NOR")
        want = int(not any(bits)) if func is schemes.BoolFunc.NOR else int(any(bits))
        res.bits[...] = res.outputs[func.value.lower()]
    else:
        op = schemes.nand_8t if camp.scheme == "nand_8t" else schemes.xor_8t
        res = op(arr, 0, 1, None, cfg)
        func = _func(camp, "NAND" if camp.scheme == "nand_8t" else "XOR")
        want = int(func.apply(bits[0], bits[1]))
        res.bits[...] = res.outputs[func.value.lower()]
    return _bitmetric(res, "RBL", camp, want)


def _run_divider(camp, case, params, corner, cfg, first, n):
    func = _func(camp, "IMP")
    if camp.metric is Metric.V_ERROR:
        sensed, fail = {}, np.zeros(n, dtype=bool)
        for pair in ("11", "00"):
            arr = _array(Topology.EightTSourceLine, pair, camp, params, corner, first, n)
            res = schemes.divider_compute(arr, 0, 1, cfg, func)
            sensed[pair] = res.sensed["RBL"][:, 0]
            fail |= res.aux_code[:, 0] != schemes.AUX_NONE
        return v_error(sensed["11"], sensed["00"]), fail
    arr = _array(Topology.EightTSourceLine, case, camp, params, corner, first, n)
    res = schemes.divider_compute(arr, 0, 1, cfg, func)
    return _bitmetric(res, "RBL", camp, int(func.apply(int(case[0]), int(case[1]))))


def _run_8tplus(camp, case, params, corner, cfg, first, n):
    arr = _array(Topology.EightTPlus, case, camp, params, corner, first, n)
    if camp.scheme == "read_8tplus":
        res = schemes.read_8tplus(arr, 0, cfg)
        want = int(case[0])
        if camp.metric is Metric.OUTPUT_BIT:
            fail = (res.bits[:, 0] != want) | (res.flags["read_check_ok"][:, 0] == 0)
            return res.bits[:, 0].astype(np.float64), fail
        return _bitmetric(res, "RBL", camp, want)
    func = _func(camp, "AND")
    res = schemes.compute_8tplus(arr, 0, 1, cfg, func)
    return _bitmetric(res, "RBL", camp, int(func.apply(int(case[0]), int(case[1]))))


def _run_6t(camp, case, params, corner, cfg, first, n):
    arr = _array(Topology.SixT, case, camp, params, corner, first, n)
    if camp.scheme == "copy_6t":
        ok = schemes.copy_6t(arr, 0, 1, camp.wl_boost, cfg, check=False)[:, 0]
        if camp.metric is not Metric.OUTPUT_BIT:
            raise ValueError("copy_6t campaigns record OUTPUT_BIT only")
        return arr.q[:, 1, 0].astype(np.float64), ~ok
    func = _func(camp, "NAND")
    res = schemes.logic_6t(arr, 0, 1, None, cfg, func)
    return _bitmetric(res, "BL", camp, int(func.apply(int(case[0]), int(case[1]))))


RUNNERS = {
    "nor_8t": _run_8t, "nand_8t": _run_8t, "xor_8t": _run_8t,
    "divider": _run_divider,
    "compute_8tplus": _run_8tplus, "read_8tplus": _run_8tplus,
    "logic_6t": _run_6t, "copy_6t": _run_6t,
}


def _chunk(task):
    camp, case, corner, delta, temp, first, n = task
    base = camp.params
    params = base.replace(vdd=base.vdd * (1.0 + delta), t_sim=temp)
    cfg = schemes.calibrate(base)
    return RUNNERS[camp.scheme](camp, case, params, corner, cfg, first, n)


def _tasks(camp: McCampaign):
    for case in camp.cases:
        for corner, delta, temp in camp.conditions():
            label = condition_label(case, corner, delta, temp)
            for first in range(0, camp.trials, CHUNK):
                n = min(CHUNK, camp.trials - first)
                yield label, (camp, case, corner, delta, temp, first, n)


def run_mc(camp: McCampaign, jobs: int = 1) -> dict[str, McResult]:
    """One McResult per (case, corner, vdd_delta, temperature), in campaign order."""
    labels, tasks = zip(*_tasks(camp))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_chunk, tasks))
    else:
        parts = [_chunk(t) for t in tasks]
    grouped: dict[str, list] = {}
    for label, part in zip(labels, parts):
        grouped.setdefault(label, []).append(part)
    out = {}
    for label, chunks in grouped.items():
        values = np.concatenate([c[0] for c in chunks])
        fails = int(sum(int(np.sum(c[1])) for c in chunks))
        out[label] = McResult(label, values, fails)
    return out


# config and CSV --------------------------------------------------------------

def load_campaign(path, seed: int | None = None) -> McCampaign:
    data = load_toml(path)
    body = dict(data.get("campaign", {}))
    dev = data.get("device", {})
    known = {f.name for f in dataclasses.fields(McCampaign)} - {"params"}
    unknown = set(body) - known
    if unknown:
        raise ConfigError(f"unknown campaign keys: {sorted(unknown)}")
    if "metric" in body and body["metric"] not in Metric.__members__:
        raise ConfigError(f"unknown metric {body['metric']!r}; choose from {list(Metric.__members__)}")
    if seed is not None:
        body["seed"] = seed
    try:
        params = DeviceParams(**dev)
        return McCampaign(params=params, **body)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def write_histograms(results: dict[str, McResult], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["condition", "bin_lo", "bin_hi", "count"])
        for res in results.values():
            for lo, hi, c in zip(res.edges[:-1], res.edges[1:], res.counts):
                w.writerow([res.condition, repr(float(lo)), repr(float(hi)), int(c)])


def write_summary(results: dict[str, McResult], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["condition", "mean", "std", "min", "max", "failures"])
        for res in results.values():
            cond, *stats, fails = res.summary()
            w.writerow([cond] + [repr(x) for x in stats] + [fails])


def read_summary(path) -> list[tuple]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [(r["condition"], float(r["mean"]), float(r["std"]), float(r["min"]),
             float(r["max"]), int(r["failures"])) for r in rows]


def read_histograms(path) -> dict[str, list[tuple]]:
    out: dict[str, list[tuple]] = {}
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            out.setdefault(r["condition"], []).append(
                (float(r["bin_lo"]), float(r["bin_hi"]), int(r["count"])))
    return out
