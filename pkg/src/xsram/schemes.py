"""In-memory compute schemes and their sensing front-ends.

Every operation works on a :class:`MemArray` with or without an ensemble
axis. Sensing is behavioral: skewed inverters are threshold comparators
and the asymmetric sense amplifiers are comparators with a fixed offset
toward one bit-line.

Trip voltages in :class:`SenseConfig` are volts at ``vdd_ref``; they are
scaled with the array's supply when it differs, as an inverter trip
tracks its own supply.
"""

from __future__ import annotations

import csv
import dataclasses
import functools
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .devicemodel import DeviceParams
from .memarray import Boost, MemArray, RowSelect, Topology, WIDTH


class MarginCollapse(RuntimeError):
    """Calibrated '01/10' and '11' levels are too close to sense apart."""


class UnsupportedFunc(ValueError):
    pass


class SameRow(ValueError):
    pass


class WeakWriteFailure(RuntimeError):
    def __init__(self, msg, success=None):
        super().__init__(msg)
        self.success = success


class BoolFunc(str, Enum):
    NOR = "NOR"
    NAND = "NAND"
    AND = "AND"
    OR = "OR"
    XOR = "XOR"
    IMP = "IMP"
    COPY = "COPY"

    def apply(self, a, b=None):
        """Reference truth table on 0/1 arrays (``b`` unused for COPY)."""
        a = np.asarray(a, dtype=np.uint8)
        if self is BoolFunc.COPY:
            return a.copy()
        b = np.asarray(b, dtype=np.uint8)
        table = {
            BoolFunc.NOR: lambda: 1 - (a | b),
            BoolFunc.NAND: lambda: 1 - (a & b),
            BoolFunc.AND: lambda: a & b,
            BoolFunc.OR: lambda: a | b,
            BoolFunc.XOR: lambda: a ^ b,
            BoolFunc.IMP: lambda: (1 - a) | b,
        }
        return table[self]().astype(np.uint8)


AUX_NONE, AUX_01, AUX_10 = 0, 1, 2


@dataclass(frozen=True)
class SenseConfig:
    trip_nor: float = 0.7
    trip_nand: float = 0.395
    trip_div_hi: float = 0.625
    trip_div_lo: float = 0.25
    sa_asym: float = 2.0
    sa_enable_time: float | None = None
    vdd_ref: float = 1.0
    nand_window: float = 401e-12
    nand_gap: float = 0.277
    nor_window: float = 401e-12
    v_pre_frac: float = 0.5
    div_window: float = 600e-12
    div_boost: Boost = Boost(0.5, 0.5)
    plus_window: float = 200e-12
    sixt_window: float = 300e-12
    copy_read_window: float = 1e-9
    copy_threshold: float = 1.0
    # extra offset on SA_NAND only; used to inject read-check faults
    sa_nand_fault: float = 0.0

    def __post_init__(self):
        if not 0 < self.trip_nand < self.trip_nor < self.vdd_ref:
            raise ValueError("need 0 < trip_nand < trip_nor < vdd")
        if not self.trip_div_lo < self.v_pre < self.trip_div_hi:
            raise ValueError("need trip_div_lo < v_pre < trip_div_hi")
        if self.sa_asym < 1:
            raise ValueError("sa_asym must be >= 1")

    @property
    def v_pre(self) -> float:
        return self.v_pre_frac * self.vdd_ref

    @property
    def sa_offset(self) -> float:
        return 0.04 * (self.sa_asym - 1.0)

    def replace(self, **changes) -> "SenseConfig":
        return dataclasses.replace(self, **changes)


def divider_trips(vdd: float, v_pre: float) -> tuple[float, float]:
    return v_pre + 0.25 * (vdd - v_pre), 0.5 * v_pre


@dataclass
class SchemeResult:
    bits: np.ndarray
    margins: np.ndarray
    outputs: dict = field(default_factory=dict)
    sensed: dict = field(default_factory=dict)
    aux_code: np.ndarray | None = None
    flags: dict = field(default_factory=dict)

    @property
    def aux(self):
        """Two-bit-read decode per column: None, (0, 1) or (1, 0)."""
        if self.aux_code is None:
            return None
        names = {AUX_NONE: None, AUX_01: (0, 1), AUX_10: (1, 0)}
        return np.vectorize(names.get, otypes=[object])(self.aux_code)

    def __getitem__(self, key):
        return self.outputs[key]


# calibration -----------------------------------------------------------------

def _nand_levels(params: DeviceParams, t_max: float = 1.5e-9):
    arr = MemArray(Topology.EightT, 2, 2, params)
    arr.store(0, [0, 1])
    arr.store(1, [1, 1])
    arr.precharge(params.vdd)
    act = arr.activate([RowSelect(0, width=t_max), RowSelect(1, width=t_max)], record=True)
    v = act.traces["RBL"][:, 0, :]
    return act.t, v[:, 0], v[:, 1]


def _sixt_half_time(params: DeviceParams) -> float:
    arr = MemArray(Topology.SixT, 1, 1, params)
    arr.precharge(params.vdd)
    act = arr.activate([RowSelect(0, "WL", width=2e-9)], record=True)
    v = act.traces["BL"][:, 0, 0]
    below = np.nonzero(v <= params.vdd / 2)[0]
    if below.size == 0:
        raise MarginCollapse("6T read path never reaches vdd/2")
    return float(act.t[below[0]])


@functools.lru_cache(maxsize=32)
def calibrate(params: DeviceParams | None = None) -> SenseConfig:
    """Sense configuration for ``params`` at TT with no mismatch.

    The NAND window is the instant where RBL('01') - RBL('11') peaks;
    trip_nand sits midway between the two levels there.
    """
    p = params or DeviceParams()
    t, v01, v11 = _nand_levels(p)
    k = int(np.argmax(v01 - v11))
    gap = float(v01[k] - v11[k])
    if gap < 0.010:
        raise MarginCollapse(f"NAND levels only {gap * 1e3:.1f} mV apart")
    window = float(t[k])
    trip_nand = float(0.5 * (v01[k] + v11[k]))
    trip_nor = 0.7 * p.vdd
    if v01[k] >= trip_nor:
        raise MarginCollapse("single-row discharge does not cross trip_nor in the NAND window")
    v_pre = 0.5 * p.vdd
    hi, lo = divider_trips(p.vdd, v_pre)
    base = SenseConfig(trip_nor=trip_nor, trip_nand=trip_nand, trip_div_hi=hi,
                       trip_div_lo=lo, vdd_ref=p.vdd, nand_window=window,
                       nand_gap=gap, nor_window=window, v_pre_frac=0.5,
                       sixt_window=_sixt_half_time(p))
    return base.replace(copy_threshold=_copy_threshold(p, base))


@functools.lru_cache(maxsize=1)
def default_config() -> SenseConfig:
    return calibrate(DeviceParams())


def _cfg(cfg):
    return default_config() if cfg is None else cfg


# helpers ---------------------------------------------------------------------

def _scale(arr: MemArray, cfg: SenseConfig) -> float:
    return arr.params.vdd / cfg.vdd_ref


def _require(arr: MemArray, *topologies):
    if arr.topology not in topologies:
        names = ", ".join(t.value for t in topologies)
        raise UnsupportedFunc(f"operation needs a {names} array, got {arr.topology.value}")


def _read_rows(arr: MemArray, rows, width: float, levels=None):
    levels = levels or {}
    return [RowSelect(r, width=width, level=levels.get(r)) for r in rows]


def _ground_sources(arr: MemArray, rows) -> None:
    if arr.topology is Topology.EightTSourceLine:
        for r in rows:
            arr.slines[r] = 0.0


def _emit(trace, act, margins) -> None:
    if trace is None:
        return
    path = Path(trace)
    act.write_csv(path)
    with open(path.with_name(path.stem + "_margins.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["col", "margin_v"])
        for c, m in enumerate(np.atleast_2d(margins)[0]):
            w.writerow([c, f"{m:.9f}"])


def _oriented(v, trip, want_high):
    """Signed distance of ``v`` from ``trip``, positive on the wanted side."""
    return np.where(want_high, v - trip, trip - v)


def _sa(d, offset, want):
    """Comparator deciding ``d > offset``; returns (out, margin vs. ``want``)."""
    out = (d > offset).astype(np.uint8)
    return out, np.where(want == 1, d - offset, offset - d)


def _pack(arr, bits, margins, outputs=None, sensed=None, aux=None, flags=None):
    pub = arr._public
    return SchemeResult(
        bits=pub(bits), margins=pub(margins),
        outputs={k: pub(v) for k, v in (outputs or {}).items()},
        sensed={k: pub(v) for k, v in (sensed or {}).items()},
        aux_code=None if aux is None else pub(aux),
        flags={k: pub(v) for k, v in (flags or {}).items()})


# 8T single-ended schemes -----------------------------------------------------

def _sense_8t(arr, rows, width, cfg, record=False, extra=()):
    _require(arr, Topology.EightT, Topology.EightTSourceLine)
    _ground_sources(arr, rows)
    arr.precharge(arr.params.vdd, ["RBL"])
    act = arr.activate(_read_rows(arr, rows, width) + list(extra), record=record)
    return act, act.final["RBL"]


def _nor_raw(arr, rows, cfg, record=False, extra=()):
    rows = list(rows)
    if len(rows) < 2 or len(set(rows)) != len(rows):
        raise ValueError("NOR needs at least two distinct rows")
    act, v = _sense_8t(arr, rows, cfg.nor_window, cfg, record, extra)
    trip = cfg.trip_nor * _scale(arr, cfg)
    want = 1 - np.bitwise_or.reduce(arr._q[:, rows, :], axis=1)
    out = (v > trip).astype(np.uint8)
    return act, out, _oriented(v, trip, want == 1), v


def _nand_raw(arr, a, b, width, cfg, record=False, extra=()):
    if a == b:
        raise SameRow("NAND operands must be two different rows")
    act, v = _sense_8t(arr, [a, b], width, cfg, record, extra)
    s = _scale(arr, cfg)
    and_out = (v < cfg.trip_nand * s).astype(np.uint8)
    nor_out = (v > cfg.trip_nor * s).astype(np.uint8)
    qa, qb = arr._q[:, a, :], arr._q[:, b, :]
    m_and = _oriented(v, cfg.trip_nand * s, (qa & qb) == 0)
    m_nor = _oriented(v, cfg.trip_nor * s, (qa | qb) == 0)
    outs = {"and": and_out, "nand": 1 - and_out, "nor": nor_out, "or": 1 - nor_out,
            "xor": ((and_out | nor_out) == 0).astype(np.uint8)}
    return act, outs, m_and, m_nor, v


def nor_8t(arr: MemArray, rows, cfg: SenseConfig | None = None, trace=None) -> SchemeResult:
    """Wired NOR of any number of rows: RBL stays high only if every bit is 0."""
    cfg = _cfg(cfg)
    act, out, margin, v = _nor_raw(arr, rows, cfg, record=trace is not None)
    arr.stats["inmem"] += 1
    _emit(trace, act, arr._public(margin))
    return _pack(arr, out, margin, {"nor": out, "or": 1 - out}, {"RBL": v})


def nand_8t(arr: MemArray, row_a: int, row_b: int, pulse_width: float | None = None,
            cfg: SenseConfig | None = None, trace=None) -> SchemeResult:
    """NAND from the discharge rate: only '11' pulls RBL under trip_nand in the window."""
    cfg = _cfg(cfg)
    if cfg.nand_gap < 0.010:
        raise MarginCollapse(f"calibrated NAND gap {cfg.nand_gap * 1e3:.1f} mV")
    width = cfg.nand_window if pulse_width is None else pulse_width
    if width <= 0:
        # no pulse, nothing discharges
        arr.precharge(arr.params.vdd, ["RBL"])
        v = arr.lines["RBL"].copy()
        want = 1 - (arr._q[:, row_a, :] & arr._q[:, row_b, :])
        one = np.ones_like(v, dtype=np.uint8)
        arr.stats["inmem"] += 1
        return _pack(arr, one, _oriented(v, cfg.trip_nand * _scale(arr, cfg), want == 1),
                     {"nand": one, "and": 1 - one}, {"RBL": v})
    act, outs, m_and, _, v = _nand_raw(arr, row_a, row_b, width, cfg, trace is not None)
    arr.stats["inmem"] += 1
    _emit(trace, act, arr._public(m_and))
    return _pack(arr, outs["nand"], m_and, outs, {"RBL": v})


def xor_8t(arr: MemArray, row_a: int, row_b: int, pulse_width: float | None = None,
           cfg: SenseConfig | None = None, trace=None) -> SchemeResult:
    """XOR as NOR(AND, NOR) of the two skewed inverters on one RBL."""
    cfg = _cfg(cfg)
    if cfg.nand_gap < 0.010:
        raise MarginCollapse(f"calibrated NAND gap {cfg.nand_gap * 1e3:.1f} mV")
    width = cfg.nand_window if pulse_width is None else pulse_width
    act, outs, m_and, m_nor, v = _nand_raw(arr, row_a, row_b, width, cfg, trace is not None)
    margin = np.minimum(m_and, m_nor)
    arr.stats["inmem"] += 1
    _emit(trace, act, arr._public(margin))
    return _pack(arr, outs["xor"], margin, outs, {"RBL": v})


# voltage divider -------------------------------------------------------------

def _divider_raw(arr, a, b, cfg, record=False, extra=()):
    _require(arr, Topology.EightTSourceLine)
    if a == b:
        raise SameRow("divider operands must be two different rows")
    p = arr.params
    s = _scale(arr, cfg)
    v_pre = cfg.v_pre * s
    hi, lo = cfg.trip_div_hi * s, cfg.trip_div_lo * s
    saved = arr.boost
    arr.boost = cfg.div_boost
    arr.slines[a], arr.slines[b] = p.vdd, 0.0
    arr.boosted_rows = {a}
    try:
        arr.precharge(v_pre, ["RBL"])
        sel = [RowSelect(a, width=cfg.div_window, level=p.vdd + cfg.div_boost.rwl),
               RowSelect(b, width=cfg.div_window)]
        act = arr.activate(sel + list(extra), record=record)
    finally:
        arr.boost = saved
        arr.slines[a] = 0.0
        arr.boosted_rows = set()
    v = act.final["RBL"]
    aux = np.where(v > hi, AUX_10, np.where(v < lo, AUX_01, AUX_NONE)).astype(np.uint8)
    qa, qb = arr._q[:, a, :], arr._q[:, b, :]
    want = np.where((qa == 1) & (qb == 0), AUX_10, np.where((qa == 0) & (qb == 1), AUX_01, AUX_NONE))
    margin = np.where(want == AUX_10, v - hi,
                      np.where(want == AUX_01, lo - v, np.minimum(hi - v, v - lo)))
    outs = {"imp": (aux != AUX_10).astype(np.uint8), "xor": (aux != AUX_NONE).astype(np.uint8)}
    return act, outs, aux, margin, v


def divider_compute(arr: MemArray, row_a: int, row_b: int, cfg: SenseConfig | None = None,
                    func: BoolFunc = BoolFunc.IMP, trace=None) -> SchemeResult:
    """Row A sourced from VDD, row B to ground, RDBL as the middle node.

    A high-side detector flags (1,0), a low-side detector flags (0,1);
    IMP and XOR follow from the two flags, which double as a two-bit read.
    """
    cfg = _cfg(cfg)
    func = BoolFunc(func)
    if func not in (BoolFunc.IMP, BoolFunc.XOR):
        raise UnsupportedFunc(f"divider computes IMP or XOR, not {func.value}")
    act, outs, aux, margin, v = _divider_raw(arr, row_a, row_b, cfg, trace is not None)
    arr.stats["inmem"] += 1
    _emit(trace, act, arr._public(margin))
    return _pack(arr, outs[func.value.lower()], margin, outs, {"RBL": v}, aux)


# 8+T differential ------------------------------------------------------------

def _plus_raw(arr, rows, cfg, record=False, extra=()):
    _require(arr, Topology.EightTPlus)
    p = arr.params
    arr.precharge(p.vdd, ["RBL", "RBLB"])
    sel = _read_rows(arr, rows, cfg.plus_window) + list(extra)
    until = cfg.sa_enable_time
    act = arr.activate(sel, until=until, record=record)
    v_t, v_c = act.final["RBL"], act.final["RBLB"]
    q = arr._q[:, list(rows), :]
    want_and = np.bitwise_and.reduce(q, axis=1)
    want_or = np.bitwise_or.reduce(q, axis=1)
    off = cfg.sa_offset
    # SA_NAND: RBL side upsized, a tie reads as RBL high -> AND = 0
    and_out, m_and = _sa(v_c - v_t, off + cfg.sa_nand_fault, want_and)
    # SA_NOR: RBLB side upsized, a tie reads as RBLB high -> NOR = 0
    nor_out, m_nor = _sa(v_t - v_c, off, 1 - want_or)
    or_out = 1 - nor_out
    outs = {"and": and_out, "nand": 1 - and_out, "or": or_out, "nor": nor_out,
            "xor": ((and_out | nor_out) == 0).astype(np.uint8)}
    return act, outs, m_and, m_nor, v_t, v_c


def compute_8tplus(arr: MemArray, row_a: int, row_b: int, cfg: SenseConfig | None = None,
                   func: BoolFunc = BoolFunc.AND, trace=None) -> SchemeResult:
    """AND/NAND, OR/NOR and XOR from two asymmetric differential SAs."""
    cfg = _cfg(cfg)
    func = BoolFunc(func)
    if func not in (BoolFunc.AND, BoolFunc.NAND, BoolFunc.OR, BoolFunc.NOR, BoolFunc.XOR):
        raise UnsupportedFunc(f"8+T SAs do not produce {func.value}")
    if row_a == row_b:
        raise SameRow("8+T operands must be two different rows")
    act, outs, m_and, m_nor, v_t, v_c = _plus_raw(arr, [row_a, row_b], cfg, trace is not None)
    margin = {BoolFunc.AND: m_and, BoolFunc.NAND: m_and, BoolFunc.OR: m_nor,
              BoolFunc.NOR: m_nor}.get(func, np.minimum(m_and, m_nor))
    arr.stats["inmem"] += 1
    _emit(trace, act, arr._public(margin))
    return _pack(arr, outs[func.value.lower()], margin, outs, {"RBL": v_t, "RBLB": v_c})


def read_8tplus(arr: MemArray, row: int, cfg: SenseConfig | None = None,
                trace=None) -> SchemeResult:
    """Single-row read through both SAs; disagreement flags a read failure."""
    cfg = _cfg(cfg)
    act, outs, m_and, m_nor, v_t, v_c = _plus_raw(arr, [row], cfg, trace is not None)
    ok = (outs["and"] == outs["or"]).astype(np.uint8)
    bits = outs["and"]
    arr.stats["read"] += 1
    margin = np.minimum(m_and, m_nor)
    _emit(trace, act, arr._public(margin))
    return _pack(arr, bits, margin, outs, {"RBL": v_t, "RBLB": v_c},
                 flags={"read_check_ok": ok})


# read-compute-store ----------------------------------------------------------

SUPPORTED = {
    Topology.EightT: {BoolFunc.NOR, BoolFunc.OR, BoolFunc.NAND, BoolFunc.AND, BoolFunc.XOR,
                      BoolFunc.COPY},
    Topology.EightTSourceLine: {BoolFunc.NOR, BoolFunc.OR, BoolFunc.NAND, BoolFunc.AND,
                                BoolFunc.XOR, BoolFunc.IMP, BoolFunc.COPY},
    Topology.EightTPlus: {BoolFunc.NOR, BoolFunc.OR, BoolFunc.NAND, BoolFunc.AND,
                          BoolFunc.XOR, BoolFunc.COPY},
    Topology.SixT: set(),
}


def _sense_func(arr, a, b, func, cfg, wwl):
    """Sensed output bits of ``func`` with a write-port pulse riding along."""
    extra = [wwl]
    if arr.topology is Topology.EightTPlus:
        return _plus_raw(arr, [a, b], cfg, extra=extra)[1][func.value.lower()]
    if func is BoolFunc.IMP:
        return _divider_raw(arr, a, b, cfg, extra=extra)[1]["imp"]
    if func in (BoolFunc.NOR, BoolFunc.OR):
        out = _nor_raw(arr, [a, b], cfg, extra=extra)[1]
        return out if func is BoolFunc.NOR else 1 - out
    return _nand_raw(arr, a, b, cfg.nand_window, cfg, extra=extra)[1][func.value.lower()]


def rcs(arr: MemArray, row_a: int, row_b: int, dst: int, func: BoolFunc,
        cfg: SenseConfig | None = None) -> np.ndarray:
    """Compute ``func`` of two rows and store the sensed result in ``dst``.

    The write port of ``dst`` is pulsed during the read so the whole
    operation is a single in-memory transaction. Returns the stored bits.
    """
    cfg = _cfg(cfg)
    func = BoolFunc(func)
    if func is BoolFunc.COPY:
        return rcs_copy(arr, row_a, dst, cfg)
    if func not in SUPPORTED[arr.topology]:
        raise UnsupportedFunc(f"{arr.topology.value} arrays cannot compute {func.value} in place")
    if row_a == row_b:
        raise SameRow("operands must be two different rows")
    if dst in (row_a, row_b):
        raise SameRow("destination row must differ from both operands")
    arr._check_row(dst)
    wwl = RowSelect(dst, "WWL", width=cfg.nand_window)
    bits = _sense_func(arr, row_a, row_b, func, cfg, wwl)
    arr.store(dst, bits)
    arr.stats["inmem"] += 1
    return arr._public(bits)


def _read_bits(arr, row, cfg, extra=()):
    if arr.topology is Topology.EightTPlus:
        outs = _plus_raw(arr, [row], cfg, extra=extra)[1]
        return outs["and"]
    _, v = _sense_8t(arr, [row], cfg.nor_window, cfg, extra=extra)
    return (v <= cfg.trip_nor * _scale(arr, cfg)).astype(np.uint8)


def rcs_copy(arr: MemArray, src: int, dst: int, cfg: SenseConfig | None = None) -> np.ndarray:
    cfg = _cfg(cfg)
    if arr.topology is Topology.SixT:
        raise UnsupportedFunc("6T arrays copy with copy_6t")
    if src == dst:
        raise SameRow("copy source and destination are the same row")
    arr._check_row(dst)
    bits = _read_bits(arr, src, cfg, [RowSelect(dst, "WWL", width=cfg.nor_window)])
    arr.store(dst, bits)
    arr.stats["inmem"] += 1
    return arr._public(bits)


# 6T --------------------------------------------------------------------------

def logic_6t(arr: MemArray, row_a: int, row_b: int, pulse_width: float | None = None,
             cfg: SenseConfig | None = None, func: BoolFunc = BoolFunc.NAND,
             gap: float = 0.0, trace=None) -> SchemeResult:
    """Sequentially pulsed word-lines on a 6T column, sensed by the two SAs.

    Each pulse alone takes a line to about vdd/2, so '01/10' leaves both
    lines there while '00'/'11' drive one line low twice. A second pulse
    starting before the first ends raises ReadDisturbHazard.
    """
    cfg = _cfg(cfg)
    _require(arr, Topology.SixT)
    func = BoolFunc(func)
    if func not in (BoolFunc.AND, BoolFunc.NAND, BoolFunc.OR, BoolFunc.NOR, BoolFunc.XOR):
        raise UnsupportedFunc(f"6T sensing does not produce {func.value}")
    if row_a == row_b:
        raise SameRow("6T operands must be two different rows")
    p = arr.params
    width = cfg.sixt_window if pulse_width is None else pulse_width
    arr.precharge(p.vdd)
    sel = [RowSelect(row_a, "WL", width=width),
           RowSelect(row_b, "WL", width=width, start=width + gap)]
    act = arr.activate(sel, record=trace is not None)
    v_bl, v_blb = act.final["BL"], act.final["BLB"]
    qa, qb = arr._q[:, row_a, :], arr._q[:, row_b, :]
    off = cfg.sa_offset
    # BL falls for q = 0, so BL plays the part of the 8+T RBLB
    and_out, m_and = _sa(v_bl - v_blb, off, qa & qb)
    nor_out, m_nor = _sa(v_blb - v_bl, off, 1 - (qa | qb))
    outs = {"and": and_out, "nand": 1 - and_out, "or": 1 - nor_out, "nor": nor_out,
            "xor": ((and_out | nor_out) == 0).astype(np.uint8)}
    margin = {BoolFunc.AND: m_and, BoolFunc.NAND: m_and, BoolFunc.OR: m_nor,
              BoolFunc.NOR: m_nor}.get(func, np.minimum(m_and, m_nor))
    # lines only discharge here, so the end value is the minimum while a WL was high
    risk = ((np.minimum(v_bl, v_blb) < 0.3 * p.vdd)).astype(np.uint8)
    arr.stats["inmem"] += 1
    _emit(trace, act, arr._public(margin))
    return _pack(arr, outs[func.value.lower()], margin, outs, {"BL": v_bl, "BLB": v_blb},
                 flags={"disturb_risk": risk})


def _isat(params: DeviceParams, k: float, w: float, vov):
    vov = np.maximum(vov, 0.0)
    return k * w * vov ** params.alpha * params.derate()


def _write_drive(arr, dst, dv_frac, low_is_bl, wl_boost):
    """Charge-sharing drive on ``dst``: line split times access/pull-up strength."""
    p = arr.params
    acc = np.where(low_is_bl, arr.vt("acc_l")[:, dst, :], arr.vt("acc_r")[:, dst, :])
    pu = np.where(low_is_bl, arr.vt("pu_l")[:, dst, :], arr.vt("pu_r")[:, dst, :])
    i_acc = _isat(p, p.k_n, WIDTH["acc_l"], p.vdd + wl_boost - acc)
    i_pu = _isat(p, p.k_p, WIDTH["pu_l"], p.vdd - pu)
    return dv_frac * i_acc / np.maximum(i_pu, 1e-30)


def _copy_threshold(params: DeviceParams, cfg: SenseConfig) -> float:
    arr = MemArray(Topology.SixT, 2, 1, params)
    arr.store(0, [1])
    arr.precharge(params.vdd)
    act = arr.activate([RowSelect(0, "WL", width=cfg.copy_read_window)])
    dv = abs(float(act.final["BL"][0, 0] - act.final["BLB"][0, 0])) / params.vdd
    return float(_write_drive(arr, 1, dv, np.array(False), 0.0)[0, 0])


def copy_6t(arr: MemArray, src: int, dst: int, wl_boost: float = 0.2,
            cfg: SenseConfig | None = None, check: bool = True) -> np.ndarray:
    """Read ``src`` onto BL/BLB, then pulse ``dst`` with a boosted word-line.

    The destination flips when the write drive beats the threshold set at
    zero boost; returns the per-column success mask. With ``check`` a
    failed column raises WeakWriteFailure (successful columns are kept).
    """
    cfg = _cfg(cfg)
    _require(arr, Topology.SixT)
    if src == dst:
        raise SameRow("copy source and destination are the same row")
    arr._check_row(dst)
    if not 0 <= wl_boost <= arr.boost.rwl + 1e-12:
        raise ValueError(f"wl_boost {wl_boost} outside the array's boost rail")
    p = arr.params
    arr.precharge(p.vdd)
    act = arr.activate([RowSelect(src, "WL", width=cfg.copy_read_window)])
    v_bl, v_blb = act.final["BL"], act.final["BLB"]
    low_is_bl = v_bl < v_blb
    dv = np.abs(v_bl - v_blb) / p.vdd
    want = arr._q[:, src, :]
    have = arr._q[:, dst, :]
    drive = _write_drive(arr, dst, dv, low_is_bl, wl_boost)
    ok = (want == have) | (drive > cfg.copy_threshold)
    arr._q[:, dst, :] = np.where(ok, want, have)
    arr.stats["inmem"] += 1
    if check and not ok.all():
        n = int((~ok).sum())
        raise WeakWriteFailure(f"{n} column(s) kept their old value", arr._public(ok))
    return arr._public(ok)


__all__ = [
    "AUX_01", "AUX_10", "AUX_NONE", "BoolFunc", "MarginCollapse", "SameRow", "SchemeResult",
    "SenseConfig", "UnsupportedFunc", "WeakWriteFailure", "calibrate", "compute_8tplus",
    "copy_6t", "default_config", "divider_compute", "divider_trips", "logic_6t", "nand_8t",
    "nor_8t", "rcs", "rcs_copy", "read_8tplus", "xor_8t",
]
