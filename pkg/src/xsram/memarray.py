"""Logical and electrical state of one SRAM array.

A ``MemArray`` may carry an ensemble axis: with ``trials=B`` every stored
bit, bit-line voltage and transistor sample has a leading axis of length
``B`` and each activation integrates all ensemble members at once. With
``trials=None`` that axis is hidden from the public accessors.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import rng
from .devicemodel import TT, Corner, DeviceParams, WaveformTrace, integrate_arrays


class Topology(str, Enum):
    SixT = "6T"
    EightT = "8T"
    EightTSourceLine = "8T-SL"
    EightTPlus = "8T+"


class BadShape(ValueError):
    pass


class ReadDisturbHazard(RuntimeError):
    """Overlapping word-line pulses on a shared read/write port cell."""


ROLES = {
    Topology.SixT: ("acc_l", "acc_r", "pd_l", "pd_r", "pu_l", "pu_r"),
    Topology.EightT: ("acc_l", "acc_r", "pd_l", "pd_r", "pu_l", "pu_r", "rd_acc", "rd_drv"),
    Topology.EightTSourceLine: ("acc_l", "acc_r", "pd_l", "pd_r", "pu_l", "pu_r",
                                "rd_acc", "rd_drv"),
    Topology.EightTPlus: ("acc_l", "acc_r", "pd_l", "pd_r", "pu_l", "pu_r", "rd_t", "rd_c"),
}

WIDTH = {"acc_l": 1.0, "acc_r": 1.0, "pd_l": 2.0, "pd_r": 2.0, "pu_l": 1.0, "pu_r": 1.0,
         "rd_acc": 1.0, "rd_drv": 1.0, "rd_t": 1.0, "rd_c": 1.0}
FOOT_WIDTH = 4.0
P_ROLES = ("pu_l", "pu_r")

LINES = {
    Topology.SixT: ("BL", "BLB"),
    Topology.EightT: ("RBL",),
    Topology.EightTSourceLine: ("RBL",),
    Topology.EightTPlus: ("RBL", "RBLB"),
}


@dataclass(frozen=True)
class Boost:
    cell_vdd: float = 0.2
    rwl: float = 0.2


@dataclass(frozen=True)
class RowSelect:
    row: int
    line: str = "RWL"
    width: float = 200e-12
    start: float = 0.0
    level: float | None = None

    def __post_init__(self):
        if self.line not in ("RWL", "WWL", "WL"):
            raise ValueError(f"unknown word-line kind {self.line!r}")
        if self.width <= 0:
            raise ValueError("pulse width must be positive")

    @property
    def end(self) -> float:
        return self.start + self.width


class Activation:
    """Bit-line voltages produced by one :meth:`MemArray.activate` call."""

    def __init__(self, arr: "MemArray", final: dict, t=None, traces=None):
        self._arr = arr
        self.final = final
        self.t = t
        self.traces = traces

    def voltage(self, line: str) -> np.ndarray:
        return self._arr._public(self.final[line])

    def trace(self, line: str, col: int, trial: int = 0) -> WaveformTrace:
        if self.traces is None:
            raise ValueError("activation was not recorded")
        return WaveformTrace(f"{line}[{col}]", self.t, self.traces[line][:, trial, col].copy())

    def write_csv(self, path, trial: int = 0) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time_s", "node", "volts"])
            for line in self.traces:
                for col in range(self._arr.cols):
                    for row in self.trace(line, col, trial).rows():
                        w.writerow([f"{row[0]:.6e}", row[1], f"{row[2]:.9f}"])


class MemArray:
    def __init__(self, topology: Topology, rows: int = 16, cols: int = 64,
                 params: DeviceParams | None = None, corner: Corner = TT,
                 trials: int | None = None, boost: Boost | None = None):
        self.topology = Topology(topology)
        if rows < 1 or cols < 1:
            raise BadShape("array needs at least one row and one column")
        self.rows = rows
        self.cols = cols
        self.params = params or DeviceParams()
        self.corner = corner
        self.trials = trials
        self.batch = 1 if trials is None else int(trials)
        self.boost = boost or Boost()
        self.roles = ROLES[self.topology]
        self._q = np.zeros((self.batch, rows, cols), dtype=np.uint8)
        self.dvt = np.zeros((self.batch, rows, cols, len(self.roles)))
        self.foot_dvt = np.zeros((self.batch, rows))
        self.lines = {name: np.full((self.batch, cols), self.params.vdd, dtype=np.float64)
                      for name in LINES[self.topology]}
        self.slines = np.zeros(rows)
        self.boosted_rows: set[int] = set()
        self.stats = Counter(read=0, write=0, inmem=0)

    # ensemble plumbing -------------------------------------------------
    def _public(self, a):
        return a[0] if self.trials is None else a

    @property
    def q(self) -> np.ndarray:
        return self._public(self._q)

    @property
    def n_xistors(self) -> int:
        n = self.rows * self.cols * len(self.roles)
        if self.topology is Topology.EightTPlus:
            n += self.rows
        return n

    def sample_mismatch(self, seed: int, first_trial: int = 0,
                        sigma: float | None = None) -> None:
        """Draw every transistor's local Vt offset from the (seed, trial) streams."""
        sigma = self.params.sigma_vt if sigma is None else sigma
        draws = rng.mismatch(seed, range(first_trial, first_trial + self.batch),
                             self.n_xistors, sigma)
        ncell = self.rows * self.cols * len(self.roles)
        self.dvt = draws[:, :ncell].reshape(self.dvt.shape).copy()
        if self.topology is Topology.EightTPlus:
            self.foot_dvt = draws[:, ncell:].copy()

    def clear_mismatch(self) -> None:
        self.dvt[...] = 0.0
        self.foot_dvt[...] = 0.0

    def vt(self, role: str) -> np.ndarray:
        """Effective threshold of ``role`` for every cell, shaped (B, rows, cols)."""
        kind = "P" if role in P_ROLES else "N"
        j = self.roles.index(role)
        return self.params.vt0(kind) + self.corner.dvt(kind) + self.dvt[..., j]

    def foot_vt(self) -> np.ndarray:
        return self.params.vt_n0 + self.corner.dvt("N") + self.foot_dvt

    def line(self, name: str) -> np.ndarray:
        return self._public(self.lines[name])

    # storage -------------------------------------------------------------
    def _check_row(self, row: int) -> None:
        if not 0 <= row < self.rows:
            raise IndexError(f"row {row} outside 0..{self.rows - 1}")

    def store(self, row: int, bits) -> None:
        """Set a row's state without counting a transaction (array-internal writes)."""
        self._check_row(row)
        bits = np.asarray(bits)
        if bits.shape not in ((self.cols,), (self.batch, self.cols)):
            raise BadShape(f"expected {self.cols} bits for row {row}, got shape {bits.shape}")
        if np.any((bits != 0) & (bits != 1)):
            raise ValueError("bits must be 0 or 1")
        self._q[:, row, :] = bits

    def write_row(self, row: int, bits) -> None:
        self.store(row, bits)
        self.stats["write"] += 1

    def precharge(self, level: float, lines=None) -> None:
        if not 0 <= level <= self.params.vdd:
            raise ValueError(f"precharge level {level} outside [0, vdd]")
        for name in lines or self.lines:
            self.lines[name][...] = level

    # read path -----------------------------------------------------------
    def _check_selects(self, selects) -> None:
        limit = self.params.vdd + self.boost.rwl + 1e-12
        for s in selects:
            self._check_row(s.row)
            if s.level is not None and s.level > limit:
                raise ValueError(f"word-line level {s.level} above vdd + boost")
            if self.topology is Topology.SixT and s.line != "WL":
                raise ValueError("6T arrays only have WL word-lines")
            if self.topology is not Topology.SixT and s.line == "WL":
                raise ValueError("decoupled-port arrays use RWL/WWL")
        if self.topology is Topology.SixT:
            wl = sorted((s for s in selects if s.line == "WL"), key=lambda s: s.start)
            for a, b in zip(wl, wl[1:]):
                if b.start < a.end - 1e-18:
                    raise ReadDisturbHazard(
                        f"WL pulses on rows {a.row} and {b.row} overlap; "
                        "6T cells would be disturbed")

    def _paths(self, active):
        """Per-line path arrays for the read selects in ``active``."""
        p = self.params
        bshape = (self.batch, self.cols)
        nlines = len(self.lines)
        npaths = max(1, len(active))
        shape = (nlines, self.batch, self.cols, npaths)
        rail = np.zeros(shape)
        ndev = np.zeros(shape, dtype=np.int8)
        g_n, vt_n, w_n = np.zeros(shape), np.zeros(shape), np.ones(shape)
        g_f, vt_f, w_f = np.zeros(shape), np.zeros(shape), np.ones(shape)
        topo = self.topology
        for j, s in enumerate(active):
            r = s.row
            level = p.vdd if s.level is None else s.level
            q = self._q[:, r, :].astype(np.float64)
            if topo is Topology.SixT:
                for li, (acc, pd, gate) in enumerate((("acc_l", "pd_l", 1.0 - q),
                                                      ("acc_r", "pd_r", q))):
                    ndev[li, ..., j] = 2
                    g_n[li, ..., j] = level
                    vt_n[li, ..., j] = self.vt(acc)[:, r, :]
                    w_n[li, ..., j] = WIDTH[acc]
                    g_f[li, ..., j] = p.vdd * gate
                    vt_f[li, ..., j] = self.vt(pd)[:, r, :]
                    w_f[li, ..., j] = WIDTH[pd]
            elif topo in (Topology.EightT, Topology.EightTSourceLine):
                cell_v = p.vdd + (self.boost.cell_vdd if r in self.boosted_rows else 0.0)
                ndev[0, ..., j] = 2
                g_n[0, ..., j] = level
                vt_n[0, ..., j] = self.vt("rd_acc")[:, r, :]
                g_f[0, ..., j] = cell_v * q
                vt_f[0, ..., j] = self.vt("rd_drv")[:, r, :]
                rail[0, ..., j] = self.slines[r] if topo is Topology.EightTSourceLine else 0.0
            else:
                foot = np.broadcast_to(self.foot_vt()[:, r, None], bshape)
                for li, (role, gate) in enumerate((("rd_t", q), ("rd_c", 1.0 - q))):
                    ndev[li, ..., j] = 2
                    g_n[li, ..., j] = p.vdd * gate
                    vt_n[li, ..., j] = self.vt(role)[:, r, :]
                    g_f[li, ..., j] = level
                    vt_f[li, ..., j] = foot
                    w_f[li, ..., j] = FOOT_WIDTH
        flat = lambda a: a.reshape(-1, npaths)
        return tuple(flat(a) for a in (rail, ndev, g_n, vt_n, w_n, g_f, vt_f, w_f))

    def activate(self, selects, until: float | None = None,
                 record: bool = False) -> Activation:
        """Pulse the given word-lines and integrate every bit-line.

        Bit-line voltages are left at their end-of-activation values.
        Only read-path lines (WL, RWL) move bit-lines; WWL pulses are
        accepted so a write may overlap the read (used by RCS).
        """
        selects = list(selects)
        self._check_selects(selects)
        reads = [s for s in selects if s.line in ("WL", "RWL")]
        end = max([s.end for s in reads] + [0.0]) if until is None else until
        edges = sorted({0.0, end} | {s.start for s in reads if s.start < end}
                       | {s.end for s in reads if s.end < end})
        p = self.params
        names = list(self.lines)
        v = np.stack([self.lines[n] for n in names]).reshape(-1)
        vmax = max(p.vdd + max(self.boost.cell_vdd, self.boost.rwl), float(self.slines.max()))
        t_parts, tr_parts = [np.zeros(1)], [v[None, :].copy()]
        t0 = 0.0
        for a, b in zip(edges, edges[1:]):
            nsteps = int(round((b - a) / p.dt))
            if nsteps == 0:
                continue
            active = [s for s in reads if s.start <= a + 1e-18 and s.end >= b - 1e-18]
            if active:
                arrays = self._paths(active)
                v, tr = integrate_arrays(p, v, *arrays, nsteps, 0.0, vmax, record=record)
            else:
                tr = np.repeat(v[None, :], nsteps + 1, axis=0) if record else None
            if record:
                t_parts.append(t0 + np.arange(1, nsteps + 1) * p.dt)
                tr_parts.append(tr[1:])
            t0 += nsteps * p.dt
        shape = (len(names), self.batch, self.cols)
        v = v.reshape(shape)
        for i, n in enumerate(names):
            self.lines[n] = v[i].copy()
        final = {n: v[i].copy() for i, n in enumerate(names)}
        if not record:
            return Activation(self, final)
        t = np.concatenate(t_parts)
        full = np.concatenate(tr_parts).reshape((-1,) + shape)
        traces = {n: full[:, i] for i, n in enumerate(names)}
        return Activation(self, final, t, traces)

    # image IO --------------------------------------------------------------
    def dump_image(self, path, trial: int = 0) -> None:
        digits = (self.cols + 3) // 4
        with open(path, "w") as fh:
            for r in range(self.rows):
                value = int("".join(str(int(b)) for b in self._q[trial, r]), 2)
                fh.write(f"{value:0{digits}x}\n")

    def load_image(self, path) -> None:
        with open(path) as fh:
            rows = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
        if len(rows) != self.rows:
            raise BadShape(f"image has {len(rows)} rows, array has {self.rows}")
        for r, text in enumerate(rows):
            value = int(text, 16)
            if value >> self.cols:
                raise BadShape(f"row {r} wider than {self.cols} columns")
            bits = [(value >> (self.cols - 1 - c)) & 1 for c in range(self.cols)]
            self.store(r, bits)
