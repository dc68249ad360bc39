"""Behavioral transistor and bit-line electrical primitives.

An alpha-power current law stands in for a full compact model. Bit-lines
are single capacitors charged and discharged by chains of at most two
series NMOS devices and integrated with explicit Euler steps.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import ClassVar, Sequence

import numpy as np

from . import kernel
from .config import load_toml

# Bisection iterations used to solve the internal node of a two-device chain.
CHAIN_BISECT = 16

# k_n such that one minimum-width device discharges 10 fF from 1.0 V to
# 0.5 V in 200 ps at 300 K (see calibrate_k_n).
K_N_DEFAULT = 4.2536514e-05


class UnstableIntegration(RuntimeError):
    """An Euler step moved a node by more than a quarter of VDD."""


@dataclass(frozen=True)
class Corner:
    """Global process corner: a threshold shift applied per device type."""

    name: str = "TT"
    shift: float = 0.090

    _SIGNS: ClassVar[dict] = {
        "TT": (0, 0), "SS": (1, 1), "FF": (-1, -1), "SF": (1, -1), "FS": (-1, 1)}

    def __post_init__(self):
        if self.name not in self._SIGNS:
            raise ValueError(f"unknown corner {self.name!r}")
        if self.shift < 0:
            raise ValueError("corner shift must be non-negative")

    def dvt(self, kind: str) -> float:
        """Signed threshold-magnitude offset for ``kind`` ('N' or 'P')."""
        sn, sp = self._SIGNS[self.name]
        return self.shift * (sn if kind == "N" else sp)


CORNER_NAMES = ("TT", "SS", "FF", "SF", "FS")
TT = Corner("TT")


@dataclass(frozen=True)
class DeviceParams:
    vdd: float = 1.0
    vt_n0: float = 0.3
    vt_p0: float = 0.3
    sigma_vt: float = 0.030
    alpha: float = 1.3
    k_n: float = K_N_DEFAULT
    k_p: float = K_N_DEFAULT / 2
    theta_temp: float = 0.002
    t_ref: float = 300.0
    t_sim: float = 300.0
    c_bl: float = 10e-15
    dt: float = 1e-12

    def __post_init__(self):
        for f in dataclasses.fields(self):
            object.__setattr__(self, f.name, float(getattr(self, f.name)))
        if self.vdd <= 0:
            raise ValueError("vdd must be positive")
        if self.c_bl <= 0:
            raise ValueError("c_bl must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.sigma_vt < 0:
            raise ValueError("sigma_vt must be non-negative")
        if self.alpha < 1:
            raise ValueError("alpha must be >= 1")
        if self.k_n <= 0 or self.k_p <= 0:
            raise ValueError("transconductance must be positive")
        if self.dt > self.rc_scale() / 10:
            raise ValueError(
                f"dt={self.dt:g}s too coarse for RC scale {self.rc_scale():g}s")

    def derate(self) -> float:
        """Current multiplier at ``t_sim`` (1.0 at the reference temperature)."""
        return max(0.05, 1.0 - self.theta_temp * (self.t_sim - self.t_ref))

    def rc_scale(self) -> float:
        """Bit-line time constant of one minimum-width device at full overdrive."""
        vov = self.vdd - min(self.vt_n0, self.vt_p0)
        if vov <= 0:
            return math.inf
        k = max(self.k_n, self.k_p)
        r_on = vov / (k * vov ** self.alpha)
        return r_on * self.c_bl

    def replace(self, **changes) -> "DeviceParams":
        return dataclasses.replace(self, **changes)

    def vt0(self, kind: str) -> float:
        return self.vt_n0 if kind == "N" else self.vt_p0


def load_params(path: str | FsPath) -> DeviceParams:
    """Read DeviceParams from a ``key = value`` file; missing keys keep defaults."""
    data = load_toml(path)
    data = data.get("device", data)
    known = {f.name for f in dataclasses.fields(DeviceParams)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown device parameters: {sorted(unknown)}")
    return DeviceParams(**{k: float(v) for k, v in data.items()})


@dataclass(frozen=True)
class TransistorInstance:
    kind: str = "N"
    width_mult: float = 1.0
    dvt_local: float = 0.0

    def __post_init__(self):
        if self.kind not in ("N", "P"):
            raise ValueError(f"kind must be 'N' or 'P', got {self.kind!r}")
        if self.width_mult < 0.1:
            raise ValueError("width_mult must be >= 0.1")


def effective_vt(params: DeviceParams, corner: Corner, inst: TransistorInstance) -> float:
    return params.vt0(inst.kind) + corner.dvt(inst.kind) + inst.dvt_local


def device_current(params: DeviceParams, kind: str, width_mult: float,
                   vgs: float, vds: float, vt_eff: float) -> float:
    """Drain current magnitude from the alpha-power law.

    Voltages are magnitudes for either polarity. The linear region scales
    the saturated current by vds/vov, so the law is continuous at both
    region boundaries.
    """
    vgs, vds = abs(vgs), abs(vds)
    vov = vgs - vt_eff
    if vov <= 0 or vds <= 0:
        return 0.0
    k = params.k_n if kind == "N" else params.k_p
    isat = k * width_mult * vov ** params.alpha * params.derate()
    if vds < vov:
        return isat * vds / vov
    return isat


@dataclass(frozen=True)
class ChainPath:
    """One to two series devices between a node and a rail.

    ``devices`` lists (instance, gate volts) pairs, node side first.
    """

    devices: tuple
    rail: float

    def __post_init__(self):
        if not 1 <= len(self.devices) <= 2:
            raise ValueError("a path holds one or two series devices")
        for inst, _ in self.devices:
            if inst.kind != "N":
                raise ValueError("path devices must be NMOS")


@dataclass
class WaveformTrace:
    node: str
    t: np.ndarray
    v: np.ndarray

    @property
    def final(self) -> float:
        return float(self.v[-1])

    def rows(self):
        for t, v in zip(self.t, self.v):
            yield (float(t), self.node, float(v))


def integrate_arrays(params: DeviceParams, v0, rail, ndev, g_n, vt_n, w_n,
                     g_f, vt_f, w_f, nsteps: int, vmin: float, vmax: float,
                     record: bool = False):
    """Run the selected kernel on prepared ``(N, P)`` path arrays."""
    final, trace, bad = kernel.integrate(
        np.asarray(v0, dtype=np.float64), rail, ndev, g_n, vt_n, w_n,
        g_f, vt_f, w_f, int(nsteps), params.dt, params.c_bl, params.k_n,
        params.alpha, params.derate(), vmin, vmax, params.vdd / 4,
        CHAIN_BISECT, record)
    if bad >= 0:
        raise UnstableIntegration(
            f"step {bad}: node moved more than vdd/4 in dt={params.dt:g}s")
    return final, trace


def integrate_node(params: DeviceParams, v0: float, pulldowns: Sequence[ChainPath],
                   pullups: Sequence[ChainPath], duration: float,
                   corner: Corner = TT, node: str = "node") -> WaveformTrace:
    if duration <= 0:
        raise ValueError("duration must be positive")
    paths = list(pulldowns) + list(pullups)
    p = max(1, len(paths))
    arrs = {name: np.zeros((1, p)) for name in ("rail", "g_n", "vt_n", "w_n", "g_f", "vt_f", "w_f")}
    ndev = np.zeros((1, p), dtype=np.int8)
    for j, path in enumerate(paths):
        arrs["rail"][0, j] = path.rail
        ndev[0, j] = len(path.devices)
        for (inst, gate), tag in zip(path.devices, ("n", "f")):
            arrs["g_" + tag][0, j] = gate
            arrs["vt_" + tag][0, j] = effective_vt(params, corner, inst)
            arrs["w_" + tag][0, j] = inst.width_mult
        if len(path.devices) == 1:
            arrs["w_f"][0, j] = 1.0
    rails = [path.rail for path in paths]
    vmin = min([0.0] + rails)
    vmax = max([params.vdd, v0] + rails)
    nsteps = max(1, int(round(duration / params.dt)))
    _, trace = integrate_arrays(params, [v0], arrs["rail"], ndev, arrs["g_n"], arrs["vt_n"],
                                arrs["w_n"], arrs["g_f"], arrs["vt_f"], arrs["w_f"],
                                nsteps, vmin, vmax, record=True)
    t = np.arange(nsteps + 1) * params.dt
    return WaveformTrace(node, t, trace[:, 0].copy())


def half_discharge_time(params: DeviceParams) -> float:
    """Time for one minimum-width device (gate at VDD) to take the bit-line to VDD/2."""
    path = ChainPath(((TransistorInstance("N"), params.vdd),), 0.0)
    tr = integrate_node(params, params.vdd, [path], [], 20 * params.rc_scale())
    below = np.nonzero(tr.v <= params.vdd / 2)[0]
    if below.size == 0:
        return math.inf
    return float(tr.t[below[0]])


def calibrate_k_n(params: DeviceParams | None = None, t_half: float = 200e-12) -> float:
    """Bisect k_n so :func:`half_discharge_time` equals ``t_half`` (to one dt)."""
    params = params or DeviceParams()
    lo, hi = params.k_n / 4, params.k_n * 4
    for _ in range(40):
        mid = math.sqrt(lo * hi)
        trial = params.replace(k_n=mid, k_p=mid / 2, dt=params.dt)
        if half_discharge_time(trial) > t_half:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)
