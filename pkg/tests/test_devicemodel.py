import numpy as np
import pytest
from hypothesis import given, strategies as st

from xsram.devicemodel import (
    TT, ChainPath, Corner, DeviceParams, TransistorInstance, calibrate_k_n, device_current,
    effective_vt, half_discharge_time, integrate_node, load_params,
)

P = DeviceParams()


def pulldown(width=1.0, gate=None, dvt=0.0):
    return ChainPath(((TransistorInstance("N", width, dvt), P.vdd if gate is None else gate),), 0.0)


def read_stack(q_gate=None):
    acc = TransistorInstance("N", 1.0)
    drv = TransistorInstance("N", 1.0)
    return ChainPath(((acc, P.vdd), (drv, P.vdd if q_gate is None else q_gate)), 0.0)


class TestThresholds:
    def test_nominal(self):
        assert effective_vt(P, TT, TransistorInstance()) == P.vt_n0

    def test_slow_corner_adds_shift(self):
        assert effective_vt(P, Corner("SS"), TransistorInstance()) == pytest.approx(P.vt_n0 + 0.090)

    def test_local_offset_adds(self):
        inst = TransistorInstance(dvt_local=0.030)
        assert effective_vt(P, TT, inst) == pytest.approx(P.vt_n0 + 0.030)

    def test_skewed_corners_move_types_apart(self):
        sf = Corner("SF")
        assert sf.dvt("N") == -sf.dvt("P") == pytest.approx(0.090)

    def test_unknown_corner(self):
        with pytest.raises(ValueError):
            Corner("XX")


class TestCurrent:
    def test_cutoff(self):
        assert device_current(P, "N", 1.0, P.vt_n0, 0.5, P.vt_n0) == 0.0

    def test_zero_vds(self):
        assert device_current(P, "N", 1.0, 1.0, 0.0, P.vt_n0) == 0.0

    def test_hot_device_is_weaker(self):
        hot = P.replace(t_sim=P.t_ref + 50)
        assert device_current(hot, "N", 1, 1, 1, 0.3) < device_current(P, "N", 1, 1, 1, 0.3)

    def test_fine_sweep_has_no_jumps(self):
        # 0.1 mV steps; the steepest slope here is about 1e-4 A/V
        for vgs in (0.35, 0.6, 1.0):
            vds = np.arange(0.0, 1.2, 1e-4)
            cur = np.array([device_current(P, "N", 1.0, vgs, x, P.vt_n0) for x in vds])
            assert np.max(np.abs(np.diff(cur))) < 1e-8
        vgs = np.arange(0.2, 1.2, 1e-4)
        cur = np.array([device_current(P, "N", 1.0, g, 0.5, P.vt_n0) for g in vgs])
        assert np.max(np.abs(np.diff(cur))) < 1e-8

    def test_boundary_continuity(self):
        vov = 0.4
        below = device_current(P, "N", 1.0, P.vt_n0 + vov, vov - 1e-12, P.vt_n0)
        above = device_current(P, "N", 1.0, P.vt_n0 + vov, vov + 1e-12, P.vt_n0)
        assert abs(above - below) < 1e-12

    @given(st.floats(0.0, 1.4), st.floats(0.0, 1.4))
    def test_non_negative(self, vgs, vds):
        assert device_current(P, "N", 1.0, vgs, vds, P.vt_n0) >= 0.0


class TestIntegrate:
    def test_idle_node_stays_flat(self):
        tr = integrate_node(P, 0.8, [], [], 300e-12)
        assert np.all(tr.v == 0.8)
        assert tr.t[-1] == pytest.approx(300e-12)

    def test_discharge_is_monotone(self):
        tr = integrate_node(P, P.vdd, [read_stack()], [], 1e-9)
        assert np.all(np.diff(tr.v) <= 0)
        assert tr.final < 0.5 * P.vdd

    def test_two_stacks_fall_faster(self):
        one = integrate_node(P, P.vdd, [read_stack()], [], 600e-12)
        two = integrate_node(P, P.vdd, [read_stack(), read_stack()], [], 600e-12)
        assert np.all(two.v <= one.v)
        assert np.all(two.v[1:200] < one.v[1:200])

    def test_half_discharge_calibration(self):
        assert half_discharge_time(P) == pytest.approx(200e-12, abs=P.dt)
        assert calibrate_k_n(P) == pytest.approx(P.k_n, rel=1e-3)

    def test_deterministic(self):
        a = integrate_node(P, P.vdd, [read_stack(), pulldown(2.0)], [], 400e-12)
        b = integrate_node(P, P.vdd, [read_stack(), pulldown(2.0)], [], 400e-12)
        assert np.array_equal(a.v, b.v)

    def test_pullup_charges_toward_rail(self):
        up = ChainPath(((TransistorInstance(), P.vdd + 0.5),), P.vdd)
        tr = integrate_node(P, 0.2, [], [up], 1e-9)
        assert np.all(np.diff(tr.v) >= 0)
        assert tr.final <= P.vdd

    @given(st.floats(0.1, 1.0), st.floats(0.0, 1.5), st.floats(-0.1, 0.1))
    def test_trace_within_rails(self, v0, boost, dvt):
        up = ChainPath(((TransistorInstance("N", 1.0, dvt), P.vdd + boost),), P.vdd + boost)
        tr = integrate_node(P, v0, [pulldown(dvt=dvt)], [up], 300e-12)
        assert tr.v.min() >= 0.0
        assert tr.v.max() <= P.vdd + boost + 1e-12

    @given(st.floats(0.5, 4.0), st.floats(-0.06, 0.06))
    def test_wider_pulldown_never_higher(self, w, dvt):
        narrow = integrate_node(P, P.vdd, [pulldown(w, dvt=dvt)], [], 300e-12)
        wide = integrate_node(P, P.vdd, [pulldown(2 * w, dvt=dvt)], [], 300e-12)
        assert np.all(wide.v <= narrow.v + 1e-15)

    def test_bad_duration(self):
        with pytest.raises(ValueError):
            integrate_node(P, 1.0, [], [], 0.0)

    def test_path_rejects_pmos(self):
        with pytest.raises(ValueError):
            ChainPath(((TransistorInstance("P"), 0.0),), 0.0)


def test_load_params(tmp_path):
    cfg = tmp_path / "dev.toml"
    cfg.write_text("[device]\nvdd = 0.9\n")
    assert load_params(cfg).vdd == 0.9
    cfg.write_text("[device]\nvddd = 0.9\n")
    with pytest.raises(ValueError):
        load_params(cfg)
