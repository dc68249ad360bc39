import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from xsram import schemes
from xsram.devicemodel import CORNER_NAMES, Corner, DeviceParams
from xsram.memarray import MemArray, Topology
from xsram.schemes import BoolFunc

CFG = schemes.default_config()
A = np.array([0, 0, 1, 1], dtype=np.uint8)
B = np.array([0, 1, 0, 1], dtype=np.uint8)


def pair(topology, a=A, b=B, rows=3, **kw):
    arr = MemArray(topology, rows, len(a), **kw)
    arr.store(0, a)
    arr.store(1, b)
    return arr


def test_bool_funcs():
    assert BoolFunc.NAND.apply(A, B).tolist() == [1, 1, 1, 0]
    assert BoolFunc.IMP.apply(A, B).tolist() == [1, 1, 0, 1]
    assert BoolFunc.COPY.apply(A).tolist() == A.tolist()


class TestNor8T:
    def test_pairs(self):
        res = schemes.nor_8t(pair(Topology.EightT), [0, 1], CFG)
        assert res.bits.tolist() == [1, 0, 0, 0]
        assert res["or"].tolist() == [0, 1, 1, 1]

    def test_eight_zero_rows(self):
        arr = MemArray(Topology.EightT, 8, 1)
        assert schemes.nor_8t(arr, range(8), CFG).bits.tolist() == [1]

    def test_needs_two_rows(self):
        with pytest.raises(ValueError):
            schemes.nor_8t(pair(Topology.EightT), [0], CFG)

    @pytest.mark.parametrize("n", range(2, 9))
    def test_exhaustive(self, n):
        cols = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.uint8).T
        arr = MemArray(Topology.EightT, n, cols.shape[1])
        for r in range(n):
            arr.store(r, cols[r])
        res = schemes.nor_8t(arr, list(range(n)), CFG)
        assert np.array_equal(res.bits, 1 - cols.max(axis=0))

    def test_zero_precharge_reads_discharged(self):
        arr = pair(Topology.EightT)
        arr.precharge(0.0)
        v = arr.line("RBL")
        assert np.all(v <= CFG.trip_nor)

    def test_counts_one_transaction(self):
        arr = pair(Topology.EightT)
        schemes.nor_8t(arr, [0, 1], CFG)
        assert dict(arr.stats) == {"read": 0, "write": 0, "inmem": 1}


class TestNand8T:
    def test_truth_table(self):
        res = schemes.nand_8t(pair(Topology.EightT), 0, 1, None, CFG)
        assert res.bits.tolist() == [1, 1, 1, 0]
        assert res["and"].tolist() == [0, 0, 0, 1]
        assert np.all(res.margins > 0)

    def test_zero_pulse_is_all_ones(self):
        res = schemes.nand_8t(pair(Topology.EightT), 0, 1, 0.0, CFG)
        assert res.bits.tolist() == [1, 1, 1, 1]

    def test_collapsed_margin_raises(self):
        with pytest.raises(schemes.MarginCollapse):
            schemes.nand_8t(pair(Topology.EightT), 0, 1, None, CFG.replace(nand_gap=0.001))

    def test_low_vdd_margin_positive(self):
        p = DeviceParams(vdd=0.9)
        cfg = schemes.calibrate(p)
        res = schemes.nand_8t(pair(Topology.EightT, params=p), 0, 1, None, cfg)
        assert res.bits.tolist() == [1, 1, 1, 0]
        assert np.all(res.margins > 0)

    def test_same_row(self):
        with pytest.raises(schemes.SameRow):
            schemes.nand_8t(pair(Topology.EightT), 1, 1, None, CFG)

    def test_wrong_topology(self):
        with pytest.raises(ValueError):
            schemes.nand_8t(pair(Topology.SixT), 0, 1, None, CFG)


def test_xor_8t():
    res = schemes.xor_8t(pair(Topology.EightT), 0, 1, None, CFG)
    assert res.bits.tolist() == [0, 1, 1, 0]


class TestDivider:
    def test_truth_table(self):
        res = schemes.divider_compute(pair(Topology.EightTSourceLine), 0, 1, CFG)
        assert res.bits.tolist() == [1, 1, 0, 1]
        assert res["xor"].tolist() == [0, 1, 1, 0]
        assert list(res.aux) == [None, (0, 1), (1, 0), None]

    def test_levels(self):
        res = schemes.divider_compute(pair(Topology.EightTSourceLine), 0, 1, CFG)
        v = res.sensed["RBL"]
        assert v[2] > CFG.trip_div_hi
        assert v[1] < CFG.trip_div_lo
        assert CFG.trip_div_lo < v[0] < CFG.trip_div_hi
        assert CFG.trip_div_lo < v[3] < CFG.trip_div_hi

    def test_array_state_restored(self):
        arr = pair(Topology.EightTSourceLine)
        boost = arr.boost
        schemes.divider_compute(arr, 0, 1, CFG)
        assert arr.boost == boost
        assert not arr.boosted_rows
        assert np.all(arr.slines == 0)

    @pytest.mark.parametrize("corner", CORNER_NAMES)
    @pytest.mark.parametrize("scale", [0.9, 1.0, 1.1])
    def test_centering_without_mismatch(self, corner, scale):
        p = DeviceParams(vdd=scale)
        arr = pair(Topology.EightTSourceLine, np.array([0, 1], np.uint8),
                   np.array([0, 1], np.uint8), params=p, corner=Corner(corner))
        v = schemes.divider_compute(arr, 0, 1, schemes.calibrate(p)).sensed["RBL"]
        assert abs(v[1] - v[0]) < 0.020


class TestEightTPlus:
    def test_truth_table(self):
        res = schemes.compute_8tplus(pair(Topology.EightTPlus), 0, 1, CFG)
        for f in ("AND", "NAND", "OR", "NOR", "XOR"):
            assert np.array_equal(res[f.lower()], BoolFunc(f).apply(A, B)), f

    @pytest.mark.parametrize("row", [0, 1])
    def test_read(self, row):
        res = schemes.read_8tplus(pair(Topology.EightTPlus), row, CFG)
        assert np.array_equal(res.bits, (A, B)[row])
        assert np.all(res.flags["read_check_ok"] == 1)

    def test_read_counts_as_read(self):
        arr = pair(Topology.EightTPlus)
        schemes.read_8tplus(arr, 0, CFG)
        assert arr.stats["read"] == 1 and arr.stats["inmem"] == 0

    def test_faulty_sa_trips_read_check(self):
        res = schemes.read_8tplus(pair(Topology.EightTPlus), 1, CFG.replace(sa_nand_fault=5.0))
        assert res.flags["read_check_ok"].tolist() == [1, 0, 1, 0]

    @pytest.mark.parametrize("corner", CORNER_NAMES)
    def test_global_corner_cancels(self, corner):
        ref = schemes.compute_8tplus(pair(Topology.EightTPlus), 0, 1, CFG)
        res = schemes.compute_8tplus(pair(Topology.EightTPlus, corner=Corner(corner)), 0, 1, CFG)
        for k in ref.outputs:
            assert np.array_equal(ref[k], res[k])


class TestRcs:
    def test_nand_example(self):
        arr = pair(Topology.EightT, np.array([0, 1, 0, 1], np.uint8), np.array([0, 0, 1, 1], np.uint8))
        schemes.rcs(arr, 0, 1, 2, BoolFunc.NAND, CFG)
        assert arr.q[2].tolist() == [1, 1, 1, 0]

    def test_xor_of_equal_rows_is_zero(self):
        arr = pair(Topology.EightTPlus, A, A)
        schemes.rcs(arr, 0, 1, 2, BoolFunc.XOR, CFG)
        assert not arr.q[2].any()

    def test_copy_chain(self):
        arr = MemArray(Topology.EightT, 3, 4)
        arr.store(0, A)
        schemes.rcs_copy(arr, 0, 1, CFG)
        schemes.rcs_copy(arr, 1, 2, CFG)
        assert np.array_equal(arr.q[2], A)
        assert arr.stats["inmem"] == 2

    def test_rejects(self):
        arr = pair(Topology.EightT)
        with pytest.raises(schemes.SameRow):
            schemes.rcs(arr, 0, 1, 1, BoolFunc.AND, CFG)
        with pytest.raises(schemes.UnsupportedFunc):
            schemes.rcs(arr, 0, 1, 2, BoolFunc.IMP, CFG)
        with pytest.raises(schemes.UnsupportedFunc):
            schemes.rcs(pair(Topology.SixT), 0, 1, 2, BoolFunc.AND, CFG)

    @given(topology=st.sampled_from([Topology.EightT, Topology.EightTSourceLine, Topology.EightTPlus]),
           seed=st.integers(0, 2**31), data=st.data())
    def test_matches_write_of_function(self, topology, seed, data):
        func = data.draw(st.sampled_from(sorted(schemes.SUPPORTED[topology] - {BoolFunc.COPY})))
        a, b, dst = data.draw(st.permutations(range(4)))[:3]
        bits = np.random.default_rng(seed).integers(0, 2, (4, 8)).astype(np.uint8)
        arr = MemArray(topology, 4, 8)
        ref = MemArray(topology, 4, 8)
        for r in range(4):
            arr.store(r, bits[r])
            ref.store(r, bits[r])
        schemes.rcs(arr, a, b, dst, func, CFG)
        ref.write_row(dst, func.apply(bits[a], bits[b]))
        assert np.array_equal(arr.q, ref.q)
        assert sum(arr.stats.values()) == 1

    @given(topology=st.sampled_from([Topology.EightT, Topology.EightTPlus]),
           seed=st.integers(0, 2**31), sigma=st.sampled_from([0.0, 0.03]))
    def test_operands_untouched(self, topology, seed, sigma):
        arr = MemArray(topology, 3, 8, trials=3)
        arr.sample_mismatch(seed, sigma=sigma)
        bits = np.random.default_rng(seed).integers(0, 2, (3, 8))
        for r in range(3):
            arr.store(r, bits[r])
        before = arr.q[:, :2].copy()
        schemes.rcs(arr, 0, 1, 2, BoolFunc.AND, CFG)
        schemes.nor_8t(arr, [0, 1], CFG) if topology is Topology.EightT else \
            schemes.compute_8tplus(arr, 0, 1, CFG)
        assert np.array_equal(arr.q[:, :2], before)


class TestSixT:
    def test_truth_table(self):
        res = schemes.logic_6t(pair(Topology.SixT), 0, 1, None, CFG)
        for f in ("NAND", "NOR", "XOR", "AND", "OR"):
            assert np.array_equal(res[f.lower()], BoolFunc(f).apply(A, B)), f

    def test_mixed_case_lines_near_half(self):
        res = schemes.logic_6t(pair(Topology.SixT), 0, 1, None, CFG)
        for line in ("BL", "BLB"):
            assert res.sensed[line][1] == pytest.approx(0.5, abs=0.1)

    def test_copy_flips_destination(self):
        arr = MemArray(Topology.SixT, 2, 4)
        arr.store(0, [1, 1, 0, 0])
        arr.store(1, [0, 1, 0, 1])
        ok = schemes.copy_6t(arr, 0, 1, 0.2, CFG)
        assert ok.all()
        assert arr.q[1].tolist() == [1, 1, 0, 0]

    def test_unboosted_copy_fails_under_variation(self):
        arr = MemArray(Topology.SixT, 2, 1, trials=1000)
        arr.sample_mismatch(9, sigma=0.03)
        arr.store(0, [1])
        ok = schemes.copy_6t(arr, 0, 1, 0.0, CFG, check=False)
        assert 0 < (~ok).sum() < 1000

    def test_weak_write_raises(self):
        arr = MemArray(Topology.SixT, 2, 1, trials=200)
        arr.sample_mismatch(9, sigma=0.03)
        arr.store(0, [1])
        with pytest.raises(schemes.WeakWriteFailure):
            schemes.copy_6t(arr, 0, 1, 0.0, CFG)


class TestConfig:
    def test_invalid_trips(self):
        with pytest.raises(ValueError):
            CFG.replace(trip_nand=0.8)
        with pytest.raises(ValueError):
            CFG.replace(trip_div_lo=0.6)

    def test_trips_scale_with_vdd(self):
        cfg = schemes.calibrate(DeviceParams(vdd=1.1))
        assert cfg.trip_nor == pytest.approx(0.77)
        assert cfg.v_pre == pytest.approx(0.55)

    def test_offset_grows_with_asymmetry(self):
        assert CFG.replace(sa_asym=1.0).sa_offset == 0.0
        assert CFG.replace(sa_asym=3.0).sa_offset > CFG.sa_offset


def test_trace_files(tmp_path):
    path = tmp_path / "nand.csv"
    schemes.nand_8t(pair(Topology.EightT), 0, 1, None, CFG, trace=path)
    head = path.read_text().splitlines()
    assert head[0] == "time_s,node,volts"
    assert (tmp_path / "nand_margins.csv").exists()
