from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from xsram.isa import (
    CP, OP, AccessStats, Baseline, EnergyModel, Kind, LoweredPort, Memory, OutOfRange, R,
    UnsupportedInstruction, W, XSram, execute, format_program, lower_im, parse_program,
    row_parallel_pack, transaction_delta, write_stats_csv,
)
from xsram.memarray import Topology
from xsram.schemes import BoolFunc

ROW_WORDS = 8
ROWS = 8
WB = 4


def mem():
    return Memory(ROWS * ROW_WORDS * WB, 32, ROW_WORDS)


def addr(row, col):
    return (row * ROW_WORDS + col) * WB


@st.composite
def instructions(draw, funcs=(BoolFunc.AND, BoolFunc.OR, BoolFunc.XOR, BoolFunc.NAND,
                              BoolFunc.NOR)):
    kind = draw(st.sampled_from(["R", "W", "OP", "CP"]))
    col = draw(st.integers(0, ROW_WORDS - 1))
    if kind == "R":
        return R(addr(draw(st.integers(0, ROWS - 1)), col))
    if kind == "W":
        return W(addr(draw(st.integers(0, ROWS - 1)), col), draw(st.integers(0, 2**32 - 1)))
    n = draw(st.integers(1, ROW_WORDS - col))
    rows = draw(st.permutations(range(ROWS)))
    if kind == "OP":
        return OP(draw(st.sampled_from(funcs)), addr(rows[0], col), addr(rows[1], col),
                  addr(rows[2], col), n)
    return CP(addr(rows[0], col), addr(rows[1], col), n)


programs = st.lists(instructions(), max_size=25)


def test_write_read():
    words, stats = execute([W(0, 0xDEAD), R(0)], XSram(mem()))
    assert words[0] == 0xDEAD
    assert (stats.n_read, stats.n_write, stats.n_inmem) == (1, 1, 0)


def test_xor_program():
    xs = XSram(mem(), record=True)
    prog = [W(addr(0, 0), 0xF0F0), W(addr(1, 0), 0x0FF0), OP("XOR", addr(0, 0), addr(1, 0), addr(2, 0)),
            R(addr(2, 0))]
    words, stats = execute(prog, xs)
    assert words[addr(2, 0) // WB] == 0xFF00
    assert (stats.n_write, stats.n_read, stats.n_inmem) == (2, 1, 1)
    assert xs.program == prog


def test_empty_program():
    _, stats = execute([], XSram(mem()))
    assert stats.total == 0 and stats.energy_total == 0.0


def test_lowering_shapes():
    assert len(lower_im([OP("AND", 0, 32, 64)])) == 3
    assert len(lower_im([CP(0, 32)])) == 2
    assert [i.kind for i in lower_im([OP("AND", 0, 32, 64, n=2)])] == [Kind.READ, Kind.READ,
                                                                    Kind.WRITE] * 2


def test_baseline_rejects_inmem():
    with pytest.raises(UnsupportedInstruction):
        execute([OP("AND", 0, 32, 64)], Baseline(mem()))


def test_xsram_constraints():
    xs = XSram(mem())
    with pytest.raises(UnsupportedInstruction):
        xs.im_op("AND", addr(0, 0), addr(1, 1), addr(2, 0))
    with pytest.raises(UnsupportedInstruction):
        xs.im_op("AND", addr(0, 0), addr(0, 0), addr(2, 0))
    with pytest.raises(UnsupportedInstruction):
        xs.im_op("AND", addr(0, 6), addr(1, 6), addr(2, 6), n=4)
    with pytest.raises(UnsupportedInstruction):
        xs.im_op("IMP", addr(0, 0), addr(1, 0), addr(2, 0))
    assert XSram(mem(), Topology.EightTSourceLine).im_op("IMP", addr(0, 0), addr(1, 0),
                                                         addr(2, 0)) is None


def test_banks_must_match():
    xs = XSram(Memory(ROWS * ROW_WORDS * WB, 32, ROW_WORDS, bank_rows=4))
    with pytest.raises(UnsupportedInstruction):
        xs.im_op("AND", addr(0, 0), addr(1, 0), addr(5, 0))


def test_out_of_range():
    with pytest.raises(OutOfRange):
        execute([R(ROWS * ROW_WORDS * WB)], Baseline(mem()))
    with pytest.raises(OutOfRange):
        execute([R(2)], Baseline(mem()))


@given(programs)
def test_backend_equivalence(prog):
    init = np.random.default_rng(len(prog)).integers(0, 2**32, ROWS * ROW_WORDS, dtype=np.uint32)
    m1, m2 = mem(), mem()
    m1.words[:] = init
    m2.words[:] = init
    w1, s1 = execute(prog, XSram(m1))
    w2, s2 = execute(lower_im(prog), Baseline(m2))
    assert np.array_equal(w1, w2)
    assert s2.total - s1.total == transaction_delta(prog)


@given(st.lists(instructions().filter(lambda i: i.n == 1), max_size=25))
def test_counting_identity_scalar(prog):
    n_op = sum(i.kind is Kind.IM_OP for i in prog)
    n_cp = sum(i.kind is Kind.IM_COPY for i in prog)
    _, s1 = execute(prog, XSram(mem()))
    _, s2 = execute(lower_im(prog), Baseline(mem()))
    assert s2.total - s1.total == 2 * n_op + n_cp


@given(programs)
def test_lowered_port_matches_lowering(prog):
    b1, b2 = Baseline(mem()), Baseline(mem())
    w1, s1 = execute(prog, LoweredPort(b1))
    w2, s2 = execute(lower_im(prog), b2)
    assert np.array_equal(w1, w2)
    assert (s1.n_read, s1.n_write) == (s2.n_read, s2.n_write)


def _byte_wide(ins):
    # same program on byte-wide words: addresses shrink by the word size
    word = ins.word & 0xFF if isinstance(ins.word, int) else ins.word
    return replace(ins, addr=ins.addr // WB, b=ins.b // WB, dst=ins.dst // WB, word=word)


@given(st.lists(instructions(), min_size=1, max_size=6))
def test_electrical_backend_agrees(prog):
    prog = [_byte_wide(i) for i in prog]
    m1, m2 = Memory(ROWS * ROW_WORDS, 8, ROW_WORDS), Memory(ROWS * ROW_WORDS, 8, ROW_WORDS)
    w1, _ = execute(prog, XSram(m1, electrical=True))
    w2, _ = execute(prog, XSram(m2))
    assert np.array_equal(w1, w2)


@given(programs)
def test_text_round_trip(prog):
    assert parse_program(format_program(prog)) == prog


def test_parse_errors():
    with pytest.raises(ValueError):
        parse_program("X 0")
    with pytest.raises(ValueError):
        parse_program("OP FOO 0 4 8")


def test_pack_merges_row_segment():
    prog = [OP("XOR", addr(0, k), addr(1, k), addr(2, k)) for k in range(4)]
    packed = row_parallel_pack(prog, row_words=4)
    assert packed == [OP("XOR", addr(0, 0), addr(1, 0), addr(2, 0), n=4)]
    _, s = execute(packed, XSram(mem()))
    assert s.n_inmem == 1


def test_pack_one_word_rows_no_gain():
    m = Memory(64, 32, 1)
    prog = [OP("XOR", 4 * k, 4 * (k + 4), 4 * (k + 8)) for k in range(4)]
    assert row_parallel_pack(prog, row_words=1) == prog
    execute(prog, XSram(m))


@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.integers(0, 5),
                          st.floats(0, 1e-9), st.floats(0, 1e-6)), max_size=8), st.randoms())
def test_stats_additive_any_order(parts, rnd):
    items = [AccessStats(*p) for p in parts]
    total = sum(items, AccessStats())
    rnd.shuffle(items)
    other = sum(items, AccessStats())
    assert (total.n_read, total.n_write, total.n_inmem) == (other.n_read, other.n_write, other.n_inmem)
    assert total.energy_total == pytest.approx(other.energy_total, rel=1e-12, abs=1e-30)


def test_energy_of_split_runs_adds():
    prog = [W(0, 5), OP("AND", addr(0, 0), addr(1, 0), addr(2, 0)), R(addr(2, 0))]
    whole = execute(prog, XSram(mem()))[1]
    parts = sum((execute([i], XSram(mem()))[1] for i in prog), AccessStats())
    assert whole.energy_total == pytest.approx(parts.energy_total)
    assert whole.latency_total == pytest.approx(parts.latency_total)


def test_energy_model_flags():
    em = EnergyModel.default()
    assert not em.is_calibrated(Topology.EightTPlus)
    assert em.cost(Topology.SixT, "inmem", 32) == pytest.approx((32 * 29.3e-15, 3e-9))
    with pytest.raises(ValueError):
        EnergyModel({(Topology.SixT, "read"): (0.0, 1.0)})


def test_stats_csv(tmp_path):
    write_stats_csv({"a": AccessStats(1, 2, 3, 1e-12, 1e-9)}, tmp_path / "s.csv")
    assert (tmp_path / "s.csv").read_text().splitlines()[1].startswith("a,1,2,3,6,")
