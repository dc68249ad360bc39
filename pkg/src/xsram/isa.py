"""Transaction-level memory with in-memory compute instructions.

Every instruction is one bus transaction. ``IM_OP``/``IM_COPY`` may cover
``n`` consecutive words of a row (a row-parallel vector operation) and
still count once. The baseline memory has no in-memory instructions;
``lower_im`` rewrites them into processor reads and writes.

Backends also expose a lane-batched port (``read``/``write``/``im_op``
taking address arrays) so a program template can be driven across many
independent memory regions at once with identical accounting.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .memarray import MemArray, Topology
from .schemes import SUPPORTED, BoolFunc, rcs, rcs_copy


class OutOfRange(IndexError):
    pass


class UnsupportedInstruction(ValueError):
    pass


class Kind(str, Enum):
    READ = "R"
    WRITE = "W"
    IM_OP = "OP"
    IM_COPY = "CP"


@dataclass(frozen=True)
class Instruction:
    """One memory transaction.

    ``addr`` is the READ/WRITE target, the first IM_OP operand or the
    IM_COPY source. A WRITE ``word`` may be an integer or ``"=FUNC"``,
    meaning FUNC of the last two values read (``"=COPY"``: the last one).
    """

    kind: Kind
    addr: int = 0
    word: int | str | None = None
    func: BoolFunc | None = None
    b: int = 0
    dst: int = 0
    n: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.func is not None:
            object.__setattr__(self, "func", BoolFunc(self.func))
        if self.n < 1:
            raise ValueError("vector length must be >= 1")
        if self.kind is Kind.IM_OP and (self.func is None or self.func is BoolFunc.COPY):
            raise ValueError("IM_OP needs a two-operand function")
        if self.kind is Kind.WRITE and self.word is None:
            raise ValueError("WRITE needs a word")

    def to_text(self) -> str:
        vec = f" {self.n}" if self.n > 1 else ""
        if self.kind is Kind.READ:
            return f"R {self.addr:#x}"
        if self.kind is Kind.WRITE:
            word = self.word if isinstance(self.word, str) else f"{self.word:x}"
            return f"W {self.addr:#x} {word}"
        if self.kind is Kind.IM_OP:
            return f"OP {self.func.value} {self.addr:#x} {self.b:#x} {self.dst:#x}{vec}"
        return f"CP {self.addr:#x} {self.dst:#x}{vec}"


def R(addr):
    return Instruction(Kind.READ, addr)


def W(addr, word):
    return Instruction(Kind.WRITE, addr, word=word)


def OP(func, a, b, dst, n=1):
    return Instruction(Kind.IM_OP, a, func=func, b=b, dst=dst, n=n)


def CP(src, dst, n=1):
    return Instruction(Kind.IM_COPY, src, dst=dst, n=n)


def parse_program(text: str) -> list[Instruction]:
    prog = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        op = tok[0].upper()
        try:
            num = lambda s: int(s, 0)
            if op == "R" and len(tok) == 2:
                prog.append(R(num(tok[1])))
            elif op == "W" and len(tok) == 3:
                word = tok[2].upper() if tok[2].startswith("=") else int(tok[2], 16)
                prog.append(W(num(tok[1]), word))
            elif op == "OP" and len(tok) in (5, 6):
                n = int(tok[5]) if len(tok) == 6 else 1
                prog.append(OP(tok[1].upper(), num(tok[2]), num(tok[3]), num(tok[4]), n))
            elif op == "CP" and len(tok) in (3, 4):
                n = int(tok[3]) if len(tok) == 4 else 1
                prog.append(CP(num(tok[1]), num(tok[2]), n))
            else:
                raise ValueError(f"cannot parse {line!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return prog


def format_program(prog) -> str:
    return "".join(ins.to_text() + "\n" for ins in prog)


# accounting ------------------------------------------------------------------

OP_KINDS = ("read", "write", "inmem")


@dataclass
class EnergyModel:
    """Per-bit energy (J) and per-transaction latency (s) by (topology, kind)."""

    table: dict = field(default_factory=dict)
    calibrated: set = field(default_factory=set)

    E_6T = 29.3e-15
    T_6T = 3e-9

    @classmethod
    def default(cls) -> "EnergyModel":
        table = {(t, k): (cls.E_6T, cls.T_6T) for t in Topology for k in OP_KINDS}
        return cls(table, {(Topology.SixT, "inmem")})

    def __post_init__(self):
        for key, (e, t) in self.table.items():
            if e <= 0 or t <= 0:
                raise ValueError(f"energy model entry {key} must be positive")

    def cost(self, topology: Topology, kind: str, bits: int, count: int = 1):
        e, t = self.table[(Topology(topology), kind)]
        return e * bits * count, t * count

    def is_calibrated(self, topology: Topology) -> bool:
        return all((Topology(topology), k) in self.calibrated for k in OP_KINDS)


@dataclass
class AccessStats:
    n_read: int = 0
    n_write: int = 0
    n_inmem: int = 0
    energy_total: float = 0.0
    latency_total: float = 0.0

    @property
    def total(self) -> int:
        return self.n_read + self.n_write + self.n_inmem

    def __add__(self, other: "AccessStats") -> "AccessStats":
        return AccessStats(self.n_read + other.n_read, self.n_write + other.n_write,
                           self.n_inmem + other.n_inmem,
                           self.energy_total + other.energy_total,
                           self.latency_total + other.latency_total)

    def as_row(self) -> dict:
        return {"reads": self.n_read, "writes": self.n_write, "inmem": self.n_inmem,
                "total": self.total, "energy_j": self.energy_total,
                "latency_s": self.latency_total}


def write_stats_csv(rows: dict[str, AccessStats], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["run", "reads", "writes", "inmem", "total", "energy_j", "latency_s"])
        for name, s in rows.items():
            w.writerow([name, s.n_read, s.n_write, s.n_inmem, s.total,
                        repr(s.energy_total), repr(s.latency_total)])


# memory ----------------------------------------------------------------------

_DTYPES = {8: np.uint8, 16: np.uint16, 32: np.uint32, 64: np.uint64}


class Memory:
    """Flat word-addressed store viewed as rows of ``row_words`` words."""

    def __init__(self, n_bytes: int, word_bits: int = 32, row_words: int = 8,
                 bank_rows: int | None = None):
        if word_bits not in _DTYPES:
            raise ValueError(f"word width {word_bits} not supported")
        self.word_bits = word_bits
        self.word_bytes = word_bits // 8
        self.row_words = row_words
        self.row_bytes = row_words * self.word_bytes
        n_rows = -(-n_bytes // self.row_bytes)
        self.bank_rows = bank_rows or max(n_rows, 1)
        self.words = np.zeros(n_rows * row_words, dtype=_DTYPES[word_bits])

    @property
    def n_bytes(self) -> int:
        return self.words.size * self.word_bytes

    @property
    def mask(self) -> int:
        return (1 << self.word_bits) - 1

    def index(self, addr, n: int = 1) -> np.ndarray:
        a = np.asarray(addr, dtype=np.int64)
        if np.any(a % self.word_bytes):
            raise OutOfRange(f"address not aligned to {self.word_bytes} bytes")
        if np.any(a < 0) or np.any(a + n * self.word_bytes > self.n_bytes):
            raise OutOfRange(f"address outside 0..{self.n_bytes:#x}")
        return a // self.word_bytes

    def row_col(self, addr):
        i = self.index(addr)
        return i // self.row_words, i % self.row_words

    def load_bytes(self, addr: int, data: bytes) -> None:
        """Place big-endian words starting at ``addr`` (no transactions)."""
        w = np.frombuffer(data, dtype=np.dtype(_DTYPES[self.word_bits]).newbyteorder(">"))
        i = int(self.index(addr, w.size))
        self.words[i:i + w.size] = w

    def dump_bytes(self, addr: int, n_bytes: int) -> bytes:
        n = n_bytes // self.word_bytes
        i = int(self.index(addr, n))
        return self.words[i:i + n].astype(np.dtype(self.words.dtype).newbyteorder(">")).tobytes()


def _alu(func: BoolFunc, a, b, mask):
    a = np.asarray(a)
    b = np.asarray(b)
    if func is BoolFunc.AND:
        return a & b
    if func is BoolFunc.OR:
        return a | b
    if func is BoolFunc.XOR:
        return a ^ b
    if func is BoolFunc.NAND:
        return ~(a & b) & mask
    if func is BoolFunc.NOR:
        return ~(a | b) & mask
    if func is BoolFunc.IMP:
        return (~a | b) & mask
    raise UnsupportedInstruction(f"no ALU form for {func.value}")


# backends --------------------------------------------------------------------

class Backend:
    """Memory plus accounting. Port methods accept scalar or array addresses."""

    name = "backend"

    def __init__(self, mem: Memory, topology: Topology = Topology.EightTPlus,
                 energy: EnergyModel | None = None, record: bool = False):
        self.mem = mem
        self.topology = Topology(topology)
        self.energy = energy or EnergyModel.default()
        self.stats = AccessStats()
        self.program: list[Instruction] | None = [] if record else None

    def _charge(self, kind: str, count: int, bits: int) -> None:
        if count == 0:
            return
        e, t = self.energy.cost(self.topology, kind, bits, count)
        s = self.stats
        if kind == "read":
            s.n_read += count
        elif kind == "write":
            s.n_write += count
        else:
            s.n_inmem += count
        s.energy_total += e
        s.latency_total += t

    def read(self, addr) -> np.ndarray:
        idx = self.mem.index(addr)
        self._charge("read", idx.size, self.mem.word_bits)
        if self.program is not None:
            self.program.extend(R(int(a)) for a in np.ravel(addr))
        return self.mem.words[idx]

    def write(self, addr, words) -> None:
        idx = self.mem.index(addr)
        words = np.broadcast_to(np.asarray(words, dtype=self.mem.words.dtype), idx.shape)
        self._charge("write", idx.size, self.mem.word_bits)
        if self.program is not None:
            self.program.extend(W(int(a), int(w)) for a, w in zip(np.ravel(addr), np.ravel(words)))
        self.mem.words[idx] = words

    def im_op(self, func, a, b, dst, n: int = 1) -> None:
        raise UnsupportedInstruction(f"{self.name} memory has no in-memory instructions")

    def im_copy(self, src, dst, n: int = 1) -> None:
        raise UnsupportedInstruction(f"{self.name} memory has no in-memory instructions")


class Baseline(Backend):
    name = "baseline"


class XSram(Backend):
    """Memory whose rows can compute in place.

    Functional by default; with ``electrical=True`` each in-memory
    instruction is evaluated by the read-compute-store scheme on a
    three-row array holding the operand and destination rows.
    """

    name = "xsram"

    def __init__(self, mem: Memory, topology: Topology = Topology.EightTPlus,
                 energy: EnergyModel | None = None, record: bool = False,
                 electrical: bool = False, sense_cfg=None):
        super().__init__(mem, topology, energy, record)
        self.electrical = electrical
        self.sense_cfg = sense_cfg

    def _vector_index(self, addrs, n):
        mem = self.mem
        rows, cols = [], None
        for a in addrs:
            r, c = mem.row_col(a)
            if cols is not None and np.any(c != cols):
                raise UnsupportedInstruction("operands must share a column offset")
            cols = c
            rows.append(r)
        if np.any(cols + n > mem.row_words):
            raise UnsupportedInstruction("vector runs past the end of the row")
        banks = [r // mem.bank_rows for r in rows]
        if any(np.any(bk != banks[0]) for bk in banks[1:]):
            raise UnsupportedInstruction("operand rows must sit in the same bank")
        for i in range(len(rows)):
            for j in range(i + 1, len(rows)):
                if np.any(rows[i] == rows[j]):
                    raise UnsupportedInstruction("operand and destination rows must differ")
        shape = np.broadcast_shapes(*(np.shape(r) for r in rows))
        base = [np.broadcast_to(r * mem.row_words + cols, shape)[..., None] + np.arange(n)
                for r in rows]
        return base, int(np.prod(shape))

    def _check_func(self, func):
        if func not in SUPPORTED[self.topology]:
            raise UnsupportedInstruction(f"{self.topology.value} cannot compute {func.value}")

    def im_op(self, func, a, b, dst, n: int = 1) -> None:
        func = BoolFunc(func)
        self._check_func(func)
        (ia, ib, idst), lanes = self._vector_index((a, b, dst), n)
        self._charge("inmem", lanes, self.mem.word_bits * n)
        if self.program is not None:
            for x, y, z in zip(*(np.ravel(np.broadcast_to(v, np.shape(ia)[:-1])) for v in (a, b, dst))):
                self.program.append(OP(func, int(x), int(y), int(z), n))
        words = self.mem.words
        if self.electrical:
            words[idst] = self._electrical(func, words[ia], words[ib])
        else:
            words[idst] = _alu(func, words[ia], words[ib], self.mem.mask)

    def im_copy(self, src, dst, n: int = 1) -> None:
        self._check_func(BoolFunc.COPY)
        (isrc, idst), lanes = self._vector_index((src, dst), n)
        self._charge("inmem", lanes, self.mem.word_bits * n)
        if self.program is not None:
            for x, z in zip(*(np.ravel(np.broadcast_to(v, np.shape(isrc)[:-1])) for v in (src, dst))):
                self.program.append(CP(int(x), int(z), n))
        words = self.mem.words
        if self.electrical:
            words[idst] = self._electrical(BoolFunc.COPY, words[isrc], None)
        else:
            words[idst] = words[isrc]

    def _electrical(self, func, wa, wb):
        bits = self.mem.word_bits
        shape = np.shape(wa)
        flat_a = np.ravel(wa)
        cols = flat_a.size * bits

        def unpack(w):
            w = np.asarray(w, dtype=np.uint64)
            return ((w[:, None] >> np.arange(bits - 1, -1, -1, dtype=np.uint64)) & 1).ravel()

        arr = MemArray(self.topology, 3, cols)
        arr.store(0, unpack(flat_a))
        if func is BoolFunc.COPY:
            out = rcs_copy(arr, 0, 2, self.sense_cfg)
        else:
            arr.store(1, unpack(np.ravel(wb)))
            out = rcs(arr, 0, 1, 2, func, self.sense_cfg)
        out = out.reshape(-1, bits).astype(np.uint64)
        vals = (out << np.arange(bits - 1, -1, -1, dtype=np.uint64)).sum(axis=1)
        return vals.astype(self.mem.words.dtype).reshape(shape)


class LoweredPort:
    """Presents the in-memory port on a baseline memory by lowering each call."""

    def __init__(self, backend: Backend):
        self.backend = backend

    def __getattr__(self, name):
        return getattr(self.backend, name)

    def im_op(self, func, a, b, dst, n: int = 1) -> None:
        func = BoolFunc(func)
        wb = self.backend.mem.word_bytes
        a, b, dst = np.broadcast_arrays(a, b, dst)
        for k in range(n):
            va = self.backend.read(np.asarray(a) + k * wb)
            vb = self.backend.read(np.asarray(b) + k * wb)
            self.backend.write(np.asarray(dst) + k * wb, _alu(func, va, vb, self.backend.mem.mask))

    def im_copy(self, src, dst, n: int = 1) -> None:
        wb = self.backend.mem.word_bytes
        src, dst = np.broadcast_arrays(src, dst)
        for k in range(n):
            self.backend.write(np.asarray(dst) + k * wb, self.backend.read(np.asarray(src) + k * wb))


# programs --------------------------------------------------------------------

def execute(program, backend: Backend):
    """Run ``program`` sequentially; returns (memory words copy, stats).

    READ results go to a two-entry buffer that ``W addr =FUNC`` consumes.
    """
    last: list[int] = []
    for ins in program:
        if ins.kind is Kind.READ:
            last = (last + [int(backend.read(ins.addr))])[-2:]
        elif ins.kind is Kind.WRITE:
            word = ins.word
            if isinstance(word, str):
                func = BoolFunc(word.lstrip("="))
                if func is BoolFunc.COPY:
                    if not last:
                        raise UnsupportedInstruction("=COPY with nothing read")
                    word = last[-1]
                else:
                    if len(last) < 2:
                        raise UnsupportedInstruction(f"={func.value} needs two prior reads")
                    word = int(_alu(func, last[0], last[1], backend.mem.mask))
            elif not 0 <= word <= backend.mem.mask:
                raise ValueError(f"word {word:#x} wider than {backend.mem.word_bits} bits")
            backend.write(ins.addr, word)
        elif ins.kind is Kind.IM_OP:
            backend.im_op(ins.func, ins.addr, ins.b, ins.dst, ins.n)
        else:
            backend.im_copy(ins.addr, ins.dst, ins.n)
    return backend.mem.words.copy(), backend.stats


def lower_im(program, word_bytes: int = 4) -> list[Instruction]:
    """Rewrite IM_OP as READ, READ, WRITE and IM_COPY as READ, WRITE, per word."""
    out = []
    for ins in program:
        if ins.kind is Kind.IM_OP:
            for k in range(ins.n):
                off = k * word_bytes
                out += [R(ins.addr + off), R(ins.b + off), W(ins.dst + off, "=" + ins.func.value)]
        elif ins.kind is Kind.IM_COPY:
            for k in range(ins.n):
                off = k * word_bytes
                out += [R(ins.addr + off), W(ins.dst + off, "=COPY")]
        else:
            out.append(ins)
    return out


def row_parallel_pack(program, row_words: int = 8, word_bytes: int = 4) -> list[Instruction]:
    """Merge runs of single-word IM instructions into row-wide vector ones.

    Consecutive instructions merge when they apply the same operation to
    the next word of the same rows, so one IM_OP covers a row segment.
    Anything else is left as it was.
    """
    row_bytes = row_words * word_bytes
    out: list[Instruction] = []
    for ins in program:
        prev = out[-1] if out else None
        if (prev is not None and ins.kind is prev.kind
                and ins.kind in (Kind.IM_OP, Kind.IM_COPY)
                and ins.func == prev.func and ins.n == 1):
            step = prev.n * word_bytes
            fields = ("addr", "dst") if ins.kind is Kind.IM_COPY else ("addr", "b", "dst")
            follows = all(getattr(ins, f) == getattr(prev, f) + step for f in fields)
            same_row = all(getattr(ins, f) // row_bytes == getattr(prev, f) // row_bytes
                           for f in fields)
            if follows and same_row:
                out[-1] = Instruction(prev.kind, prev.addr, func=prev.func, b=prev.b,
                                      dst=prev.dst, n=prev.n + 1)
                continue
        out.append(ins)
    return out


def transaction_delta(program) -> int:
    """Transactions saved versus ``lower_im(program)``."""
    return sum(3 * i.n - 1 if i.kind is Kind.IM_OP else 2 * i.n - 1
               for i in program if i.kind in (Kind.IM_OP, Kind.IM_COPY))
