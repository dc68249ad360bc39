"""AES mapped onto the transaction-level memory, baseline vs. in-memory.

The processor model keeps S-box and GF(2^8) tables in its own ROM; data
memory holds the cipher state, round keys and the operands of the
MixColumns and AddRoundKey XORs. One program template drives every
independent row ("lane") of blocks at once through the batched port, so
a megabyte runs as a handful of vector steps with exact per-lane counts.

Row layout per lane: IN, S, T0..T5, OUT, PT. Shared rows: the round keys,
the decryption round keys and a key-schedule scratch row.

The XSram run issues in-memory XORs; the baseline runs the identical
template with every in-memory instruction lowered to reads and writes.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import aes
from .aes import BadKeyLength
from .config import ConfigError, load_toml
from .isa import AccessStats, Baseline, LoweredPort, Memory, XSram
from .memarray import Topology
from .schemes import BoolFunc

XOR = BoolFunc.XOR
ROW_WORDS = 8
WORD_BYTES = 4
ROW_BYTES = ROW_WORDS * WORD_BYTES
LANE_ROWS = ("IN", "S", "T0", "T1", "T2", "T3", "T4", "T5", "OUT", "PT")


class BadAlignment(ValueError):
    pass


class BackendMismatch(AssertionError):
    pass


class Mode(str, Enum):
    ECB = "ECB"
    CBC = "CBC"
    CTR = "CTR"


class Direction(str, Enum):
    ENC = "enc"
    DEC = "dec"


@dataclass(frozen=True)
class AesJob:
    key: bytes
    data: bytes
    mode: Mode = Mode.ECB
    direction: Direction = Direction.ENC
    iv: bytes | None = None

    def __post_init__(self):
        mode = getattr(self.mode, "value", self.mode)
        direction = getattr(self.direction, "value", self.direction)
        object.__setattr__(self, "mode", Mode(mode.upper()))
        object.__setattr__(self, "direction", Direction(direction.lower()))
        if len(self.key) not in (16, 32):
            raise BadKeyLength(f"key must be 128 or 256 bits, got {8 * len(self.key)}")
        if len(self.data) % 16:
            raise BadAlignment("data must be a whole number of 16-byte blocks")
        if self.mode is not Mode.ECB and (self.iv is None or len(self.iv) != 16):
            raise BadAlignment(f"{self.mode.value} needs a 16-byte IV")

    @property
    def keylen(self) -> int:
        return 8 * len(self.key)

    @property
    def label(self) -> str:
        return f"{self.mode.value}-{self.direction.value}"


# processor-side table work ---------------------------------------------------

SBOX = np.array(aes.SBOX, dtype=np.uint8)
INV_SBOX = np.array(aes.INV_SBOX, dtype=np.uint8)
XT = np.array([aes.gmul(x, 2) for x in range(256)], dtype=np.uint8)
X4 = np.array([aes.gmul(x, 4) for x in range(256)], dtype=np.uint8)
_C, _R = np.meshgrid(np.arange(4), np.arange(4), indexing="ij")
SHIFT = (_C + _R) % 4
INV_SHIFT = (_C - _R) % 4


def _to_bytes(words):
    """(..., 4k) words -> (..., k, 4 cols, 4 rows) bytes."""
    w = np.asarray(words, dtype=np.uint32)
    b = (w[..., None] >> np.array([24, 16, 8, 0], dtype=np.uint32)) & 0xFF
    return b.astype(np.uint8).reshape(w.shape[:-1] + (-1, 4, 4))


def _to_words(b):
    b = b.astype(np.uint32)
    w = (b[..., 0] << 24) | (b[..., 1] << 16) | (b[..., 2] << 8) | b[..., 3]
    return w.reshape(w.shape[:-2] + (-1,))


def _rot(b, k):
    return b[..., (np.arange(4) + k) % 4]


def _sub_shift(b, inverse=False):
    if inverse:
        return INV_SBOX[b[..., INV_SHIFT, _R]]
    return SBOX[b[..., SHIFT, _R]]


def _mix_operands(b):
    """Five rows whose XOR is MixColumns of ``b``."""
    r1 = _rot(b, 1)
    return [XT[b], XT[r1], r1, _rot(b, 2), _rot(b, 3)]


def _inv_pre(b):
    # InvMixColumns(a) = MixColumns(a ^ 4(a ^ rot2 a))
    return b ^ X4[b ^ _rot(b, 2)]


# memory layout ---------------------------------------------------------------

@dataclass
class Layout:
    nr: int
    lanes: int
    width: int
    shared: dict = field(default_factory=dict)

    def __post_init__(self):
        names = [f"RK{r}" for r in range(self.nr + 1)] + \
                [f"DK{r}" for r in range(self.nr + 1)] + ["TMP", "IV"]
        self.shared = {n: i for i, n in enumerate(names)}
        self.lane0 = len(names)

    @property
    def n_rows(self) -> int:
        return self.lane0 + self.lanes * len(LANE_ROWS)

    def s(self, name: str) -> int:
        return self.shared[name] * ROW_BYTES

    def lane(self, name: str, lanes=None) -> np.ndarray:
        idx = np.arange(self.lanes) if lanes is None else np.asarray(lanes)
        rows = self.lane0 + idx * len(LANE_ROWS) + LANE_ROWS.index(name)
        return rows * ROW_BYTES

    def words(self, base) -> np.ndarray:
        return np.asarray(base)[..., None] + WORD_BYTES * np.arange(self.width)


class _Runner:
    """Drives one job's program template through a port."""

    def __init__(self, port, layout: Layout, key: bytes):
        self.port = port
        self.lay = layout
        self.key = key
        self.n = layout.width

    def read_row(self, base):
        return self.port.read(self.lay.words(base))

    def write_row(self, base, words):
        self.port.write(self.lay.words(base), words)

    def xor(self, a, b, dst):
        self.port.im_op(XOR, a, b, dst, self.n)

    # key schedule: XORs in memory, RotWord/SubWord/Rcon on the processor
    def expand(self, decrypt: bool) -> None:
        nk = len(self.key) // 4
        nr = self.lay.nr
        n = self.n
        loc = lambda i, half: self.lay.s(f"RK{i // 4}") + WORD_BYTES * (i % 4 + 4 * half)
        halves = range(n // 4)
        for i in range(nk):
            word = int.from_bytes(self.key[4 * i:4 * i + 4], "big")
            for h in halves:
                self.port.write(loc(i, h), word)
        for i in range(nk, 4 * (nr + 1)):
            t = int(self.port.read(loc(i - 1, 0)))
            tb = list(t.to_bytes(4, "big"))
            if i % nk == 0:
                tb = [aes.SBOX[x] for x in tb[1:] + tb[:1]]
                tb[0] ^= aes.RCON[i // nk - 1]
            elif nk > 6 and i % nk == 4:
                tb = [aes.SBOX[x] for x in tb]
            t = int.from_bytes(bytes(tb), "big")
            for h in halves:
                tmp = self.lay.s("TMP") + WORD_BYTES * (i % 4 + 4 * h)
                self.port.write(tmp, t)
                self.port.im_op(XOR, tmp, loc(i - nk, h), loc(i, h), 1)
        if decrypt:
            for r in range(nr + 1):
                words = self.read_row(self.lay.s(f"RK{nr - r}"))
                if 0 < r < nr:
                    b = _to_bytes(words)
                    words = _mix_xor(_mix_operands(_inv_pre(b)))
                self.write_row(self.lay.s(f"DK{r}"), words)

    def cipher(self, lanes, src, dst, decrypt: bool) -> None:
        """Encrypt (or decrypt) rows ``src`` of ``lanes`` into rows ``dst``."""
        lay = self.lay
        row = lambda name: lay.lane(name, lanes)
        key = (lambda r: lay.s(f"DK{r}")) if decrypt else (lambda r: lay.s(f"RK{r}"))
        nr = lay.nr
        self.xor(src, key(0), row("S"))
        for r in range(1, nr + 1):
            b = _sub_shift(_to_bytes(self.read_row(row("S"))), decrypt)
            if r == nr:
                self.write_row(row("T0"), _to_words(b))
                self.xor(row("T0"), key(r), dst)
                break
            if decrypt:
                b = _inv_pre(b)
            for k, operand in enumerate(_mix_operands(b)):
                self.write_row(row(f"T{k}"), _to_words(operand))
            self.xor(row("T0"), row("T1"), row("T5"))
            self.xor(row("T5"), row("T2"), row("T0"))
            self.xor(row("T0"), row("T3"), row("T1"))
            self.xor(row("T1"), row("T4"), row("T2"))
            self.xor(row("T2"), key(r), row("S"))


def _mix_xor(operands):
    out = operands[0]
    for o in operands[1:]:
        out = out ^ o
    return _to_words(out)


@dataclass
class AesRun:
    output: bytes
    stats: AccessStats
    setup: AccessStats
    program: list | None = None
    initial: np.ndarray | None = None
    final: np.ndarray | None = None


def _plan(job: AesJob):
    blocks = len(job.data) // 16
    sequential = job.mode is Mode.CBC and job.direction is Direction.ENC
    per_row = 1 if job.mode is Mode.CBC else 2
    lanes = -(-blocks // per_row) if blocks else 0
    return blocks, per_row, lanes, sequential


def _make_port(backend, mem, record, electrical, topology):
    if backend == "xsram":
        b = XSram(mem, topology, record=record, electrical=electrical)
        return b, b
    if backend == "baseline":
        b = Baseline(mem, topology, record=record)
        return b, LoweredPort(b)
    raise ValueError(f"unknown backend {backend!r}")


def _snapshot(stats: AccessStats) -> AccessStats:
    return AccessStats() + stats


def aes_run(job: AesJob, backend: str = "xsram", record: bool = False,
            electrical: bool = False, topology: Topology = Topology.EightTPlus) -> AesRun:
    """Run ``job`` on a fresh memory; returns output bytes and transaction counts.

    ``setup`` holds the key-schedule (and IV) share of ``stats``, which
    does not depend on the data length.
    """
    nr = aes.rounds_for(job.key)
    blocks, per_row, lanes, sequential = _plan(job)
    lay = Layout(nr, lanes, 4 * per_row)
    mem = Memory(lay.n_rows * ROW_BYTES, 32, ROW_WORDS)
    dev, port = _make_port(backend, mem, record, electrical, topology)
    decrypt = job.direction is Direction.DEC and job.mode is not Mode.CTR
    span = 16 * per_row

    # the input buffer is resident before the run starts
    for l in range(lanes):
        chunk = job.data[l * span:(l + 1) * span]
        target = "PT" if job.mode is Mode.CTR else "IN"
        mem.load_bytes(int(lay.lane(target, [l])[0]), chunk.ljust(span, b"\0"))
    initial = mem.words.copy() if record else None

    run = _Runner(port, lay, job.key)
    run.expand(decrypt)
    if job.mode is Mode.CBC:
        iv = np.frombuffer(job.iv, dtype=">u4").astype(np.uint32)
        run.write_row(lay.s("IV"), iv)
    setup = _snapshot(dev.stats)

    all_lanes = np.arange(lanes)
    if job.mode is Mode.ECB and lanes:
        run.cipher(all_lanes, lay.lane("IN"), lay.lane("OUT"), decrypt)
    elif job.mode is Mode.CTR and lanes:
        ctr = [aes.ctr_block(job.iv, i) for i in range(lanes * per_row)]
        words = np.frombuffer(b"".join(ctr), dtype=">u4").astype(np.uint32)
        run.write_row(lay.lane("IN"), words.reshape(lanes, -1))
        run.cipher(all_lanes, lay.lane("IN"), lay.lane("T1"), False)
        run.xor(lay.lane("T1"), lay.lane("PT"), lay.lane("OUT"))
    elif job.mode is Mode.CBC and lanes:
        prev = np.concatenate([[lay.s("IV")], lay.lane("IN")[:-1]])
        if sequential:
            for l in range(lanes):
                src = lay.lane("OUT", [l - 1]) if l else np.array([lay.s("IV")])
                run.xor(lay.lane("IN", [l]), src, lay.lane("T5", [l]))
                run.cipher([l], lay.lane("T5", [l]), lay.lane("OUT", [l]), False)
        else:
            run.cipher(all_lanes, lay.lane("IN"), lay.lane("T1"), True)
            run.xor(lay.lane("T1"), prev, lay.lane("OUT"))

    out = b"".join(mem.dump_bytes(int(lay.lane("OUT", [l])[0]), span) for l in range(lanes))
    stats = _snapshot(dev.stats)
    return AesRun(out[:len(job.data)], stats, setup, dev.program, initial,
                  mem.words.copy() if record else None)


def reference(job: AesJob) -> bytes:
    dec = job.direction is Direction.DEC
    if job.mode is Mode.ECB:
        return aes.ecb(job.key, job.data, dec)
    if job.mode is Mode.CBC:
        return aes.cbc(job.key, job.iv, job.data, dec)
    return aes.ctr(job.key, job.iv, job.data)


# comparison ------------------------------------------------------------------

REFERENCE_ECB_TARGET = {128: 0.747, 256: 0.746}


@dataclass
class BenchReport:
    job: AesJob
    baseline: AccessStats
    xsram: AccessStats
    digest: str

    @property
    def reduction(self) -> float:
        if self.baseline.total == 0:
            return 0.0
        return 1.0 - self.xsram.total / self.baseline.total

    @property
    def normalized_total(self) -> float:
        return self.xsram.total / self.baseline.total if self.baseline.total else 1.0

    def split(self) -> dict:
        """In-memory backend reads/writes/in-memory ops as shares of the baseline total."""
        base = self.baseline.total or 1
        s = self.xsram
        return {"reads": s.n_read / base, "writes": s.n_write / base, "inmem": s.n_inmem / base}


def bench_compare(jobs, check_reference: bool = True) -> list[BenchReport]:
    reports = []
    for job in jobs:
        xs = aes_run(job, "xsram")
        bl = aes_run(job, "baseline")
        if xs.output != bl.output:
            raise BackendMismatch(f"{job.label}/{job.keylen}: backends disagree")
        if check_reference and xs.output != reference(job):
            raise BackendMismatch(f"{job.label}/{job.keylen}: output differs from reference AES")
        reports.append(BenchReport(job, bl.stats, xs.stats,
                                   hashlib.sha256(xs.output).hexdigest()))
    return reports


BENCH_COLUMNS = ["mode", "keylen", "reads", "writes", "inmem", "normalized_total", "reduction"]


def write_report(reports, path) -> None:
    """One row per job: in-memory backend counts, total normalized to the baseline, reduction."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BENCH_COLUMNS)
        for r in reports:
            s = r.xsram
            w.writerow([r.job.label, r.job.keylen, s.n_read, s.n_write, s.n_inmem,
                        f"{r.normalized_total:.6f}", f"{r.reduction:.6f}"])


def write_detail(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mode", "keylen", "backend", "reads", "writes", "inmem", "total",
                    "energy_j", "latency_s", "sha256"])
        for r in reports:
            for name, s in (("baseline", r.baseline), ("xsram", r.xsram)):
                w.writerow([r.job.label, r.job.keylen, name, s.n_read, s.n_write, s.n_inmem,
                            s.total, repr(s.energy_total), repr(s.latency_total), r.digest])


def _hex(value, what):
    try:
        return bytes.fromhex(str(value))
    except ValueError as exc:
        raise ConfigError(f"{what} is not valid hex") from exc


def load_jobs(path) -> list[AesJob]:
    """Jobs from ``[[job]]`` tables: mode, keylen, direction, key, iv, input or input_bytes."""
    path = Path(path)
    data = load_toml(path)
    jobs = []
    for i, spec in enumerate(data.get("job", [])):
        where = f"job {i + 1}"
        if "key" not in spec:
            raise ConfigError(f"{where}: missing key")
        key = _hex(spec["key"], f"{where} key")
        if "keylen" in spec and int(spec["keylen"]) != 8 * len(key):
            raise ConfigError(f"{where}: keylen {spec['keylen']} does not match the key")
        if "input" in spec:
            src = Path(spec["input"])
            src = src if src.is_absolute() else path.parent / src
            try:
                payload = src.read_bytes()
            except OSError as exc:
                raise ConfigError(f"{where}: {exc}") from exc
        elif "input_hex" in spec:
            payload = _hex(spec["input_hex"], f"{where} input_hex")
        elif "input_bytes" in spec:
            n = int(spec["input_bytes"])
            payload = (np.arange(n, dtype=np.uint64) * 2654435761 % 251).astype(np.uint8).tobytes()
        else:
            raise ConfigError(f"{where}: needs input, input_hex or input_bytes")
        iv = _hex(spec["iv"], f"{where} iv") if "iv" in spec else None
        try:
            jobs.append(AesJob(key, payload, spec.get("mode", "ECB"),
                               spec.get("direction", "enc"), iv))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    return jobs
