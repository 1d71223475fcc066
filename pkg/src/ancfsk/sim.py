"""Monte Carlo harness: end-to-end frames, SNR sweeps, and result files.

Every frame draws its randomness from streams keyed by
``(seed, point index, frame index)``, so a sweep's output depends only on its
configuration and never on scheduling or worker count.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import ChannelParams, stream_rng, two_way_relay
from .demod import DemodConfig, LikelihoodTable, bicm_id_receive, demodulate_frame
from .modem import FrameConfig, Interleaver, hard_decision, interleave, map_bits_to_tones

MODES = ("uncoded", "bicm", "bicm-id")
CSV_COLUMNS = ("snr_db", "frames", "bit_errors", "ber", "frame_errors", "fer", "seed", "config_hash", "capped")
# fields that change how a sweep runs or is written, not what it computes
_UNHASHED = ("workers",)


@dataclass(frozen=True)
class SimConfig:
    M: int = 2
    n_terms: int = 50
    mode: str = "uncoded"
    code: str = "none"
    K: int = 2048
    snr_db: tuple = (10.0,)
    frames_max: int = 1000
    errors_min: int = 100
    frame_errors_min: int = 0
    iterations: int = 100
    early_stop: bool = True
    seed: int = 1
    workers: int = 1
    labeling: str = "natural"
    E1: float = 1.0
    E2: float = 1.0
    ER: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in np.atleast_1d(self.snr_db)))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if (self.mode == "uncoded") != (self.code == "none"):
            raise ValueError("uncoded mode needs code='none' and coded modes need a code")
        if self.frames_max < 1 or self.errors_min < 0 or self.frame_errors_min < 0:
            raise ValueError("stopping rule needs frames_max >= 1 and nonnegative error targets")
        if self.iterations < 1 or self.workers < 1 or self.n_terms < 0:
            raise ValueError("iterations and workers must be positive, n_terms nonnegative")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.mode == "uncoded":
            FrameConfig.uncoded(self.M, self.K)
        elif self.M < 2 or self.M & (self.M - 1):
            raise ValueError(f"M must be a power of two, got {self.M}")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["snr_db"] = list(self.snr_db)
        return d

    @property
    def config_hash(self) -> str:
        d = {k: v for k, v in self.to_dict().items() if k not in _UNHASHED}
        blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class FrameOutcome:
    bit_errors: int
    frame_error: bool
    iterations: int


@dataclass
class BerRecord:
    snr_db: float
    frames: int
    bit_errors: int
    frame_errors: int
    bits_per_frame: int
    seed: int
    config_hash: str
    capped: bool
    wall_time: float = field(default=0.0, compare=False)

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.bits_per_frame) if self.frames else math.nan

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else math.nan


class _Context:
    """Per-sweep objects that are expensive to build: code, interleaver, tables."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        if cfg.mode == "uncoded":
            self.code = None
            self.frame = FrameConfig.uncoded(cfg.M, cfg.K)
            self.il = None
        else:
            from .ldpc import load_code

            self.code = load_code(cfg.code)
            self.frame = FrameConfig(cfg.M, self.code.K, self.code.L)
            perm = stream_rng(cfg.seed, stream="interleaver").permutation(self.code.L)
            self.il = Interleaver(perm, seed=cfg.seed)
        self.demod = DemodConfig(cfg.M, cfg.n_terms, use_feedback=cfg.mode == "bicm-id", labeling=cfg.labeling)
        self._tables = {}

    @property
    def rate(self) -> float:
        return self.frame.rate

    def params(self, snr_db: float) -> ChannelParams:
        c = self.cfg
        return ChannelParams.from_ebn0_db(snr_db, c.M, self.rate, E1=c.E1, E2=c.E2, ER=c.ER)

    def table(self, snr_db: float) -> LikelihoodTable:
        if snr_db not in self._tables:
            self._tables[snr_db] = LikelihoodTable.build(self.params(snr_db), self.cfg.n_terms)
        return self._tables[snr_db]


def run_trial(cfg: SimConfig, snr_db: float, point: int, frame: int, ctx: _Context | None = None, noiseless: bool = False) -> FrameOutcome:
    """One frame end to end, observed at node 1; errors counted on node 2's information bits."""
    ctx = ctx or _Context(cfg)
    p = ctx.params(snr_db)
    fc = ctx.frame
    rng = stream_rng(cfg.seed, point, frame, stream="data")
    u1 = rng.integers(0, 2, fc.K, dtype=np.uint8)
    u2 = rng.integers(0, 2, fc.K, dtype=np.uint8)
    if ctx.code is None:
        c1, c2 = u1, u2
    else:
        c1 = interleave(ctx.code.encode(u1), ctx.il)
        c2 = interleave(ctx.code.encode(u2), ctx.il)
    x1 = map_bits_to_tones(c1, fc, cfg.labeling)
    x2 = map_bits_to_tones(c2, fc, cfg.labeling)
    Y = two_way_relay(x1, x2, p, cfg.seed, point, frame, noiseless=noiseless)
    table = ctx.table(snr_db)
    if ctx.code is None:
        est = hard_decision(demodulate_frame(Y, x1, None, ctx.demod, p, table))
        iters = 0
    else:
        res = bicm_id_receive(Y, x1, ctx.code, ctx.il, ctx.demod, p, cfg.iterations, table, early_stop=cfg.early_stop)
        est, iters = res.info_bits, res.iterations
    errs = int(np.count_nonzero(est != u2))
    return FrameOutcome(errs, errs > 0, iters)


# -- sweeps ------------------------------------------------------------------------

_worker_ctx: _Context | None = None


def _init_worker(cfg: SimConfig):
    global _worker_ctx
    _worker_ctx = _Context(cfg)


def _run_block(snr_db: float, point: int, start: int, stop: int) -> list[FrameOutcome]:
    ctx = _worker_ctx
    return [run_trial(ctx.cfg, snr_db, point, f, ctx) for f in range(start, stop)]


def _block_size(cfg: SimConfig) -> int:
    return 2 if cfg.mode != "uncoded" else 16


def _stop_index(outcomes: list[FrameOutcome], cfg: SimConfig) -> int | None:
    """Frames needed (1-based) for the stopping rule, or None if not yet met."""
    be = fe = 0
    for i, o in enumerate(outcomes):
        be += o.bit_errors
        fe += o.frame_error
        if be >= cfg.errors_min and fe >= cfg.frame_errors_min:
            return i + 1
    return None


def _run_point(cfg: SimConfig, snr_db: float, point: int, submit, bits_per_frame: int) -> BerRecord:
    """Run frames in blocks until the stopping rule holds; counts use the first qualifying prefix."""
    t0 = time.perf_counter()
    block = _block_size(cfg)
    width = max(1, cfg.workers)
    outcomes: list[FrameOutcome] = []
    stop = None
    while stop is None and len(outcomes) < cfg.frames_max:
        n0 = len(outcomes)
        starts = range(n0, min(n0 + block * width, cfg.frames_max), block)
        blocks = [(s, min(s + block, cfg.frames_max)) for s in starts]
        for res in submit(snr_db, point, blocks):
            outcomes.extend(res)
        stop = _stop_index(outcomes, cfg)
    n = stop if stop is not None else min(len(outcomes), cfg.frames_max)
    used = outcomes[:n]
    return BerRecord(
        snr_db=snr_db,
        frames=n,
        bit_errors=sum(o.bit_errors for o in used),
        frame_errors=sum(o.frame_error for o in used),
        bits_per_frame=bits_per_frame,
        seed=cfg.seed,
        config_hash=cfg.config_hash,
        capped=stop is None,
        wall_time=time.perf_counter() - t0,
    )


def run_sweep(cfg: SimConfig, progress=None, first_point: int = 0) -> list[BerRecord]:
    """One record per SNR point; identical for any worker count.

    Point ``i`` draws its frames from seed key ``first_point + i``.
    """
    records = []
    if cfg.workers == 1:
        _init_worker(cfg)
        k = _worker_ctx.frame.K
        submit = lambda snr, pt, blocks: [_run_block(snr, pt, a, b) for a, b in blocks]
        for i, snr in enumerate(cfg.snr_db):
            records.append(_run_point(cfg, snr, first_point + i, submit, k))
            if progress:
                progress(records[-1])
        return records
    k = _Context(cfg).frame.K
    with ProcessPoolExecutor(cfg.workers, initializer=_init_worker, initargs=(cfg,)) as pool:
        submit = lambda snr, pt, blocks: [f.result() for f in [pool.submit(_run_block, snr, pt, a, b) for a, b in blocks]]
        for i, snr in enumerate(cfg.snr_db):
            records.append(_run_point(cfg, snr, first_point + i, submit, k))
            if progress:
                progress(records[-1])
    return records


# -- results ---------------------------------------------------------------------------


def _row(r: BerRecord) -> dict:
    return {
        "snr_db": repr(r.snr_db),
        "frames": r.frames,
        "bit_errors": r.bit_errors,
        "ber": repr(r.ber),
        "frame_errors": r.frame_errors,
        "fer": repr(r.fer),
        "seed": r.seed,
        "config_hash": r.config_hash,
        "capped": int(r.capped),
    }


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow(_row(r))
    return buf.getvalue()


def records_to_json(records, cfg: SimConfig | None = None) -> str:
    doc = {
        "config": cfg.to_dict() if cfg else None,
        "config_hash": cfg.config_hash if cfg else None,
        "metadata": {
            "snr_axis": "Eb/N0 in dB per link, E1=E2=ER fixed, N0 = 1/(mu * rate * Eb/N0)",
            "ber_bits": "information bits of node 2 observed at node 1",
        },
        "records": [
            {**{k: v for k, v in _row(r).items()}, "snr_db": r.snr_db, "ber": r.ber, "fer": r.fer,
             "capped": r.capped, "bits_per_frame": r.bits_per_frame, "wall_time": r.wall_time}
            for r in records
        ],
    }
    return json.dumps(doc, indent=2, allow_nan=True)


def emit_results(records, fmt: str, path, cfg: SimConfig | None = None) -> None:
    if fmt == "csv":
        text = records_to_csv(records)
    elif fmt == "json":
        text = records_to_json(records, cfg)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    Path(path).write_text(text)


def read_csv(path) -> list[dict]:
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    conv = {"snr_db": float, "frames": int, "bit_errors": int, "ber": float, "frame_errors": int,
            "fer": float, "seed": int, "config_hash": str, "capped": lambda s: bool(int(s))}
    return [{k: conv[k](v) for k, v in row.items()} for row in rows]


# -- curve summaries ----------------------------------------------------------------------


def waterfall_snr(snr_db, rate, target: float = 0.1, frames=None) -> float:
    """SNR where an error-rate curve first falls through ``target``.

    Linear interpolation of ``log10(rate)`` between the bracketing points;
    NaN if the curve never crosses. A zero rate is replaced by half an event,
    ``0.5 / frames``, when frame counts are given, and otherwise taken as the
    crossing point itself.
    """
    snr = np.asarray(snr_db, dtype=float)
    r = np.asarray(rate, dtype=float)
    order = np.argsort(snr)
    snr, r = snr[order], r[order]
    n = None if frames is None else np.asarray(frames, dtype=float)[order]
    for i in range(1, snr.size):
        if r[i - 1] >= target > r[i]:
            hi = r[i]
            if hi == 0:
                if n is None:
                    return float(snr[i])
                hi = min(0.5 / n[i], 0.5 * target)
            a, b = math.log10(r[i - 1]), math.log10(hi)
            t = (a - math.log10(target)) / (a - b)
            return float(snr[i - 1] + t * (snr[i] - snr[i - 1]))
    return math.nan


def error_floor(rate) -> float:
    """Lowest nonzero error rate along a curve (zeros mean the cap was too small to see errors)."""
    r = np.asarray(rate, dtype=float)
    r = r[r > 0]
    return float(r.min()) if r.size else 0.0


def locate_waterfall(cfg: SimConfig, lo: float, hi: float, target: float = 0.1, coarse: float = 1.0, fine: float = 0.25, progress=None):
    """SNR where FER first drops below ``target``, searched upward from ``lo``.

    A coarse walk stops at the first point under ``target``; a fine walk then
    covers the last coarse step the same way. Returns ``(snr_db, records)``,
    with NaN when no crossing lies in ``[lo, hi]``.
    """

    def walk(points, first_point):
        out = []
        for i, snr in enumerate(points):
            out += run_sweep(cfg.replace(snr_db=(float(snr),)), progress, first_point=first_point + i)
            if out[-1].fer < target:
                break
        return out

    grid = np.round(np.arange(lo, hi + coarse / 2, coarse), 6)
    records = walk(grid, 0)
    if records[-1].fer >= target or len(records) == 1:
        return math.nan, records
    a, b = records[-2], records[-1]
    inner = np.round(np.arange(a.snr_db + fine, b.snr_db - fine / 2, fine), 6)
    window = [a] + walk(inner, len(grid))
    if window[-1].fer >= target:
        window.append(b)
    records += window[1:]
    records.sort(key=lambda r: r.snr_db)
    return waterfall_snr([r.snr_db for r in window], [r.fer for r in window], target, [r.frames for r in window]), records
