"""L(N) curves averaged over shifted starting points.

A text is read as a closed cycle. Realization ``o`` starts reading at
offset ``o``; at checkpoint ``N`` the realizations are the offsets
``0, dtau, 2 dtau, ...`` below the stream length, where ``dtau`` comes
from the shift band that contains ``N``. Each offset is grown once and
snapshotted at every checkpoint it participates in.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, EmptyGroupError, VocabularyExhaustedError
from .metrics import aspl
from .netbuild import intern_stream, timeline_from_ids
from .tokenizer import TokenStream, strip_punctuation

CURVE_SCHEMA = "# wordadj-curve v1"
CURVE_COLUMNS = ("text_id", "mode", "N", "mean_L", "realizations")


class Mode(str, enum.Enum):
    TOKENS = "tokens"
    WORDS = "words"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).lower()
        aliases = {"tokens": cls.TOKENS, "token": cls.TOKENS, "words": cls.WORDS,
                   "wordsonly": cls.WORDS, "words_only": cls.WORDS, "word": cls.WORDS}
        try:
            return aliases[key]
        except KeyError:
            raise ConfigError(f"unknown mode {value!r}") from None


def apply_mode(stream: TokenStream, mode) -> TokenStream:
    return strip_punctuation(stream) if Mode.parse(mode) is Mode.WORDS else stream


@dataclass(frozen=True)
class CheckpointSchedule:
    points: tuple

    def __post_init__(self):
        pts = tuple(int(p) for p in self.points)
        if not pts:
            raise ConfigError("empty checkpoint schedule")
        if pts[0] < 2:
            raise ConfigError("first checkpoint must be >= 2")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ConfigError("checkpoints must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def capped(self, max_n):
        """Points up to ``max_n``, with ``max_n`` itself appended when cut."""
        if max_n is None or self.points[-1] <= max_n:
            return self
        pts = [p for p in self.points if p < max_n] + [max_n]
        return CheckpointSchedule(tuple(pts))


def default_checkpoints(n_total, per_decade=25) -> CheckpointSchedule:
    """Every N in 2..100, then ``per_decade`` log-spaced points up to ``n_total``."""
    if n_total < 2:
        raise ConfigError("n_total must be >= 2")
    pts = list(range(2, min(100, n_total) + 1))
    k = 1
    while True:
        p = int(round(10 ** (2 + k / per_decade)))
        if p >= n_total:
            break
        if p > pts[-1]:
            pts.append(p)
        k += 1
    if pts[-1] != n_total:
        pts.append(n_total)
    return CheckpointSchedule(tuple(pts))


@dataclass(frozen=True)
class ShiftSchedule:
    """Shift step per band of network sizes: ``bands = ((n_max, dtau), ...)``.

    Beyond the last band the step keeps growing tenfold per decade of N.
    """

    bands: tuple = ((10_000, 100), (100_000, 1000))

    def __post_init__(self):
        bands = tuple((int(n), int(d)) for n, d in self.bands)
        object.__setattr__(self, "bands", bands)
        for problem in shift_schedule_problems(bands):
            raise ConfigError(problem)

    def step_for(self, n):
        for n_max, step in self.bands:
            if n <= n_max:
                return step
        n_max, step = self.bands[-1]
        while n > n_max:
            n_max *= 10
            step *= 10
        return step

    @classmethod
    def parse(cls, text):
        """``"10000:100,100000:1000"`` -> schedule."""
        try:
            bands = [tuple(int(x) for x in part.split(":")) for part in text.split(",") if part]
        except ValueError as exc:
            raise ConfigError(f"bad shift bands {text!r}") from exc
        if any(len(b) != 2 for b in bands):
            raise ConfigError(f"bad shift bands {text!r}")
        return cls(tuple(bands))

    def to_text(self):
        return ",".join(f"{n}:{d}" for n, d in self.bands)


def shift_schedule_problems(bands):
    problems = []
    if not bands:
        problems.append("shift schedule needs at least one band")
        return problems
    ns = [n for n, _ in bands]
    steps = [d for _, d in bands]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        problems.append("shift bands: n_max must be ascending")
    if any(b < a for a, b in zip(steps, steps[1:])):
        problems.append("shift bands: dtau must be ascending")
    if any(d < 1 for d in steps):
        problems.append("shift bands: dtau must be >= 1")
    return problems


@dataclass
class GrowthCurve:
    """Mean L(N) at each checkpoint with the number of contributing realizations
    (or, for group averages, texts)."""

    text_id: str
    mode: Mode
    n: np.ndarray
    mean_l: np.ndarray
    realizations: np.ndarray
    per_offset: dict | None = field(default=None, repr=False)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.mode = Mode.parse(self.mode)
        self.n = np.asarray(self.n, dtype=np.int64)
        self.mean_l = np.asarray(self.mean_l, dtype=float)
        self.realizations = np.asarray(self.realizations, dtype=np.int64)

    def __len__(self):
        return len(self.n)

    @property
    def samples(self):
        return list(zip(self.n.tolist(), self.mean_l.tolist(), self.realizations.tolist()))

    def argmax(self):
        i = int(np.argmax(self.mean_l))
        return int(self.n[i]), float(self.mean_l[i])

    def value_at(self, n):
        idx = np.nonzero(self.n == n)[0]
        if len(idx) == 0:
            raise KeyError(n)
        return float(self.mean_l[idx[0]])

    def to_csv(self, path=None):
        buf = io.StringIO()
        buf.write(CURVE_SCHEMA + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CURVE_COLUMNS)
        for n, l, r in self.samples:
            writer.writerow([self.text_id, self.mode.value, n, repr(float(l)), r])
        text = buf.getvalue()
        if path is not None:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            Path(path).write_text(text, encoding="utf-8", newline="")
        return text

    @classmethod
    def from_csv(cls, path_or_text):
        text = str(path_or_text)
        if "\n" not in text:
            text = Path(text).read_text(encoding="utf-8")
        lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        rows = list(csv.DictReader(lines))
        if not rows:
            raise ConfigError("curve CSV has no rows")
        return cls(
            text_id=rows[0]["text_id"],
            mode=rows[0]["mode"],
            n=[int(r["N"]) for r in rows],
            mean_l=[float(r["mean_L"]) for r in rows],
            realizations=[int(r["realizations"]) for r in rows],
        )


def _offset_plan(total_len, checkpoints, shifts):
    """Map each offset to the checkpoints it contributes to."""
    plan = {}
    for n in checkpoints:
        step = shifts.step_for(n)
        for off in range(0, total_len, step):
            plan.setdefault(off, []).append(n)
    return dict(sorted(plan.items()))


def realization_values(ids, offset, points, method="auto"):
    """L at each of ``points`` for the realization starting at ``offset``."""
    timeline = timeline_from_ids(ids, offset, max_nodes=max(points))
    out = []
    for n in points:
        if n == 1:
            out.append(0.0)
        else:
            out.append(aspl(timeline.csr_at_nodes(n), method=method))
    return out


def _run_chunk(args):
    ids, jobs = args
    return [(off, realization_values(ids, off, pts)) for off, pts in jobs]


def _chunks(items, k):
    size = -(-len(items) // k)
    return [items[i:i + size] for i in range(0, len(items), size)]


def curve_for_text(stream: TokenStream, mode=Mode.TOKENS, checkpoints=None, shifts=None,
                   max_n=None, jobs=1, keep_realizations=False, cache=None) -> GrowthCurve:
    """Shifted-start mean L(N) for one text.

    ``checkpoints`` defaults to :func:`default_checkpoints` of the stream's
    vocabulary; ``max_n`` caps it. Offsets are independent jobs; with
    ``jobs > 1`` they run in worker processes. The per-checkpoint mean is
    an exactly rounded sum, so it does not depend on job scheduling.
    """
    mode = Mode.parse(mode)
    stream = apply_mode(stream, mode)
    shifts = shifts or ShiftSchedule()
    ids, interner = intern_stream(stream)
    vocab = len(interner)
    if checkpoints is None:
        if vocab < 2:
            raise VocabularyExhaustedError(f"{stream.text_id}: fewer than 2 distinct tokens")
        checkpoints = default_checkpoints(vocab)
    elif not isinstance(checkpoints, CheckpointSchedule):
        checkpoints = CheckpointSchedule(tuple(checkpoints))
    checkpoints = checkpoints.capped(max_n)
    if checkpoints.points[-1] > vocab:
        raise VocabularyExhaustedError(
            f"{stream.text_id}: checkpoint {checkpoints.points[-1]} exceeds vocabulary {vocab}")

    key = None
    if cache is not None and not keep_realizations:
        key = cache_key(stream, mode, checkpoints, shifts)
        hit = cache.get(key)
        if hit is not None:
            return hit

    plan = list(_offset_plan(stream.total_len, checkpoints.points, shifts).items())
    if jobs > 1 and len(plan) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_run_chunk, [(ids, c) for c in _chunks(plan, 4 * jobs)])
            results = [r for part in parts for r in part]
    else:
        results = _run_chunk((ids, plan))

    plan_map = dict(plan)
    values = {n: [] for n in checkpoints.points}
    per_offset = {} if keep_realizations else None
    for off, vals in sorted(results):
        for n, val in zip(plan_map[off], vals):
            values[n].append(val)
        if keep_realizations:
            per_offset[off] = dict(zip(plan_map[off], vals))
    ns = list(checkpoints.points)
    curve = GrowthCurve(
        text_id=stream.text_id,
        mode=mode,
        n=ns,
        mean_l=[math.fsum(values[n]) / len(values[n]) for n in ns],
        realizations=[len(values[n]) for n in ns],
        per_offset=per_offset,
        meta={"total_len": stream.total_len, "vocabulary": vocab,
              "shifts": shifts.to_text()},
    )
    if key is not None:
        cache.put(key, curve)
    return curve


def group_average(curves, text_id="group") -> GrowthCurve:
    """Pointwise mean over the curves that have a sample at each N.

    The ``realizations`` column of the result counts contributing texts.
    """
    curves = list(curves)
    if not curves:
        raise EmptyGroupError("no curves to average")
    modes = {c.mode for c in curves}
    if len(modes) != 1:
        raise ConfigError(f"cannot average curves of different modes: {sorted(m.value for m in modes)}")
    grid = np.unique(np.concatenate([c.n for c in curves]))
    means, counts = [], []
    for n in grid:
        vals = [float(c.mean_l[c.n == n][0]) for c in curves if np.any(c.n == n)]
        means.append(math.fsum(vals) / len(vals))
        counts.append(len(vals))
    return GrowthCurve(text_id, curves[0].mode, grid, means, counts,
                       meta={"texts": [c.text_id for c in curves]})


def cache_key(stream, mode, checkpoints, shifts):
    h = hashlib.sha256()
    h.update(CURVE_SCHEMA.encode())
    h.update(Mode.parse(mode).value.encode())
    h.update(json.dumps(list(checkpoints.points)).encode())
    h.update(shifts.to_text().encode())
    for s in stream.surfaces():
        h.update(s.encode("utf-8"))
        h.update(b"\x1f")
    return h.hexdigest()


class CurveCache:
    """Curve CSVs stored under their content hash."""

    def __init__(self, directory):
        self.directory = Path(directory)

    def _path(self, key):
        return self.directory / f"{key}.csv"

    def get(self, key):
        path = self._path(key)
        if path.is_file():
            return GrowthCurve.from_csv(path)
        return None

    def put(self, key, curve):
        self.directory.mkdir(parents=True, exist_ok=True)
        tmp = self._path(key).with_suffix(".tmp")
        curve.to_csv(tmp)
        tmp.replace(self._path(key))
