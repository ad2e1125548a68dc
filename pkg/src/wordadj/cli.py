"""Command-line entry point: ``wordadj <command> [options]``.

Every command reads texts from ``--manifest`` and/or ``--text`` and writes
under ``--out-dir``. Module errors are printed to stderr as one JSON object
per line and make the exit status non-zero; files written before the error
are kept.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .corpus import Language, load_document, load_manifest
from .errors import ConfigError, WordAdjError
from .growthcurve import (CheckpointSchedule, CurveCache, GrowthCurve, Mode, ShiftSchedule,
                          apply_mode, curve_for_text, default_checkpoints, group_average,
                          shift_schedule_problems)
from .metrics import analyze_stream, heaps_curve_from_counts, heaps_fit
from .model import fit, fit_table
from .netbuild import full_network
from .synth import SynthConfig, generate, synth_curve
from .tokenizer import DictionarySegmenter, PunctuationInventory, _as_mark, tokenize

COMMANDS = ("tokenize", "build", "analyze", "curve", "fit", "synth", "report")
METRICS_SCHEMA = "# wordadj-metrics v1"
METRICS_COLUMNS = ("text_id", "mode", "N", "E", "aspl", "max_degree", "gamma_deg",
                   "zipf_alpha", "beta", "delta")
REPORT_SCHEMA = "# wordadj-report v1"
REPORT_COLUMNS = ("text_id", "mode", "N_tot", "L_N_tot", "L_max", "argmax_N", "asymptote")
FIT_TABLE_SCHEMA = "# wordadj-fit v1"
DEFAULT_SEED = 20240601


@dataclass
class RunConfig:
    command: str
    manifest: Path | None = None
    texts: list = field(default_factory=list)
    language: str = "en"
    curves: list = field(default_factory=list)
    modes: tuple = (Mode.TOKENS,)
    checkpoints: str | None = None
    dtau_bands: str | None = None
    max_n: int | None = None
    jobs: int = 1
    seed: int = DEFAULT_SEED
    out_dir: Path = Path("wordadj-out")
    use_cache: bool = True
    export_edges: bool = False
    inventory: Path | None = None
    terminators: str | None = None
    marks: str | None = None
    excluded: str | None = None
    dictionary: Path | None = None
    p0: float = 1.0
    delta: float = 0.8
    eta: float = 0.5
    steps: int = 10_000
    realizations: int = 10

    @classmethod
    def from_args(cls, ns):
        mode = ns.mode
        modes = (Mode.TOKENS, Mode.WORDS) if mode == "both" else (Mode.parse(mode),)
        return cls(
            command=ns.command,
            manifest=Path(ns.manifest) if ns.manifest else None,
            texts=[Path(t) for t in ns.text or []],
            language=ns.language,
            curves=[Path(c) for c in getattr(ns, "curve", None) or []],
            modes=modes,
            checkpoints=ns.checkpoints,
            dtau_bands=ns.dtau_bands,
            max_n=ns.max_n,
            jobs=ns.jobs,
            seed=ns.seed,
            out_dir=Path(ns.out_dir),
            use_cache=not ns.no_cache,
            export_edges=ns.export_edges,
            inventory=Path(ns.inventory) if ns.inventory else None,
            terminators=ns.terminators,
            marks=ns.marks,
            excluded=ns.excluded,
            dictionary=Path(ns.dict) if ns.dict else None,
            p0=getattr(ns, "p0", 1.0),
            delta=getattr(ns, "delta", 0.8),
            eta=getattr(ns, "eta", 0.5),
            steps=getattr(ns, "steps", 10_000),
            realizations=getattr(ns, "realizations", 10),
        )

    def synth_config(self, seed=None):
        return SynthConfig(self.p0, self.delta, self.eta,
                           self.seed if seed is None else seed, self.steps)


def _parse_checkpoints(text):
    try:
        return CheckpointSchedule(tuple(int(x) for x in text.split(",") if x.strip()))
    except ValueError as exc:
        raise ConfigError(f"bad checkpoint list {text!r}") from exc


def _writable(path: Path):
    probe = path
    while not probe.exists():
        if probe.parent == probe:
            return False
        probe = probe.parent
    return probe.is_dir() and os.access(probe, os.W_OK)


def validate_config(config: RunConfig) -> list:
    """Every reason ``run`` would fail its preconditions; empty when runnable."""
    problems = []
    if config.command not in COMMANDS:
        problems.append(f"unknown command {config.command!r}")
    needs_texts = config.command in ("tokenize", "build", "analyze", "curve", "report") or (
        config.command == "fit" and not config.curves)
    if needs_texts and config.manifest is None and not config.texts:
        problems.append("no input: pass --manifest or --text")
    for label, path in [("manifest", config.manifest), ("inventory", config.inventory),
                        ("dictionary", config.dictionary)]:
        if path is not None and not path.is_file():
            problems.append(f"{label} not found: {path}")
    for path in list(config.texts) + list(config.curves):
        if not path.is_file():
            problems.append(f"input not found: {path}")
    try:
        Language.parse(config.language)
    except ValueError as exc:
        problems.append(str(exc))
    if config.dtau_bands:
        try:
            bands = [tuple(int(x) for x in part.split(":"))
                     for part in config.dtau_bands.split(",") if part]
            if any(len(b) != 2 for b in bands):
                raise ValueError
            problems.extend(shift_schedule_problems(bands))
        except ValueError:
            problems.append(f"shift schedule: cannot parse {config.dtau_bands!r}")
    if config.checkpoints:
        try:
            _parse_checkpoints(config.checkpoints)
        except ConfigError as exc:
            problems.append(f"checkpoints: {exc}")
    if config.max_n is not None and config.max_n < 2:
        problems.append("--max-n must be >= 2")
    if config.jobs < 1:
        problems.append("--jobs must be >= 1")
    if config.command == "synth":
        problems.extend(config.synth_config().problems())
        if config.realizations < 1:
            problems.append("--realizations must be >= 1")
    if not _writable(config.out_dir):
        problems.append(f"output directory not writable: {config.out_dir}")
    return problems


class Runner:
    def __init__(self, config: RunConfig, stderr=None):
        self.config = config
        self.out = config.out_dir
        self.stderr = stderr or sys.stderr
        self.errors = []
        self.cache = CurveCache(self.out / "cache") if config.use_cache else None

    def fail(self, exc: WordAdjError, **context):
        record = {**exc.to_dict(), **context}
        self.errors.append(record)
        print(json.dumps(record, sort_keys=True), file=self.stderr)

    # inputs

    def inventory(self, language):
        cfg = self.config
        if cfg.inventory is not None:
            inv = PunctuationInventory.from_config(
                cfg.inventory, PunctuationInventory.for_language(language))
        else:
            inv = PunctuationInventory.for_language(language)

        def marks(text):
            return None if text is None else {_as_mark(p.strip()) for p in text.split(",") if p.strip()}

        if cfg.terminators or cfg.marks or cfg.excluded:
            inv = inv.with_overrides(marks(cfg.terminators), marks(cfg.marks), marks(cfg.excluded))
        return inv

    def documents(self):
        cfg = self.config
        loaders = []
        if cfg.manifest is not None:
            loaders.extend((entry.id, entry.load) for entry in load_manifest(cfg.manifest))
        for path in cfg.texts:
            loaders.append((path.stem, lambda p=path: load_document(p, cfg.language)))
        docs = []
        for doc_id, load in loaders:
            try:
                docs.append(load())
            except WordAdjError as exc:
                self.fail(exc, text_id=doc_id)
        return docs

    def streams(self):
        """``(doc, stream)`` pairs; a text that fails to load or tokenize is reported and skipped."""
        segmenter = (DictionarySegmenter.from_file(self.config.dictionary)
                     if self.config.dictionary else None)
        out = []
        for doc in self.documents():
            try:
                out.append((doc, tokenize(doc, self.inventory(doc.language), segmenter)))
            except WordAdjError as exc:
                self.fail(exc, text_id=doc.id)
        return out

    def checkpoints(self):
        return _parse_checkpoints(self.config.checkpoints) if self.config.checkpoints else None

    def shifts(self):
        return ShiftSchedule.parse(self.config.dtau_bands) if self.config.dtau_bands else ShiftSchedule()

    # commands

    def cmd_tokenize(self):
        rows = []
        for doc, stream in self.streams():
            for mode in self.config.modes:
                try:
                    s = apply_mode(stream, mode)
                except WordAdjError as exc:
                    self.fail(exc, text_id=doc.id, mode=mode.value)
                    continue
                path = self.out / "tokens" / f"{doc.id}.{mode.value}.txt"
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text("\n".join(s.surfaces()) + "\n", encoding="utf-8", newline="\n")
                rows.append({"text_id": doc.id, "mode": mode.value, "tokens": s.total_len,
                             "types": len(set(s.surfaces()))})
        for row in rows:
            print(json.dumps(row, sort_keys=True))

    def _networks(self, export):
        for doc, stream in self.streams():
            for mode in self.config.modes:
                try:
                    s = apply_mode(stream, mode)
                    net = full_network(s)
                except WordAdjError as exc:
                    self.fail(exc, text_id=doc.id, mode=mode.value)
                    continue
                if export:
                    net.export_edges(self.out / "networks" / f"{doc.id}.{mode.value}.edges")
                yield doc, mode, s, net

    def cmd_build(self):
        for doc, mode, _, net in self._networks(export=True):
            print(json.dumps({"text_id": doc.id, "mode": mode.value,
                              "N": net.n_nodes, "E": net.n_edges}, sort_keys=True))

    def cmd_analyze(self):
        buf = io.StringIO()
        buf.write(METRICS_SCHEMA + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(METRICS_COLUMNS)
        for doc, stream in self.streams():
            for mode in self.config.modes:
                try:
                    s = apply_mode(stream, mode)
                    m = analyze_stream(s, mode.value, jobs=self.config.jobs)
                    if self.config.export_edges:
                        full_network(s).export_edges(
                            self.out / "networks" / f"{doc.id}.{mode.value}.edges")
                except WordAdjError as exc:
                    self.fail(exc, text_id=doc.id, mode=mode.value)
                    continue
                writer.writerow([doc.id, mode.value, m.n_nodes, m.n_edges, repr(m.aspl),
                                 m.max_degree, repr(m.gamma_deg), repr(m.zipf_alpha),
                                 repr(m.beta), repr(m.delta)])
        _write(self.out / "metrics.csv", buf.getvalue())

    def _curves(self):
        """Per-text and group-average curves for every requested mode."""
        curves = {mode: [] for mode in self.config.modes}
        streams = self.streams()
        for doc, stream in streams:
            for mode in self.config.modes:
                try:
                    c = curve_for_text(stream, mode, self.checkpoints(), self.shifts(),
                                       self.config.max_n, self.config.jobs, cache=self.cache)
                except WordAdjError as exc:
                    self.fail(exc, text_id=doc.id, mode=mode.value)
                    continue
                c.to_csv(self.out / "curves" / f"{doc.id}.{mode.value}.csv")
                curves[mode].append(c)
                if self.config.export_edges:
                    try:
                        full_network(apply_mode(stream, mode)).export_edges(
                            self.out / "networks" / f"{doc.id}.{mode.value}.edges")
                    except WordAdjError as exc:
                        self.fail(exc, text_id=doc.id, mode=mode.value)
        for mode, group in curves.items():
            if len(group) > 1:
                avg = group_average(group, "group")
                avg.to_csv(self.out / "curves" / f"group.{mode.value}.csv")
        return curves

    def cmd_curve(self):
        self._curves()

    def _fit_one(self, curve: GrowthCurve):
        name = f"{curve.text_id}.{curve.mode.value}"
        try:
            params = fit(curve)
        except WordAdjError as exc:
            self.fail(exc, text_id=curve.text_id, mode=curve.mode.value)
            return None
        params.to_json(self.out / "fits" / f"{name}.json",
                       text_id=curve.text_id, mode=curve.mode.value)
        buf = io.StringIO()
        buf.write(FIT_TABLE_SCHEMA + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("N", "mean_L", "L_fit"))
        for n, l, lf in fit_table(curve, params):
            writer.writerow([n, repr(l), repr(lf)])
        _write(self.out / "fits" / f"{name}.csv", buf.getvalue())
        return params

    def cmd_fit(self):
        if self.config.curves:
            for path in self.config.curves:
                self._fit_one(GrowthCurve.from_csv(path))
        else:
            for group in self._curves().values():
                for curve in group:
                    self._fit_one(curve)

    def cmd_synth(self):
        cfg = self.config.synth_config()
        run = generate(cfg)
        n_final = run.n_nodes
        if self.config.checkpoints:
            points = self.checkpoints()
        else:
            # smallest final size over the realizations bounds the grid; use a margin
            points = default_checkpoints(max(2, n_final // 2))
        points = points.capped(self.config.max_n)
        curve = synth_curve(cfg, points, self.config.realizations, self.config.jobs)
        curve.to_csv(self.out / "curves" / "synth.tokens.csv")
        hf = heaps_fit(heaps_curve_from_counts(run.n_after))
        summary = {"p0": cfg.p0, "delta": cfg.delta, "eta": cfg.eta, "steps": cfg.steps,
                   "seed": cfg.seed, "realizations": self.config.realizations,
                   "N_final": n_final, "E_final": run.n_edges, "heaps_delta": hf.delta,
                   "L_max": curve.argmax()[1], "argmax_N": curve.argmax()[0]}
        _write(self.out / "synth.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")

    def cmd_report(self):
        buf = io.StringIO()
        buf.write(REPORT_SCHEMA + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for mode, group in self._curves().items():
            for curve in group:
                params = self._fit_one(curve)
                n_max, l_max = curve.argmax()
                writer.writerow([curve.text_id, mode.value, int(curve.n[-1]),
                                 repr(float(curve.mean_l[-1])), repr(l_max), n_max,
                                 repr(params.asymptote) if params else "nan"])
        _write(self.out / "report.csv", buf.getvalue())

    def run(self):
        getattr(self, f"cmd_{self.config.command}")()
        return 1 if self.errors else 0


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("input")
    src.add_argument("--manifest", help="JSON-lines manifest of texts")
    src.add_argument("--text", action="append", help="a text file (repeatable)")
    src.add_argument("--language", default="en", help="language of --text files (en, zh)")
    src.add_argument("--dict", help="word list for dictionary segmentation of Chinese")
    src.add_argument("--inventory", help="punctuation inventory JSON")
    src.add_argument("--terminators", help="comma-separated terminator marks")
    src.add_argument("--marks", help="comma-separated non-terminal marks")
    src.add_argument("--excluded", help="comma-separated marks to drop")
    run = common.add_argument_group("run")
    run.add_argument("--mode", choices=("tokens", "words", "both"), default="tokens")
    run.add_argument("--checkpoints", help="comma-separated node counts")
    run.add_argument("--dtau-bands", help="shift bands as N:dtau,N:dtau")
    run.add_argument("--max-n", type=int, help="largest checkpoint")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--seed", type=int, default=DEFAULT_SEED)
    run.add_argument("--out-dir", default="wordadj-out")
    run.add_argument("--no-cache", action="store_true")
    run.add_argument("--export-edges", action="store_true")

    parser = argparse.ArgumentParser(prog="wordadj", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"wordadj {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("tokenize", parents=[common], help="write token streams")
    sub.add_parser("build", parents=[common], help="build and export full networks")
    sub.add_parser("analyze", parents=[common], help="metrics.csv for full networks")
    sub.add_parser("curve", parents=[common], help="L(N) curves")
    p = sub.add_parser("fit", parents=[common], help="fit the L(N) model")
    p.add_argument("--curve", action="append", help="curve CSV to fit (repeatable)")
    p = sub.add_parser("synth", parents=[common], help="synthetic network curves")
    p.add_argument("--p0", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.8)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--realizations", type=int, default=10)
    sub.add_parser("report", parents=[common], help="curves, fits and report.csv")
    return parser


def main(argv=None, stderr=None) -> int:
    stderr = stderr or sys.stderr
    ns = build_parser().parse_args(argv)
    config = RunConfig.from_args(ns)
    problems = validate_config(config)
    if problems:
        print(json.dumps({"error": "config", "problems": problems}), file=stderr)
        return 2
    runner = Runner(config, stderr)
    try:
        return runner.run()
    except WordAdjError as exc:
        runner.fail(exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
