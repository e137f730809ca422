"""Batch experiments: configuration, optimization runs, indicators, elections, reports.

Directory layout produced by :func:`optimize` under ``<out>/<problem>/``::

    manifest.json               batch manifest (config, runs, statuses)
    <algorithm>/run_000.csv     front of one run (genome + objective columns)
    <algorithm>/run_000.json    run manifest (config, seed, wall time)

:func:`compute_indicators` adds ``indicators.csv``, ``pf_known.csv``,
``comparison.json`` and ``comparison.md``; :func:`build_report` adds a
``report/`` folder of tidy plot data and a markdown summary.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
import logging
import os
import re
import tempfile
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from normopt import indicators as ind
from normopt import reasoner
from normopt.errors import ConfigurationError, ContractError
from normopt.front import Front
from normopt.moea import ALGORITHMS, MoeaConfig, TaxProblem, canonical_algorithm, evolve
from normopt.moea.base import default_population_size
from normopt.society import NormVector, SimulationConfig, init_society, step
from normopt.values import ALL_OBJECTIVES, FIVE_OBJECTIVES, TWO_OBJECTIVES, objective_scores

log = logging.getLogger("normopt")

PROBLEMS = {"two": TWO_OBJECTIVES, "five": FIVE_OBJECTIVES}
# Objective triples (1-based positions) exported as 3-D scatter data for five objectives.
SCATTER_TRIPLES = ((1, 2, 3), (1, 2, 4), (1, 2, 5))
MAX_SEED = 2**64 - 1


def available_parallelism() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def slug(algorithm: str) -> str:
    """Directory name for an algorithm id, e.g. ``MOEA/DD`` -> ``moea-dd``."""
    return re.sub(r"[^a-z0-9]+", "-", algorithm.lower()).strip("-")


def derive_seed(master_seed: int, algorithm: str, run: int) -> int:
    """Stable 64-bit seed for run ``run`` of ``algorithm``."""
    h = hashlib.blake2b(digest_size=8)
    h.update(int(master_seed).to_bytes(8, "little"))
    h.update(canonical_algorithm(algorithm).encode())
    h.update(b"\0")
    h.update(int(run).to_bytes(8, "little"))
    return int.from_bytes(h.digest(), "little")


# --- configuration -------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a batch needs; every field has the documented default.

    ``moea.population_size`` left as ``None`` resolves to 100 (two
    objectives) or 210 (five). ``moea.seed`` and ``moea.algorithm`` are
    replaced per run.
    """

    problem: str = "two"
    algorithms: tuple[str, ...] = ALGORITHMS
    runs: int = 30
    moea: MoeaConfig = field(default_factory=MoeaConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    master_seed: int = 0
    out: str = "results"
    voters: int = 200
    vote_mode: str = reasoner.WEIGHTED
    direction_aware: bool = False

    def validate(self) -> "ExperimentConfig":
        if self.problem not in PROBLEMS:
            raise ConfigurationError(f"problem must be one of {sorted(PROBLEMS)}, got {self.problem!r}")
        if not self.algorithms:
            raise ConfigurationError("at least one algorithm is required")
        names = [canonical_algorithm(a) for a in self.algorithms]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"duplicate algorithms in {self.algorithms}")
        if self.runs < 1:
            raise ConfigurationError(f"runs must be >= 1, got {self.runs}")
        if not 0 <= self.master_seed <= MAX_SEED:
            raise ConfigurationError(f"master_seed must be an unsigned 64-bit integer, got {self.master_seed}")
        if self.voters < 1:
            raise ConfigurationError(f"voters must be >= 1, got {self.voters}")
        if self.vote_mode not in reasoner.MODES:
            raise ConfigurationError(f"vote_mode must be one of {reasoner.MODES}")
        self.moea.validate()
        self.simulation.validate()
        return self

    @property
    def objective_set(self) -> tuple[str, ...]:
        return PROBLEMS[self.problem]

    @property
    def population_size(self) -> int:
        return self.moea.population_size or default_population_size(len(self.objective_set))

    def run_config(self, algorithm: str, run: int) -> MoeaConfig:
        algorithm = canonical_algorithm(algorithm)
        return replace(
            self.moea,
            algorithm=algorithm,
            population_size=self.population_size,
            seed=derive_seed(self.master_seed, algorithm, run),
        )

    def to_dict(self) -> dict:
        data = asdict(self)
        data["algorithms"] = [canonical_algorithm(a) for a in self.algorithms]
        data["simulation"]["wealth_init"] = list(self.simulation.wealth_init)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        if "moea" in data:
            data["moea"] = MoeaConfig.from_dict(data["moea"])
        if "simulation" in data:
            sim = dict(data["simulation"])
            bad = set(sim) - set(SimulationConfig.__dataclass_fields__)
            if bad:
                raise ConfigurationError(f"unknown simulation config keys: {sorted(bad)}")
            if "wealth_init" in sim:
                sim["wealth_init"] = tuple(sim["wealth_init"])
            data["simulation"] = SimulationConfig(**sim)
        if "algorithms" in data:
            if isinstance(data["algorithms"], str):
                data["algorithms"] = data["algorithms"].split(",")
            data["algorithms"] = tuple(canonical_algorithm(a) for a in data["algorithms"])
        try:
            return cls(**data).validate()
        except TypeError as exc:
            raise ConfigurationError(f"malformed config: {exc}") from None

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigurationError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)


# --- file helpers ---------------------------------------------------------------------------


def write_atomic(path: str | Path, text: str) -> Path:
    """Write ``text`` to a temporary sibling and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path: str | Path, data) -> Path:
    return write_atomic(path, json.dumps(data, indent=2, sort_keys=True) + "\n")


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def read_front(path: str | Path, objective_set: Sequence[str] | None = None) -> Front:
    """Parse a front CSV and check it is well formed."""
    path = Path(path)
    try:
        front = Front.read(path)
    except ContractError as exc:
        raise ContractError(f"{path}: {exc}") from None
    if objective_set is not None and front.objective_set != tuple(objective_set):
        raise ContractError(f"{path}: objective columns {front.objective_set} != {tuple(objective_set)}")
    unknown = [name for name in front.objective_set if name not in ALL_OBJECTIVES]
    if unknown:
        raise ContractError(f"{path}: unknown objective columns {unknown}")
    return front


# --- simulate ------------------------------------------------------------------------------


def simulate(config: SimulationConfig, norms: NormVector, seed: int, out: str | Path) -> dict:
    """Run one path and write ``society.json`` and ``objectives.csv`` under ``out``."""
    config.validate()
    norms.validate()
    society = init_society(config, seed)
    initial = society.to_dict()
    initial_total = float(society.wealth.sum())
    totals = [initial_total]
    for _ in range(config.path_length):
        society = step(society, norms)
        totals.append(float(society.wealth.sum()))
    batch = society.copy()
    batch.wealth, batch.primary_wealth = society.wealth[None, :], society.primary_wealth[None, :]
    batch.group, batch.evader = society.group[None, :], society.evader[None, :]
    batch.last_pool = np.array([society.last_pool])
    scores = objective_scores(batch, norms.to_array()[None, :], ALL_OBJECTIVES)[0]
    dump = {
        "seed": int(seed),
        "simulation": {**asdict(config), "wealth_init": list(config.wealth_init)},
        "norms": norms.to_dict(),
        "total_wealth": totals,
        "initial": initial,
        "final": society.to_dict(),
    }
    out = Path(out)
    write_json(out / "society.json", dump)
    write_atomic(out / "objectives.csv", _csv_text(ALL_OBJECTIVES, [list(map(float, scores))]))
    return dump


# --- optimize ------------------------------------------------------------------------------


@dataclass(frozen=True)
class RunTask:
    problem: str
    algorithm: str
    run: int
    moea: MoeaConfig
    simulation: SimulationConfig
    directory: str

    @property
    def stem(self) -> Path:
        return Path(self.directory) / slug(self.algorithm) / f"run_{self.run:03d}"


def execute_run(task: RunTask) -> dict:
    """Run one optimization and write its front CSV and manifest; returns a status record."""
    record = {"algorithm": task.algorithm, "run": task.run, "seed": task.moea.seed}
    start = time.perf_counter()
    try:
        problem = TaxProblem(PROBLEMS[task.problem], task.simulation)
        front = evolve(problem, task.moea)
        elapsed = time.perf_counter() - start
        write_atomic(task.stem.with_suffix(".csv"), front.to_csv())
        write_json(
            task.stem.with_suffix(".json"),
            {
                "problem": task.problem,
                "algorithm": task.algorithm,
                "run": task.run,
                "seed": task.moea.seed,
                "config": task.moea.to_dict(),
                "simulation": {**asdict(task.simulation), "wealth_init": list(task.simulation.wealth_init)},
                "front_size": len(front),
                "wall_time_s": round(elapsed, 3),
                "finished_at": _now(),
            },
        )
        record.update(status="ok", front_size=len(front), wall_time_s=round(elapsed, 3))
    except Exception as exc:  # one failed run must not lose the rest of the batch
        record.update(status="failed", error=f"{type(exc).__name__}: {exc}", traceback=traceback.format_exc())
    return record


@dataclass
class BatchResult:
    directory: Path
    records: list[dict]

    @property
    def failures(self) -> list[dict]:
        return [r for r in self.records if r["status"] != "ok"]

    def fronts(self) -> dict[str, list[Path]]:
        out: dict[str, list[Path]] = {}
        for r in self.records:
            if r["status"] == "ok":
                path = self.directory / slug(r["algorithm"]) / f"run_{r['run']:03d}.csv"
                out.setdefault(r["algorithm"], []).append(path)
        return out


def problem_dir(config: ExperimentConfig) -> Path:
    return Path(config.out) / config.problem


def optimize(config: ExperimentConfig, jobs: int | None = None) -> BatchResult:
    """Run every (algorithm, run) pair of ``config``; failed runs are recorded, not raised."""
    config.validate()
    directory = problem_dir(config)
    directory.mkdir(parents=True, exist_ok=True)
    tasks = [
        RunTask(config.problem, canonical_algorithm(a), r, config.run_config(a, r), config.simulation, str(directory))
        for a in config.algorithms
        for r in range(config.runs)
    ]
    jobs = available_parallelism() if jobs is None else jobs
    if jobs < 1:
        raise ConfigurationError(f"jobs must be >= 1, got {jobs}")
    started = _now()
    clock = time.perf_counter()
    records = []
    if jobs == 1 or len(tasks) == 1:
        for task in tasks:
            records.append(_logged(execute_run(task)))
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            for record in pool.map(execute_run, tasks):
                records.append(_logged(record))
    write_json(
        directory / "manifest.json",
        {
            "config": config.to_dict(),
            "problem": config.problem,
            "objectives": list(config.objective_set),
            "population_size": config.population_size,
            "generations": config.moea.generations,
            "runs": [{k: v for k, v in r.items() if k != "traceback"} for r in records],
            "started_at": started,
            "wall_time_s": round(time.perf_counter() - clock, 3),
        },
    )
    return BatchResult(directory, records)


def _logged(record: dict) -> dict:
    if record["status"] == "ok":
        log.info(
            "%s run %d: %d solutions in %.1f s",
            record["algorithm"], record["run"], record["front_size"], record["wall_time_s"],
        )
    else:
        log.error("%s run %d failed: %s", record["algorithm"], record["run"], record["error"])
    return record


# --- indicators -----------------------------------------------------------------------------

RUN_FILE = re.compile(r"run_(\d+)\.csv$")


@dataclass
class RunFronts:
    """Fronts of one problem directory, keyed by algorithm then run index."""

    directory: Path
    objective_set: tuple[str, ...]
    fronts: dict[str, dict[int, Front]]
    missing: list[str]


def problem_dirs(path: str | Path) -> list[Path]:
    """Problem directories under ``path`` (``path`` itself if it holds runs)."""
    path = Path(path)
    if not path.is_dir():
        raise FileNotFoundError(f"{path}: no such directory")
    if (path / "manifest.json").exists() or any(path.glob("*/run_*.csv")):
        return [path]
    return [p for p in sorted(path.iterdir()) if p.is_dir() and ((p / "manifest.json").exists() or any(p.glob("*/run_*.csv")))]


def load_fronts(directory: str | Path) -> RunFronts:
    """Read every front of a problem directory; expected runs come from the manifest."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    expected: list[tuple[str, int]] = []
    objective_set = None
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text())
        objective_set = tuple(manifest["objectives"])
        order = manifest["config"]["algorithms"]
        expected = [(r["algorithm"], r["run"]) for r in manifest["runs"]]
        expected.sort(key=lambda ar: (order.index(ar[0]) if ar[0] in order else len(order), ar[1]))
    else:
        for sub in sorted(p for p in directory.iterdir() if p.is_dir()):
            for csv_path in sorted(sub.glob("run_*.csv")):
                meta = csv_path.with_suffix(".json")
                algorithm = json.loads(meta.read_text())["algorithm"] if meta.exists() else sub.name
                expected.append((algorithm, int(RUN_FILE.search(csv_path.name).group(1))))
    fronts: dict[str, dict[int, Front]] = {}
    missing = []
    for algorithm, run in expected:
        path = directory / slug(algorithm) / f"run_{run:03d}.csv"
        if not path.exists():
            missing.append(str(path))
            continue
        front = read_front(path, objective_set)
        objective_set = objective_set or front.objective_set
        fronts.setdefault(algorithm, {})[run] = front
    if not fronts:
        listing = "\n  ".join(missing) if missing else "(no run files)"
        raise FileNotFoundError(f"{directory}: no front CSVs found; missing:\n  {listing}")
    return RunFronts(directory, tuple(objective_set), fronts, missing)


@dataclass
class IndicatorResult:
    directory: Path
    nadir: np.ndarray
    pf_known: Front
    batches: dict[str, ind.IndicatorBatch]
    table: ind.Comparison
    missing: list[str]


def indicator_rows(loaded: RunFronts):
    """Nadir, PF_known and per-run indicator values for one problem.

    Order: join all fronts of all algorithms, take the nadir of the union,
    take the non-dominated set of the union as PF_known, then measure every
    run's hypervolume against the nadir and IGD+ against PF_known.
    """
    everything = [f for runs in loaded.fronts.values() for f in runs.values()]
    union = Front.merge(everything)
    nadir = ind.nadir_point(union)
    pf_known = ind.nondominated_filter(union)
    rows, batches = [], {}
    for algorithm, runs in loaded.fronts.items():
        hv, igd, seeds, methods = [], [], [], []
        for run, front in sorted(runs.items()):
            measured = ind.measure_hypervolume(front.objectives, nadir)
            distance = ind.igd_plus(front.objectives, pf_known.objectives) if len(front) else float("inf")
            rows.append([run, algorithm, measured.value, distance, measured.method, measured.stderr])
            hv.append(measured.value)
            igd.append(distance)
            seeds.append(run)
            methods.append(measured.method)
        batches[algorithm] = ind.IndicatorBatch(algorithm, hv, igd, tuple(seeds), tuple(methods))
    return nadir, pf_known, rows, batches


INDICATOR_HEADER = ("run", "algorithm", "hypervolume", "igd_plus", "hv_method", "hv_stderr")


def compute_indicators(directory: str | Path) -> IndicatorResult:
    """Run the indicator pipeline on one problem directory and write its outputs."""
    loaded = load_fronts(directory)
    directory = loaded.directory
    nadir, pf_known, rows, batches = indicator_rows(loaded)
    table = ind.summarize(list(batches.values()))
    write_atomic(directory / "indicators.csv", _csv_text(INDICATOR_HEADER, rows))
    write_atomic(directory / "pf_known.csv", pf_known.to_csv())
    write_json(
        directory / "comparison.json",
        {
            "objectives": list(loaded.objective_set),
            "nadir": [float(x) for x in nadir],
            "pf_known_size": len(pf_known),
            "runs": {a: len(b) for a, b in batches.items()},
            "missing": loaded.missing,
            **table.to_dict(),
        },
    )
    write_atomic(directory / "comparison.md", table.to_markdown())
    return IndicatorResult(directory, nadir, pf_known, batches, table, loaded.missing)


def read_indicators(path: str | Path) -> dict[str, ind.IndicatorBatch]:
    """Parse ``indicators.csv`` back into per-algorithm batches."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != INDICATOR_HEADER:
            raise ContractError(f"{path}: header {reader.fieldnames} != {list(INDICATOR_HEADER)}")
        grouped: dict[str, list[dict]] = {}
        for row in reader:
            grouped.setdefault(row["algorithm"], []).append(row)
    return {
        a: ind.IndicatorBatch(
            a,
            [float(r["hypervolume"]) for r in rs],
            [float(r["igd_plus"]) for r in rs],
            tuple(int(r["run"]) for r in rs),
            tuple(r["hv_method"] for r in rs),
        )
        for a, rs in grouped.items()
    }


# --- reason ---------------------------------------------------------------------------------


def reason(
    front_path: str | Path,
    voters: int = 200,
    seed: int = 0,
    mode: str = reasoner.WEIGHTED,
    direction_aware: bool = False,
    out: str | Path | None = None,
) -> reasoner.Election:
    """Elect one solution of the front in ``front_path``; optionally write ``election.json``."""
    front = read_front(front_path)
    if len(front) == 0:
        raise ContractError(f"{front_path}: front is empty")
    num_groups = (len(front.gene_names) - 2) // 2
    electorate = reasoner.make_voters(voters, seed, num_groups)
    election = reasoner.elect(electorate, front, mode, direction_aware, voter_seed=seed)
    if out is not None:
        report = {"front": str(front_path), **election.to_dict()}
        write_json(Path(out) / "election.json", report)
    return election


# --- report ---------------------------------------------------------------------------------


def _scatter_sets(objective_set: tuple[str, ...]) -> list[tuple[str, ...]]:
    if len(objective_set) <= 3:
        return [objective_set]
    return [tuple(objective_set[i - 1] for i in triple) for triple in SCATTER_TRIPLES]


def build_report(path: str | Path) -> list[Path]:
    """Write box-plot and scatter CSVs plus ``summary.md`` for every problem directory under ``path``.

    Returns the files written; an empty directory yields an empty list.
    """
    path = Path(path)
    written: list[Path] = []
    for directory in problem_dirs(path):
        loaded = load_fronts(directory)
        if not (directory / "indicators.csv").exists():
            compute_indicators(directory)
        batches = read_indicators(directory / "indicators.csv")
        report = directory / "report"
        box_rows = [
            [a, int(run), name, float(v)]
            for a, b in batches.items()
            for name in (ind.HYPERVOLUME, ind.IGD_PLUS)
            for run, v in zip(b.seeds, b.values(name))
        ]
        written.append(write_atomic(report / "boxplot.csv", _csv_text(("algorithm", "run", "indicator", "value"), box_rows)))
        for columns in _scatter_sets(loaded.objective_set):
            idx = [loaded.objective_set.index(c) for c in columns]
            rows = []
            for algorithm, runs in loaded.fronts.items():
                merged = Front.merge(list(runs.values())).objectives[:, idx]
                _, first = np.unique(merged, axis=0, return_index=True)
                rows += [[algorithm, *map(float, merged[i])] for i in np.sort(first)]
            name = "scatter_" + "_".join(columns) + ".csv"
            written.append(write_atomic(report / name, _csv_text(("algorithm", *columns), rows)))
        table = ind.summarize(list(batches.values()))
        comparison = json.loads((directory / "comparison.json").read_text())
        summary = [
            f"# {directory.name}: {', '.join(loaded.objective_set)}",
            "",
            f"Runs per algorithm: {', '.join(f'{a} {len(b)}' for a, b in batches.items())}.",
            f"PF_known size: {comparison['pf_known_size']}; nadir: {', '.join(f'{x:.4f}' for x in comparison['nadir'])}.",
            "",
            table.to_markdown(),
        ]
        pf_known = read_front(directory / "pf_known.csv")
        summary += ["Best value per objective in PF_known:", "", "| objective | max |", "|---|---|"]
        summary += [f"| {name} | {pf_known.objectives[:, k].max():.4f} |" for k, name in enumerate(pf_known.objective_set)]
        if loaded.missing:
            summary += ["", "Missing runs:", *[f"- {m}" for m in loaded.missing]]
        written.append(write_atomic(report / "summary.md", "\n".join(summary) + "\n"))
    return written
