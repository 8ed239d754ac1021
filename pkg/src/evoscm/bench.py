"""Benchmark harness: seeded multi-run campaigns, aggregation, rank-sum
comparison, and deterministic CSV/DOT artifacts.

``run_experiment`` executes one algorithm on one dataset for ``runs``
independent runs seeded base, base+1, ... and writes history.csv (per-episode
best-so-far), finals.csv (per-run final objectives), summary.csv, trend.csv,
and, for tree-producing algorithms, best_tree.txt/.dot of the pruned best
policy. Artifacts contain no timestamps, so identical configs reproduce
byte-identical files regardless of the worker count.
"""

from __future__ import annotations

import csv
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import datagen
from .baselines import SearchSpace, aco_run, ga_run, gp_evolve, greedy_edd, random_search
from .envs import BudgetCounter
from .evolve import EvolutionConfig, run_eldt
from .flowshop import HfsEnv, decode_list_schedule, makespan
from .grammar import default_policy_grammar, load_bnf
from .kvconfig import format_kv
from .makeorbuy import MakeOrBuyEnv, MakeOrBuyParams, simulate
from .records import RunRecord
from .tree import LearningConfig, to_dot, to_text

PROBLEMS = ("makeorbuy", "hfs")
ALGORITHMS = ("eldt", "rs", "ga", "aco", "greedy", "gp")
POLICY_ALGOS = ("eldt", "gp")


def aggregate(values) -> tuple:
    """(mean, sample standard deviation). A single value has std 0."""
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("aggregate() needs at least one value")
    n = len(vals)
    mean = math.fsum(vals) / n
    if n == 1:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
    return mean, math.sqrt(var)


def _midranks(values) -> list:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2 + 1  # average of 1-based ranks i+1..j+1
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def wilcoxon_rank_sum(a, b) -> tuple:
    """Two-sided Wilcoxon rank-sum (Mann-Whitney) with midranks for ties.

    Returns (U statistic for sample a, p). Exact permutation p-value when
    n_a + n_b <= 12, tie-corrected normal approximation otherwise.
    """
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    n_a, n_b = len(a), len(b)
    if n_a == 0 or n_b == 0:
        raise ValueError("both samples must be non-empty")
    combined = a + b
    ranks = _midranks(combined)
    w = math.fsum(ranks[:n_a])
    mu = n_a * (n_a + n_b + 1) / 2
    u = w - n_a * (n_a + 1) / 2
    n = n_a + n_b
    if n <= 12:
        dev = abs(w - mu)
        hits = 0
        total = 0
        for comb in itertools.combinations(range(n), n_a):
            total += 1
            s = math.fsum(ranks[i] for i in comb)
            if abs(s - mu) >= dev - 1e-12:
                hits += 1
        return u, hits / total
    counts = {}
    for v in combined:
        counts[v] = counts.get(v, 0) + 1
    tie_term = sum(t**3 - t for t in counts.values())
    var = n_a * n_b / 12 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0:
        return u, 1.0
    z = (w - mu) / math.sqrt(var)
    return u, math.erfc(abs(z) / math.sqrt(2))


def emit_trend_csv(records, path, header_lines=()):
    """Per-algorithm mean/std of the best-so-far trace at every episode.

    Records of one algorithm must share a trace length; algorithms may
    differ (greedy's single-entry trace stays a single row).
    """
    groups = {}
    for rec in records:
        groups.setdefault(rec.algo, []).append(rec)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in header_lines:
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(["algo", "eval_index", "mean_best", "std_best"])
        for algo in sorted(groups):
            recs = groups[algo]
            lengths = {len(r.trace) for r in recs}
            if len(lengths) != 1:
                raise ValueError(f"algorithm {algo!r} mixes trace lengths {sorted(lengths)}")
            length = lengths.pop()
            for idx in range(length):
                mean, std = aggregate([r.trace[idx] for r in recs])
                writer.writerow([algo, idx + 1, _fmt(mean), _fmt(std)])


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    algo: str
    dataset: str
    budget: int = 5000
    runs: int = 10
    seed: int = 0
    out_dir: str = "bench_out"
    params: dict = field(default_factory=dict)
    sim_params: dict = field(default_factory=dict)
    grammar_path: str = None
    workers: int = 1

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"problem must be one of {PROBLEMS}, got {self.problem!r}")
        if self.algo not in ALGORITHMS:
            raise ValueError(f"algo must be one of {ALGORITHMS}, got {self.algo!r}")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.problem == "makeorbuy" and self.algo == "greedy":
            raise ValueError("greedy EDD is a flow-shop heuristic; use --problem hfs")


def _makeorbuy_setup(cfg: ExperimentConfig):
    orders = datagen.load_makeorbuy(cfg.dataset)
    params = MakeOrBuyParams(**cfg.sim_params) if cfg.sim_params else MakeOrBuyParams()

    def space_builder(counter):
        def score(x, rng):
            return simulate(orders, x, params, int(rng.integers(2**63 - 1))).revenue

        return SearchSpace(kind="binary", size=len(orders), score=score,
                           maximize=True, budget=counter)

    def env_factory(seed):
        return MakeOrBuyEnv(orders, params, seed)

    return space_builder, env_factory, None


def _hfs_setup(cfg: ExperimentConfig):
    sim = dict(cfg.sim_params)
    kwargs = {}
    if "capacity_m" in sim or "capacity_e" in sim or "capacity_r" in sim:
        kwargs["capacities"] = {"M": int(sim.pop("capacity_m", 5)),
                                "E": int(sim.pop("capacity_e", 5)),
                                "R": int(sim.pop("capacity_r", 5))}
    if "assembly_areas" in sim:
        kwargs["assembly_areas"] = int(sim.pop("assembly_areas"))
    if "transport_days" in sim:
        kwargs["transport_days"] = float(sim.pop("transport_days"))
    if "machine_types" in sim:
        kwargs["type_specs"] = datagen.load_machine_types(sim.pop("machine_types"))
    if sim:
        raise ValueError(f"unknown hfs sim params: {sorted(sim)}")
    instance = datagen.load_hfs(cfg.dataset, **kwargs)

    def space_builder(counter):
        def score(p, rng):
            return makespan(decode_list_schedule(instance, p))

        return SearchSpace(kind="permutation", size=len(instance.jobs),
                           score=score, maximize=False, budget=counter)

    def env_factory(seed):
        return HfsEnv(instance, seed)

    return space_builder, env_factory, instance


def _scale_policy_record(record: RunRecord, scale: float) -> RunRecord:
    """Convert a policy-fitness record into problem-objective units.

    Fitness is always maximized; multiplying a running-max trace by a
    negative scale yields exactly the running-min trace of the scaled
    values, so best-so-far semantics survive the conversion.
    """
    record.trace = [v * scale for v in record.trace]
    record.final_objective = record.final_objective * scale
    return record


def _run_one(cfg: ExperimentConfig, setup, seed: int) -> RunRecord:
    space_builder, env_factory, instance = setup
    algo = cfg.algo
    if algo in POLICY_ALGOS:
        scale = env_factory(0).objective_scale
        if algo == "eldt":
            known = {f.name for f in EvolutionConfig.__dataclass_fields__.values()} - {"budget"}
            evo_kwargs = {k: v for k, v in cfg.params.items() if k in known}
            learn_kwargs = {k: v for k, v in cfg.params.items()
                            if k in ("alpha", "gamma", "epsilon", "q_init_low", "q_init_high")}
            unknown = set(cfg.params) - set(evo_kwargs) - set(learn_kwargs)
            if unknown:
                raise ValueError(f"unknown eldt params: {sorted(unknown)}")
            config = EvolutionConfig(budget=cfg.budget, **evo_kwargs)
            grammar = (load_bnf(cfg.grammar_path) if cfg.grammar_path
                       else default_policy_grammar(env_factory(0).spec))
            record = run_eldt(config, grammar, env_factory, seed,
                              LearningConfig(**learn_kwargs))
        else:
            record = gp_evolve(env_factory, cfg.budget, seed, **cfg.params)
        return _scale_policy_record(record, scale)
    if algo == "greedy":
        return greedy_edd(instance)
    counter = BudgetCounter(cfg.budget)
    space = space_builder(counter)
    runner = {"rs": random_search, "ga": ga_run, "aco": aco_run}[algo]
    return runner(space, cfg.budget, seed, **cfg.params)


def run_experiment(cfg: ExperimentConfig) -> list:
    """Run the campaign and write artifacts into cfg.out_dir.

    Run i uses seed cfg.seed + i; greedy runs once regardless of ``runs``.
    Runs are independent (own RNG streams, own budget counters), so the
    thread pool size changes wall time only, never results.
    """
    setup = {"makeorbuy": _makeorbuy_setup, "hfs": _hfs_setup}[cfg.problem](cfg)
    n_runs = 1 if cfg.algo == "greedy" else cfg.runs
    seeds = [cfg.seed + i for i in range(n_runs)]
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(lambda s: _run_one(cfg, setup, s), seeds))
    else:
        records = [_run_one(cfg, setup, s) for s in seeds]
    for rec in records:
        rec.problem = cfg.problem
        rec.dataset = cfg.dataset
    write_artifacts(cfg, records)
    return records


def _fmt(x: float) -> str:
    return repr(float(x))


def _header_lines(cfg: ExperimentConfig) -> list:
    lines = [f"# problem={cfg.problem} algo={cfg.algo} dataset={cfg.dataset} "
             f"budget={cfg.budget} runs={cfg.runs} base_seed={cfg.seed}",
             "# run i uses seed base_seed + i"]
    if cfg.params:
        for line in format_kv(cfg.params).strip().splitlines():
            lines.append(f"# param {line}")
    if cfg.sim_params:
        for line in format_kv(cfg.sim_params).strip().splitlines():
            lines.append(f"# sim_param {line}")
    return lines


def write_artifacts(cfg: ExperimentConfig, records: list):
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = _header_lines(cfg)

    with open(out / "history.csv", "w", encoding="utf-8", newline="") as fh:
        for line in header:
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(["algo", "run", "seed", "eval_index", "best"])
        for i, rec in enumerate(records):
            for idx, value in enumerate(rec.trace):
                writer.writerow([rec.algo, i, rec.seed, idx + 1, _fmt(value)])

    with open(out / "finals.csv", "w", encoding="utf-8", newline="") as fh:
        for line in header:
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(["algo", "run", "seed", "final_objective", "episodes", "solution"])
        for i, rec in enumerate(records):
            writer.writerow([rec.algo, i, rec.seed, _fmt(rec.final_objective),
                             rec.episodes, rec.solution])

    mean, std = aggregate([rec.final_objective for rec in records])
    with open(out / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        for line in header:
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(["algo", "problem", "dataset", "runs", "budget",
                         "mean_final", "std_final"])
        writer.writerow([cfg.algo, cfg.problem, cfg.dataset, len(records),
                         cfg.budget, _fmt(mean), _fmt(std)])

    emit_trend_csv(records, out / "trend.csv", header)

    if cfg.algo in POLICY_ALGOS:
        best = records[0]
        for rec in records[1:]:
            better = (rec.final_objective > best.final_objective
                      if cfg.problem == "makeorbuy"
                      else rec.final_objective < best.final_objective)
            if better:
                best = rec
        pruned = best.artifacts.get("pruned_tree")
        if pruned is not None:
            if cfg.problem == "makeorbuy":
                spec = MakeOrBuyEnv(datagen.load_makeorbuy(cfg.dataset)).spec
            else:
                spec = HfsEnv(datagen.load_hfs(cfg.dataset)).spec
            names = spec.feature_names
            labels = spec.action_labels
            cats = spec.category_labels
            note = (f"# best run seed={best.seed} "
                    f"final_objective={_fmt(best.final_objective)}\n")
            with open(out / "best_tree.txt", "w", encoding="utf-8") as fh:
                fh.write(note)
                fh.write(to_text(pruned, names, labels, cats))
            with open(out / "best_tree.dot", "w", encoding="utf-8") as fh:
                fh.write(to_dot(pruned, names, labels, cats))


def compare_dirs(in_dirs, out_path=None) -> list:
    """Pairwise rank-sum matrix over the final objectives found in each
    directory's finals.csv. Returns rows (algo_a, algo_b, n_a, n_b, u, p)."""
    finals = {}
    for d in in_dirs:
        path = Path(d) / "finals.csv"
        if not path.exists():
            raise datagen.DataError(f"{path}: no such file")
        with open(path, "r", encoding="utf-8", newline="") as fh:
            body = [ln for ln in fh if not ln.startswith("#")]
        reader = csv.DictReader(body)
        for row in reader:
            finals.setdefault(row["algo"], []).append(float(row["final_objective"]))
    algos = sorted(finals)
    if len(algos) < 2:
        raise ValueError("compare needs finals from at least two algorithms")
    rows = []
    for a, b in itertools.combinations(algos, 2):
        u, p = wilcoxon_rank_sum(finals[a], finals[b])
        rows.append((a, b, len(finals[a]), len(finals[b]), u, p))
    if out_path is not None:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["algo_a", "algo_b", "n_a", "n_b", "u_statistic", "p_value"])
            for a, b, na, nb, u, p in rows:
                writer.writerow([a, b, na, nb, _fmt(u), _fmt(p)])
    return rows
