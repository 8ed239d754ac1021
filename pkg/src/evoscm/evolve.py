"""Grammatical evolution of decision-tree policies (ELDT).

Genotypes are fixed-length integer codon arrays. Variation is uniform
per-gene mutation and one-point crossover; selection is a size-2 tournament;
replacement is steady-state (parents and offspring merged, best kept, ties
prefer incumbents). Fitness is the mean episode return of the decoded tree
with Q-learning leaves; genotypes whose derivation runs out of codons get a
fixed penalty fitness and charge no budget.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from .envs import BudgetCounter, evaluate_fitness, greedy_rollout
from .grammar import Grammar, IncompleteDerivation, decode
from .records import BestTrace, RunRecord
from .tree import LearningConfig, prune_unreached, to_oneline

# SeedSequence tags keeping the master/final streams disjoint from the
# per-individual (seed, generation, index) streams.
_MASTER_TAG = 0x5EED
_FINAL_TAG = 0xF1A1

# Consecutive decode failures tolerated before the run is declared stuck.
_MAX_DECODE_STALL = 10_000


@dataclass(frozen=True)
class EvolutionConfig:
    """ELDT hyperparameters. ``episodes_per_eval=None`` picks 3 for
    stochastic environments and 1 for deterministic ones.

    A budget smaller than one generation's cost is allowed: the run truncates
    mid-generation and consumes the budget exactly.
    """

    budget: int = 5000
    population_size: int = 30
    genotype_length: int = 100
    g_max: int = 40000
    mutation_prob: float = 0.05
    crossover_prob: float = 0.5
    tournament_size: int = 2
    penalty_fitness: float = -1.0e9
    episodes_per_eval: int = None

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.genotype_length < 2:
            raise ValueError("genotype_length must be >= 2 (one-point "
                             "crossover needs an interior cut)")
        if self.g_max < 1:
            raise ValueError("g_max must be >= 1")
        for name in ("mutation_prob", "crossover_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")
        if self.episodes_per_eval is not None and self.episodes_per_eval < 1:
            raise ValueError("episodes_per_eval must be >= 1")


@dataclass(eq=False)
class Individual:
    """Genotype plus evaluation results; identity equality (array fields
    make field-wise comparison meaningless)."""

    genotype: np.ndarray
    fitness: float = None
    tree: object = None
    decode_failed: bool = False


def random_genotype(length: int, g_max: int, rng) -> np.ndarray:
    """Uniform codons in [0, g_max]."""
    return rng.integers(0, g_max + 1, size=length, dtype=np.int64)


def mutate(genotype: np.ndarray, m_p: float, g_max: int, rng) -> np.ndarray:
    """Uniform mutation: each gene is independently replaced with a uniform
    integer in [0, g_max] with probability m_p (the replacement may repeat
    the old value). Returns a new array."""
    out = np.array(genotype, dtype=np.int64, copy=True)
    mask = rng.random(len(out)) < m_p
    n = int(mask.sum())
    if n:
        out[mask] = rng.integers(0, g_max + 1, size=n, dtype=np.int64)
    return out


def crossover_one_point(a: np.ndarray, b: np.ndarray, rng):
    """One-point crossover at a uniform cut in [1, len-1]; returns two new
    children. Equal-length parents of length >= 2 only."""
    if len(a) != len(b):
        raise ValueError("parents must have equal length")
    if len(a) < 2:
        raise ValueError("crossover needs genotypes of length >= 2")
    cut = int(rng.integers(1, len(a)))
    c1 = np.concatenate([a[:cut], b[cut:]])
    c2 = np.concatenate([b[:cut], a[cut:]])
    return c1, c2


def select_parent(population: list, tournament_size: int, rng) -> Individual:
    """Tournament selection: sample with replacement, return the best
    fitness; ties go to the lower population index."""
    if not population:
        raise ValueError("empty population")
    idxs = rng.integers(0, len(population), size=tournament_size)
    best = None
    for i in sorted(int(j) for j in idxs):
        ind = population[i]
        if best is None or ind.fitness > best.fitness:
            best = ind
    return best


def replace_steady_state(population: list, offspring: list) -> list:
    """Merge parents and offspring, keep the best len(population). Ties
    prefer incumbents, then lower index (stable sort with parents first)."""
    if len(offspring) > len(population):
        raise ValueError("offspring batch larger than the population")
    merged = list(population) + list(offspring)
    merged.sort(key=lambda ind: -ind.fitness)
    return merged[: len(population)]


def run_eldt(config: EvolutionConfig, grammar: Grammar, env_factory, seed: int,
             learning: LearningConfig = None) -> RunRecord:
    """Evolve a decision-tree policy under an exact episode budget.

    ``env_factory(seed)`` builds a fresh environment. Each individual is
    evaluated on its own RNG stream seeded by (run seed, generation, index),
    so evaluation order cannot change results; episode quotas are assigned in
    index order and the last evaluation may run on a partial quota so that
    consumption equals the budget exactly. The returned record's trace has
    one best-so-far entry per consumed episode.

    The run's best tree is re-run greedily (no exploration, no learning) for
    one final rollout that recharges visit counters, drives prune_unreached,
    and lands in record.artifacts; those reporting episodes are not part of
    the optimization budget.
    """
    t0 = time.perf_counter()
    if learning is None:
        learning = LearningConfig()
    spec = env_factory(0).spec
    e = config.episodes_per_eval or (3 if spec.stochastic else 1)
    budget = BudgetCounter(config.budget)
    trace = BestTrace(maximize=True)
    rng = np.random.default_rng(np.random.SeedSequence((seed, _MASTER_TAG)))
    stall = [0]

    def evaluate(ind: Individual, generation: int, index: int):
        stream = np.random.default_rng(np.random.SeedSequence((seed, generation, index)))
        try:
            tree = decode(ind.genotype, grammar, spec.feature_index)
        except IncompleteDerivation:
            ind.fitness = config.penalty_fitness
            ind.decode_failed = True
            stall[0] += 1
            if stall[0] > _MAX_DECODE_STALL:
                raise RuntimeError(
                    f"{_MAX_DECODE_STALL} consecutive decode failures; "
                    "the grammar and genotype length cannot produce policies"
                )
            return
        stall[0] = 0
        tree.init_leaves(spec.action_count, stream,
                         learning.q_init_low, learning.q_init_high)
        quota = min(e, budget.remaining)
        before = budget.consumed
        fitness = evaluate_fitness(tree, env_factory, quota, stream, learning,
                                   budget, config.penalty_fitness)
        ind.fitness = fitness
        ind.tree = tree
        trace.record(fitness, budget.consumed - before, payload=ind)

    population = [Individual(random_genotype(config.genotype_length, config.g_max, rng))
                  for _ in range(config.population_size)]
    generation = 0
    for index, ind in enumerate(population):
        if budget.remaining == 0:
            break
        evaluate(ind, generation, index)
    for ind in population:
        if ind.fitness is None:  # truncated initialization under a tiny budget
            ind.fitness = config.penalty_fitness

    while budget.remaining > 0:
        generation += 1
        offspring = []
        while len(offspring) < config.population_size:
            p1 = select_parent(population, config.tournament_size, rng)
            p2 = select_parent(population, config.tournament_size, rng)
            g1, g2 = p1.genotype, p2.genotype
            if config.genotype_length >= 2 and rng.random() < config.crossover_prob:
                g1, g2 = crossover_one_point(g1, g2, rng)
            for g in (g1, g2):
                if len(offspring) < config.population_size:
                    offspring.append(
                        Individual(mutate(g, config.mutation_prob, config.g_max, rng)))
        evaluated = []
        for index, child in enumerate(offspring):
            if budget.remaining == 0:
                break
            evaluate(child, generation, index)
            evaluated.append(child)
        population = replace_steady_state(population, evaluated)

    best = trace.best_payload
    params = asdict(config)
    params.update(asdict(learning))
    params["episodes_per_eval"] = e
    artifacts = {}
    solution = ""
    final = trace.best if trace.best is not None else config.penalty_fitness
    if best is not None and best.tree is not None:
        best.tree.reset_visits()
        obs_log, act_log, rets = greedy_rollout(
            best.tree, env_factory, e, np.random.SeedSequence((seed, _FINAL_TAG)))
        pruned = prune_unreached(best.tree)
        artifacts = {
            "tree": best.tree,
            "pruned_tree": pruned,
            "rollout_observations": obs_log,
            "rollout_actions": act_log,
            "rollout_returns": rets,
        }
        solution = to_oneline(pruned, spec.feature_names, spec.action_labels,
                              spec.category_labels)
    return RunRecord(
        algo="eldt",
        seed=seed,
        trace=trace.values,
        final_objective=final,
        solution=solution,
        episodes=budget.consumed,
        params=params,
        wall_time=time.perf_counter() - t0,
        artifacts=artifacts,
    )
