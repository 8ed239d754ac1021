"""Episodic environment contract, episode running, fitness evaluation, and
budget accounting.

An environment exposes ``reset() -> obs`` and ``step(action) -> (obs, reward,
done)`` plus an ``EnvSpec`` describing its observation features, action count,
and episode length. Optimizers never touch simulators directly; one episode is
one simulation execution and is the unit every budget counts.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .tree import DecisionTree, LearningConfig, epsilon_greedy, q_update

PENALTY_FITNESS = -1.0e9


@dataclass(frozen=True)
class FeatureSpec:
    """One observation feature.

    Numeric features declare a [low, high] range and optionally an explicit
    threshold list for condition grammars; categorical features declare their
    labels and are observed as the label's index.
    """

    name: str
    low: float = 0.0
    high: float = 1.0
    categories: tuple = None
    thresholds: tuple = None

    @property
    def kind(self) -> str:
        return "categorical" if self.categories is not None else "numeric"

    def grammar_thresholds(self) -> list:
        """Candidate split thresholds for policy grammars.

        Modest integer ranges enumerate every integer; anything wider or
        fractional gets 21 evenly spaced values. Explicit thresholds win.
        """
        if self.categories is not None:
            raise ValueError(f"feature {self.name!r} is categorical")
        if self.thresholds is not None:
            return [float(t) for t in self.thresholds]
        lo, hi = float(self.low), float(self.high)
        if lo == hi:
            return [lo]
        if lo.is_integer() and hi.is_integer() and 2 <= hi - lo <= 40:
            return [float(v) for v in range(int(lo), int(hi) + 1)]
        return [round(v, 6) for v in np.linspace(lo, hi, 21)]


@dataclass(frozen=True)
class EnvSpec:
    features: tuple
    action_count: int
    episode_len: int
    stochastic: bool
    action_labels: tuple = None

    def __post_init__(self):
        if not self.features:
            raise ValueError("EnvSpec needs at least one feature")
        if self.action_count < 2:
            raise ValueError("action_count must be >= 2")
        if self.episode_len < 1:
            raise ValueError("episode_len must be >= 1")
        if self.action_labels is not None and len(self.action_labels) != self.action_count:
            raise ValueError("action_labels length must equal action_count")

    @property
    def feature_names(self) -> list:
        return [f.name for f in self.features]

    @property
    def feature_index(self) -> dict:
        return {f.name: i for i, f in enumerate(self.features)}

    @property
    def category_labels(self) -> list:
        """Per-feature category tuples (None for numeric features)."""
        return [f.categories for f in self.features]


class Env:
    """Minimal episodic environment base class.

    ``objective_scale`` converts an episode return into the problem's
    reporting objective (revenue, makespan, ...); a negative scale flips the
    optimization direction.
    """

    spec: EnvSpec
    objective_scale: float = 1.0

    def reset(self) -> np.ndarray:
        raise NotImplementedError

    def step(self, action: int):
        raise NotImplementedError


class BudgetExhausted(RuntimeError):
    """Raised when an episode is requested past the budget limit."""


class BudgetCounter:
    """Thread-safe episode budget. One episode == one simulation execution."""

    def __init__(self, limit: int):
        if limit < 0:
            raise ValueError("budget limit must be >= 0")
        self.limit = int(limit)
        self._consumed = 0
        self._lock = threading.Lock()

    @property
    def consumed(self) -> int:
        return self._consumed

    @property
    def remaining(self) -> int:
        return self.limit - self._consumed

    def try_charge(self, n: int = 1) -> bool:
        """Atomically charge n episodes; False (and no charge) if over limit."""
        if n < 0:
            raise ValueError("cannot charge a negative episode count")
        with self._lock:
            if self._consumed + n > self.limit:
                return False
            self._consumed += n
            return True

    def charge(self, n: int = 1):
        if not self.try_charge(n):
            raise BudgetExhausted(
                f"budget exhausted: {self._consumed}/{self.limit} consumed, wanted {n} more"
            )


def run_episode(env: Env, tree: DecisionTree, learning: LearningConfig, rng,
                budget: BudgetCounter = None) -> float:
    """Run one episode with epsilon-greedy actions and Q-learning updates.

    The leaf reached by the current observation is the Q-learning state; on
    non-terminal steps the update bootstraps from the next leaf's max Q, on
    the terminal step from 0. Returns the undiscounted episode return.
    Charges one episode on ``budget`` (refused via BudgetExhausted).
    """
    if budget is not None:
        budget.charge(1)
    alpha, gamma, eps = learning.alpha, learning.gamma, learning.epsilon
    learn = alpha != 0.0
    obs = env.reset()
    leaf = tree.traverse(obs)
    total = 0.0
    for _ in range(env.spec.episode_len):
        action = epsilon_greedy(leaf, eps, rng)
        obs, reward, done = env.step(action)
        total += reward
        if done:
            if learn:
                q_update(leaf, action, reward, 0.0, alpha, gamma)
            break
        nxt = tree.traverse(obs)
        if learn:
            q_update(leaf, action, reward, float(np.max(nxt.q)), alpha, gamma)
        leaf = nxt
    return total


def evaluate_fitness(tree, env_factory, episodes: int, rng,
                     learning: LearningConfig = None,
                     budget: BudgetCounter = None,
                     penalty: float = PENALTY_FITNESS) -> float:
    """Mean return over ``episodes`` fresh episodes (compensated summation).

    ``env_factory(seed)`` must build a fresh environment; learning stays on
    across the episodes of one evaluation. A tree of None marks a failed
    decode: the penalty fitness is returned and nothing is charged. If the
    budget runs out mid-evaluation the mean covers the episodes actually run;
    if none can run, BudgetExhausted propagates.
    """
    if tree is None:
        return penalty
    if learning is None:
        learning = LearningConfig()
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    returns = []
    for _ in range(episodes):
        if budget is not None and budget.remaining == 0 and returns:
            break
        env = env_factory(int(rng.integers(2**63 - 1)))
        returns.append(run_episode(env, tree, learning, rng, budget))
    return math.fsum(returns) / len(returns)


def greedy_rollout(tree: DecisionTree, env_factory, episodes: int, seed):
    """Frozen-policy rollout (epsilon=0, no learning) recording every step.

    Returns (observations, actions, returns). Visit counters do accumulate,
    which is exactly what pruning needs; call tree.reset_visits() first to
    make the counts reflect only this rollout.
    """
    rng = np.random.default_rng(seed)
    obs_log, act_log, rets = [], [], []
    for _ in range(episodes):
        env = env_factory(int(rng.integers(2**63 - 1)))
        obs = env.reset()
        total = 0.0
        for _ in range(env.spec.episode_len):
            leaf = tree.traverse(obs)
            action = leaf.action
            obs_log.append(np.array(obs, dtype=float))
            act_log.append(action)
            obs, reward, done = env.step(action)
            total += reward
            if done:
                break
        rets.append(total)
    return obs_log, act_log, rets


class ToyThresholdEnv(Env):
    """Diagnostic bandit-chain: observe x ~ U[0,1], earn 1 iff the action
    matches the side of 0.5 (action 1 for x > 0.5, else action 0). 50 steps,
    so a perfect policy scores 50 and a constant policy 25 in expectation."""

    def __init__(self, seed):
        self.spec = EnvSpec(
            features=(FeatureSpec("x", 0.0, 1.0,
                                  thresholds=tuple(round(v, 6) for v in np.linspace(0, 1, 21))),),
            action_count=2,
            episode_len=50,
            stochastic=True,
        )
        self._rng = np.random.default_rng(seed)
        self._x = 0.0
        self._t = 0

    def reset(self) -> np.ndarray:
        self._t = 0
        self._x = float(self._rng.random())
        return np.array([self._x])

    def step(self, action: int):
        reward = 1.0 if (action == 1) == (self._x > 0.5) else 0.0
        self._t += 1
        done = self._t >= self.spec.episode_len
        self._x = float(self._rng.random())
        return np.array([self._x]), reward, done


def toy_threshold_env(seed) -> ToyThresholdEnv:
    return ToyThresholdEnv(seed)
