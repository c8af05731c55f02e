"""Random-walk corpora over the similarity network.

Second-order walks bias the next step by where the previous step came from:
returning to it is reweighted by 1/p, staying in its neighborhood keeps
weight 1, and moving further out is reweighted by 1/q. With p = q = 1 the
walk degenerates to the uniform first-order walk.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..ssn import SimilarityNetwork


@dataclass(frozen=True)
class WalkConfig:
    """Random-walk and skip-gram hyperparameters (window, negatives, epochs)."""

    walks_per_node: int = 10
    walk_length: int = 80
    p: float = 1.0
    q: float = 1.0
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 0

    def __post_init__(self):
        for name in ("walks_per_node", "walk_length", "window", "negatives", "epochs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.p <= 0 or self.q <= 0:
            raise ConfigError("p and q must be positive")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")


@dataclass(frozen=True)
class WalkCorpus:
    walks: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.walks)


def step_distribution(
    graph: SimilarityNetwork, prev: int, cur: int, p: float, q: float
) -> tuple[tuple[int, ...], np.ndarray]:
    """Neighbors of ``cur`` and their transition probabilities given ``prev``."""
    nbrs = graph.neighbors[cur]
    prev_nbrs = set(graph.neighbors[prev])
    weights = np.empty(len(nbrs))
    for idx, x in enumerate(nbrs):
        if x == prev:
            weights[idx] = 1.0 / p
        elif x in prev_nbrs:
            weights[idx] = 1.0
        else:
            weights[idx] = 1.0 / q
    return nbrs, weights / weights.sum()


def generate_walks(graph: SimilarityNetwork, config: WalkConfig) -> WalkCorpus:
    """``walks_per_node`` truncated walks from every node, roots shuffled per pass.

    The first step is uniform over neighbors; later steps follow the p/q bias.
    A node with no neighbors yields the single-element walk [node].
    """
    rng = np.random.default_rng(config.seed)
    n = graph.n
    neighbors = [np.asarray(nb, dtype=np.int64) for nb in graph.neighbors]
    uniform = config.p == 1.0 and config.q == 1.0
    neighbor_sets = None if uniform else [set(nb) for nb in graph.neighbors]

    walks = []
    for _ in range(config.walks_per_node):
        for start in rng.permutation(n):
            cur = int(start)
            walk = [cur]
            draws = rng.random(config.walk_length - 1)
            for step in range(config.walk_length - 1):
                nbrs = neighbors[cur]
                if nbrs.size == 0:
                    break
                if uniform or len(walk) == 1:
                    nxt = int(nbrs[int(draws[step] * nbrs.size)])
                else:
                    prev = walk[-2]
                    prev_set = neighbor_sets[prev]
                    weights = np.empty(nbrs.size)
                    inv_p, inv_q = 1.0 / config.p, 1.0 / config.q
                    for idx in range(nbrs.size):
                        x = int(nbrs[idx])
                        if x == prev:
                            weights[idx] = inv_p
                        elif x in prev_set:
                            weights[idx] = 1.0
                        else:
                            weights[idx] = inv_q
                    cumulative = np.cumsum(weights)
                    pos = int(
                        np.searchsorted(cumulative, draws[step] * cumulative[-1], side="right")
                    )
                    nxt = int(nbrs[min(pos, nbrs.size - 1)])
                walk.append(nxt)
                cur = nxt
            walks.append(tuple(walk))
    return WalkCorpus(tuple(walks))
