"""Reproducible random-number streams.

Every stochastic component draws from an explicit stream identified by
(seed, stream_id). Streams are backed by numpy's Philox counter-based bit
generator keyed on both values, so a stream's output is fully determined by
the pair and is independent of how many other streams exist or in which order
they are consumed. Simulation code derives per-entity streams with
spawn_stream(master_seed, replication, entity): adding replications or
extending the horizon never perturbs the randomness of existing entities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# spawn_stream packs (replication, entity) into one 64-bit id.
_ENTITY_BITS = 32
_ENTITY_CAP = 1 << _ENTITY_BITS

__all__ = ["RngStream", "spawn_stream"]


@dataclass(frozen=True)
class RngStream:
    """Identifier of an independent random stream.

    Parameters
    ----------
    seed : int
        Master seed shared by a whole experiment, >= 0.
    stream_id : int
        Sub-stream index, >= 0. Distinct ids give statistically
        independent streams under Philox's distinct-key guarantee.
    """

    seed: int
    stream_id: int

    def __post_init__(self) -> None:
        if self.seed < 0 or self.stream_id < 0:
            raise ValueError("seed and stream_id must be non-negative")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def spawn_stream(master_seed: int, replication: int, entity: int) -> RngStream:
    """Derive the stream for one entity of one replication.

    The mapping (replication, entity) -> stream_id is injective for values
    below 2**32, which keeps per-entity randomness stable when replications
    are added or run in any order.
    """
    if replication < 0 or entity < 0:
        raise ValueError("replication and entity must be non-negative")
    if replication >= _ENTITY_CAP or entity >= _ENTITY_CAP:
        raise ValueError("replication and entity must be below 2**32")
    return RngStream(seed=master_seed, stream_id=(replication << _ENTITY_BITS) | entity)


def categorical_index(rng: np.random.Generator, probabilities: np.ndarray) -> int:
    """Draw an index from a categorical distribution using one uniform.

    Implemented as inverse-transform on the cumulative sum so the stream
    consumption (exactly one uniform) is stable across numpy versions.
    """
    u = rng.random()
    cumulative = np.cumsum(probabilities)
    # Guard the tail: cumulative[-1] can fall a ulp short of 1.0.
    idx = int(np.searchsorted(cumulative, u, side="right"))
    return min(idx, len(probabilities) - 1)
