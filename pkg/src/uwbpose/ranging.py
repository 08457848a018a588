"""Node geometry, pairwise-range features, and deterministic noise models.

All randomness here is counter-based: every draw is produced by a fresh
generator seeded from ``(seed, position/index)``, so results are identical
across runs and thread schedules without any shared generator state.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidArgument, InvalidNodeCount

if TYPE_CHECKING:  # pragma: no cover
    from .dataset import PostureClass


class NodeId(IntEnum):
    """The five wearable node positions, with fixed feature-ordering indices."""

    BELLY = 0
    LEFT_WRIST = 1
    RIGHT_WRIST = 2
    LEFT_ANKLE = 3
    RIGHT_ANKLE = 4


ALL_NODES = tuple(NodeId)


@dataclass(frozen=True)
class NodePair:
    """An unordered node pair stored in canonical (low index, high index) form."""

    a: NodeId
    b: NodeId

    def __post_init__(self):
        if not self.a < self.b:
            raise InvalidNodeCount(f"pair must be canonically ordered, got ({self.a}, {self.b})")

    def __str__(self):
        return f"d_{int(self.a)}_{int(self.b)}"


@dataclass(frozen=True)
class RangeSample:
    """One timestamped vector of pairwise node distances in meters.

    ``distances`` follows the canonical pair order of :func:`canonical_pairs`
    for the node count of the owning dataset.
    """

    timestamp: float
    distances: np.ndarray
    subject: str
    label: Optional["PostureClass"] = None

    def __post_init__(self):
        d = np.asarray(self.distances, dtype=float)
        object.__setattr__(self, "distances", d)
        if d.ndim != 1:
            raise ValueError("distances must be a flat vector")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("distances must be finite and nonnegative")

    @property
    def node_count(self) -> int:
        return node_count_for_pairs(len(self.distances))


class NoiseScenario(Enum):
    """Where evaluation noise is applied: training features, test features, both, or nowhere."""

    NONE = "none"
    TRAIN_ONLY = "train"
    TEST_ONLY = "test"
    BOTH = "both"


@dataclass(frozen=True)
class NoiseSpec:
    """Uniform measurement noise of bounded magnitude, applied per scenario.

    ``max_magnitude`` bounds the absolute perturbation of each measurement
    (additive, zero-mean uniform on ``[-max_magnitude, +max_magnitude]``).
    """

    scenario: NoiseScenario = NoiseScenario.NONE
    max_magnitude: float = 0.30
    seed: int = 0

    def __post_init__(self):
        if self.max_magnitude < 0:
            raise InvalidArgument(f"max_magnitude must be >= 0, got {self.max_magnitude}")

    @property
    def applies_to_train(self) -> bool:
        return self.scenario in (NoiseScenario.TRAIN_ONLY, NoiseScenario.BOTH)

    @property
    def applies_to_test(self) -> bool:
        return self.scenario in (NoiseScenario.TEST_ONLY, NoiseScenario.BOTH)


@dataclass(frozen=True)
class RangingErrorModel:
    """Gaussian range-measurement error with standard deviation ``sigma`` meters."""

    sigma: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise InvalidArgument(f"sigma must be >= 0, got {self.sigma}")


def canonical_pairs(node_count: int) -> list[NodePair]:
    """Lexicographically ordered node pairs (0,1),(0,2),...,(n-2,n-1).

    Every module derives feature ordering from this function; the result for
    ``node_count`` nodes has length ``node_count * (node_count - 1) / 2``.
    """
    if not 2 <= node_count <= len(ALL_NODES):
        raise InvalidNodeCount(f"node_count must be in 2..{len(ALL_NODES)}, got {node_count}")
    nodes = ALL_NODES[:node_count]
    return [NodePair(nodes[i], nodes[j]) for i in range(node_count) for j in range(i + 1, node_count)]


def node_count_for_pairs(pair_count: int) -> int:
    """Invert n*(n-1)/2 = pair_count; raises if no integer solution in 2..5."""
    for n in range(2, len(ALL_NODES) + 1):
        if n * (n - 1) // 2 == pair_count:
            return n
    raise InvalidNodeCount(f"{pair_count} distances do not correspond to a whole node count")


def retained_pair_indices(node_count: int, retained_nodes: Iterable[NodeId]) -> np.ndarray:
    """Positions (in canonical order) of the pairs whose endpoints are all retained."""
    retained = {NodeId(n) for n in retained_nodes}
    if len(retained) < 2:
        raise InvalidNodeCount(f"need at least 2 retained nodes, got {len(retained)}")
    if any(int(n) >= node_count for n in retained):
        raise InvalidNodeCount("retained node index outside the sample's node set")
    idx = [i for i, p in enumerate(canonical_pairs(node_count)) if p.a in retained and p.b in retained]
    return np.asarray(idx, dtype=np.intp)


def build_features(sample: RangeSample, retained_nodes: Iterable[NodeId]) -> np.ndarray:
    """Project a sample's distance vector onto the pairs among ``retained_nodes``.

    With all nodes retained this is the identity on ``sample.distances``; with
    k nodes retained the result has length k*(k-1)/2, in canonical pair order.
    """
    idx = retained_pair_indices(sample.node_count, retained_nodes)
    return sample.distances[idx].copy()


def inject_noise(features: np.ndarray, spec: NoiseSpec, stream_position: int) -> np.ndarray:
    """Perturb each measurement by an independent bounded-uniform draw.

    Draws are derived from ``(spec.seed, stream_position, element index)``;
    the result is clamped at zero from below. A spec with scenario ``NONE``
    or zero magnitude returns the input unchanged (as a copy).
    """
    features = np.asarray(features, dtype=float)
    if spec.scenario is NoiseScenario.NONE or spec.max_magnitude == 0:
        return features.copy()
    rng = np.random.default_rng([int(spec.seed) & 0xFFFFFFFFFFFFFFFF, int(stream_position)])
    delta = rng.uniform(-spec.max_magnitude, spec.max_magnitude, size=features.shape)
    return np.maximum(features + delta, 0.0)


def inject_noise_rows(
    features: np.ndarray, spec: NoiseSpec, start_position: int = 0
) -> np.ndarray:
    """Apply :func:`inject_noise` to every row of a feature matrix.

    Row ``i`` uses stream position ``start_position + i``; callers keep
    independent streams (for example train vs test features) disjoint by
    choosing non-overlapping position ranges.
    """
    features = np.asarray(features, dtype=float)
    if spec.scenario is NoiseScenario.NONE or spec.max_magnitude == 0:
        return features.copy()
    out = np.empty_like(features)
    for i, row in enumerate(features):
        out[i] = inject_noise(row, spec, start_position + i)
    return out


def simulate_range(
    p: Sequence[float],
    q: Sequence[float],
    model: RangingErrorModel,
    draw_index: int,
) -> float:
    """Euclidean distance between two points plus one seeded Gaussian error draw.

    The draw depends only on ``(model.seed, draw_index)``, so swapping the two
    points gives the same value. The result is clamped at zero.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    dist = float(np.linalg.norm(p - q))
    if model.sigma == 0:
        return dist
    rng = np.random.default_rng([int(model.seed) & 0xFFFFFFFFFFFFFFFF, int(draw_index)])
    return max(dist + model.sigma * float(rng.standard_normal()), 0.0)
