"""Posture dataset handling: synthetic generation, CSV persistence, subject splits.

Synthetic skeleton geometry
---------------------------
The generator poses a five-node stick figure (belly, wrists, ankles) in nine
command postures modeled on one-armed marshalling signals: the right arm does
most of the signaling while the left arm is reserved for lateral commands.

======  =========  ==========================  =====================
class   name       left arm / right arm        body
======  =========  ==========================  =====================
0       standby    hanging / hanging           standing
1       up         hanging / raised overhead   standing
2       down       hanging / angled down-out   standing
3       takeoff    lateral / raised up-out     standing
4       land       hanging / hanging           crouched
5       left       lateral / hanging           standing
6       right      hanging / lateral           standing
7       forward    hanging / extended forward  standing
8       backward   hanging / swept backward    standing
======  =========  ==========================  =====================

Coordinates are body-frame meters (x forward, y left, z up) derived from
``body_height``, ``arm_span`` and ``stance_width``. Each synthetic subject is
the same figure under a per-subject uniform scale; each frame perturbs node
positions by a small Gaussian pose jitter before ranging.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

import numpy as np

from .errors import InvalidArgument, ParseError, UnknownSubject
from .ranging import (
    NodeId,
    RangeSample,
    RangingErrorModel,
    canonical_pairs,
    node_count_for_pairs,
    retained_pair_indices,
    simulate_range,
)


class PostureClass(IntEnum):
    """The nine-way posture label driving robot commands."""

    STANDBY = 0
    UP = 1
    DOWN = 2
    TAKEOFF = 3
    LAND = 4
    LEFT = 5
    RIGHT = 6
    FORWARD = 7
    BACKWARD = 8


N_CLASSES = len(PostureClass)


@dataclass(frozen=True)
class SubjectRecord:
    """All labeled samples recorded for one subject."""

    subject_id: str
    samples: list[RangeSample]

    def __post_init__(self):
        for s in self.samples:
            if s.subject != self.subject_id:
                raise InvalidArgument(
                    f"sample subject {s.subject!r} does not match record {self.subject_id!r}"
                )


@dataclass(frozen=True)
class Dataset:
    """Labeled range samples grouped by subject, ready for leave-one-out splits."""

    subjects: list[SubjectRecord]
    node_count: int

    def __post_init__(self):
        ids = [s.subject_id for s in self.subjects]
        if len(set(ids)) != len(ids):
            raise InvalidArgument(f"duplicate subject ids: {ids}")
        want = self.node_count * (self.node_count - 1) // 2
        for rec in self.subjects:
            for s in rec.samples:
                if len(s.distances) != want:
                    raise InvalidArgument(
                        f"sample of subject {rec.subject_id!r} has {len(s.distances)} "
                        f"distances, expected {want}"
                    )

    @property
    def subject_ids(self) -> list[str]:
        return [s.subject_id for s in self.subjects]

    def __len__(self) -> int:
        return sum(len(s.samples) for s in self.subjects)

    def iter_samples(self) -> Iterator[RangeSample]:
        for rec in self.subjects:
            yield from rec.samples


@dataclass(frozen=True)
class SkeletonParams:
    """Anthropometrics and randomness knobs for the synthetic generator."""

    body_height: float = 1.75
    arm_span: float = 1.75
    stance_width: float = 0.30
    per_subject_scale_jitter: float = 0.08
    per_frame_pose_jitter: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if min(self.body_height, self.arm_span, self.stance_width) <= 0:
            raise InvalidArgument("body lengths must be positive")
        if self.per_subject_scale_jitter < 0 or self.per_frame_pose_jitter < 0:
            raise InvalidArgument("jitters must be nonnegative")


SAMPLE_RATE_HZ = 15.0

# Arm configurations: (forward, outward, vertical) offsets of the wrist from
# the shoulder, as multiples of arm length. Outward is mirrored for the right
# arm; "hang" keeps the wrist slightly off the hip.
_ARM_POSES = {
    "hang": (0.03, 0.06, -1.0),
    "up": (0.0, 0.10, 1.0),
    "up_out": (0.0, 0.7071, 0.7071),
    "lateral": (0.0, 1.0, 0.0),
    "forward": (1.0, 0.0, 0.0),
    "down_out": (0.0, 0.643, -0.766),
    "back": (-0.80, 0.10, -0.35),
}

# (left arm, right arm, crouched) per posture class.
_POSTURES = {
    PostureClass.STANDBY: ("hang", "hang", False),
    PostureClass.UP: ("hang", "up", False),
    PostureClass.DOWN: ("hang", "down_out", False),
    PostureClass.TAKEOFF: ("lateral", "up_out", False),
    PostureClass.LAND: ("hang", "hang", True),
    PostureClass.LEFT: ("lateral", "hang", False),
    PostureClass.RIGHT: ("hang", "lateral", False),
    PostureClass.FORWARD: ("hang", "forward", False),
    PostureClass.BACKWARD: ("hang", "back", False),
}


def posture_template(posture: PostureClass, params: SkeletonParams) -> np.ndarray:
    """Exact node coordinates (5 x 3, meters) for one posture of the unit-scale figure."""
    h, a = params.body_height, params.arm_span
    arm = 0.36 * a
    shoulder_half = 0.11 * a
    left_pose, right_pose, crouched = _POSTURES[posture]

    if crouched:
        belly = np.array([0.14, 0.0, 0.38 * h])
        shoulder_z, shoulder_x = 0.60 * h, 0.10
    else:
        belly = np.array([0.08, 0.0, 0.55 * h])
        shoulder_z, shoulder_x = 0.82 * h, 0.0

    def wrist(pose: str, side: float) -> np.ndarray:
        fwd, out, up = _ARM_POSES[pose]
        return np.array(
            [
                shoulder_x + fwd * arm,
                side * (shoulder_half + out * arm),
                shoulder_z + up * arm,
            ]
        )

    half_stance = params.stance_width / 2
    nodes = np.empty((len(NodeId), 3))
    nodes[NodeId.BELLY] = belly
    nodes[NodeId.LEFT_WRIST] = wrist(left_pose, +1.0)
    nodes[NodeId.RIGHT_WRIST] = wrist(right_pose, -1.0)
    nodes[NodeId.LEFT_ANKLE] = (0.0, +half_stance, 0.05 * h)
    nodes[NodeId.RIGHT_ANKLE] = (0.0, -half_stance, 0.05 * h)
    return nodes


def generate_synthetic(
    subject_count: int,
    samples_per_posture: int,
    params: SkeletonParams = SkeletonParams(),
    error: RangingErrorModel = RangingErrorModel(),
) -> Dataset:
    """Generate ``subject_count * 9 * samples_per_posture`` labeled range samples.

    Each subject gets one scale factor drawn from the scale-jitter range; each
    frame perturbs node positions by the pose jitter and then measures all
    pairwise distances through :func:`~uwbpose.ranging.simulate_range`.
    Equal seeds produce byte-identical datasets.
    """
    if subject_count < 1 or samples_per_posture < 1:
        raise InvalidArgument("subject_count and samples_per_posture must be >= 1")

    pairs = canonical_pairs(len(NodeId))
    subjects = []
    draw_index = 0
    for s in range(subject_count):
        scale_rng = np.random.default_rng([params.seed & 0xFFFFFFFFFFFFFFFF, 101, s])
        scale = 1.0 + params.per_subject_scale_jitter * scale_rng.uniform(-1.0, 1.0)
        samples = []
        t = 0.0
        for posture in PostureClass:
            template = posture_template(posture, params) * scale
            for frame in range(samples_per_posture):
                if params.per_frame_pose_jitter > 0:
                    pose_rng = np.random.default_rng(
                        [params.seed & 0xFFFFFFFFFFFFFFFF, 202, s, int(posture), frame]
                    )
                    nodes = template + params.per_frame_pose_jitter * pose_rng.standard_normal(
                        template.shape
                    )
                else:
                    nodes = template
                distances = np.empty(len(pairs))
                for i, pair in enumerate(pairs):
                    distances[i] = simulate_range(
                        nodes[pair.a], nodes[pair.b], error, draw_index
                    )
                    draw_index += 1
                samples.append(
                    RangeSample(
                        timestamp=t, distances=distances, subject=f"s{s}", label=posture
                    )
                )
                t += 1.0 / SAMPLE_RATE_HZ
        subjects.append(SubjectRecord(subject_id=f"s{s}", samples=samples))
    return Dataset(subjects=subjects, node_count=len(NodeId))


def _header(node_count: int) -> list[str]:
    return ["subject_id", "timestamp", "label"] + [str(p) for p in canonical_pairs(node_count)]


def save_csv(dataset: Dataset, path: Union[str, Path]) -> None:
    """Write ``subject_id,timestamp,label,d_0_1,...`` rows, distances at 6 decimals."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        _write_csv(dataset, f)


def _write_csv(dataset: Dataset, f: io.TextIOBase) -> None:
    writer = csv.writer(f, lineterminator="\n")
    writer.writerow(_header(dataset.node_count))
    for sample in dataset.iter_samples():
        writer.writerow(
            [sample.subject, f"{sample.timestamp:.6f}", int(sample.label)]
            + [f"{d:.6f}" for d in sample.distances]
        )


def load_csv(path: Union[str, Path]) -> Dataset:
    """Load a dataset saved by :func:`save_csv`; ``#`` lines before the header are skipped.

    Raises :class:`FileNotFoundError` for a missing file and :class:`ParseError`
    (naming the 1-based line) for malformed rows: wrong column count,
    non-numeric fields, labels outside 0..8, or negative distances.
    """
    with open(path, "r", encoding="utf-8", newline="") as f:
        return _read_csv(f)


def _read_csv(f) -> Dataset:
    header = None
    header_line = 0
    by_subject: dict[str, list[RangeSample]] = {}
    for line_number, row in enumerate(csv.reader(f), start=1):
        if not row or (row[0].startswith("#") and header is None):
            continue
        if header is None:
            header = row
            header_line = line_number
            if len(header) < 4:
                raise ParseError(line_number, f"header has {len(header)} columns, expected >= 4")
            try:
                node_count = node_count_for_pairs(len(header) - 3)
            except Exception:
                raise ParseError(line_number, f"{len(header) - 3} distance columns do not match a node count")
            if header != _header(node_count):
                raise ParseError(line_number, f"unexpected header {header}")
            continue
        if len(row) != len(header):
            raise ParseError(line_number, f"expected {len(header)} columns, got {len(row)}")
        subject = row[0]
        try:
            timestamp = float(row[1])
        except ValueError:
            raise ParseError(line_number, f"non-numeric timestamp {row[1]!r}")
        try:
            label_value = int(row[2])
        except ValueError:
            raise ParseError(line_number, f"non-numeric label {row[2]!r}")
        if not 0 <= label_value < N_CLASSES:
            raise ParseError(line_number, f"label {label_value} outside 0..{N_CLASSES - 1}")
        try:
            distances = np.array([float(v) for v in row[3:]], dtype=float)
        except ValueError:
            raise ParseError(line_number, "non-numeric distance value")
        if np.any(~np.isfinite(distances)):
            raise ParseError(line_number, "non-finite distance value")
        if np.any(distances < 0):
            raise ParseError(line_number, "negative distance value")
        by_subject.setdefault(subject, []).append(
            RangeSample(
                timestamp=timestamp,
                distances=distances,
                subject=subject,
                label=PostureClass(label_value),
            )
        )
    if header is None:
        raise ParseError(header_line or 1, "missing header row")
    node_count = node_count_for_pairs(len(header) - 3)
    subjects = [SubjectRecord(subject_id=sid, samples=samples) for sid, samples in by_subject.items()]
    return Dataset(subjects=subjects, node_count=node_count)


def loocv_split(dataset: Dataset, held_out: str) -> tuple[Dataset, Dataset]:
    """Split into (train = all other subjects, test = the held-out subject)."""
    if held_out not in dataset.subject_ids:
        raise UnknownSubject(held_out)
    train = [rec for rec in dataset.subjects if rec.subject_id != held_out]
    test = [rec for rec in dataset.subjects if rec.subject_id == held_out]
    return (
        Dataset(subjects=train, node_count=dataset.node_count),
        Dataset(subjects=test, node_count=dataset.node_count),
    )


def to_arrays(
    dataset: Dataset, retained_nodes: Optional[Iterable[NodeId]] = None
) -> tuple[np.ndarray, np.ndarray]:
    """Feature matrix and label vector in dataset iteration order."""
    distances = np.array([s.distances for s in dataset.iter_samples()], dtype=float)
    labels = np.array([int(s.label) for s in dataset.iter_samples()], dtype=np.int64)
    if len(distances) and retained_nodes is not None:
        idx = retained_pair_indices(dataset.node_count, retained_nodes)
        distances = distances[:, idx]
    return distances, labels
