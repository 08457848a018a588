"""Posture-to-command mapping, stream smoothing, and kinematic replay.

The replay loop turns a range-sample stream into per-robot velocity commands
and first-order integrated trajectories: predict, smooth over a short window,
map per robot kind, integrate. Aerial robots accept all nine classes; ground
robots only standby/left/right/forward/backward and treat the rest as standby.
"""

from __future__ import annotations

import json
import math
import time
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from .dataset import PostureClass
from .errors import EmptyInput, InvalidStream
from .ranging import node_count_for_pairs


class RobotKind(Enum):
    AERIAL = "aerial"
    GROUND = "ground"


class DiscreteAction(Enum):
    NONE = "none"
    TAKEOFF = "takeoff"
    LAND = "land"


GROUND_CLASSES = frozenset(
    {
        PostureClass.STANDBY,
        PostureClass.LEFT,
        PostureClass.RIGHT,
        PostureClass.FORWARD,
        PostureClass.BACKWARD,
    }
)

TAKEOFF_ALTITUDE = 0.8


@dataclass(frozen=True)
class SpeedConfig:
    v_lin: float = 0.2
    v_yaw: float = 0.5
    v_z: float = 0.2


@dataclass(frozen=True)
class VelocityCommand:
    """Body-frame velocities (x forward, y left, z up) plus a discrete action."""

    vx: float = 0.0
    vy: float = 0.0
    vz: float = 0.0
    yaw_rate: float = 0.0
    action: DiscreteAction = DiscreteAction.NONE

    def __post_init__(self):
        if self.action is not DiscreteAction.NONE and any(
            v != 0.0 for v in (self.vx, self.vy, self.vz, self.yaw_rate)
        ):
            raise ValueError("discrete actions carry zero velocities")

    def to_dict(self) -> dict:
        return {
            "vx": self.vx,
            "vy": self.vy,
            "vz": self.vz,
            "yaw_rate": self.yaw_rate,
            "action": self.action.value,
        }


@dataclass(frozen=True)
class RobotState:
    kind: RobotKind
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    heading: float = 0.0
    airborne: bool = False

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "z": self.z,
            "heading": self.heading,
            "airborne": self.airborne,
        }


@dataclass(frozen=True)
class SmootherConfig:
    window: int = 5

    def __post_init__(self):
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")


_ZERO = VelocityCommand()


def map_posture(
    posture: PostureClass, kind: RobotKind, speeds: SpeedConfig = SpeedConfig()
) -> VelocityCommand:
    """Total mapping from the nine classes to a robot command.

    Aerial: standby holds, up/down move vertically, takeoff/land are discrete
    actions, left/right yaw, forward/backward translate. Ground robots zero
    out the aerial-only classes (up/down/takeoff/land) and the z axis.
    """
    posture = PostureClass(posture)
    if kind is RobotKind.GROUND and posture not in GROUND_CLASSES:
        return _ZERO
    if posture is PostureClass.STANDBY:
        return _ZERO
    if posture is PostureClass.UP:
        return VelocityCommand(vz=+speeds.v_z)
    if posture is PostureClass.DOWN:
        return VelocityCommand(vz=-speeds.v_z)
    if posture is PostureClass.TAKEOFF:
        return VelocityCommand(action=DiscreteAction.TAKEOFF)
    if posture is PostureClass.LAND:
        return VelocityCommand(action=DiscreteAction.LAND)
    if posture is PostureClass.LEFT:
        return VelocityCommand(yaw_rate=+speeds.v_yaw)
    if posture is PostureClass.RIGHT:
        return VelocityCommand(yaw_rate=-speeds.v_yaw)
    if posture is PostureClass.FORWARD:
        return VelocityCommand(vx=+speeds.v_lin)
    return VelocityCommand(vx=-speeds.v_lin)  # BACKWARD


def smooth(
    history: Sequence[int], cfg: SmootherConfig, previous_output: PostureClass
) -> PostureClass:
    """Majority class over the last ``window`` predictions; ties keep the previous output."""
    if len(history) == 0:
        raise EmptyInput("smoother needs at least one prediction")
    window = list(history)[-cfg.window :]
    counts = np.bincount([int(c) for c in window], minlength=len(PostureClass))
    best = counts.max()
    winners = np.flatnonzero(counts == best)
    if len(winners) > 1:
        return PostureClass(previous_output)
    return PostureClass(int(winners[0]))


def integrate_step(state: RobotState, cmd: VelocityCommand, dt: float) -> RobotState:
    """First-order kinematic step: heading first, then body-frame translation."""
    if cmd.action is DiscreteAction.TAKEOFF:
        if state.kind is RobotKind.AERIAL:
            return RobotState(state.kind, state.x, state.y, TAKEOFF_ALTITUDE, state.heading, True)
        return state
    if cmd.action is DiscreteAction.LAND:
        if state.kind is RobotKind.AERIAL:
            return RobotState(state.kind, state.x, state.y, 0.0, state.heading, False)
        return state
    if state.kind is RobotKind.AERIAL and not state.airborne:
        return state
    heading = state.heading + cmd.yaw_rate * dt
    cos_h, sin_h = math.cos(heading), math.sin(heading)
    x = state.x + (cmd.vx * cos_h - cmd.vy * sin_h) * dt
    y = state.y + (cmd.vx * sin_h + cmd.vy * cos_h) * dt
    if state.kind is RobotKind.GROUND:
        z = 0.0
    else:
        z = max(state.z + cmd.vz * dt, 0.0)
    return RobotState(state.kind, x, y, z, heading, state.airborne)


@dataclass(frozen=True)
class StreamFrame:
    """One frame of a replayable range stream."""

    timestamp: float
    distances: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "distances", np.asarray(self.distances, dtype=float))


@dataclass(frozen=True)
class FrameLog:
    timestamp: float
    raw: PostureClass
    smoothed: PostureClass
    latency_s: float
    commands: dict[RobotKind, VelocityCommand]
    states: dict[RobotKind, RobotState]

    def to_dict(self) -> dict:
        return {
            "t": self.timestamp,
            "raw": int(self.raw),
            "smoothed": int(self.smoothed),
            "latency_s": self.latency_s,
            "robots": {
                kind.value: {
                    "cmd": self.commands[kind].to_dict(),
                    "state": self.states[kind].to_dict(),
                }
                for kind in self.commands
            },
        }


class FrameQueue:
    """Bounded FIFO between a live range producer and the replay consumer.

    On overflow the oldest frame is dropped, so a slow consumer always sees
    the freshest data.
    """

    def __init__(self, maxlen: int):
        if maxlen < 1:
            raise ValueError("queue needs capacity >= 1")
        self._frames: deque[StreamFrame] = deque(maxlen=maxlen)

    def push(self, frame: StreamFrame) -> None:
        self._frames.append(frame)

    def pop(self) -> Optional[StreamFrame]:
        return self._frames.popleft() if self._frames else None

    def __len__(self) -> int:
        return len(self._frames)


def replay(
    stream: Iterable[StreamFrame],
    model,
    scaler=None,
    robots: Sequence[RobotKind] = (RobotKind.AERIAL,),
    smoother: SmootherConfig = SmootherConfig(),
    speeds: SpeedConfig = SpeedConfig(),
    measure_latency: bool = True,
) -> list[FrameLog]:
    """Run the full per-frame pipeline over a stream and log every frame.

    With ``measure_latency`` disabled the latency field is written as 0.0 and
    the log is a pure function of (stream, model, scaler, config).
    """
    states = {kind: RobotState(kind=kind) for kind in robots}
    history: deque[int] = deque(maxlen=smoother.window)
    logs: list[FrameLog] = []
    previous = PostureClass.STANDBY
    last_t: Optional[float] = None
    for frame in stream:
        if last_t is not None and frame.timestamp < last_t:
            raise InvalidStream(
                f"timestamps must be non-decreasing: {frame.timestamp} after {last_t}"
            )
        dt = 0.0 if last_t is None else frame.timestamp - last_t
        last_t = frame.timestamp

        features = frame.distances
        if scaler is not None:
            features = scaler.transform(features)
        if measure_latency:
            t0 = time.perf_counter()
            raw = PostureClass(model.predict_one(features))
            latency = time.perf_counter() - t0
        else:
            raw = PostureClass(model.predict_one(features))
            latency = 0.0

        history.append(int(raw))
        smoothed = smooth(history, smoother, previous)
        previous = smoothed

        commands = {}
        for kind in robots:
            cmd = map_posture(smoothed, kind, speeds)
            commands[kind] = cmd
            states[kind] = integrate_step(states[kind], cmd, dt)
        logs.append(
            FrameLog(
                timestamp=frame.timestamp,
                raw=raw,
                smoothed=smoothed,
                latency_s=latency,
                commands=commands,
                states=dict(states),
            )
        )
    return logs


def read_stream(source: Union[str, IO[str]]) -> Iterator[StreamFrame]:
    """Parse newline-delimited JSON frames {"t": seconds, "d": [meters, ...]}."""
    close = False
    if isinstance(source, str):
        f = open(source, "r", encoding="utf-8")
        close = True
    else:
        f = source
    try:
        for line_number, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                t = float(obj["t"])
                d = [float(v) for v in obj["d"]]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise InvalidStream(f"bad stream frame on line {line_number}: {e}")
            node_count_for_pairs(len(d))  # validates the distance count
            yield StreamFrame(timestamp=t, distances=np.array(d))
    finally:
        if close:
            f.close()


def write_session_log(logs: Sequence[FrameLog], sink: Union[str, IO[str]]) -> None:
    """Write one JSON object per frame, keys sorted for byte-stable output."""
    close = False
    if isinstance(sink, str):
        f = open(sink, "w", encoding="utf-8", newline="")
        close = True
    else:
        f = sink
    try:
        for log in logs:
            f.write(json.dumps(log.to_dict(), sort_keys=True))
            f.write("\n")
    finally:
        if close:
            f.close()
