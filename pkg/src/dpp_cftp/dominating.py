"""Dominating spatial birth-death process over the window.

The dominating chain D is an M/M/infinity queue: births arrive at total
rate H * area with uniform locations, every point dies at rate 1. Because
the queue is reversible and started from its stationary law (a Poisson
point process at time 0), the path on (-n, 0] is constructed by simulating
the queue *forward* in pseudo-time from the time-0 state and flipping the
segment: a pseudo-birth becomes a real-time death and vice versa.

Randomness discipline: one root seed per stream. The time-0 state uses the
child stream spawn_key=(0,) of the root SeedSequence; the entire backward
construction (waits, birth/death coins, locations, victims and the uniform
marks attached to real-time births) consumes the child stream
spawn_key=(1,) sequentially. Extensions resume that stream from its saved
state, so reading the stream at a greater depth reuses the exact same
randomness, which is what the coupling-from-the-past argument requires.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ParameterError, ReplayError
from .kernel import SpectralKernel, Window

DEFAULT_INITIAL_DEPTH = 0.5


class EventKind(Enum):
    BIRTH = "birth"
    DEATH = "death"


@dataclass(frozen=True)
class Event:
    """One jump of the dominating process.

    Births carry the new point and its uniform mark; deaths reference the
    removed point by its stable id (coordinates repeated for convenience).
    """

    time: float
    kind: EventKind
    point_id: int
    location: tuple
    mark: float | None = None


@dataclass
class EventStream:
    """Realized dominating path on (-depth, 0] with persisted marks.

    initial_state and terminal_state are lists of (id, x, y) triples for
    D at times -depth and 0. Replaying events forward from initial_state
    reproduces terminal_state exactly. The underscore fields carry the
    pseudo-time construction frontier so extensions continue the same
    randomness; treat streams as immutable values (extensions return new
    streams).
    """

    depth: float
    initial_state: list
    events: list
    rng_seed: int
    terminal_state: list
    _birth_rate: float
    _half_side: float
    _rng_state: dict
    _pending_time: float | None
    _next_id: int


def _rng_from_key(seed: int, key: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(key,)))
    )


def _resume_rng(state: dict) -> np.random.Generator:
    bg = np.random.PCG64()
    bg.state = state
    return np.random.Generator(bg)


def sample_stationary_state(
    kernel: SpectralKernel, window: Window, rng: np.random.Generator
) -> list:
    """Draw D at a fixed time: Poisson(H * area) points, uniform locations.

    For stationary models J(x, x) is the constant H, so the stationary
    intensity measure is uniform over the window.
    """
    n = int(rng.poisson(kernel.H * window.area))
    half = window.side / 2.0
    xs = rng.uniform(-half, half, size=n)
    ys = rng.uniform(-half, half, size=n)
    return [(i, float(xs[i]), float(ys[i])) for i in range(n)]


def init_stream(
    kernel: SpectralKernel,
    window: Window,
    seed: int,
    initial_depth: float = DEFAULT_INITIAL_DEPTH,
) -> EventStream:
    """Stationary stream of the requested initial depth.

    Samples D_0 from the equilibrium Poisson process, then extends
    backward from depth 0 to initial_depth.
    """
    if not (initial_depth > 0):
        raise ParameterError(f"initial depth must be positive, got {initial_depth}")
    if window.side != kernel.window.side:
        raise ParameterError("window does not match the kernel's window")
    state_rng = _rng_from_key(seed, 0)
    terminal = sample_stationary_state(kernel, window, state_rng)
    pseudo_rng = _rng_from_key(seed, 1)
    base = EventStream(
        depth=0.0,
        initial_state=list(terminal),
        events=[],
        rng_seed=seed,
        terminal_state=terminal,
        _birth_rate=kernel.H * window.area,
        _half_side=window.side / 2.0,
        _rng_state=pseudo_rng.bit_generator.state,
        _pending_time=None,
        _next_id=len(terminal),
    )
    return backward_extend(base, initial_depth)


def backward_extend(stream: EventStream, new_depth: float) -> EventStream:
    """Extend the dominating path from stream.depth back to new_depth.

    Simulates the queue forward in pseudo-time over (depth, new_depth]
    starting from the current initial state, then time-reverses the
    segment: pseudo-births become real deaths and pseudo-deaths become
    real births (each real birth draws its uniform mark here, once and for
    all). Existing events, their marks and the terminal state are reused
    untouched. The jump pending beyond new_depth stays undecided and is
    carried over, so extending in one step or several yields the same
    stream.
    """
    if not (new_depth > stream.depth):
        raise ParameterError(
            f"new depth {new_depth} must exceed current depth {stream.depth}"
        )
    rng = _resume_rng(stream._rng_state)
    birth_rate = stream._birth_rate
    half = stream._half_side
    state = list(stream.initial_state)
    next_id = stream._next_id
    segment: list[Event] = []

    pending = stream._pending_time
    if pending is None:
        rate = birth_rate + len(state)
        pending = (
            stream.depth + rng.exponential(1.0) / rate if rate > 0.0 else math.inf
        )

    while pending <= new_depth:
        t = pending
        z = len(state)
        if rng.random() < birth_rate / (birth_rate + z):
            # pseudo-birth: the point disappears when replaying in real time
            pid = next_id
            next_id += 1
            loc = (
                float(rng.uniform(-half, half)),
                float(rng.uniform(-half, half)),
            )
            state.append((pid, loc[0], loc[1]))
            segment.append(Event(-t, EventKind.DEATH, pid, loc))
        else:
            i = int(rng.integers(z))
            pid, x, y = state.pop(i)
            mark = float(rng.random())
            segment.append(Event(-t, EventKind.BIRTH, pid, (x, y), mark))
        rate = birth_rate + len(state)
        pending = t + rng.exponential(1.0) / rate if rate > 0.0 else math.inf

    segment.reverse()
    return EventStream(
        depth=new_depth,
        initial_state=state,
        events=segment + stream.events,
        rng_seed=stream.rng_seed,
        terminal_state=stream.terminal_state,
        _birth_rate=birth_rate,
        _half_side=half,
        _rng_state=rng.bit_generator.state,
        _pending_time=pending,
        _next_id=next_id,
    )


def replay_states(stream: EventStream):
    """Yield (event, live state dict) walking the events forward in real time.

    Checks the structural invariants as it goes: event times are strictly
    increasing, births create fresh ids, deaths remove a point present
    immediately before the event. The yielded dict is mutated in place.
    """
    state = {pid: (x, y) for pid, x, y in stream.initial_state}
    prev_time = -stream.depth
    for ev in stream.events:
        if not (prev_time < ev.time <= 0.0):
            raise ReplayError(f"event time {ev.time} out of order")
        prev_time = ev.time
        if ev.kind is EventKind.BIRTH:
            if ev.point_id in state:
                raise ReplayError(f"birth of existing point id {ev.point_id}")
            if ev.mark is None:
                raise ReplayError("birth event without mark")
            state[ev.point_id] = ev.location
        else:
            if ev.point_id not in state:
                raise ReplayError(f"death of absent point id {ev.point_id}")
            del state[ev.point_id]
        yield ev, state


def verify_replay(stream: EventStream) -> int:
    """Replay the whole stream and check it ends in the cached terminal state."""
    state = {pid: (x, y) for pid, x, y in stream.initial_state}
    count = 0
    for _, state in replay_states(stream):
        count += 1
    terminal = {pid: (x, y) for pid, x, y in stream.terminal_state}
    if state != terminal:
        raise ReplayError("replayed terminal state differs from cached state")
    return count


def stream_to_trace(stream: EventStream) -> dict:
    """JSON-ready debugging trace of the stream (not extendable)."""
    return {
        "depth": stream.depth,
        "seed": stream.rng_seed,
        "initial_state": [[pid, x, y] for pid, x, y in stream.initial_state],
        "terminal_state": [[pid, x, y] for pid, x, y in stream.terminal_state],
        "events": [
            {
                "time": ev.time,
                "kind": ev.kind.value,
                "id": ev.point_id,
                "x": ev.location[0],
                "y": ev.location[1],
                "mark": ev.mark,
            }
            for ev in stream.events
        ],
    }
