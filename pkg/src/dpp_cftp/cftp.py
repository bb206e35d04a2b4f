"""Dominated coupling from the past for DPP sampling.

A lower process L (started empty) and an upper process U (started at the
full dominating state) are evolved over one realized dominating path. At a
birth with mark m the cross rule applies: U accepts iff m <= c(L, x) / H
and L accepts iff m <= c(U, x) / H. Repulsion gives c(L, x) >= c(U, x)
whenever L is a subset of U, so the sandwich L <= U is preserved and once
the two processes meet they follow identical transitions. If they have met
by time 0, the common state is an exact draw from the DPP; otherwise the
start time is pushed back (depth doubled, same randomness) and the
coupling is replayed from scratch.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass

from .dominating import (
    DEFAULT_INITIAL_DEPTH,
    EventKind,
    EventStream,
    backward_extend,
    init_stream,
)
from .errors import (
    BatchError,
    NonCoalescenceError,
    ParameterError,
    ReplayError,
    SandwichViolationError,
)
from .kernel import SpectralKernel, Window
from .papangelou import (
    ClampStats,
    Configuration,
    conditional_intensity,
    empty_configuration,
    make_configuration,
    with_point,
    without_point,
)

# Doubling from the default initial depth stops after 14 doublings.
MAX_DEPTH_FACTOR = 2**14


@dataclass(frozen=True)
class CouplingState:
    """Sandwich pair at time 0."""

    lower: Configuration
    upper: Configuration
    coalesced: bool


@dataclass(frozen=True)
class SampleReport:
    """Outcome of one successful replication."""

    points: tuple
    stopping_depth: float
    coalescence_time: float
    events_processed: int
    clamp_count: int
    seed: int
    kernel: dict

    @property
    def count(self) -> int:
        return len(self.points)

    def to_json_dict(self) -> dict:
        return {
            "kernel": self.kernel,
            "seed": self.seed,
            "points": [[x, y] for x, y in self.points],
            "stopping_depth": self.stopping_depth,
            "coalescence_time": self.coalescence_time,
            "events_processed": self.events_processed,
            "clamp_count": self.clamp_count,
        }


def _assert_sandwich(l_ids, u_ids, d_ids, time):
    if not (set(l_ids) <= set(u_ids) <= d_ids):
        raise SandwichViolationError(f"L <= U <= D broken at time {time}")


def couple(
    kernel: SpectralKernel, stream: EventStream, clamps: ClampStats | None = None
):
    """Replay one dominating path and return the sandwich at time 0.

    Returns (CouplingState, coalescence time or None). After coalescence
    the two processes are literally the same object, so the acceptance
    decision is computed once and equality persists by construction.
    """
    h = kernel.H
    upper = make_configuration(kernel, [(x, y) for _, x, y in stream.initial_state])
    u_ids = [pid for pid, _, _ in stream.initial_state]
    lower = empty_configuration(kernel)
    l_ids: list[int] = []
    d_ids = {pid for pid, _, _ in stream.initial_state}

    merged = len(u_ids) == 0
    coalescence_time = -stream.depth if merged else None

    for ev in stream.events:
        pid = ev.point_id
        if ev.kind is EventKind.BIRTH:
            if pid in d_ids:
                raise ReplayError(f"birth of existing point id {pid}")
            d_ids.add(pid)
            x = ev.location
            if merged:
                c = conditional_intensity(kernel, upper, x, clamps)
                if c > 0.0 and ev.mark <= c / h:
                    upper = with_point(kernel, upper, x)
                    u_ids.append(pid)
            else:
                c_low = conditional_intensity(kernel, lower, x, clamps)
                c_up = conditional_intensity(kernel, upper, x, clamps)
                into_upper = c_low > 0.0 and ev.mark <= c_low / h
                into_lower = c_up > 0.0 and ev.mark <= c_up / h
                if into_lower and not into_upper:
                    raise SandwichViolationError(
                        f"repulsion ordering broken at birth t={ev.time}: "
                        f"c(L)={c_low} < c(U)={c_up}"
                    )
                if into_upper:
                    upper = with_point(kernel, upper, x)
                    u_ids.append(pid)
                if into_lower:
                    lower = with_point(kernel, lower, x)
                    l_ids.append(pid)
        else:
            if pid not in d_ids:
                raise ReplayError(f"death of absent point id {pid}")
            d_ids.remove(pid)
            if pid in u_ids:
                upper = without_point(kernel, upper, u_ids.index(pid))
                u_ids.remove(pid)
            if not merged and pid in l_ids:
                lower = without_point(kernel, lower, l_ids.index(pid))
                l_ids.remove(pid)
        if merged:
            _assert_sandwich(u_ids, u_ids, d_ids, ev.time)
        else:
            _assert_sandwich(l_ids, u_ids, d_ids, ev.time)
            if len(l_ids) == len(u_ids):
                if set(l_ids) != set(u_ids):
                    raise SandwichViolationError(
                        f"equal sizes but different ids at time {ev.time}"
                    )
                merged = True
                coalescence_time = ev.time
                lower, l_ids = upper, u_ids

    if merged:
        lower = upper
    return CouplingState(lower, upper, merged), coalescence_time


def sample(
    kernel: SpectralKernel,
    window: Window,
    seed: int,
    max_depth: float | None = None,
    initial_depth: float = DEFAULT_INITIAL_DEPTH,
) -> SampleReport:
    """One exact draw from the DPP (up to kernel truncation).

    Doubles the start depth until the sandwich has coalesced by time 0;
    every pass replays the same extended randomness from scratch. Raises
    NonCoalescenceError once the depth would exceed max_depth.
    events_processed counts events replayed across all passes.
    """
    if max_depth is None:
        max_depth = MAX_DEPTH_FACTOR * initial_depth
    clamps = ClampStats()
    stream = init_stream(kernel, window, seed, initial_depth)
    events_processed = 0
    while True:
        state, coalescence_time = couple(kernel, stream, clamps)
        events_processed += len(stream.events)
        if state.coalesced:
            return SampleReport(
                points=state.lower.points,
                stopping_depth=stream.depth,
                coalescence_time=coalescence_time,
                events_processed=events_processed,
                clamp_count=clamps.negative,
                seed=seed,
                kernel=kernel.summary(),
            )
        if 2.0 * stream.depth > max_depth:
            raise NonCoalescenceError(
                stream.depth, len(state.upper) - len(state.lower)
            )
        stream = backward_extend(stream, 2.0 * stream.depth)


def _run_replication(args):
    kernel, window, seed, max_depth, initial_depth = args
    return sample(kernel, window, seed, max_depth, initial_depth)


def batch(
    kernel: SpectralKernel,
    window: Window,
    seeds,
    max_depth: float | None = None,
    initial_depth: float = DEFAULT_INITIAL_DEPTH,
    jobs: int = 1,
    on_report=None,
) -> list:
    """Independent replications, one per seed.

    Reports come back in seed order regardless of scheduling; on_report
    (if given) is called with each report as it completes. A failed
    replication does not abort the rest: all failures are raised together
    as a BatchError that carries the successful reports.
    """
    seeds = list(seeds)
    if len(set(seeds)) != len(seeds):
        raise ParameterError("replication seeds must be distinct")
    tasks = [(kernel, window, s, max_depth, initial_depth) for s in seeds]
    results: dict[int, SampleReport] = {}
    failures: list[tuple] = []
    if jobs <= 1:
        for t in tasks:
            try:
                rep = _run_replication(t)
            except Exception as exc:  # noqa: BLE001 - collected per seed
                failures.append((t[2], exc))
                continue
            results[rep.seed] = rep
            if on_report is not None:
                on_report(rep)
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_run_replication, t): t[2] for t in tasks}
            for fut in concurrent.futures.as_completed(futures):
                seed = futures[fut]
                try:
                    rep = fut.result()
                except Exception as exc:  # noqa: BLE001
                    failures.append((seed, exc))
                    continue
                results[rep.seed] = rep
                if on_report is not None:
                    on_report(rep)
    reports = [results[s] for s in seeds if s in results]
    if failures:
        raise BatchError(failures, reports)
    return reports
