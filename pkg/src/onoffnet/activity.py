"""Two-state ON/OFF activity model of a network node.

A node alternates between an active state (ON, battery draining) and an idle
state (OFF, no drain).  Sojourns are exponential: the chain leaves ON at rate
``lam`` and OFF at rate ``mu``, so a sojourn of length ``d`` survives with
probability ``exp(-rate * d)``.  A sampled path is an alternating sequence of
timed segments tiling ``[0, horizon]``; the total time spent ON over the
window is the random quantity whose law :mod:`onoffnet.occupancy` describes.

Sampling draws from numpy's PCG64 generator with the seed passed explicitly,
so every trajectory is a pure function of its arguments.  ``GENERATOR_ID`` is
recorded in output file headers so archived runs name the bit stream they
were produced with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

GENERATOR_ID = "numpy-pcg64"

# Tolerance for the tiling checks below; segment arithmetic is carried out in
# float64, so consecutive starts can drift by a few ulps from exact telescoping.
_TILE_TOL = 1e-12


class NodeState(Enum):
    ON = "ON"
    OFF = "OFF"

    @property
    def other(self) -> "NodeState":
        return NodeState.OFF if self is NodeState.ON else NodeState.ON


@dataclass(frozen=True)
class OnOffParams:
    """Transition rates of the activity chain.

    ``lam`` is the intensity of leaving ON, ``mu`` the intensity of leaving
    OFF.  The complementary per-step quantities ``stay_on = 1 - lam`` and
    ``stay_off = 1 - mu`` are exposed read-only; they are meaningful as
    probabilities only when the corresponding rate is at most 1, i.e. when a
    unit time step is a sensible discretisation of the chain.
    """

    lam: float
    mu: float

    def __post_init__(self) -> None:
        for name, value in (("lam", self.lam), ("mu", self.mu)):
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")

    @property
    def stay_on(self) -> float:
        return 1.0 - self.lam

    @property
    def stay_off(self) -> float:
        return 1.0 - self.mu

    def leaving_rate(self, state: NodeState) -> float:
        """Rate at which the chain leaves ``state`` (the negated generator diagonal)."""
        return self.lam if state is NodeState.ON else self.mu


@dataclass(frozen=True)
class Segment:
    state: NodeState
    start: float
    duration: float


@dataclass(frozen=True)
class Trajectory:
    """Alternating ON/OFF segments tiling ``[0, horizon]`` exactly.

    Construction validates the tiling (first start 0, contiguous starts, total
    duration equal to the horizon within ``1e-12`` relative), strict state
    alternation and strictly positive durations.
    """

    horizon: float
    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        if not (math.isfinite(self.horizon) and self.horizon > 0.0):
            raise ValueError(f"horizon must be finite and > 0, got {self.horizon!r}")
        if not self.segments:
            raise ValueError("a trajectory needs at least one segment")
        tol = _TILE_TOL * max(1.0, self.horizon)
        if abs(self.segments[0].start) > tol:
            raise ValueError("first segment must start at 0")
        expected_start = 0.0
        for i, seg in enumerate(self.segments):
            if seg.duration <= 0.0:
                raise ValueError(f"segment {i} has non-positive duration {seg.duration!r}")
            if abs(seg.start - expected_start) > tol:
                raise ValueError(f"segment {i} does not continue the previous one")
            if i > 0 and seg.state is self.segments[i - 1].state:
                raise ValueError(f"segments {i - 1} and {i} do not alternate states")
            expected_start = seg.start + seg.duration
        if abs(expected_start - self.horizon) > tol:
            raise ValueError("segments do not tile the horizon")

    def csv_rows(self) -> list[str]:
        """Rows ``segment_index,state,start,duration`` (no header)."""
        return [
            f"{i},{seg.state.value},{seg.start!r},{seg.duration!r}"
            for i, seg in enumerate(self.segments)
        ]


def sojourn_survival(params: OnOffParams, state: NodeState, duration: float) -> float:
    """Probability that a sojourn in ``state`` lasts longer than ``duration``.

    Equals ``exp(-lam * duration)`` for ON and ``exp(-mu * duration)`` for
    OFF; time-homogeneous, so only the elapsed duration matters.
    """
    if duration < 0.0:
        raise ValueError(f"duration must be >= 0, got {duration!r}")
    return math.exp(-params.leaving_rate(state) * duration)


def sample_trajectory(
    params: OnOffParams,
    initial: NodeState,
    horizon: float,
    seed: int,
) -> Trajectory:
    """Sample one activity path over ``[0, horizon]``.

    Sojourn durations are exponential with the leaving rate of the current
    state; the final sojourn is clipped at the horizon (censored, not
    resampled).  Deterministic in ``(params, initial, horizon, seed)``.
    """
    if not (math.isfinite(horizon) and horizon > 0.0):
        raise ValueError(f"horizon must be finite and > 0, got {horizon!r}")
    rng = np.random.default_rng(seed)
    segments: list[Segment] = []
    state = initial
    elapsed = 0.0
    while elapsed < horizon:
        rate = params.leaving_rate(state)
        if rate == 0.0:
            segments.append(Segment(state, elapsed, horizon - elapsed))
            break
        duration = 0.0
        while duration <= 0.0:
            # 1 - random() lies in (0, 1], keeping log() finite.
            duration = -math.log(1.0 - rng.random()) / rate
        if elapsed + duration >= horizon:
            segments.append(Segment(state, elapsed, horizon - elapsed))
            break
        segments.append(Segment(state, elapsed, duration))
        elapsed += duration
        state = state.other
    return Trajectory(horizon, tuple(segments))


def total_on_time(traj: Trajectory) -> float:
    """Total duration spent ON; in ``[0, horizon]``."""
    return sum(seg.duration for seg in traj.segments if seg.state is NodeState.ON)


def total_off_time(traj: Trajectory) -> float:
    return sum(seg.duration for seg in traj.segments if seg.state is NodeState.OFF)


def monte_carlo_on_times(
    params: OnOffParams,
    initial: NodeState,
    horizon: float,
    n_runs: int,
    base_seed: int,
) -> np.ndarray:
    """Total ON times of ``n_runs`` independent trajectories.

    Per-run seeds are derived from ``base_seed`` through a SeedSequence, so
    the whole batch is reproducible from a single integer.
    """
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs!r}")
    seeds = np.random.SeedSequence(base_seed).generate_state(n_runs, dtype=np.uint64)
    return np.array(
        [total_on_time(sample_trajectory(params, initial, horizon, int(s))) for s in seeds]
    )
