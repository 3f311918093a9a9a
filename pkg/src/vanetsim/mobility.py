"""Random-waypoint mobility over a rectangular arena.

Vehicles spawn uniformly, pick a waypoint and a speed, drive straight at
constant speed, arrive, pause, and repeat. State lives in flat numpy
arrays; the per-tick update is delegated to the kernels module. One
uniform triple per vehicle is drawn every tick whether or not it is
consumed, which keeps trajectories identical across kernel backends and
independent of arrival patterns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import waypoint_step
from .model import ValidationError


@dataclass(frozen=True)
class MobilityConfig:
    vehicle_count: int = 15
    arena_width: float = 800.0
    arena_height: float = 800.0
    speed_min: float = 5.0
    speed_max: float = 15.0
    pause_time: float = 0.0
    tick_seconds: float = 1.0

    def __post_init__(self) -> None:
        if self.vehicle_count < 1:
            raise ValidationError("vehicle_count must be at least 1")
        if self.arena_width <= 0 or self.arena_height <= 0:
            raise ValidationError("arena dimensions must be positive")
        if self.speed_min < 0 or self.speed_max < self.speed_min:
            raise ValidationError("need 0 <= speed_min <= speed_max")
        if self.pause_time < 0:
            raise ValidationError("pause_time must be non-negative")
        if self.tick_seconds <= 0:
            raise ValidationError("tick_seconds must be positive")


@dataclass
class RandomWaypointModel:
    """Mutable mobility state for a fleet of vehicles."""

    config: MobilityConfig
    rng: np.random.Generator
    now: float = 0.0
    x: np.ndarray = field(init=False)
    y: np.ndarray = field(init=False)
    vx: np.ndarray = field(init=False)
    vy: np.ndarray = field(init=False)
    waypoint_x: np.ndarray = field(init=False)
    waypoint_y: np.ndarray = field(init=False)
    speed: np.ndarray = field(init=False)
    pause_until: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        cfg = self.config
        n = cfg.vehicle_count
        self.x = self.rng.random(n) * cfg.arena_width
        self.y = self.rng.random(n) * cfg.arena_height
        self.waypoint_x = self.rng.random(n) * cfg.arena_width
        self.waypoint_y = self.rng.random(n) * cfg.arena_height
        self.speed = cfg.speed_min + self.rng.random(n) * (cfg.speed_max - cfg.speed_min)
        self.vx = np.zeros(n)
        self.vy = np.zeros(n)
        self.pause_until = np.full(n, -np.inf)

    def step(self) -> None:
        """Advance every vehicle by one tick."""
        cfg = self.config
        cand = self.rng.random((cfg.vehicle_count, 3))
        waypoint_step(
            self.x, self.y, self.waypoint_x, self.waypoint_y,
            self.speed, self.pause_until, self.vx, self.vy,
            cand, self.now, cfg.tick_seconds,
            cfg.arena_width, cfg.arena_height,
            cfg.speed_min, cfg.speed_max, cfg.pause_time,
        )
        self.now += cfg.tick_seconds

    def positions(self) -> np.ndarray:
        """(n, 2) copy of current positions."""
        return np.column_stack((self.x, self.y))

    def position_of(self, vehicle_id: int) -> tuple[float, float]:
        return (float(self.x[vehicle_id]), float(self.y[vehicle_id]))
