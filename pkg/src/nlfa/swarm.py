"""Particle-swarm adaptation of the solver hyper-parameters.

A small swarm of particles searches the (lambda, eta) plane online. Every
outer iteration each particle in turn applies its position to one training
iteration of the SHARED factor state, scores the resulting model on the
validation set, updates its personal best and the swarm's global best, and
then moves by the classical inertia + attraction rule with its velocity and
position clamped to configured boxes. Sharing one factor state across
particles keeps memory at a single model and lets the hyper-parameters
drift while training progresses.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .admm import (
    FactorState,
    HyperParams,
    IterationRecord,
    TerminationPolicy,
    TrainReport,
    check_termination,
    train_iteration,
)
from .data import HdiMatrix
from .errors import ConfigError, DomainError, NumericError

# Sentinel for the best validation error before any measurement.
INITIAL_BEST = 100.0


@dataclass(frozen=True)
class SwarmConfig:
    """Swarm shape, evolution constants, and search-box bounds.

    The inertia/acceleration defaults are the standard constriction
    values. The eta upper bound is the classical step-size limit
    (1 + sqrt(5)) / 2 for multiplier ascent. Velocity bounds are derived
    as +/- ``velocity_fraction`` of the position box extent.
    """

    size: int = 10
    inertia: float = 0.729
    accel_pbest: float = 1.496
    accel_gbest: float = 1.496
    lambda_bounds: tuple[float, float] = (2.0 ** -8, 4.0)
    eta_bounds: tuple[float, float] = (2.0 ** -8, 1.618)
    velocity_fraction: float = 0.2

    def __post_init__(self):
        if self.size < 2:
            raise ConfigError(f"swarm size must be >= 2, got {self.size}")
        for name, (lo, hi) in (("lambda", self.lambda_bounds), ("eta", self.eta_bounds)):
            if not (math.isfinite(lo) and math.isfinite(hi) and 0 < lo < hi):
                raise ConfigError(f"{name} bounds must satisfy 0 < lo < hi, got ({lo}, {hi})")
        if not 0 < self.velocity_fraction:
            raise ConfigError("velocity_fraction must be positive")
        if self.inertia < 0 or self.accel_pbest < 0 or self.accel_gbest < 0:
            raise ConfigError("inertia and acceleration constants must be nonnegative")


@dataclass
class Particle:
    """One candidate (lambda, eta) point with its velocity and memory."""

    velocity: np.ndarray
    position: np.ndarray
    pbest: np.ndarray
    pbest_m: float = math.inf


@dataclass
class Swarm:
    """Particles plus the swarm-level best trackers and bounds."""

    particles: list[Particle]
    pos_lo: np.ndarray
    pos_hi: np.ndarray
    vel_lo: np.ndarray
    vel_hi: np.ndarray
    inertia: float
    accel_pbest: float
    accel_gbest: float
    rng: np.random.Generator
    gbest: np.ndarray | None = None
    gbest_m: float = math.inf
    f_hat: float = INITIAL_BEST

    @property
    def size(self) -> int:
        return len(self.particles)


def init_swarm(config: SwarmConfig, seed) -> Swarm:
    """Build a seeded swarm: positions uniform in the box, velocities zero.

    Each particle starts with its personal best at its own position and no
    recorded fitness; the global best stays unset until the first
    measurement beats the ``f_hat`` sentinel.
    """
    rng = np.random.default_rng(seed)
    pos_lo = np.array([config.lambda_bounds[0], config.eta_bounds[0]])
    pos_hi = np.array([config.lambda_bounds[1], config.eta_bounds[1]])
    vel_hi = config.velocity_fraction * (pos_hi - pos_lo)
    particles = []
    for _ in range(config.size):
        position = pos_lo + rng.random(2) * (pos_hi - pos_lo)
        particles.append(
            Particle(velocity=np.zeros(2), position=position, pbest=position.copy())
        )
    return Swarm(
        particles=particles,
        pos_lo=pos_lo,
        pos_hi=pos_hi,
        vel_lo=-vel_hi,
        vel_hi=vel_hi,
        inertia=config.inertia,
        accel_pbest=config.accel_pbest,
        accel_gbest=config.accel_gbest,
        rng=rng,
    )


def evolve_particle(swarm: Swarm, q: int) -> None:
    """Advance particle ``q`` one step and clamp it back into the boxes.

    Velocity picks up inertia plus random attractions toward the personal
    and global bests (fresh uniform draws per component); the position
    moves by the unclamped velocity, then both are clamped to their
    bounds. Requires at least one recorded fitness measurement.
    """
    if swarm.gbest is None:
        raise DomainError("cannot evolve before any fitness measurement")
    p = swarm.particles[q]
    r1 = swarm.rng.random(2)
    r2 = swarm.rng.random(2)
    velocity = (
        swarm.inertia * p.velocity
        + swarm.accel_pbest * r1 * (p.pbest - p.position)
        + swarm.accel_gbest * r2 * (swarm.gbest - p.position)
    )
    position = p.position + velocity
    p.velocity = np.clip(velocity, swarm.vel_lo, swarm.vel_hi)
    p.position = np.clip(position, swarm.pos_lo, swarm.pos_hi)


def measure_and_update(swarm: Swarm, q: int, m: float) -> None:
    """Record validation error ``m`` for particle ``q``'s current position.

    Strict improvement updates the particle's personal best; beating the
    swarm-wide running minimum ``f_hat`` also moves the global best. Ties
    keep the incumbent.
    """
    if not math.isfinite(m):
        raise NumericError(f"validation error must be finite, got {m}")
    if m < 0:
        raise DomainError(f"validation error must be nonnegative, got {m}")
    p = swarm.particles[q]
    if m < p.pbest_m:
        p.pbest = p.position.copy()
        p.pbest_m = m
    if m < swarm.f_hat:
        swarm.f_hat = m
        swarm.gbest = p.position.copy()
        swarm.gbest_m = m


def adaptive_train(
    train: HdiMatrix,
    validation: HdiMatrix,
    state: FactorState,
    swarm: Swarm,
    policy: TerminationPolicy,
    metric: str = "rmse",
) -> tuple[FactorState, TrainReport]:
    """Train the shared state while the swarm adapts (lambda, eta).

    Per outer iteration, each particle in index order runs one training
    iteration at its position, is scored on the validation set, updates
    the best trackers, and evolves (skipped only while no measurement has
    seeded the global best). Termination is judged on the training RMSE
    measured after each full sweep. The report logs, per sweep, the best
    validation error seen in that sweep and the global-best position.
    """
    if validation.nnz == 0:
        raise DomainError("validation set is empty")
    metric_fn = metrics.resolve(metric)
    report = TrainReport()
    history: list[float] = []
    while True:
        t0 = time.perf_counter()
        sweep_best_m = math.inf
        last_hp = None
        for q in range(swarm.size):
            particle = swarm.particles[q]
            hp = HyperParams(float(particle.position[0]), float(particle.position[1]))
            last_hp = hp
            try:
                train_iteration(state, train, hp)
            except NumericError as exc:
                raise NumericError(f"iteration {len(history) + 1}: {exc}") from exc
            m = metric_fn(state, validation).value
            measure_and_update(swarm, q, m)
            if swarm.gbest is not None:
                evolve_particle(swarm, q)
            sweep_best_m = min(sweep_best_m, m)
        train_rmse = metrics.rmse(state, train).value
        history.append(train_rmse)
        if swarm.gbest is not None:
            lam, eta = float(swarm.gbest[0]), float(swarm.gbest[1])
        else:
            lam, eta = last_hp.lam, last_hp.eta
        report.records.append(
            IterationRecord(
                train_rmse=train_rmse,
                validation_m=sweep_best_m,
                lam=float(lam),
                eta=float(eta),
                elapsed_ms=(time.perf_counter() - t0) * 1e3,
            )
        )
        reason = check_termination(history, policy)
        if reason is not None:
            report.reason = reason
            return state, report
