"""Repeated seeded learning trials and their empirical loss distributions.

A batch of k trials at sample size m produces k exact generalization
losses; histogramming them over equal-width slots yields the empirical
distribution that gets compared against the discretized theoretical
bound.  Every trial owns an independent RNG derived from
(master_seed, m, trial_index) by a fixed 64-bit mix, so results are
bit-identical whether trials run serially or on a thread pool.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .learners import ConjunctionTask, ThresholdTask
from .theory import DiscreteDistribution

__all__ = [
    "ExperimentConfig",
    "FIXED_TARGET_INDEX",
    "TrialBatch",
    "derive_trial_seed",
    "histogram",
    "run_trials",
]

Task = ConjunctionTask | ThresholdTask

_MASK64 = 0xFFFF_FFFF_FFFF_FFFF
# SplitMix64 increment and finalizer multipliers (Steele, Lea & Flood).
_GOLDEN_GAMMA = 0x9E37_79B9_7F4A_7C15
_MIX_MULT_1 = 0xBF58_476D_1CE4_E5B9
_MIX_MULT_2 = 0x94D0_49BB_1331_11EB

# Reserved trial index whose stream supplies the shared ground truth in
# fixed-target mode; real trial indices are far below it.
FIXED_TARGET_INDEX = _MASK64


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX_MULT_1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_MULT_2) & _MASK64
    return z ^ (z >> 31)


def derive_trial_seed(master_seed: int, m: int, trial_index: int) -> int:
    """64-bit seed for one trial, a pure function of its coordinates.

    The master seed absorbs m and the trial index through two SplitMix64
    finalizer rounds.  The constants are load-bearing: changing them
    changes every experiment byte downstream.
    """
    h = master_seed & _MASK64
    for word in (m, trial_index):
        h = _mix64((h + _GOLDEN_GAMMA + (word & _MASK64)) & _MASK64)
    return h


def _trial_rng(master_seed: int, m: int, trial_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_trial_seed(master_seed, m, trial_index)))


@dataclass(frozen=True)
class TrialBatch:
    """k exact losses from independent trials at one sample size."""

    task: Task
    m: int
    k: int
    master_seed: int
    losses: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if len(self.losses) != self.k:
            raise ValueError(f"expected {self.k} losses, got {len(self.losses)}")
        if self.losses.size and (self.losses.min() < 0.0 or self.losses.max() > 1.0):
            raise ValueError("losses must lie in [0, 1]")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one learning-curve experiment.

    The schedule runs m = m_start, m_start + m_step, ... up to m_max.
    ``fixed_target`` switches ground-truth generation from once per trial
    (the default, so the loss distribution marginalizes over targets) to
    once per sample size, shared by all k trials.
    """

    task: Task
    num_slots: int
    trials: int
    m_start: int
    m_step: int
    m_max: int
    master_seed: int
    fixed_target: bool = False

    def __post_init__(self) -> None:
        if self.num_slots < 2:
            raise ValueError("need at least 2 slots")
        if self.trials < 1:
            raise ValueError("need at least 1 trial")
        if self.m_start < 1 or self.m_step < 1 or self.m_max < self.m_start:
            raise ValueError(f"bad sample-size schedule ({self.m_start}, {self.m_step}, {self.m_max})")

    def schedule(self) -> list[int]:
        return list(range(self.m_start, self.m_max + 1, self.m_step))


def run_trials(
    task: Task,
    m: int,
    k: int,
    master_seed: int,
    *,
    fixed_target: bool = False,
    workers: int = 1,
) -> TrialBatch:
    """Run k independent trials at sample size m.

    Each trial derives its own RNG, draws a fresh ground truth (or reuses
    the shared one in fixed-target mode), samples m labeled instances,
    learns, and records the exact loss.  Output is ordered by trial index
    and independent of ``workers``.
    """
    if m < 1 or k < 1:
        raise ValueError(f"need m >= 1 and k >= 1, got m={m}, k={k}")
    target = None
    if fixed_target:
        target = task.draw_target(_trial_rng(master_seed, m, FIXED_TARGET_INDEX))

    def one_trial(i: int) -> float:
        return task.trial_loss(m, _trial_rng(master_seed, m, i), target=target)

    if workers <= 1:
        losses = [one_trial(i) for i in range(k)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            losses = list(pool.map(one_trial, range(k)))
    return TrialBatch(task=task, m=m, k=k, master_seed=master_seed, losses=np.array(losses, dtype=float))


def histogram(losses: np.ndarray, num_slots: int) -> DiscreteDistribution:
    """Bin losses in [0, 1] into equal-width slots; masses are counts/k.

    Slot i is [i/l, (i+1)/l) with the last slot closed at 1.0, matching
    the slot layout of the discretized bounds so the two distributions are
    comparable slot by slot.
    """
    losses = np.asarray(losses, dtype=float)
    if losses.size == 0:
        raise ValueError("cannot histogram an empty loss list")
    if num_slots < 2:
        raise ValueError("need at least 2 slots")
    if losses.min() < 0.0 or losses.max() > 1.0:
        raise ValueError("losses must lie in [0, 1]")
    edges = np.arange(1, num_slots) / num_slots
    idx = np.searchsorted(edges, losses, side="right")
    counts = np.bincount(idx, minlength=num_slots)
    return DiscreteDistribution(tuple(counts / losses.size))
