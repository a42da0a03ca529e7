"""Simplified decision-boundary random walk, the comparison baseline.

Starts at the adversarial reference. Each round composes one candidate: a
random step along the sphere around the source (exploration, relative scale
step_orth) followed by a contraction toward the source (exploitation,
relative step step_src). The candidate is classified once and replaces the
iterate only if still adversarial, so the iterate is adversarial at all
times. Both steps adapt multiplicatively toward a ~50% acceptance rate --
with step_src well below step_orth, round acceptance is dominated by the
orthogonal move. Runs under the same oracle/budget/trace contracts as the
main attack, so traces are directly comparable. Untargeted only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attack import AttackResult, _finalize, _Recorder
from .boundary import AdversarialPredicate
from .errors import BudgetExhaustedError, InvalidReferenceError
from .image import ImageTensor, make_rng
from .oracles import BudgetedOracle

_ORTH_FLOOR = 1e-6
_ORTH_CEIL = 1.0
_SRC_CEIL = 0.5


@dataclass
class BaselineConfig:
    """Walk parameters; 1e-2 initial steps are the conventional library default."""

    q_max: int = 1000
    seed: int = 0
    step_orth: float = 0.01  # relative scale of the in-sphere exploration step
    step_src: float = 0.01  # relative contraction toward the source; 0 disables
    adapt_up: float = 1.1
    adapt_down: float = 0.9
    adapt_window: int = 10

    def __post_init__(self):
        if self.q_max < 1:
            raise ValueError(f"q_max must be >= 1, got {self.q_max}")
        if not 0 < self.step_orth <= _ORTH_CEIL:
            raise ValueError(f"step_orth must be in (0, {_ORTH_CEIL}], got {self.step_orth}")
        if not 0 <= self.step_src <= _SRC_CEIL:
            raise ValueError(f"step_src must be in [0, {_SRC_CEIL}], got {self.step_src}")
        if self.adapt_window < 1:
            raise ValueError("adapt_window must be >= 1")


class _StepAdapter:
    """Multiplicative step control over fixed-size outcome windows."""

    def __init__(self, value: float, up: float, down: float, window: int,
                 floor: float, ceil: float):
        self.value = value
        self.up = up
        self.down = down
        self.window = window
        self.floor = floor
        self.ceil = ceil
        self._hits = 0
        self._trials = 0

    def record(self, success: bool) -> None:
        self._trials += 1
        self._hits += int(success)
        if self._trials < self.window:
            return
        rate = self._hits / self._trials
        if rate > 0.5:
            self.value *= self.up
        elif rate < 0.5:
            self.value *= self.down
        self.value = float(np.clip(self.value, self.floor, self.ceil))
        self._hits = 0
        self._trials = 0


def run_boundary_attack(source: ImageTensor, reference: ImageTensor, oracle,
                        config: BaselineConfig) -> AttackResult:
    """Random boundary walk from the reference under config.q_max queries.

    One query per round, spent on the composed orthogonal-plus-contraction
    candidate. For 1-pixel images the sphere has no tangent directions and
    rounds reduce to pure contractions. Same seed, same trace.
    """
    budgeted = BudgetedOracle(oracle, config.q_max)
    recorder = _Recorder(source)
    budgeted.on_query = recorder.observe
    rng = make_rng(config.seed)

    source_label = budgeted.classify(source)
    pred = AdversarialPredicate("untargeted", source_label)
    recorder.pred = pred

    orth = _StepAdapter(config.step_orth, config.adapt_up, config.adapt_down,
                        config.adapt_window, _ORTH_FLOOR, _ORTH_CEIL)
    src = _StepAdapter(config.step_src, config.adapt_up, config.adapt_down,
                       config.adapt_window, 0.0, _SRC_CEIL)

    succeeded = False
    try:
        reference_label = budgeted.classify(reference)
        if not pred(reference_label):
            raise InvalidReferenceError(
                f"reference classifies as {reference_label}, same as the source"
            )
        succeeded = True
        iterate = reference
        while True:
            delta = iterate.pixels - source.pixels
            radius = float(np.sqrt(np.sum(delta * delta)))
            # exploration: random direction tangent to the sphere of radius r
            eta = rng.standard_normal(source.shape)
            radial = delta / radius
            eta -= np.sum(eta * radial) * radial
            norm = float(np.sqrt(np.sum(eta * eta)))
            moved = delta
            if norm > 0.0:  # zero tangent space (1-pixel image): contraction only
                eta *= orth.value * radius / norm
                moved = delta + eta
                moved = moved * (radius / float(np.sqrt(np.sum(moved * moved))))
            # keep the sphere move on the sphere despite box clipping: clip,
            # restore the radius, clip once more (residual shrink is tiny)
            pixels = np.clip(source.pixels + moved, 0.0, source.range)
            moved = pixels - source.pixels
            norm = float(np.sqrt(np.sum(moved * moved)))
            if norm > 0.0:
                moved = moved * (radius / norm)
            pixels = np.clip(source.pixels + moved, 0.0, source.range)
            moved = (pixels - source.pixels) * (1.0 - src.value)
            candidate = ImageTensor(
                np.clip(source.pixels + moved, 0.0, source.range), source.range
            )
            accepted = pred(budgeted.classify(candidate))
            if accepted:
                iterate = candidate
            orth.record(accepted)
            src.record(accepted)
    except BudgetExhaustedError:
        pass
    return _finalize(recorder, budgeted, source, reference, succeeded)
