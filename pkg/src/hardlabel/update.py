"""Adaptive half-interval step along the signed probe direction.

Starting from the maximum jump j, the step size halves per trial until a
trial point both decreases the squared source distance and keeps the
adversarial label; if no trial within the halving budget does, the current
point is kept (the revert branch).
"""

from __future__ import annotations

from dataclasses import dataclass

from .boundary import AdversarialPredicate, BoundarySample
from .gradient import GradientProbe
from .image import ImageTensor, add_scaled_clipped, l2_sq_dist
from .oracles import BudgetedOracle


@dataclass(frozen=True)
class UpdateResult:
    """Accepted step (off-boundary until the driver re-projects) or revert.

    Not a BoundarySample on purpose: an accepted trial point sits a finite
    jump away from the boundary, so it has no meaningful bracket_gap yet.
    """

    image: ImageTensor
    label: int
    accepted: bool
    queries_spent: int


def efficient_update(
    current: BoundarySample,
    probe: GradientProbe,
    source: ImageTensor,
    pred: AdversarialPredicate,
    j: float,
    lambda_min_halvings: int,
    oracle: BudgetedOracle,
) -> UpdateResult:
    """Try steps of size j, j/2, j/4, ... along g * probe_direction.

    Every trial point is classified exactly once (one query per trial, at
    most lambda_min_halvings + 1 trials). The first candidate that strictly
    reduces the squared source distance while staying adversarial wins;
    acceptance therefore never increases the source distance. If no step
    size works, the current point stands and the caller moves on.
    """
    if not j > 0:
        raise ValueError(f"max jump j must be positive, got {j}")
    if probe.g not in (-1, 1):
        raise ValueError(f"update needs a signed probe, got g={probe.g}")
    d_current = l2_sq_dist(current.image, source)
    lam = float(j)
    queries = 0
    for _ in range(lambda_min_halvings + 1):
        trial = add_scaled_clipped(current.image, probe.probe_direction, lam * probe.g)
        label = oracle.classify(trial)
        queries += 1
        if pred(label) and l2_sq_dist(trial, source) < d_current:
            return UpdateResult(trial, label, True, queries)
        lam *= 0.5
    return UpdateResult(current.image, current.label, False, queries)
