"""Zeroth-order estimation of the gradient sign at a boundary point.

Perturbs n random pixels of the current boundary point by theta*L, puts the
perturbed point back on the decision boundary, and compares source distances.
The returned sign g says whether moving along the (re-projected) probe
direction helps (-1: it hurts, +1: it helps, 0: no information).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boundary import AdversarialPredicate, BoundarySample, estimate_boundary
from .image import ImageTensor, add_scaled_clipped, l2_sq_dist, sparse_mask
from .oracles import BudgetedOracle


@dataclass(frozen=True)
class GradientProbe:
    """Outcome of one probe: the re-projected point, its direction, and g.

    g == sign(d1 - d2) with d1/d2 the squared source distances of the current
    and perturbed boundary points.
    """

    perturbed_boundary: BoundarySample
    g: int
    probe_direction: ImageTensor  # perturbed_boundary.image - current.image
    queries_spent: int


def probe_gradient(
    current: BoundarySample,
    source: ImageTensor,
    pred: AdversarialPredicate,
    n: int,
    theta: float,
    delta_min: float,
    oracle: BudgetedOracle,
    rng: np.random.Generator,
) -> GradientProbe:
    """One probe: perturb n pixels by theta*L, re-project, compare distances.

    The raw perturbed candidate is classified once. If it stayed adversarial
    it is bisected back toward the source; if it fell into the source class
    the bisection runs from the candidate toward the current point (which is
    adversarial by contract). Either way the distance comparison happens
    between two points on the boundary, so g is not biased by displacement
    normal to it.

    A candidate that clipping leaves identical to the current point carries
    no information: g = 0 with zero queries spent, and the caller should
    re-probe with a fresh mask.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    mask = sparse_mask(current.image.shape, n, rng, current.image.range)
    candidate = add_scaled_clipped(current.image, mask, theta)
    zero_dir = ImageTensor(np.zeros(current.image.shape), current.image.range)
    if np.array_equal(candidate.pixels, current.image.pixels):
        return GradientProbe(current, 0, zero_dir, 0)
    label = oracle.classify(candidate)
    if pred(label):
        projected = estimate_boundary(source, candidate, label, pred, delta_min, oracle)
    else:
        projected = estimate_boundary(candidate, current.image, current.label, pred,
                                      delta_min, oracle)
    d1 = l2_sq_dist(current.image, source)
    d2 = l2_sq_dist(projected.image, source)
    if d2 > d1:
        g = -1
    elif d2 < d1:
        g = 1
    else:
        g = 0
    direction = ImageTensor(projected.image.pixels - current.image.pixels,
                            current.image.range)
    return GradientProbe(projected, g, direction, 1 + projected.queries_spent)
