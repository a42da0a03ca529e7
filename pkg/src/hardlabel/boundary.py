"""Half-interval search for a near-boundary adversarial point.

Walks the straight segment between a clean source and an adversarial
reference, repeatedly classifying the midpoint and keeping a two-sided
bracket {non-adversarial, adversarial}. Terminates once the bracket's
endpoints are within delta_min in the max-norm, and always returns the
adversarial-side endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidReferenceError
from .image import ImageTensor, linf_dist, midpoint
from .oracles import BudgetedOracle

_MODES = ("untargeted", "targeted")


@dataclass(frozen=True)
class AdversarialPredicate:
    """Decides whether a label counts as adversarial for this attack.

    Untargeted: any label other than the source's. Targeted: exactly the
    chosen target class.
    """

    mode: str
    source_label: int
    target_label: int | None = None

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.mode == "targeted":
            if self.target_label is None:
                raise ValueError("targeted mode needs a target label")
            if self.target_label == self.source_label:
                raise ValueError("target label equals source label; nothing to attack")
        elif self.target_label is not None:
            raise ValueError("untargeted mode takes no target label")

    def __call__(self, label: int) -> bool:
        if self.mode == "untargeted":
            return label != self.source_label
        return label == self.target_label


@dataclass(frozen=True)
class BoundarySample:
    """An adversarial image within bracket_gap (max-norm) of the class boundary."""

    image: ImageTensor
    label: int
    bracket_gap: float
    queries_spent: int


def estimate_boundary(
    source: ImageTensor,
    reference: ImageTensor,
    reference_label: int,
    pred: AdversarialPredicate,
    delta_min: float,
    oracle: BudgetedOracle,
) -> BoundarySample:
    """Bisect source->reference until the bracket is delta_min-tight.

    Both endpoint labels are the caller's knowledge: the source is
    non-adversarial by construction of pred, and reference_label was paid
    for by whoever produced the reference. No queries are spent on them
    here; every query goes to a midpoint.

    Query count is ceil(log2(gap0/delta_min)) for an initial gap gap0 >
    delta_min, since the endpoint-to-endpoint max-norm gap exactly halves
    per step.

    Raises InvalidReferenceError if the reference is not adversarial, and
    lets BudgetExhaustedError propagate (the driver's recorder has already
    seen every adversarial midpoint, so nothing is lost).
    """
    if not delta_min > 0:
        raise ValueError(f"delta_min must be positive, got {delta_min}")
    if not pred(reference_label):
        raise InvalidReferenceError(
            f"reference label {reference_label} is not adversarial ({pred.mode} mode, "
            f"source label {pred.source_label})"
        )
    lo = source  # non-adversarial side
    hi = reference  # adversarial side
    hi_label = reference_label
    gap = linf_dist(lo, hi)
    queries = 0
    while gap > delta_min:
        mid = midpoint(lo, hi)
        label = oracle.classify(mid)
        queries += 1
        if pred(label):
            hi, hi_label = mid, label
        else:
            lo = mid
        new_gap = linf_dist(lo, hi)
        if new_gap >= gap:
            # midpoint hit float resolution; the bracket cannot tighten further
            break
        gap = new_gap
    return BoundarySample(hi, hi_label, gap, queries)
