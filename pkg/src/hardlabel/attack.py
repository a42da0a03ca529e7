"""Attack driver: boundary estimation, probe/update/re-project loop, restarts.

The driver owns the query budget. Every classification anywhere in the run
(including inside boundary searches) passes through one BudgetedOracle whose
observer maintains the best adversarial point seen so far and a per-query
trace. When the budget runs out, whatever that observer holds is the result
-- a budget death deep inside a sub-procedure loses nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .boundary import AdversarialPredicate, estimate_boundary
from .errors import (
    BudgetExhaustedError,
    ImageTooSmallError,
    InvalidReferenceError,
    ZeroVarianceError,
)
from .gradient import probe_gradient
from .image import ImageTensor, l2_sq_dist, make_rng
from .metrics import correlation, perturbation_norm, ssim
from .oracles import BudgetedOracle
from .update import efficient_update

# consecutive zero-query g=0 probes (mask fully clipped away) before giving up;
# prevents a queryless spin when the iterate is saturated at L everywhere
_MAX_DEGENERATE = 100

_MODES = ("untargeted", "targeted")


@dataclass
class AttackConfig:
    delta_min: float = 0.01
    n: int = 20
    theta: float = 0.0196
    j: float = 1.0
    q_max: int = 1000
    seed: int = 0
    mode: str = "untargeted"
    target_class: int | None = None
    lambda_min_halvings: int = 10
    restarts: int = 1

    def __post_init__(self):
        if not self.delta_min > 0:
            raise ValueError(f"delta_min must be positive, got {self.delta_min}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if not self.j > 0:
            raise ValueError(f"max jump j must be positive, got {self.j}")
        if self.q_max < 1:
            raise ValueError(f"q_max must be >= 1, got {self.q_max}")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.mode == "targeted" and self.target_class is None:
            raise ValueError("targeted mode needs target_class")
        if self.mode == "untargeted" and self.target_class is not None:
            raise ValueError("untargeted mode takes no target_class")
        if self.lambda_min_halvings < 0:
            raise ValueError("lambda_min_halvings must be >= 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass(frozen=True)
class ResultMetrics:
    pert_norm: float
    ssim: float  # NaN when the image is too small for any SSIM window
    cc: float  # NaN when either image is constant


@dataclass
class AttackResult:
    best_adversarial: ImageTensor
    best_label: int | None  # None only if no adversarial point was ever observed
    queries_used: int
    trace: list[tuple[int, float]] = field(repr=False)
    metrics: ResultMetrics
    succeeded: bool


class _Recorder:
    """Observes every charged query; keeps best-so-far and the trace.

    Installed as BudgetedOracle.on_query. pred is attached only after the
    source classification defines it, so the very first trace entry carries
    an infinite best distance.
    """

    def __init__(self, source: ImageTensor):
        self.source = source
        self.pred: AdversarialPredicate | None = None
        self.best_image: ImageTensor | None = None
        self.best_label: int | None = None
        self.best_l2 = math.inf
        self.trace: list[tuple[int, float]] = []
        self.count = 0

    def observe(self, image: ImageTensor, label: int) -> None:
        self.count += 1
        if self.pred is not None and self.pred(label):
            d = l2_sq_dist(image, self.source)
            if d < self.best_l2:
                self.best_l2 = d
                self.best_image = image
                self.best_label = label
        self.trace.append((self.count, self.best_l2))


def _result_metrics(best: ImageTensor, source: ImageTensor) -> ResultMetrics:
    """Metrics triple with NaN where a metric is undefined for this input."""
    h, w, _ = source.shape
    win = min(11, h, w)
    if win % 2 == 0:
        win -= 1
    try:
        s = ssim(best, source, win) if win >= 3 else math.nan
    except ImageTooSmallError:
        s = math.nan
    try:
        cc = correlation(best, source)
    except ZeroVarianceError:
        cc = math.nan
    return ResultMetrics(perturbation_norm(best, source), s, cc)


def _finalize(recorder: _Recorder, budgeted: BudgetedOracle, source: ImageTensor,
              fallback: ImageTensor, succeeded: bool) -> AttackResult:
    best = recorder.best_image if recorder.best_image is not None else fallback
    return AttackResult(
        best_adversarial=best,
        best_label=recorder.best_label,
        queries_used=budgeted.q_used,
        trace=recorder.trace,
        metrics=_result_metrics(best, source),
        succeeded=succeeded,
    )


def run_attack(source: ImageTensor, reference: ImageTensor, oracle,
               config: AttackConfig) -> AttackResult:
    """Full attack on one source/reference pair under config.q_max queries.

    The source and reference classifications are charged to the budget
    (label-only access grants nothing for free). succeeded is False when the
    budget dies before the first boundary sample exists; the result then
    holds the best adversarial point observed so far (at worst the
    reference).

    Raises InvalidReferenceError when the labels contradict the mode:
    reference classifying like the source (untargeted), or reference not of
    the target class / source already of the target class (targeted).
    """
    budgeted = BudgetedOracle(oracle, config.q_max)
    recorder = _Recorder(source)
    budgeted.on_query = recorder.observe
    rng = make_rng(config.seed)

    source_label = budgeted.classify(source)
    if config.mode == "targeted" and config.target_class == source_label:
        raise InvalidReferenceError(
            f"source already classifies as target class {config.target_class}"
        )
    pred = AdversarialPredicate(config.mode, source_label, config.target_class)
    recorder.pred = pred

    succeeded = False
    try:
        reference_label = budgeted.classify(reference)
        if not pred(reference_label):
            raise InvalidReferenceError(
                f"reference classifies as {reference_label}, which is not adversarial "
                f"({config.mode} mode, source label {source_label})"
            )
        current = estimate_boundary(source, reference, reference_label, pred,
                                    config.delta_min, budgeted)
        succeeded = True
        degenerate = 0
        while True:
            probe = probe_gradient(current, source, pred, config.n, config.theta,
                                   config.delta_min, budgeted, rng)
            if probe.g == 0:
                if probe.queries_spent == 0:
                    degenerate += 1
                    if degenerate >= _MAX_DEGENERATE:
                        break
                else:
                    degenerate = 0
                continue  # a zero sign carries no direction; re-probe
            degenerate = 0
            step = efficient_update(current, probe, source, pred, config.j,
                                    config.lambda_min_halvings, budgeted)
            if step.accepted:
                current = estimate_boundary(source, step.image, step.label, pred,
                                            config.delta_min, budgeted)
            # on revert the iterate stands; the next probe draws a fresh mask
    except BudgetExhaustedError:
        pass
    return _finalize(recorder, budgeted, source, reference, succeeded)


def run_with_restarts(source: ImageTensor, references: list[ImageTensor], oracle,
                      config: AttackConfig) -> AttackResult:
    """One attack per reference, each with an even share of the query budget.

    Every restart is an independent run_attack with q_max // len(references)
    queries and the same seed (fresh generator per run); any remainder
    queries are left unspent. References whose label contradicts the mode
    are skipped; if all are invalid the last error propagates. Returns the
    best run's result unchanged, preferring runs that reached a boundary
    sample, then lower perturbation norm. queries_used and the trace are
    the winning run's own accounting.
    """
    if not references:
        raise ValueError("need at least one reference")
    share = config.q_max // len(references)
    if share < 1:
        raise ValueError(
            f"budget {config.q_max} cannot cover {len(references)} restarts"
        )
    best: AttackResult | None = None
    last_invalid: InvalidReferenceError | None = None
    for reference in references:
        sub = AttackConfig(
            delta_min=config.delta_min, n=config.n, theta=config.theta, j=config.j,
            q_max=share, seed=config.seed, mode=config.mode,
            target_class=config.target_class,
            lambda_min_halvings=config.lambda_min_halvings, restarts=1,
        )
        try:
            result = run_attack(source, reference, oracle, sub)
        except InvalidReferenceError as e:
            last_invalid = e
            continue
        if best is None or _run_key(result) < _run_key(best):
            best = result
    if best is None:
        raise last_invalid if last_invalid is not None else InvalidReferenceError(
            "no valid reference"
        )
    return best


def _run_key(result: AttackResult) -> tuple[int, float]:
    return (0 if result.succeeded else 1, result.metrics.pert_norm)
