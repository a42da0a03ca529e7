"""Label-only classifier oracles and query-budget accounting.

Everything the attacks see of a model goes through ``classify(image) -> int``:
no logits, no probabilities, just the final label.  Built-in oracles exist for
testing against closed-form decision boundaries; ``ExternalOracle`` binds an
arbitrary model runtime over a line-delimited subprocess protocol.
"""

from __future__ import annotations

import json
import shlex
import subprocess
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BudgetExhaustedError,
    DimensionChainError,
    ExternalProtocolError,
    ParseError,
    ShapeMismatchError,
)
from .image import ImageTensor

_ACTIVATIONS = {
    "relu": lambda v: np.maximum(v, 0.0),
    "identity": lambda v: v,
}


@dataclass
class LinearOracle:
    """Hyperplane classifier: positive-side label iff w . flat(x) + b >= 0.

    The analytic workhorse of the test suite -- its boundary is known in
    closed form, so search procedures can be checked exactly.
    """

    weights: np.ndarray
    bias: float
    labels: tuple[int, int] = (0, 1)  # (negative side, positive side)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        self.bias = float(self.bias)
        self.labels = (int(self.labels[0]), int(self.labels[1]))

    def score(self, image: ImageTensor) -> float:
        flat = image.flat
        if flat.size != self.weights.size:
            raise ShapeMismatchError(
                f"oracle expects {self.weights.size} pixels, image has {flat.size}"
            )
        return float(self.weights @ flat + self.bias)

    def classify(self, image: ImageTensor) -> int:
        return self.labels[1] if self.score(image) >= 0.0 else self.labels[0]


@dataclass
class NearestCentroidOracle:
    """Assigns the label of the nearest centroid in L2; first wins on ties."""

    centroids: list[tuple[int, ImageTensor]]

    def __post_init__(self):
        if len(self.centroids) < 2:
            raise ValueError("need at least 2 centroids")
        shapes = {c.shape for _, c in self.centroids}
        if len(shapes) != 1:
            raise ShapeMismatchError(f"centroid shapes differ: {sorted(shapes)}")

    @property
    def expected_shape(self) -> tuple[int, int, int]:
        return self.centroids[0][1].shape

    def classify(self, image: ImageTensor) -> int:
        if image.shape != self.expected_shape:
            raise ShapeMismatchError(
                f"oracle expects shape {self.expected_shape}, got {image.shape}"
            )
        dists = [float(np.sum((image.pixels - c.pixels) ** 2)) for _, c in self.centroids]
        return int(self.centroids[int(np.argmin(dists))][0])


@dataclass
class MlpOracle:
    """Small feedforward network: affine layers + relu/identity, argmax label.

    Argmax ties break to the lowest class index (np.argmax already does).
    """

    layers: list[tuple[np.ndarray, np.ndarray, str]]  # (W: out x in, b: out, activation)
    num_classes: int
    expected_shape: tuple[int, int, int] | None = None

    def __post_init__(self):
        if not self.layers:
            raise ValueError("need at least one layer")
        norm = []
        for w, b, act in self.layers:
            w = np.asarray(w, dtype=np.float64)
            b = np.asarray(b, dtype=np.float64).reshape(-1)
            if w.ndim != 2 or b.size != w.shape[0]:
                raise DimensionChainError(
                    f"layer weight {w.shape} incompatible with bias length {b.size}"
                )
            if act not in _ACTIVATIONS:
                raise ValueError(f"unknown activation {act!r}")
            norm.append((w, b, act))
        for (w1, _, _), (w2, _, _) in zip(norm, norm[1:]):
            if w2.shape[1] != w1.shape[0]:
                raise DimensionChainError(
                    f"layer output width {w1.shape[0]} feeds layer expecting {w2.shape[1]}"
                )
        if norm[-1][0].shape[0] != self.num_classes:
            raise DimensionChainError(
                f"final layer width {norm[-1][0].shape[0]} != num_classes {self.num_classes}"
            )
        self.layers = norm

    def logits(self, image: ImageTensor) -> np.ndarray:
        flat = image.flat
        if self.expected_shape is not None and image.shape != self.expected_shape:
            raise ShapeMismatchError(
                f"oracle expects shape {self.expected_shape}, got {image.shape}"
            )
        if flat.size != self.layers[0][0].shape[1]:
            raise ShapeMismatchError(
                f"oracle expects {self.layers[0][0].shape[1]} pixels, image has {flat.size}"
            )
        v = flat
        for w, b, act in self.layers:
            v = _ACTIVATIONS[act](w @ v + b)
        return v

    def classify(self, image: ImageTensor) -> int:
        return int(np.argmax(self.logits(image)))


class ExternalOracle:
    """Adapter to an external classifier process over its standard streams.

    One request line per classify: {"shape":[H,W,C],"range":L,"pixels":[...]}
    answered by one response line {"label": int}, UTF-8, newline-terminated.
    The child must answer deterministically for a given image; the attacks
    assume labels are pure functions of pixels.
    """

    def __init__(self, command: str, num_classes: int | None = None):
        self.command = command
        self.num_classes = num_classes
        self._proc: subprocess.Popen | None = None

    def _process(self) -> subprocess.Popen:
        if self._proc is None:
            try:
                self._proc = subprocess.Popen(
                    shlex.split(self.command),
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as e:
                raise ExternalProtocolError(f"cannot spawn oracle {self.command!r}: {e}") from e
        if self._proc.poll() is not None:
            raise ExternalProtocolError(
                f"oracle process exited with status {self._proc.returncode}"
            )
        return self._proc

    def classify(self, image: ImageTensor) -> int:
        proc = self._process()
        request = json.dumps(
            {"shape": list(image.shape), "range": image.range, "pixels": image.flat.tolist()}
        )
        try:
            proc.stdin.write(request + "\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            raise ExternalProtocolError(f"oracle stdin closed: {e}") from e
        line = proc.stdout.readline()
        if not line:
            raise ExternalProtocolError("oracle closed its output stream mid-conversation")
        try:
            reply = json.loads(line)
        except json.JSONDecodeError as e:
            raise ExternalProtocolError(f"malformed oracle response {line!r}") from e
        if not isinstance(reply, dict) or not isinstance(reply.get("label"), int):
            raise ExternalProtocolError(f"oracle response missing integer label: {line!r}")
        label = reply["label"]
        if label < 0 or (self.num_classes is not None and label >= self.num_classes):
            raise ExternalProtocolError(f"oracle label {label} out of range")
        return label

    def close(self) -> None:
        if self._proc is not None:
            if self._proc.poll() is None:
                self._proc.stdin.close()
                try:
                    self._proc.wait(timeout=5)
                except subprocess.TimeoutExpired:
                    self._proc.kill()
                    self._proc.wait()
            self._proc = None

    def __enter__(self) -> "ExternalOracle":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class BudgetedOracle:
    """Query-counting wrapper; the attack's entire resource model.

    Once q_used reaches q_max the inner oracle is unreachable -- classify
    raises BudgetExhaustedError before touching it.  Single-owner: one wrapper
    per attack run.  ``on_query`` (if set) observes every charged query; the
    driver uses it to maintain best-so-far across all sub-procedures.
    """

    def __init__(self, inner, q_max: int):
        if q_max < 0:
            raise ValueError(f"q_max must be non-negative, got {q_max}")
        self.inner = inner
        self.q_max = int(q_max)
        self.q_used = 0
        self.on_query = None  # callable(image, label) | None

    @property
    def remaining_budget(self) -> int:
        return self.q_max - self.q_used

    def classify(self, image: ImageTensor) -> int:
        if self.q_used >= self.q_max:
            raise BudgetExhaustedError(f"query budget of {self.q_max} exhausted")
        self.q_used += 1
        label = self.inner.classify(image)
        if self.on_query is not None:
            self.on_query(image, label)
        return label


def _require(doc: dict, key: str, context: str):
    if not isinstance(doc, dict) or key not in doc:
        raise ParseError(f"{context}: missing field {key!r}")
    return doc[key]


def _load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: not valid JSON: {e}") from e


def load_mlp(path) -> MlpOracle:
    """Load a feedforward network from its JSON weight file.

    Schema: num_classes, input_shape [H,W,C], layers: list of {rows, cols,
    activation, weights (row-major, rows*cols reals), bias (rows reals)}.
    """
    doc = _load_json(path)
    num_classes = _require(doc, "num_classes", str(path))
    input_shape = _require(doc, "input_shape", str(path))
    if not (isinstance(input_shape, list) and len(input_shape) == 3):
        raise ParseError(f"{path}: input_shape must be [H, W, C], got {input_shape!r}")
    layers_doc = _require(doc, "layers", str(path))
    if not isinstance(layers_doc, list) or not layers_doc:
        raise ParseError(f"{path}: layers must be a non-empty list")
    layers = []
    for i, ld in enumerate(layers_doc):
        rows = _require(ld, "rows", f"{path} layer {i}")
        cols = _require(ld, "cols", f"{path} layer {i}")
        act = _require(ld, "activation", f"{path} layer {i}")
        weights = _require(ld, "weights", f"{path} layer {i}")
        bias = _require(ld, "bias", f"{path} layer {i}")
        if act not in _ACTIVATIONS:
            raise ParseError(f"{path} layer {i}: unknown activation {act!r}")
        if len(weights) != rows * cols:
            raise DimensionChainError(
                f"{path} layer {i}: {len(weights)} weights != rows*cols = {rows * cols}"
            )
        if len(bias) != rows:
            raise DimensionChainError(f"{path} layer {i}: {len(bias)} biases != rows = {rows}")
        layers.append((np.asarray(weights, dtype=np.float64).reshape(rows, cols),
                       np.asarray(bias, dtype=np.float64), act))
    expected = tuple(int(d) for d in input_shape)
    if layers[0][0].shape[1] != int(np.prod(expected)):
        raise DimensionChainError(
            f"{path}: first layer expects {layers[0][0].shape[1]} inputs, "
            f"input_shape {expected} has {int(np.prod(expected))} pixels"
        )
    try:
        return MlpOracle(layers, int(num_classes), expected)
    except DimensionChainError as e:
        raise DimensionChainError(f"{path}: {e}") from e


def load_linear(path) -> LinearOracle:
    """Load a hyperplane oracle: {"weights": [...], "bias": r, "labels": [neg, pos]}."""
    doc = _load_json(path)
    weights = _require(doc, "weights", str(path))
    bias = _require(doc, "bias", str(path))
    labels = doc.get("labels", [0, 1])
    if not (isinstance(labels, list) and len(labels) == 2):
        raise ParseError(f"{path}: labels must be [negative_side, positive_side]")
    try:
        return LinearOracle(weights, bias, (labels[0], labels[1]))
    except (TypeError, ValueError) as e:
        raise ParseError(f"{path}: {e}") from e


def load_centroid(path) -> NearestCentroidOracle:
    """Load a nearest-centroid oracle: {"range": L, "centroids": [{"label", "pixels"}...]}.

    Each pixels entry is a nested [H][W][C] list.
    """
    doc = _load_json(path)
    entries = _require(doc, "centroids", str(path))
    rng_l = float(doc.get("range", 1.0))
    if not isinstance(entries, list) or len(entries) < 2:
        raise ParseError(f"{path}: need a list of at least 2 centroids")
    centroids = []
    for i, entry in enumerate(entries):
        label = _require(entry, "label", f"{path} centroid {i}")
        pixels = _require(entry, "pixels", f"{path} centroid {i}")
        try:
            centroids.append((int(label), ImageTensor(np.asarray(pixels, dtype=np.float64), rng_l)))
        except (TypeError, ValueError) as e:
            raise ParseError(f"{path} centroid {i}: {e}") from e
    try:
        return NearestCentroidOracle(centroids)
    except ShapeMismatchError as e:
        raise ParseError(f"{path}: {e}") from e
