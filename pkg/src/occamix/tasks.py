"""
ARC-format task files, leave-one-out splits and per-task evaluation.

Task files use the community JSON layout::

    {"train": [{"input": [[...]], "output": [[...]]}, ...],
     "test":  [{"input": [[...]], "output": [[...]]}, ...]}

A test ``output`` may be omitted, in which case the pair is withheld: it is
predicted but never scored.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dsl import Hypothesis, apply_program
from .grid import (AccuracyPolicy, Connectivity, Grid, GridError, cell_accuracy,
                   grid_from_rows)
from .mixture import (Method, WeightedMatrix, argmax_prediction, brier_score,
                      build_weighted_matrix, confidence_map, entropy_map)
from .scoring import (DEFAULT_EPSILON, DEFAULT_FLOOR, NoiseModel, ScoredPool,
                      score_pool, weight_entropy)

logger = logging.getLogger(__name__)


class TaskError(Exception):
    pass


class TaskIOError(TaskError):
    pass


class SchemaError(TaskError):
    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(f"{field}: {message}" if message else field)


class GridValidationError(TaskError):
    pass


class TooFewExamples(TaskError):
    pass


@dataclass(frozen=True)
class Pair:
    input: Grid
    output: Grid | None  # None when withheld

    @property
    def withheld(self) -> bool:
        return self.output is None


@dataclass(frozen=True)
class TaskBundle:
    task_id: str
    train: tuple[Pair, ...]
    test: tuple[Pair, ...]

    @property
    def examples(self) -> tuple[Pair, ...]:
        """Train pairs followed by test pairs, in file order."""
        return self.train + self.test


def _grid(value, where: str) -> Grid:
    try:
        return grid_from_rows(value)
    except GridError as exc:
        raise GridValidationError(f"{where}: {exc}") from exc


def _pairs(data: dict, key: str, require_output: bool) -> tuple[Pair, ...]:
    items = data.get(key)
    if not isinstance(items, list):
        raise SchemaError(key, "must be a list")
    out = []
    for i, item in enumerate(items):
        where = f"{key}[{i}]"
        if not isinstance(item, dict) or "input" not in item:
            raise SchemaError(f"{where}.input", "missing")
        x = _grid(item["input"], f"{where}.input")
        y = None
        if "output" in item and item["output"] is not None:
            y = _grid(item["output"], f"{where}.output")
            if y.shape != x.shape:
                raise GridValidationError(f"{where}: output shape {y.shape} differs from input {x.shape}")
        elif require_output:
            raise SchemaError(f"{where}.output", "missing")
        out.append(Pair(x, y))
    return tuple(out)


def bundle_from_dict(data: dict, task_id: str, profile: str = "general") -> TaskBundle:
    if not isinstance(data, dict):
        raise SchemaError("<root>", "task must be a JSON object")
    if "train" not in data:
        raise SchemaError("train", "missing")
    train = _pairs(data, "train", require_output=True)
    if not train:
        raise SchemaError("train", "needs at least one pair")
    test = _pairs(data, "test", require_output=False) if "test" in data else ()
    if profile == "mini":
        for p in train + test:
            for g in (p.input, p.output):
                if g is not None and g.shape != (5, 5):
                    raise GridValidationError(f"mini profile requires 5x5 grids, got {g.shape}")
    return TaskBundle(task_id, train, test)


def load_task(path: str | Path, profile: str = "general") -> TaskBundle:
    """Read and validate a task file; the task id is the file stem."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise TaskIOError(f"cannot read task {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("<root>", f"invalid JSON: {exc}") from exc
    return bundle_from_dict(data, path.stem, profile)


@dataclass(frozen=True)
class Split:
    train: tuple[Pair, ...]
    held_out: Pair
    held_out_index: int


def leave_one_out_splits(bundle: TaskBundle, mode: str = "paper") -> list[Split]:
    """Hold out one example at a time.

    ``mode="paper"`` trains on the first n-1 examples and holds out the
    last. ``mode="full"`` rotates the held-out example through all n.
    Withheld pairs are never used for training.
    """
    examples = bundle.examples
    n = len(examples)
    if n < 2:
        raise TooFewExamples(f"task {bundle.task_id} has {n} example(s); need at least 2")
    if mode == "paper":
        indices = [n - 1]
    elif mode == "full":
        indices = list(range(n))
    else:
        raise ValueError(f"unknown split mode {mode!r}")
    splits = []
    for k in indices:
        train = tuple(p for i, p in enumerate(examples) if i != k and not p.withheld)
        if not train:
            raise TooFewExamples(f"task {bundle.task_id}: no labelled training pairs for split {k}")
        splits.append(Split(train, examples[k], k))
    return splits


@dataclass(frozen=True)
class EvalConfig:
    policy: AccuracyPolicy = AccuracyPolicy.ALL_CELLS
    epsilon: float = DEFAULT_EPSILON
    num_colors: int = 10
    floor: float = DEFAULT_FLOOR
    connectivity: Connectivity = Connectivity.FOUR
    split: str = "paper"

    @property
    def noise(self) -> NoiseModel:
        return NoiseModel(self.epsilon, self.num_colors)

    def to_json(self) -> dict:
        return {
            "policy": AccuracyPolicy(self.policy).value,
            "epsilon": self.epsilon,
            "num_colors": self.num_colors,
            "delta": self.floor,
            "connectivity": int(self.connectivity),
            "split": self.split,
        }


@dataclass(frozen=True, eq=False)
class MethodResult:
    method: Method
    weights: np.ndarray  # pool order
    matrix: WeightedMatrix
    prediction: Grid
    top1_accuracy: float | None
    top1_accuracy_nonbg: float | None
    brier: float | None
    mean_confidence: float
    mean_entropy: float
    weight_entropy: float
    max_weight: float


@dataclass(frozen=True, eq=False)
class EvaluationResult:
    task_id: str
    held_out_index: int
    scores: ScoredPool
    predictions: tuple[Grid, ...]  # pool order, on the held-out input
    truth: Grid | None
    solomonoff: MethodResult
    bma: MethodResult
    config: EvalConfig

    def method(self, method: Method | str) -> MethodResult:
        return self.solomonoff if Method(method) is Method.SOLOMONOFF else self.bma


def _method_result(method: Method, weights: np.ndarray, predictions: Sequence[Grid],
                   truth: Grid | None) -> MethodResult:
    matrix = build_weighted_matrix(predictions, weights, method)
    pred = argmax_prediction(matrix)
    if truth is not None:
        acc = cell_accuracy(pred, truth, AccuracyPolicy.ALL_CELLS)
        acc_nb = cell_accuracy(pred, truth, AccuracyPolicy.NON_BACKGROUND)
        brier = brier_score(matrix, truth)
    else:
        acc = acc_nb = brier = None
    return MethodResult(
        method=method,
        weights=weights,
        matrix=matrix,
        prediction=pred,
        top1_accuracy=acc,
        top1_accuracy_nonbg=acc_nb,
        brier=brier,
        mean_confidence=float(confidence_map(matrix).mean()),
        mean_entropy=float(entropy_map(matrix).mean()),
        weight_entropy=weight_entropy(weights),
        max_weight=float(np.max(weights)),
    )


def evaluate_split(bundle: TaskBundle, split: Split, pool: Sequence[Hypothesis],
                   config: EvalConfig = EvalConfig()) -> EvaluationResult:
    scores = score_pool(pool, [(p.input, p.output) for p in split.train],
                        config.policy, config.noise, config.floor, config.connectivity)
    predictions = tuple(apply_program(h.program, split.held_out.input, config.connectivity)
                        for h in pool)
    truth = split.held_out.output
    # both methods mix the same predictions; only the weights differ
    sol = _method_result(Method.SOLOMONOFF, scores.weights_in_pool_order("solomonoff"),
                         predictions, truth)
    bma = _method_result(Method.BMA, scores.weights_in_pool_order("bma"), predictions, truth)
    return EvaluationResult(bundle.task_id, split.held_out_index, scores, predictions,
                            truth, sol, bma, config)


def evaluate_task(bundle: TaskBundle, pool: Sequence[Hypothesis],
                  config: EvalConfig = EvalConfig()) -> EvaluationResult:
    """Score the pool on the first n-1 examples and predict the n-th."""
    split = leave_one_out_splits(bundle, "paper")[0]
    return evaluate_split(bundle, split, pool, config)


def evaluate_all(bundle: TaskBundle, pool: Sequence[Hypothesis],
                 config: EvalConfig = EvalConfig()) -> list[EvaluationResult]:
    """One result per split for ``config.split``."""
    return [evaluate_split(bundle, s, pool, config)
            for s in leave_one_out_splits(bundle, config.split)]
