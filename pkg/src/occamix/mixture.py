"""
Per-cell mixtures of hypothesis predictions.

``P[r, c, v]`` is the total weight of hypotheses predicting colour ``v`` at
``(r, c)``. With weights that form a distribution, every cell is a
categorical distribution over the ten colours.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import entr

from .grid import NUM_COLORS, DimensionMismatch, Grid

TIE_TOL = 1e-12


class Method(str, enum.Enum):
    SOLOMONOFF = "solomonoff"
    BMA = "bma"


class WeightLengthMismatch(ValueError):
    pass


class InvalidWeights(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WeightedMatrix:
    probs: np.ndarray  # (rows, cols, NUM_COLORS)
    method: Method

    @property
    def rows(self) -> int:
        return self.probs.shape[0]

    @property
    def cols(self) -> int:
        return self.probs.shape[1]

    def cell(self, r: int, c: int) -> dict[int, float]:
        """Nonzero entries of one cell distribution."""
        p = self.probs[r, c]
        return {int(v): float(p[v]) for v in np.flatnonzero(p)}

    def to_json(self, ndigits: int = 6) -> dict:
        return {
            "method": Method(self.method).value,
            "rows": self.rows,
            "cols": self.cols,
            "cells": [
                [{str(v): round(p, ndigits) for v, p in self.cell(r, c).items()}
                 for c in range(self.cols)]
                for r in range(self.rows)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "WeightedMatrix":
        probs = np.zeros((data["rows"], data["cols"], NUM_COLORS))
        for r, row in enumerate(data["cells"]):
            for c, cell in enumerate(row):
                for v, p in cell.items():
                    probs[r, c, int(v)] = p
        probs.setflags(write=False)
        return cls(probs, Method(data["method"]))


def build_weighted_matrix(predictions: Sequence[Grid], weights: Sequence[float],
                          method: Method = Method.SOLOMONOFF) -> WeightedMatrix:
    if len(predictions) == 0:
        raise ValueError("need at least one prediction")
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(predictions),):
        raise WeightLengthMismatch(f"{len(predictions)} predictions vs {w.size} weights")
    if not np.all(np.isfinite(w)) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise InvalidWeights("weights must be a probability distribution")
    shape = predictions[0].shape
    for g in predictions:
        if g.shape != shape:
            raise DimensionMismatch(f"prediction shapes differ: {shape} vs {g.shape}")
    stack = np.stack([g.array for g in predictions])  # (H, R, C)
    onehot = stack[..., None] == np.arange(NUM_COLORS)  # (H, R, C, V)
    probs = np.tensordot(w, onehot.astype(float), axes=1)
    probs.setflags(write=False)
    return WeightedMatrix(probs, Method(method))


def argmax_prediction(matrix: WeightedMatrix) -> Grid:
    """Most probable colour per cell; near-ties go to the smallest colour."""
    p = matrix.probs
    best = p.max(axis=-1, keepdims=True)
    # first index within tolerance of the max is the smallest tied value
    return Grid(np.argmax(p >= best - TIE_TOL, axis=-1))


def confidence_map(matrix: WeightedMatrix) -> np.ndarray:
    return matrix.probs.max(axis=-1)


def entropy_map(matrix: WeightedMatrix) -> np.ndarray:
    """Per-cell Shannon entropy in nats."""
    return np.maximum(entr(matrix.probs).sum(axis=-1), 0.0)


def brier_score(matrix: WeightedMatrix, truth: Grid) -> float:
    """Mean over cells of the squared error against the one-hot truth."""
    if truth.shape != (matrix.rows, matrix.cols):
        raise DimensionMismatch(f"matrix {matrix.rows}x{matrix.cols} vs truth {truth.shape}")
    onehot = (truth.array[..., None] == np.arange(NUM_COLORS)).astype(float)
    return float(((matrix.probs - onehot) ** 2).sum(axis=-1).mean())
