import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from occamix.grid import Grid
from occamix.mixture import (InvalidWeights, Method, WeightedMatrix, WeightLengthMismatch,
                             argmax_prediction, brier_score, build_weighted_matrix,
                             confidence_map, entropy_map)

from .conftest import blank
from .oracles import tally_matrix


def matrix_from_cells(dists, rows=1, cols=1):
    p = np.zeros((rows, cols, 10))
    for (r, c), d in dists.items():
        for v, q in d.items():
            p[r, c, v] = q
    return WeightedMatrix(p, Method.SOLOMONOFF)


class TestBuild:
    def test_two_predictions(self):
        m = build_weighted_matrix([blank(1, 1, [(0, 0, 3)]), blank(1, 1, [(0, 0, 5)])], [0.7, 0.3])
        assert m.cell(0, 0) == {3: 0.7, 5: 0.3}

    def test_unanimous(self):
        g = blank(2, 2, [(0, 0, 4)])
        m = build_weighted_matrix([g, g, g], [0.2, 0.3, 0.5])
        assert m.probs[0, 0, 4] == pytest.approx(1.0, abs=1e-15)

    def test_weight_errors(self):
        g = blank(1, 1)
        with pytest.raises(WeightLengthMismatch):
            build_weighted_matrix([g], [0.5, 0.5])
        with pytest.raises(InvalidWeights):
            build_weighted_matrix([g, g], [0.7, 0.7])

    def test_twenty_predictions_against_oracle(self, rng):
        preds = [Grid(rng.integers(0, 10, (5, 5))) for _ in range(20)]
        w = rng.random(20)
        w /= w.sum()
        m = build_weighted_matrix(preds, w)
        oracle = tally_matrix([g.to_rows() for g in preds], list(w))
        assert np.max(np.abs(m.probs - np.array(oracle))) <= 1e-12

    @given(st.integers(1, 10), st.tuples(st.integers(1, 5), st.integers(1, 5)), st.data())
    def test_distributions_valid(self, h, shape, data):
        preds = [Grid(data.draw(arrays(np.int8, shape, elements=st.integers(0, 9)))) for _ in range(h)]
        raw = np.array(data.draw(st.lists(st.floats(0.01, 1), min_size=h, max_size=h)))
        m = build_weighted_matrix(preds, raw / raw.sum())
        assert np.allclose(m.probs.sum(axis=-1), 1.0, atol=1e-9)
        assert np.all(m.probs >= 0)
        assert (m.rows, m.cols) == shape

    def test_json_round_trip(self, rng):
        preds = [Grid(rng.integers(0, 10, (3, 4))) for _ in range(3)]
        m = build_weighted_matrix(preds, [0.5, 0.25, 0.25], Method.BMA)
        back = WeightedMatrix.from_json(m.to_json())
        assert back.method is Method.BMA and np.allclose(back.probs, m.probs)


class TestReadouts:
    def test_argmax_strict(self):
        assert argmax_prediction(matrix_from_cells({(0, 0): {3: 0.7, 5: 0.3}}))[0, 0] == 3

    def test_argmax_tie(self):
        assert argmax_prediction(matrix_from_cells({(0, 0): {7: 0.5, 2: 0.5}}))[0, 0] == 2

    def test_single_hypothesis_collapse(self, rng):
        g = Grid(rng.integers(0, 10, (4, 4)))
        assert argmax_prediction(build_weighted_matrix([g], [1.0])) == g

    @given(st.integers(2, 6), st.data())
    def test_one_hot_weights_collapse(self, h, data):
        preds = [Grid(data.draw(arrays(np.int8, (3, 3), elements=st.integers(0, 9)))) for _ in range(h)]
        k = data.draw(st.integers(0, h - 1))
        w = np.zeros(h)
        w[k] = 1.0
        assert argmax_prediction(build_weighted_matrix(preds, w)) == preds[k]

    def test_confidence(self):
        assert confidence_map(matrix_from_cells({(0, 0): {3: 0.7, 5: 0.3}}))[0, 0] == 0.7
        assert confidence_map(matrix_from_cells({(0, 0): {1: 1.0}}))[0, 0] == 1.0

    def test_entropy(self):
        assert entropy_map(matrix_from_cells({(0, 0): {1: 1.0}}))[0, 0] == 0.0
        assert entropy_map(matrix_from_cells({(0, 0): {1: 0.5, 4: 0.5}}))[0, 0] == pytest.approx(math.log(2))


class TestBrier:
    def test_perfect(self):
        g = blank(cells=[(1, 1, 2)])
        assert brier_score(build_weighted_matrix([g], [1.0]), g) == 0.0

    def test_one_wrong_cell(self):
        m = build_weighted_matrix([blank(cells=[(0, 0, 1)])], [1.0])
        assert brier_score(m, blank()) == pytest.approx(2 / 25, abs=1e-15)

    def test_uniform(self):
        m = WeightedMatrix(np.full((5, 5, 10), 0.1), Method.BMA)
        assert brier_score(m, blank(cells=[(2, 2, 7)])) == pytest.approx(0.9, abs=1e-12)
