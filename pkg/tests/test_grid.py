from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from occamix.grid import (AccuracyPolicy, Connectivity, DimensionMismatch, DimensionTooLarge,
                          Grid, RaggedRows, ValueOutOfRange, aggregate_accuracy, cell_accuracy,
                          cell_counts, extract_objects, grid_from_rows, mean_example_accuracy,
                          serialize_objects)
from occamix.fixtures import builtin_task_path
from occamix.tasks import load_task

from .conftest import blank


def small_grids(max_side=6):
    return st.tuples(st.integers(1, max_side), st.integers(1, max_side)).flatmap(
        lambda s: arrays(np.int8, s, elements=st.integers(0, 9)))


class TestConstruction:
    def test_minimal(self):
        g = grid_from_rows([[0]])
        assert g.shape == (1, 1) and g[0, 0] == 0

    def test_value_out_of_range(self):
        with pytest.raises(ValueOutOfRange):
            grid_from_rows([[1, 2], [3, 10]])

    @pytest.mark.parametrize("bad", [[[1, 2], [3]], [], [[]]])
    def test_ragged(self, bad):
        with pytest.raises(RaggedRows):
            grid_from_rows(bad)

    def test_rejects_bool_and_float(self):
        with pytest.raises(ValueOutOfRange):
            grid_from_rows([[True]])
        with pytest.raises(ValueOutOfRange):
            grid_from_rows([[1.0]])

    def test_too_large(self):
        with pytest.raises(DimensionTooLarge):
            grid_from_rows([[0] * 31])

    def test_task_file_grid(self):
        task = load_task(builtin_task_path("task_a"))
        g = task.train[0].input
        assert (g.rows, g.cols) == (5, 5)

    def test_read_only_and_hashable(self):
        g = grid_from_rows([[1, 2]])
        with pytest.raises(ValueError):
            g.array[0, 0] = 3
        assert hash(g) == hash(grid_from_rows([[1, 2]]))
        assert g.to_rows() == [[1, 2]]

    def test_large_ints_do_not_wrap(self):
        with pytest.raises(ValueOutOfRange):
            Grid(np.array([[256]]))


class TestAccuracy:
    def test_identical(self):
        g = blank(cells=[(1, 1, 3)])
        assert cell_accuracy(g, g) == 1.0

    def test_one_cell_off(self):
        assert cell_accuracy(blank(cells=[(0, 0, 1)]), blank()) == pytest.approx(0.96, abs=0)

    def test_non_background(self):
        truth = blank(cells=[(0, 0, 1), (1, 1, 2), (2, 2, 3), (3, 3, 4)])
        pred = blank(cells=[(0, 0, 1), (1, 1, 2), (2, 2, 3)])
        # oracle: count the four nonzero truth positions by hand
        hits = sum(1 for r, c in [(0, 0), (1, 1), (2, 2), (3, 3)] if pred[r, c] == truth[r, c])
        assert hits == 3
        assert cell_accuracy(pred, truth, AccuracyPolicy.NON_BACKGROUND) == 0.75

    def test_all_background_truth_nonbg(self, caplog):
        assert cell_accuracy(blank(cells=[(0, 0, 1)]), blank(), AccuracyPolicy.NON_BACKGROUND) == 1.0

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cell_counts(blank(2, 2), blank(3, 3))

    @pytest.mark.parametrize("pairs, expected", [
        ([(25, 25)], 1.0), ([(20, 25), (25, 25)], 0.9), ([(0, 25), (25, 25)], 0.5)])
    def test_aggregate(self, pairs, expected):
        assert aggregate_accuracy(pairs) == expected

    def test_aggregate_is_micro(self):
        assert aggregate_accuracy([(0, 1), (9, 9)]) == 0.9
        assert mean_example_accuracy([(0, 1), (9, 9)]) == 0.5

    def test_aggregate_empty(self):
        with pytest.raises(ValueError):
            aggregate_accuracy([])

    @given(small_grids(), st.sampled_from(list(AccuracyPolicy)))
    def test_self_accuracy_is_one(self, a, policy):
        g = Grid(a)
        assert cell_accuracy(g, g, policy) == 1.0

    @given(small_grids(), st.data())
    def test_accuracy_in_unit_interval(self, a, data):
        b = data.draw(arrays(np.int8, a.shape, elements=st.integers(0, 9)))
        for policy in AccuracyPolicy:
            assert 0.0 <= cell_accuracy(Grid(a), Grid(b), policy) <= 1.0


def flood_fill_oracle(a: np.ndarray, eight: bool):
    """Independent component labelling: stack-free BFS over a visited map."""
    R, C = a.shape
    seen = np.zeros_like(a, dtype=bool)
    comps = []
    steps = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    if eight:
        steps += [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    for r in range(R):
        for c in range(C):
            if a[r, c] == 0 or seen[r, c]:
                continue
            comp, q = set(), deque([(r, c)])
            seen[r, c] = True
            while q:
                y, x = q.popleft()
                comp.add((y, x))
                for dy, dx in steps:
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < R and 0 <= nx < C and not seen[ny, nx] and a[ny, nx] == a[r, c]:
                        seen[ny, nx] = True
                        q.append((ny, nx))
            comps.append((int(a[r, c]), frozenset(comp)))
    return comps


class TestObjects:
    def test_empty(self):
        assert extract_objects(blank()) == []

    def test_disconnected(self):
        assert len(extract_objects(blank(cells=[(0, 0, 2), (4, 4, 2)]))) == 2

    def test_diagonal(self):
        g = blank(cells=[(1, 1, 5), (2, 2, 5)])
        assert len(extract_objects(g, Connectivity.FOUR)) == 2
        assert len(extract_objects(g, Connectivity.EIGHT)) == 1
        assert len(flood_fill_oracle(g.array, False)) == 2
        assert len(flood_fill_oracle(g.array, True)) == 1

    def test_bbox(self):
        (obj,) = extract_objects(blank(cells=[(1, 2, 3), (2, 2, 3), (2, 3, 3)]))
        assert obj.bounding_box == (1, 2, 2, 3) and obj.size == 3 and obj.color == 3

    @settings(max_examples=200)
    @given(small_grids(), st.sampled_from(list(Connectivity)))
    def test_matches_flood_fill(self, a, conn):
        objs = extract_objects(Grid(a), conn)
        got = sorted((o.color, o.cells) for o in objs)
        want = sorted(flood_fill_oracle(a, conn is Connectivity.EIGHT))
        assert got == want
        cover = [cell for o in objs for cell in o.cells]
        assert len(cover) == len(set(cover))
        assert set(cover) == set(zip(*np.nonzero(a)))


class TestSerialize:
    def test_empty(self):
        text = serialize_objects(blank())
        lines = text.splitlines()
        assert lines[0] == "grid 5x5 connectivity=4"
        assert lines[1] == "objects: 0"

    def test_single(self):
        text = serialize_objects(blank(cells=[(0, 0, 2)]))
        objs = [ln for ln in text.splitlines() if ln.startswith("object ") and "cells=" in ln]
        assert objs == ["object 1: color=2 cells=1 bbox=(0,0,0,0)"]

    def test_stacked_relation(self):
        text = serialize_objects(blank(cells=[(0, 2, 1), (3, 2, 4)]))
        assert "object 1 above object 2" in text.splitlines()

    @given(small_grids())
    def test_pure(self, a):
        assert serialize_objects(Grid(a)) == serialize_objects(Grid(a.copy()))
