"""
Per-cell mixtures
=================

Build the weighted probability matrix by hand for a tiny pool and read off
the argmax grid, the confidence and the entropy of each cell.
"""

import numpy as np

from occamix import grid_from_rows
from occamix.mixture import (argmax_prediction, brier_score, build_weighted_matrix,
                             confidence_map, entropy_map)

# %%
# Three hypotheses disagree about one cell of a 2x3 grid.
preds = [
    grid_from_rows([[0, 3, 0], [0, 3, 0]]),
    grid_from_rows([[0, 3, 0], [0, 5, 0]]),
    grid_from_rows([[0, 3, 0], [0, 5, 0]]),
]
weights = np.array([0.5, 0.3, 0.2])
m = build_weighted_matrix(preds, weights)
print("cell (1,1):", m.cell(1, 1))

# %%
# 0.5 vs 0.5 is a tie, and ties go to the smaller colour.
print(argmax_prediction(m).to_rows())
print(np.round(confidence_map(m), 3))
print(np.round(entropy_map(m), 3))

# %%
# Brier score against a truth grid: zero only where the mixture is certain
# and right.
truth = grid_from_rows([[0, 3, 0], [0, 5, 0]])
print(f"brier = {brier_score(m, truth):.4f}")
