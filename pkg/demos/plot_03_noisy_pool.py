"""
Two weighting schemes on a noisy pool
=====================================

Twenty vertical-replication guesses, none exactly right. The likelihood
weights pile onto a few hypotheses; the simplicity-weighted ones stay spread.
"""

import numpy as np

from occamix import evaluate_task, load_task, scripted_pool
from occamix.fixtures import builtin_task_path

task = load_task(builtin_task_path("task_c"))
result = evaluate_task(task, scripted_pool("task_c_20"))

# %%
for m in (result.solomonoff, result.bma):
    print(f"{m.method.value:10} top-1 {m.top1_accuracy:.2f}  weight entropy {m.weight_entropy:.3f}  "
          f"max weight {m.max_weight:.3f}  mean confidence {m.mean_confidence:.3f}  brier {m.brier:.3f}")

# %%
# Where do the two readouts disagree?
diff = result.solomonoff.prediction.array != result.bma.prediction.array
print("cells where the argmax grids differ:", np.argwhere(diff).tolist())
print("truth:")
print(result.truth.array)
