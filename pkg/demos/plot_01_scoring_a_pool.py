"""
Scoring a hypothesis pool
=========================

Rank six candidate explanations of the alternating-column task by how
short and how accurate they are, and compare with a likelihood-only ranking.
"""

# %%
# Load a bundled task and its six-hypothesis pool.
from occamix import evaluate_task, load_task, scripted_pool
from occamix.fixtures import builtin_task_path

task = load_task(builtin_task_path("task_a"))
pool = scripted_pool("task_a_6")
print(f"{task.task_id}: {len(task.train)} train pairs, {len(pool)} hypotheses")

# %%
# Every hypothesis gets a token length, a simplicity in [0.05, 1] and a
# pooled cell accuracy on the first n-1 examples.
result = evaluate_task(task, pool)
print(f"{'id':4} {'len':>4} {'simp':>6} {'acc':>6} {'sol w':>7} {'bma w':>7}")
for b in result.scores:
    print(f"{b.hypothesis_id:4} {b.length:4d} {b.simplicity:6.3f} {b.accuracy:6.3f} "
          f"{b.solomonoff_weight:7.4f} {b.bma_weight:7.4f}")

# %%
# The likelihood ranking ignores length entirely, so a long but slightly more
# accurate description can dominate it while the simplicity-weighted ranking
# keeps the short ones in play.
top_sol = max(result.scores, key=lambda b: b.solomonoff_weight)
top_bma = max(result.scores, key=lambda b: b.bma_weight)
print("top by simplicity x accuracy:", top_sol.hypothesis_id, top_sol.description)
print("top by likelihood:          ", top_bma.hypothesis_id, top_bma.description)
