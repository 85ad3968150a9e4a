# %% [markdown]
# # Exact oracles
#
# Held-Karp gives the optimum for n <= 18. For n <= 10 the whole state graph
# (one node per tour, one arc per improving 2-change) can be built, and its
# longest path is the most steps any pivot rule could take.

# %%
from twoopt_lab import analysis as A
from twoopt_lab.engine import PivotRule, run
from twoopt_lab.heuristics import random_tour
from twoopt_lab.random_models import sample_uniform

inst = sample_uniform(8, 2, seed=4)
opt, tour = A.held_karp_opt(inst)
print("optimum", opt, tour.order)
print("lower bound", A.opt_lower_bound(inst, 1.0))

# %%
longest, path = A.state_graph_longest_path(inst)
print("longest improving path", longest)
tr = run(inst, random_tour(inst, 0), PivotRule.best())
print("best improvement from a random start", tr.step_count, "steps, length", tr.final_length)
print("crossings in the local optimum", A.crossing_count(tr.final_tour, inst))
