# %% [markdown]
# # Step counts on random and perturbed inputs
#
# On random points 2-Opt finishes quickly, far from the exponential worst
# case. This script sweeps n and the density bound phi.

# %%
from twoopt_lab import experiments as X

cfg = X.ExperimentConfig(model="uniform", n=[50, 100, 200, 400], seeds=list(range(5)),
                         pivot="first", with_opt=False)
rows = X.run_experiment(cfg)
for line in X.summarize(rows, cfg):
    print(line)

# %% [markdown]
# Perturbed inputs: larger phi allows more concentrated densities.

# %%
cfg = X.ExperimentConfig(model="phi", n=[100], phi=[1, 4, 16, 64], seeds=list(range(5)),
                         pivot="first", with_opt=False)
for line in X.summarize(X.run_experiment(cfg), cfg):
    print(line)

# %% [markdown]
# Approximation ratio of the worst local optimum over many starts on small inputs.

# %%
cfg = X.ExperimentConfig(model="uniform", n=[10], seeds=list(range(20)), starts=20)
rows = X.run_experiment(cfg)
print(X.summarize(rows, cfg)[1])
