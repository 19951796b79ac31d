"""
Error rates of the partition estimate
=====================================

The mean squared error splits into a bias part that shrinks with the
number of cells N and a variance part that grows like N / m. The shipped
default config runs in a few seconds.
"""

import numpy as np
import matplotlib.pyplot as plt

from phasefit.cli import load_config
from phasefit.experiments import run_rate_study

cfg, _ = load_config(None)
rep = run_rate_study(cfg)
print("approximation rate", rep.rate)
print("bias slope", rep.bias_slope, "variance slope", rep.variance_slope)
print("envelope held-out ratio", rep.envelope.max_holdout_ratio)

N = 2.0 ** np.array(cfg.levels)
for j, m in enumerate(cfg.samples):
    plt.loglog(N, rep.mean_err[:, j], "o-", label=f"m={m}")
plt.loglog(N, np.sqrt(rep.bias_sq), "k--", label="bias")
plt.xlabel("cells N")
plt.ylabel("L2 error")
plt.legend()
plt.show()
