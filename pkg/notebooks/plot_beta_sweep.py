"""
Kernel width and conditioning
=============================

Smaller beta means wider kernels, smoother fits and a worse conditioned
Gram matrix. With 16 centers we sweep beta from sharp to wide.
"""

import matplotlib.pyplot as plt

from phasefit.experiments import ExperimentConfig, run_beta_sweep
from phasefit.synth import AnalyticCurve, NoiseModel

cfg = ExperimentConfig(curve=AnalyticCurve.fourier([[0.0, 1.0, 0.3, 0.0, -0.2]]),
                       noise=NoiseModel.gaussian(0.05), levels=(4,), samples=(2000,),
                       betas=(400.0, 100.0, 25.0, 6.0), seed=7)
sweep = run_beta_sweep(cfg)
for row in sweep.rows:
    print(row["beta"], row["gram_condition"], row["risk"], row["total_variation"])

betas = [r["beta"] for r in sweep.rows]
plt.loglog(betas, [r["gram_condition"] for r in sweep.rows], "o-")
plt.xlabel("beta")
plt.ylabel("Gram condition number")
plt.show()
