"""
Partition estimate versus kernel estimate
=========================================

Both estimators are fit to the same noisy samples of a smooth curve,
with 32 cells for the partition and 32 Gaussian centers for the kernel.
"""

import numpy as np
import matplotlib.pyplot as plt

from phasefit.estimators import empirical_risk, fit_kernel, fit_partition, l2_error
from phasefit.manifold import Measure, make_partition
from phasefit.synth import AnalyticCurve, NoiseModel, sample_dataset

curve = AnalyticCurve.fourier([[0.0, 1.0, 0.3, 0.0, -0.2]])
data = sample_dataset(curve, Measure.uniform(), NoiseModel.gaussian(0.1), 2000, seed=0)

part = make_partition(5)
pe = fit_partition(data, part)
ke = fit_kernel(data, part.representatives, beta=25.0, lam=1e-8)

print("risk", empirical_risk(pe, data), empirical_risk(ke, data))
print("L2 error", l2_error(curve, pe), l2_error(curve, ke))
print("condition", ke.condition)

grid = np.linspace(0, 1, 1000, endpoint=False)
plt.plot(data.s, data.x[:, 0], ".", ms=2, alpha=0.3, label="samples")
plt.plot(grid, curve(grid)[:, 0], "k", label="truth")
plt.step(grid, pe(grid)[:, 0], where="post", label="partition")
plt.plot(grid, ke(grid)[:, 0], label="kernel")
plt.legend()
plt.show()
