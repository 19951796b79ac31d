"""
From marker trajectories to phase samples
=========================================

A stride starts at time t_p and lasts T_p. Every frame inside a stride
gets the phase (t - t_p) / T_p, and strides are pooled into one sample set.
"""

import numpy as np
import matplotlib.pyplot as plt

from phasefit.estimators import fit_partition
from phasefit.gait import GaitSegmentation, Trajectory, phase_map
from phasefit.manifold import make_partition
from phasefit.synth import AnalyticCurve

curve = AnalyticCurve.sawtooth(1.0, 3)
strides = ((0.0, 1.1), (1.1, 0.9), (2.0, 1.0))
t = np.arange(0, 3.2, 1 / 120)
u = np.zeros_like(t)
for tp, Tp in strides:
    inside = (t >= tp) & (t < tp + Tp)
    u[inside] = (t[inside] - tp) / Tp
traj = Trajectory(t, curve(u), ("ankle",))

samples, dropped = phase_map(traj, GaitSegmentation(strides))
print(len(samples), "samples,", dropped, "frames outside every stride")

est = fit_partition(samples, make_partition(4))
grid = np.linspace(0, 1, 500, endpoint=False)
for k in range(3):
    plt.plot(samples.s, samples.x[:, k], ".", ms=2)
    plt.step(grid, est(grid)[:, k], where="post")
plt.xlabel("phase")
plt.show()
