"""
Phases, distances and dyadic partitions
=======================================

Gait phases live on a circle. Here we look at the two distances the
package offers and at how dyadic cells cover the circle.
"""

import numpy as np
import matplotlib.pyplot as plt

from phasefit.manifold import (chordal_distance, fill_distance, geodesic_distance,
                               make_partition)

# distance from phase 0 to every other phase
s = np.linspace(0, 1, 401)
plt.plot(s, geodesic_distance(0.0, s), label="geodesic")
plt.plot(s, chordal_distance(0.0, s), label="chordal")
plt.xlabel("phase")
plt.legend()

# 0.95 and 0.05 are neighbours across the wrap
print(geodesic_distance(0.95, 0.05))

# level n splits the circle into 2**n cells with midpoint representatives
for n in range(4):
    p = make_partition(n)
    print(n, p.n_cells, p.representatives, fill_distance(p.representatives))

# cell lookup is floor(s * N)
p = make_partition(3)
print(p.cell_index(np.array([0.0, 0.124, 0.125, 0.99])))
plt.show()
