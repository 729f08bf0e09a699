"""Limit laws of normalized lacunary sums at random points.

For f(x) = cos 2 pi x and n_k = 2^k the sums are close to Gaussian already at
moderate N. With 2^k - 1 and f(x) = cos 2 pi x + cos 4 pi x the limit is a
variance mixture of Gaussians instead, and the Kolmogorov distance to the
normal law stalls near 0.06.
"""

import math

from lacunary import Geometric, TrigPoly
from lacunary.stats import clt_experiment, erdos_fortet_clt

M = 20_000
for N in (4, 16, 64):
    r = clt_experiment(TrigPoly.cosine(), Geometric(2), N, M, seed=0, workers=4)
    print(f"cos(2 pi 2^k x), N={N:3d}: distance to normal {r.stats['distance']:.4f}")

for N in (32, 128, 512):
    r = erdos_fortet_clt(N, M, seed=0, workers=4)
    print(f"Erdos-Fortet, N={N:4d}: to normal {r.stats['distance']:.4f}, "
          f"to mixture {r.stats['mixture_distance']:.4f}")

print(f"mixture scale used: sqrt(2) = {math.sqrt(2):.4f}")
