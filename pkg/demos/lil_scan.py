"""Running ratio S_N / sqrt(2 N log log N) along sample paths.

For cos(2 pi 2^k x) the limsup on almost every path is 1/sqrt(2), but the
approach is slow: at N = 2^14 the maximum over 50 paths still sits near 1. For 2^k - 1 the bound depends on the point through |2 cos pi x|.
Rational points are not typical: at x = 1/10 the orbit of (2^k - 1) x is
periodic and the sum drifts linearly.
"""

from fractions import Fraction

from lacunary import ErdosFortet, Geometric, TrigPoly
from lacunary.dyadic import DyadicPoint
from lacunary.stats import lil_ratio_scan

Ns = [2**e for e in range(4, 15)]
r = lil_ratio_scan(TrigPoly.cosine(), Geometric(2), Ns, M=50, seed=0, workers=4)
for N, mx in zip(Ns, r.stats["max_ratio"]):
    print(f"N={N:6d}  max ratio over 50 paths {mx:.3f}")

x = DyadicPoint.from_fraction(Fraction(1, 10), Ns[-1] + 80)
drift = lil_ratio_scan(TrigPoly.erdos_fortet(), ErdosFortet(), Ns, points=[x])
print("\nx = 1/10 with 2^k - 1:", " ".join(f"{v:.2f}" for v in drift.ratios[0]))
