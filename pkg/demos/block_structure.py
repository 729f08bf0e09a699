"""The block construction n_k = 2^T (2^k + m) and what it does to the sums.

Within a block the sums are exactly periodic with period 2^-T, they split
into a drag term, a sine term and a small error, and on short windows near
zero their second moment is several times the global one.
"""

from fractions import Fraction

from lacunary import ConstructionParams
from lacunary.diophantine import paper_profile
from lacunary.sequence import subblock_partition
from lacunary.stats import SampleBatch, block_periodicity_check, local_variance_amplification
from lacunary.trigsums import decomposition_batch

p = ConstructionParams(R=4, eps=Fraction(1, 2), d=4)
for i in (1, 2, 3):
    sizes = [part.size for part in subblock_partition(i, p)]
    print(f"block {i}: T={p.T(i)}  N={p.N(i)}  sub-block sizes {sizes}")

print("\nnormalized Diophantine profile for 2 n_k - n_l = c")
for row in paper_profile(p, 2, 1, [1, 2, 3, 4]):
    print(f"  N={row.N:5d}  L*={row.L_star:4d}  ratio={row.ratio:.4f}")

for i in (2, 3):
    r = block_periodicity_check(p, i, trials=10, seed=0)
    print(f"\nblock {i} periodicity: exact {r.exact_residual}, float {r.float_residual:.1e}, "
          f"half-period shift {r.half_period_residual:.2f}")

batch = SampleBatch.draw(0, 200, p.N(3) + p.d + 80)
dec = decomposition_batch(p, 3, batch.points)
print(f"\ndecomposition residual {dec['residual'].max():.1e}, largest error term {abs(dec['error']).max():.1f}")

r = local_variance_amplification(p, 3, M=5000, seed=0)
print(f"windowed / global second moment: {r.stats['ratio']:.2f}")
