"""Why 2^k - 1 fails the Diophantine condition that 2^k satisfies.

For n_k = 2^k - 1 the equation n_{k+1} - 2 n_k = 1 holds for every k, so
the count L(N, 1, 2, 1) grows linearly. Pure powers of two never produce more
than one solution for any right-hand side.
"""

from lacunary import ErdosFortet, Geometric, sequence_prefix
from lacunary.diophantine import count_fast, diophantine_profile, max_count

for N in (10, 100, 1000):
    ef = sequence_prefix(N, ErdosFortet())
    geo = sequence_prefix(N, Geometric(2))
    print(f"N={N:5d}  2^k-1: L(N,1,2,1)={count_fast(ef, 1, 2, 1):4d}   "
          f"2^k: max over c>0 of L(N,1,1,c)={max_count(geo, 1, 1, exclude_zero=True)[1]}")

print("\nnormalized count L (log N)^(1/2) / N against N")
for row in diophantine_profile(ErdosFortet(), 1, 2, [10, 30, 100, 300, 1000]):
    print(f"  N={row.N:5d}  c*={row.c_star}  L*={row.L_star:4d}  ratio={row.ratio:.4f}")
