"""Build a Krawtchouk chain, read off its spectrum and watch it relax.

Run with ``python3 demos/krawtchouk_chain.py``.
"""

from fractions import Fraction as F

from convchains.chains import build_finite, kappa_closed, resolve_lambda
from convchains.families import Lattice, measure
from convchains.numerics import format_scalar
from convchains.spectral import closed_spectrum, convergence_bound, evolve, sample_paths, total_variation

params = {"a": F(1, 2), "b": F(1, 3)}
N = 6

K = build_finite("K-i", params, N)
lam = resolve_lambda("K-i", params)
pi = measure("krawtchouk", lam, Lattice.finite(N)).values
print("stationary p:", format_scalar(lam["p"]))
print("column sums:", [format_scalar(s) for s in K.column_sums()])
print("eigenvalues:", [format_scalar(kappa_closed("K-i", params, n)) for n in range(N + 1)])

spec = closed_spectrum("K-i", params, N)
P0 = [F(int(x == 0)) for x in range(N + 1)]
for steps in (1, 4, 16):
    dist = evolve(spec, P0, steps).distribution
    gap = max(abs(float(a - b)) for a, b in zip(dist, pi))
    print(f"l={steps:2d}  max|P - pi| = {gap:.3e}  bound = {convergence_bound(spec, P0, steps):.3e}")

empirical = sample_paths(K, P0, 16, 50_000, seed=11)
exact = evolve(spec, P0, 16).distribution
print("sampler TV at l=16:", round(total_variation(empirical, exact), 4))
