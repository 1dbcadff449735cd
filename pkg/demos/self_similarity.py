"""Convolving two stationary measures gives a measure of the same family.

Run with ``python3 demos/self_similarity.py``.
"""

from fractions import Fraction as F

from convchains.families import pi_value
from convchains.selfsim import IDENTITIES, IDENTITY_IDS, convolve_measures, verify_identity

# two binomial laws under the prefix-sum shape give a binomial law again
a1, a2, N = F(1, 3), F(2, 5), 4
for x in range(N + 1):
    lhs = convolve_measures("prefix-sum", ("krawtchouk", {"p": a2}), ("krawtchouk", {"p": a1}), x, N=N)
    rhs = pi_value("krawtchouk", {"p": 1 - (1 - a1) * (1 - a2)}, x, N)
    print(x, lhs, rhs, lhs == rhs)

print()
for ident in IDENTITY_IDS:
    row = IDENTITIES[ident]
    params = {name: (F(1, 2) if name == "q" else F(2, 7) + F(j, 5)) for j, name in enumerate(row.param_names)}
    rep = verify_identity(ident, params, N_max=8)
    print(f"{ident:10s} {row.shape:10s} {rep.verdict:12s} points={rep.checked}")
