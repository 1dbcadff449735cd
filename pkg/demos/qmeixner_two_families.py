"""A q-Meixner chain needs both eigenvector families.

The polynomial family alone does not rebuild the matrix; adding the second
family does, up to series truncation. Run with
``python3 demos/qmeixner_two_families.py``.
"""

from fractions import Fraction as F

import numpy as np

from convchains.chains import build_semi_infinite, kappa_closed, kappa_minus
from convchains.errors import CompletenessError
from convchains.families import MeasureTable
from convchains.spectral import qm_union_reconstruct, qmeixner_spectrum, spectral_reconstruct, symmetrize

params = {"a": F(1, 2), "b": F(1, 2), "c": F(1, 2), "q": F(1, 2)}
T = build_semi_infinite("qM-i", params)
print("truncated size:", T.size, " reliable window:", T.meta["x_max"])
print("kappa   :", [round(float(kappa_closed("qM-i", params, n)), 6) for n in range(5)])
print("kappa(-):", [round(kappa_minus("qM-i", params, n), 6) for n in range(5)])

try:
    spectral_reconstruct(qmeixner_spectrum("qM-i", params))
except CompletenessError as exc:
    print("single family:", exc)

window = 6
table = MeasureTable("qmeixner", {k: float(v) for k, v in T.meta["lambda"].items()})
H = symmetrize(T.entries[: window + 1, : window + 1], [table(x) for x in range(window + 1)]).H
for terms in (10, 20, 40):
    err = np.max(np.abs(qm_union_reconstruct("qM-i", params, window, terms) - H))
    print(f"both families, {terms} terms: max error {err:.1e}")
