"""Banded chains from powers of a birth-death generator.

Run with ``python3 demos/banded_birth_death.py``.
"""

from fractions import Fraction as F

import numpy as np

from convchains.bd import bd_rates, build_K_bd, build_L, kappa_bd, tune_weights
from convchains.numerics import format_scalar

op = build_L(bd_rates("hahn", {"a": F(3, 2), "b": 2}, 6))
for m in (1, 2, 3):
    w = tune_weights(op, m)
    K = build_K_bd(op, m, w)
    kappas = [kappa_bd(m, w, op.rates.E, n) for n in range(7)]
    numeric = np.sort(np.linalg.eigvals(K.array()).real)[::-1]
    print(f"m={m}  c={[format_scalar(c) for c in w.c]}  t_S={format_scalar(w.t_S)}")
    print("   closed :", np.round([float(k) for k in kappas], 6))
    print("   numeric:", np.round(numeric, 6))
