"""The doubled operator B: unit norm, an exposed unit vector, localization.

Starting from a small strict contraction A, the doubled construction produces
an operator B of norm exactly one together with a distinguished unit vector
u0 on which B acts isometrically.  The "evenly distributed" check then yields
a gap gamma, which converts into a ball radius delta: every contraction
within delta of B is close to block-diagonal on a window, quantified by the
coupling norm printed at the end.
"""

from __future__ import annotations

import numpy as np

from lplab.constructions import (
    build_B_eta_delta,
    check_evenly_distributed,
    delta_for_B,
)
from lplab.operators import StructuredOperator, apply, op_norm, truncate
from lplab.spaces import PNorm, norm

p = 3.0
pn = PNorm.lp(p)
rng = np.random.default_rng(42)

N = 2
A = rng.standard_normal((N + 1, N + 1)) + 1j * rng.standard_normal((N + 1, N + 1))
A = A / (np.abs(A).sum() + 1.0)

rec = build_B_eta_delta(A, N, eta=0.5, p=p)
print(f"head contraction: {N + 1} x {N + 1}, eta = {rec.eta}, p = {p}")
print(f"closed-form norm : {rec.closed_form_norm:.15f}")
print(f"certified norm   : {op_norm(rec.op, pn).value:.15f}")
print(f"gain on u0       : {norm(apply(rec.op, rec.u0), pn):.15f}")
print()

passed, gamma, x1 = check_evenly_distributed(rec.op, pn)
print(f"evenly distributed: {passed}, gamma = {gamma:.6f}")

M, eps = 8, 0.25
delta = delta_for_B(gamma, eps, M, p)
print(f"ball radius delta({eps=}, {M=}) = {delta:.3e}")

# Perturb B within delta/3 and measure the off-diagonal coupling on a window.
W = 4 * M
Bd = truncate(rec.op, W)
R = rng.standard_normal((W, W)) + 1j * rng.standard_normal((W, W))
schur = (
    np.abs(R).sum(axis=0).max() ** (1 / p) * np.abs(R).sum(axis=1).max() ** (1 - 1 / p)
)
T = (Bd + R * (delta / 3.0 / schur)) / (1.0 + delta / 3.0)
coupling = op_norm(StructuredOperator.from_dense(T[:M, M:]), pn).value
print(f"coupling norm of a sampled T in the ball: {coupling:.3e} < {eps}")
