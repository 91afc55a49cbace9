"""Operator-norm certificates across the sequence spaces.

Every norm computation returns a certificate: the value, the method that
produced it (exact row/column sums, the fixed-point iteration for general
exponents, SVD at p = 2), a witness vector attaining the value, and a
residual.  This demo prints certificates for one matrix across several
spaces and checks the witness by hand.
"""

from __future__ import annotations

import numpy as np

from lplab.operators import StructuredOperator, apply, op_norm
from lplab.spaces import PNorm, SpVector, norm

M = np.array(
    [
        [0.4, 0.3 + 0.2j, 0.0],
        [0.0, -0.5, 0.25],
        [0.1j, 0.0, 0.6],
    ],
    dtype=complex,
)
T = StructuredOperator.from_dense(M)

print("matrix:")
print(np.array_str(M, precision=3))
print()

for pn in (PNorm.lp(1.0), PNorm.lp(1.5), PNorm.lp(2.0), PNorm.lp(3.0), PNorm.c0()):
    cert = op_norm(T, pn)
    witness = cert.witness
    gain = float("nan")
    if witness is not None:
        img = apply(T, witness)
        gain = norm(img, pn) / norm(witness, pn)
    print(
        f"{pn.label():>4}: value {cert.value:.12f}  method {cert.method:>11}  "
        f"residual {cert.residual:.1e}  witness gain {gain:.12f}"
    )

print()
print("c0 norm equals the largest row sum of absolute values (exact):")
print(f"  rows: {[float(np.abs(M[i]).sum()) for i in range(3)]}")
print("l1 norm equals the largest column sum (exact):")
print(f"  cols: {[float(np.abs(M[:, j]).sum()) for j in range(3)]}")

x = SpVector.make({0: 1.0, 2: -0.5j})
print()
print(f"sample vector norms: l2 {norm(x, PNorm.lp(2.0)):.6f}, "
      f"sup {norm(x, PNorm.c0()):.6f}")
