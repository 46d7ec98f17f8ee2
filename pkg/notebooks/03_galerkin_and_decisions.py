"""
Truncated matrices and compactness verdicts
===========================================

Matrix truncations on monomials give an independent look at the tail of a
difference of composition operators; the decision procedure gives the verdict.
"""

# %%
import numpy as np

from ballcomp import decide, galerkin, lfm
from ballcomp.space import SpaceSpec

hardy = SpaceSpec.hardy(2)
half, third = lfm.dilation(2, 0.5), lfm.dilation(2, 1 / 3)
phi = lfm.shift_automorphism(2, 1 / 3)
psi = lfm.shift_automorphism(2, 1 / 2)

# %%
# For two dilations the tail beyond degree k is exactly 2^-k - 3^-k.
for k in range(1, 11, 3):
    print(k, galerkin.tail_norm_probe(half, third, hardy, 12, k), 2.0 ** -k - 3.0 ** -k)

# %%
# For two distinct automorphisms the tail does not go away.
for k in (2, 4, 6, 8):
    print(k, round(galerkin.tail_norm_probe(phi, psi, hardy, 12, k), 4))

# %%
# The adjoint of a truncation carries kernel coefficients at z to those at phi(z).
basis = galerkin.monomial_norms(hardy, 20)
T = galerkin.truncation_matrix(phi, basis).square
z = np.array([0.3 + 0.1j, -0.2j])
err = np.linalg.norm(T.conj().T @ galerkin.kernel_coefficients(z, basis)
                     - galerkin.kernel_coefficients(phi(z), basis))
print("kernel transport error:", err)

# %%
for a, b in [(half, third), (phi, phi), (phi, psi)]:
    d = decide.decide_difference(a, b, hardy)
    print(d.verdict.value)

# %%
# Two parabolic maps fixing e1 with the same boundary data everywhere; only
# a second-order parameter tells them apart.
p = lfm.TForm.build(1.0, -0.5, [0.0], [0.0], [[0.5]]).to_map()
q = lfm.TForm.build(1.0, -0.5, [0.0], [0.05], [[0.5]]).to_map()
d = decide.decide_difference(p, q, hardy)
print(d.verdict.value, "differing parameters:", d.certificate.differing)
