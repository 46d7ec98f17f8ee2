"""
Kernel quotients near the boundary
==================================

The normalized kernel quotient of a difference of composition operators,
its behaviour along approach curves, and the lower bound it produces.
"""

# %%
import numpy as np

from ballcomp import kernel, lfm
from ballcomp.space import SpaceSpec

hardy = SpaceSpec.hardy(2)
phi = lfm.shift_automorphism(2, 1 / 3)
psi = lfm.shift_automorphism(2, 1 / 2)

# %%
# Along the radius toward e1 the quotient levels off near 1.48.  The
# larger values live on curves that approach e1 tangentially.
for r in (0.9, 0.99, 0.999, 0.9999):
    z = np.array([r, 0])
    q = kernel.kernel_quotient(phi, psi, z, hardy)
    mw = kernel.mw_quotient_lower_bound(phi, psi, z, hardy)
    print(f"r={r:<7} quotient={float(q):.6f}  lower estimate={float(mw):.6f}")

# %%
# The two maps send e1 to e1 with different dilation coefficients, which
# forces a positive lower bound on the essential norm.
rep = kernel.essnorm_lower_bound_diff(phi, psi, hardy)
print("bound:", rep.bound, "witness:", rep.witness, "branch:", rep.branch)

# %%
# Inner limits along the horocycle-like curves with growing aperture M,
# then the extrapolated outer limit.
mixed = kernel.mixed_kernel_curve_limit(phi, psi)
for M, v in zip(mixed.M_values, mixed.power_real(hardy.beta_exp)):
    print(f"M={M:>5.0f}  Re(limit^2)={v: .6f}")
print("outer limit:", mixed.value, mixed.case)

# %%
# The same exponent appears in the weighted Bergman spaces, shifted by the weight.
for s in (0.0, 1.0):
    sp = SpaceSpec.bergman(2, s)
    print(sp.label(), "beta =", sp.beta_exp, "bound =", kernel.essnorm_lower_bound_diff(phi, psi, sp).bound)

# %%
# A linear combination: two copies of phi cancel, psi is left on its own.
for c in ([1, -1, 0], [1, -1, 1]):
    reps = kernel.combo_necessary_condition([phi, phi, psi], c, hardy)
    bad = [r for r in reps if not r.satisfied]
    print(c, "violated classes:", len(bad))
