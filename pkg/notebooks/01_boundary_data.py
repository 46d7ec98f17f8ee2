"""
Boundary data of a linear fractional self-map
=============================================

Where a map touches the sphere, how fast it gets there, and what the
normalized parameters at a contact point look like.
"""

# %%
import numpy as np

from ballcomp import boundary, lfm

phi = lfm.shift_automorphism(2, 1 / 3)
print(phi)
print("sup |phi| on the sphere:", boundary.sup_norm(phi))

# %%
# An automorphism touches the sphere everywhere, so the contact set is a
# continuum.  A sample of it is still enough to pick a witness.
contacts = boundary.contact_points(phi)
print("continuum:", contacts.continuum, "sampled points:", len(contacts.points))

# %%
# The dilation coefficient at e1, once by radial extrapolation and once
# from the derivative of the map.
e1 = np.array([1.0, 0.0], dtype=complex)
jc = boundary.angular_derivative(phi, e1)
print("radial:", jc.d_val, "  derivative:", boundary.directional_derivative(phi, e1).real)

# %%
# A map with a single contact point, and one that stays strictly inside.
touch = lfm.make_lfm(np.diag([0.5, 0.5]), [0.5, 0], [0, 0], 1)
print("touching map contacts:", boundary.contact_points(touch).points)
print("z/2 compact:", boundary.is_compact_single(lfm.dilation(2, 0.5)))

# %%
# Normalized parameters at e1 after moving the contact to e1 on both sides.
tf = lfm.normalize_t_form(phi)
print("t =", tf.t, " K =", tf.K, " alpha =", tf.alpha.ravel())

# %%
# The adjoint map and the two compositions with it.
sigma = lfm.adjoint_map(phi)
print("sigma equals psi_{-1/3}:", lfm.projectively_equal(sigma, lfm.shift_automorphism(2, -1 / 3)))
