"""Tour of the piecewise-linear comparison-function algebra.

Everything the library does with scalar gains happens in one closed
class: strictly increasing piecewise-linear functions pinned at the
origin.  This script builds a few, inverts and composes them exactly,
and shows the two identity-splitting constructions used by the path
machinery.
"""

import numpy as np

from sglab import (
    KFun,
    MonotoneSamples,
    Side,
    envelope,
    factor_id_plus,
    id_plus,
    identity,
    linear,
    power_kfun,
    sub_from_id,
)

print("== building blocks ==")
half = linear(0.5)
kink = KFun([0.0, 1.0], [0.0, 2.0], 0.5)  # steep start, shallow tail
print("half(3) =", half(3.0))
print("kink at [0.5, 1, 3]:", kink(np.array([0.5, 1.0, 3.0])))

print("\n== exact inversion and composition ==")
inv = kink.inverse()
r = np.linspace(0.0, 10.0, 11)
print("max |kink^-1(kink(r)) - r| =", np.max(np.abs(inv(kink(r)) - r)))
chain = kink.compose(half)
print("kink(half(2)) =", kink(half(2.0)), "== composed:", chain(2.0))

print("\n== subtracting from the identity ==")
# For any margin rho there is an eta with (id + rho)^(-1) = id - eta.
rho = linear(1.0)
eta = sub_from_id(rho)
print("eta is half the identity:", eta(1.0), eta(4.0))
p = id_plus(rho)
grid = np.linspace(0.0, 5.0, 21)
print("residual of (id+rho) o (id-eta):", np.max(np.abs(p(grid - eta(grid)) - grid)))

print("\n== splitting an enlargement in two ==")
rho1, rho2 = factor_id_plus(rho)
print("inner factor rho2 = rho/2:", rho2(2.0))
print("outer factor rho1(3) =", rho1(3.0))
recomposed = id_plus(rho1).compose(id_plus(rho2))
print("recomposition residual:", np.max(np.abs(recomposed(grid) - p(grid))))

print("\n== envelopes of sampled data ==")
rs = np.linspace(0.0, 2.0, 21)
noisy = MonotoneSamples(rs, np.minimum(rs, 1.2))  # saturating samples
above = envelope(noisy, Side.ABOVE)
print("majorant at 2.0 (slope floor keeps it increasing):", above(2.0))
square, err = power_kfun(1.0, 2.0, 1e-2, 1e2)
print("power gain discretization error:", f"{err:.3%}")
print("identity stays identity:", identity()(7.0))
