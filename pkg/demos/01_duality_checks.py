"""
Checking duality identities exactly
===================================

Both sides of ``L D(., eta) = c L_dual D(x, .)(eta)`` are built as exact
polynomials and compared term by term.
"""

from nessdual.duality import (
    RotationFrame,
    all_configurations,
    bmp_dual_poly,
    check_change_of_coordinates,
    check_duality,
    check_intertwiner,
    check_su11,
)
from nessdual.model import DualConfig

# BMP with reservoirs against absorbing SIP(1). The temperatures stay formal,
# so one check covers every (T_left, T_right).
etas = all_configurations(3, 3)
report = check_duality("bmp-sip1", etas)
print("BMP/SIP(1):", report.passed, "on", report.n_cases, "configurations")

# drop the double factorials and the identity breaks
broken = check_duality("bmp-sip1", etas[:5], column=lambda e: bmp_dual_poly(e, normalise=False))
print("without (2n-1)!!:", broken.passed, "first residual terms", broken.residual_terms[:3])

# BEP(m)/SIP(m) as an identity in m
print("BEP/SIP, formal m:", check_duality("bep-sip", all_configurations(2, 3, cemeteries=False)).passed)

# the three-site rotor; with a formal angle every frame is covered at once
walkers = [(1, 0), (0, 1), (1, 1), (2, 0)]
print("rotor, all angles:", check_duality("l3-rotated", walkers, frame=RotationFrame.symbolic()).passed)
print("change of coordinates at pi/6:", check_change_of_coordinates(RotationFrame.exact("1/6"), walkers, max_degree=4).passed)

# the algebra underneath
for rep in ("differential", "discrete"):
    print(rep, "SU(1,1) relations:", check_su11(rep, 2).passed)
print("intertwiner, m formal:", check_intertwiner("m", 8).passed)

# reports serialise to JSON
print(check_duality("bmp-sip1", [DualConfig.parse("1;0,1,0;0")]).to_json())
