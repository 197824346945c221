"""Phase-plane certificate that the smooth radial branch closes up.

The warp profile of a rotationally symmetric gradient shrinker on R^3
reduces to a second-order ODE with a conserved quantity E.  The smooth
branch leaves the origin on the E = 0 level set; the shot below follows
it until u returns to zero at finite radius.  Finite milestones
r1 < r2 < r3 < r4 with u_max = 3^(3/4) pin the orbit to the closed
separatrix loop, so the profile cannot stay positive out to infinity.
That finite return is the computational heart of the non-existence
argument on R^3.
"""
import math

from grflab.shooting import shoot_r3_branch

report = shoot_r3_branch()

r1, r2, r3, r4 = report.milestones
print("milestones of the smooth branch (closed forms alongside):")
root3 = math.sqrt(3.0)
print(f"  u=1 rising   r1 = {r1:.9f}   sqrt(3) asin(1/sqrt 3) = "
      f"{root3 * math.asin(1.0 / root3):.9f}")
print(f"  peak         r2 = {r2:.9f}   sqrt(3) pi/2           = "
      f"{root3 * math.pi / 2.0:.9f}")
print(f"  u=1 falling  r3 = {r3:.9f}   sqrt(3)(pi - asin)     = "
      f"{root3 * (math.pi - math.asin(1.0 / root3)):.9f}")
print(f"  floor        r4 = {r4:.9f}   sqrt(3) pi             = "
      f"{root3 * math.pi:.9f}")
print()
print(f"u_max               = {report.u_max:.12f} (exact 3^(3/4) = {3.0 ** 0.75:.12f})")
print(f"invariant drift     = {report.invariant_drift:.2e}")
print(f"came back to zero   = {report.terminated_at_zero}")
print(f"floor slope check   = {report.floor_p:.9f} vs predicted "
      f"{report.floor_p_predicted:.9f}")
