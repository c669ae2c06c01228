"""
Multiplicative mixing loses information
=======================================

If Y = U V' with V' ~ f and U an independent positive multiplier, the
density h of Y has no more scale information than f, with equality only
when U is a point mass.  The current duration law itself is such a
mixture: X = U D with U uniform on (0, 1).
"""

import numpy as np

from aftinfo import (
    BaselineDensity,
    Degenerate,
    LengthBiased,
    LogLogistic,
    Mixture,
    Scheme,
    TwoPoint,
    Uniform,
    UnitUniform,
    Weibull,
    info_scale,
    verify_mixture_contraction,
)

laws = [Degenerate(3.0), TwoPoint(1.0, 2.0, 0.5), Uniform(0.5, 2.0), UnitUniform()]
for base in (Weibull(1.0), Weibull(2.0), LogLogistic(3.0)):
    f = BaselineDensity(base)
    for law in laws:
        r = verify_mixture_contraction(f, law)
        tag = "equality" if r.degenerate and r.equal else r.status
        print(f"{base.name:24s} {law!r:38s} I(f)={r.i_f:8.4f} I(h)={r.i_h:8.4f} {tag}")

# spreading two atoms further apart removes more information
f = BaselineDensity(Weibull(1.0))
for b in (1.001, 1.5, 2.0, 5.0):
    print(f"TwoPoint(1, {b:g}): I(h) = {info_scale(Mixture(f, TwoPoint(1.0, b, 0.5))).value:.6f}")

# mixing the length biased law over U(0, 1) gives back the current duration law
x = np.geomspace(0.05, 8.0, 6)
m = Weibull(2.0)
h = Mixture(LengthBiased(m), UnitUniform()).pdf(x)
f2 = Scheme.CURRENT_DURATION.density(m).pdf(x)
for xi, a, b in zip(x, h, f2):
    print(f"x={xi:7.3f}  mixture={a:.15f}  S(x)/mu={b:.15f}")
