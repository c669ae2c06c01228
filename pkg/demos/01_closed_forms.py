"""
Scale information of the two sampled duration laws
===================================================

For a baseline density g with mean mu, a length biased observation has
density x g(x) / mu and a current duration (time since onset) has density
S(x) / mu, with S the survival function.  For Weibull and log-logistic
baselines the scale information of both laws has a closed form; here it
is recomputed by adaptive quadrature.
"""

from aftinfo import LogLogistic, Scheme, Weibull, info_scale, info_scale_closed_form

print(f"{'baseline':28s} {'scheme':17s} {'closed form':>12s} {'quadrature':>14s} {'rel err':>9s}")
for family, make, gammas in [("weibull", Weibull, [0.5, 1, 2, 3, 5, 10]),
                             ("loglogistic", LogLogistic, [1.5, 2, 3, 5, 10])]:
    for g in gammas:
        m = make(g)
        for scheme in Scheme:
            exact = info_scale_closed_form(family, g, scheme).value
            q = info_scale(scheme.density(m))
            print(f"{m.name:28s} {scheme.value:17s} {exact:12.6f} {q.value:14.10f} "
                  f"{abs(q.value - exact) / exact:9.1e}")

# the quadrature result carries its own error estimate
r = info_scale(Scheme.CURRENT_DURATION.density(LogLogistic(1.5)))
print(f"\nlog-logistic(1.5), current duration: {r.value!r} +- {r.error_estimate:.1e}")
