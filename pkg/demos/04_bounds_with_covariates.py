"""
Information bounds for the regression parameter
===============================================

In T = exp(-theta' W) V the covariates seen in the sample follow a tilted
law f_Z, proportional to exp(-theta' z) h(z).  The information bound for
theta is Sigma_Z I_s when h is unknown, and Sigma_Z (I_s + 1) when h is
known, where Sigma_Z is the covariance of the sampled covariate.
"""

import math

import numpy as np

from aftinfo import (
    DiscreteCovariate,
    GaussianDiagonalCovariate,
    LogLogistic,
    Scheme,
    Weibull,
    info_bound,
)

coin = DiscreteCovariate([[0.0], [1.0]], [0.5, 0.5])
for theta in (0.0, math.log(2.0)):
    law = coin.tilt([theta])
    print(f"theta={theta:.4f}: P(Z=1) = {law.probs[1]:.4f}, Sigma_Z = {law.sigma_z()[0, 0]:.4f}")

for m in (Weibull(2.0), LogLogistic(2.0)):
    law = coin.tilt([0.0])
    print(f"\n{m.name}")
    for scheme in Scheme:
        for known in (False, True):
            rep = info_bound(m, law, scheme, h_known=known)
            print(f"  {scheme.value:17s} h_known={known!s:5s}  bound={rep.matrix[0, 0]:.6f}")

# a Gaussian covariate keeps its covariance under tilting: only the mean moves
cov = GaussianDiagonalCovariate([0.0, 0.0], [1.0, 4.0])
law = cov.tilt([0.5, -0.25])
print("\nGaussian covariate, theta = (0.5, -0.25)")
print("  sampled mean:", np.round(law.mean, 6))
print("  bound, length biased:\n", info_bound(Weibull(3.0), law, "lb").matrix)
