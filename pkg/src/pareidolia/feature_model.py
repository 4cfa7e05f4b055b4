"""Poisson feature model of pareidolia.

A template has ``M`` regions of area ``B``. Region ``i`` must contain
exactly one feature of type ``i`` and none of the other ``M - 1`` types;
features of every type arrive as independent Poisson processes of rate
``lambda`` per unit area. This gives::

    P = prod_i [pmf(1) * pmf(0) ** (M - 1)] = (lambda*B)**M * exp(-lambda*B*M**2)

which for ``M = 4, B = 1`` is ``lambda**4 * exp(-16 * lambda)``.
"""

import math
from dataclasses import dataclass

from ._errors import ParameterError
from .curve import Curve


@dataclass(frozen=True)
class FeatureModelParams:
    lam: float
    regions: int = 4
    area: float = 1.0

    def __post_init__(self):
        if not self.lam >= 0:
            raise ParameterError("lambda must be >= 0")
        if int(self.regions) != self.regions or self.regions < 1:
            raise ParameterError("regions must be an integer >= 1")
        if not self.area > 0:
            raise ParameterError("area must be > 0")
        object.__setattr__(self, "regions", int(self.regions))


def poisson_pmf(n, lam, area=1.0):
    if int(n) != n or n < 0:
        raise ParameterError("n must be a non-negative integer")
    if not lam >= 0 or not area > 0:
        raise ParameterError("need lambda >= 0 and area > 0")
    mu = lam * area
    if mu == 0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(mu) - mu - math.lgamma(n + 1))


def template_detect_prob(params):
    mu = params.lam * params.area
    M = params.regions
    if mu == 0:
        return 0.0
    return mu**M * math.exp(-mu * M * M)


def feature_curve(lambdas, M=4, B=1.0):
    lambdas = [float(v) for v in lambdas]
    if not lambdas:
        raise ParameterError("lambdas must be non-empty")
    ys = [template_detect_prob(FeatureModelParams(v, M, B)) for v in lambdas]
    return Curve(lambdas, ys, x_name="lambda", y_name="probability")


def peak_rate(M, B=1.0):
    """Analytic maximiser ``lambda* = 1 / (B * M)`` and the probability there.

    Setting the derivative of ``M log(lambda B) - lambda B M**2`` to zero.
    """
    if int(M) != M or M < 1 or not B > 0:
        raise ParameterError("need integer M >= 1 and B > 0")
    lam = 1.0 / (B * M)
    return lam, template_detect_prob(FeatureModelParams(lam, M, B))
