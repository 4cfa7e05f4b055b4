# # Peak pareidolia with Poisson features
#
# Features land in the image as a Poisson process with rate lambda. A face
# needs M regions of area B, each holding exactly one correct feature and
# no wrong ones. Too few features and regions sit empty; too many and they
# get cluttered. The detection probability peaks at lambda = 1 / (B M).

from pareidolia.feature_model import FeatureModelParams, feature_curve, peak_rate
from pareidolia.montecarlo import mc_feature_detect

for m in (1, 2, 4, 8):
    lam, p = peak_rate(m)
    print(f"M = {m}: peak at lambda {lam:.4f}, probability {p:.3e}")

# The closed form against simulation for four regions.

for lam in (0.1, 0.25, 0.5):
    params = FeatureModelParams(lam, 4)
    est = mc_feature_detect(params, 2_000_000, seed=3)
    exact = feature_curve([lam], 4).y[0]
    print(f"lambda {lam}: closed form {exact:.4e}, simulated {est.mean:.4e} +/- {est.std_error:.1e}")
