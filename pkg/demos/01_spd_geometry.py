"""
Geometry of covariance matrices
===============================

Covariance features are symmetric positive definite (SPD) matrices, and the
pipeline measures them with the affine-invariant distance instead of plain
Euclidean differences.  This script shows the two properties everything else
relies on: invariance under linear channel mixing, and the geometric mean as
a center that respects the curved space.
"""

import numpy as np

from p300bci import affine_distance, karcher_mean, validate_spd

rng = np.random.default_rng(0)


def random_spd(order):
    g = rng.standard_normal((order, order))
    return validate_spd(g @ g.T / order + np.eye(order))


# %% Distances between covariance matrices
a = random_spd(6)
b = random_spd(6)
print("d(A, B)        =", round(affine_distance(a, b), 6))
print("d(B, A)        =", round(affine_distance(b, a), 6))
print("d(A, A)        =", affine_distance(a, a))

# Scaling a covariance moves it along the manifold by a known amount:
# d(A, cA) = sqrt(order) * |log c| regardless of A.
for c in (2.0, 4.0):
    print(f"d(A, {c:g}A)      = {affine_distance(a, c * a):.6f}"
          f"   (sqrt(6)*log {c:g} = {np.sqrt(6) * np.log(c):.6f})")

# %% Invariance under channel mixing
# Re-referencing or mixing EEG channels is a congruence transform
# S -> G S G^T.  The affine-invariant distance does not move at all, which is
# why classifiers built on it transfer across such changes.
mixing = rng.standard_normal((6, 6)) + 0.5 * np.eye(6)
d_before = affine_distance(a, b)
d_after = affine_distance(mixing @ a @ mixing.T, mixing @ b @ mixing.T)
print("\nchannel mixing:  before", round(d_before, 10), " after", round(d_after, 10))

# %% The geometric mean
# The arithmetic mean of SPD matrices inflates the volume (swelling effect);
# the geometric mean is the proper center of mass under the metric above.
samples = [random_spd(6) for _ in range(20)]
arithmetic = np.mean(samples, axis=0)
geometric = karcher_mean(samples)

det_samples = np.exp(np.mean([np.linalg.slogdet(s)[1] for s in samples]))
print("\ngeometric mean of sample determinants:", round(det_samples, 4))
print("det of arithmetic mean:               ", round(np.linalg.det(arithmetic) ** (1 / 1), 4))
print("det of geometric mean:                ", round(np.linalg.det(geometric), 4))

# The geometric mean minimizes the summed squared distance to the samples.
for name, center in [("arithmetic", arithmetic), ("geometric", geometric)]:
    cost = sum(affine_distance(s, center) ** 2 for s in samples)
    print(f"sum d^2 to {name:>10} mean: {cost:.4f}")
