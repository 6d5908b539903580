#!/usr/bin/env python3
"""Hyperplane geometry warm-up.

A hyperplane direction . x + intercept = 0 splits latent space in two.
Moving a point along the unit normal by its signed distance lands it
exactly on the boundary; these signed moves are the building block of
every conditioning step in this package.
"""

import numpy as np

from latentsteer import (
    Hyperplane,
    cosine_similarity,
    pairwise_cosines,
    project_to_hyperplane,
    sample_latents,
    signed_distance,
    unit_direction,
)

h = Hyperplane(np.array([3.0, 4.0]), 0.0)
print("hyperplane: 3*x0 + 4*x1 = 0")
print("unit normal:", unit_direction(h))

z = np.array([1.0, 1.0])
s = signed_distance(z, h)
print(f"\nz = {z}, score = {h.score(z)}, signed distance = {s}")
print("note the sign: the distance is negative on the positive-score side")

z_on = project_to_hyperplane(z, h)
print(f"z + s * unit normal = {z_on}, score now {h.score(z_on):.2e}")

# the same holds for random points in any dimension
rng = np.random.default_rng(0)
worst = 0.0
for _ in range(1000):
    dim = int(rng.integers(2, 65))
    z = rng.standard_normal(dim)
    plane = Hyperplane(rng.standard_normal(dim), float(rng.standard_normal()))
    worst = max(worst, abs(plane.score(project_to_hyperplane(z, plane))))
print(f"\nworst projection residual over 1000 random pairs: {worst:.2e}")

# cosine similarity measures how tangled two directions are
a, b = np.array([1.0, 0.0]), np.array([1.0, 1.0])
print(f"\ncosine((1,0), (1,1)) = {cosine_similarity(a, b):.5f}")

vectors = sample_latents(4, 8, seed=7)
print("\npairwise cosine matrix of 4 random directions in 8-D:")
print(np.round(pairwise_cosines(vectors), 3))
