"""Splitting an asymmetric stiffness into its spring and curl parts.

Run: python demos/01_stiffness_split.py
"""
import numpy as np

from asymadmit.stiffness import (
    StiffnessMatrix,
    decompose,
    force_field,
    spiral_class,
    spiral_free_bound,
    stiffness_eigenvalues,
)

# %% The reference stiffness: equal diagonal springs plus a curl term.
k = StiffnessMatrix(kx=100.0, ky=100.0, ks=0.0, ka=10.0)
Ks, Ka = decompose(k)
print("K =\n", k.matrix)
print("K_s =\n", Ks)
print("K_a =\n", Ka)

# %% The curl part pushes tangentially, so it never stores energy.
ff = force_field(k, (-0.05, 0.05), (-0.05, 0.05), 3, 3)
for row in ff.rows():
    x, y, fx, fy, *_rest, ax, ay = row
    print(f"at ({x:+.2f}, {y:+.2f})  F = ({fx:+6.2f}, {fy:+6.2f})  curl part = ({ax:+.2f}, {ay:+.2f})")

# %% Complex stiffness eigenvalues mean a spiral can be excited.
print("eigenvalues:", stiffness_eigenvalues(k))
print("class:", spiral_class(k))

# %% Spreading the diagonal (or adding ks) widens the spiral-free band for ka.
for kk in [(100, 100, 0), (100, 100, 40), (140, 60, 0)]:
    bound = spiral_free_bound(StiffnessMatrix(*kk))
    classes = {ka: spiral_class(StiffnessMatrix(*kk, ka)) for ka in (10, 30, bound, 50)}
    print(kk, f"|ka| <= {bound:g}", classes)
