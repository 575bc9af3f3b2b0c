"""Build the polynomial form attached to each small cube.

Every small cube owns one spanning differential form, a product of
one-dimensional factors determined by the cube's anchor: free axes
contribute a factor of degree k-1, fixed axes a factor of degree k.
The forms close under the exterior derivative: d maps each one into
the span of the next degree.
"""

import numpy as np

from cubeforms import (
    basis_form,
    enumerate_small_cubes,
    exterior_derivative,
    span_membership,
)

N, K = 2, 2

cubes = enumerate_small_cubes(N, 1, K)
cube = cubes[3]
form = basis_form(cube)
print(f"small cube: directions {cube.directions}, anchor numerators "
      f"{cube.anchor_numerators}")
print(f"its form has degree {form.degree} and components on {sorted(form.terms)}")

points = np.array([[0.25, 0.5], [0.75, 0.1]])
values = form.evaluate(points)
for dirs, vals in values.items():
    print(f"  component dx{dirs}: {vals}")

print()
print("the exterior derivative lands in the degree-2 span:")
d_form = exterior_derivative(form)
print(f"  d(form) components: {sorted(d_form.terms)}")
print(f"  inside the degree-2 space: {span_membership(d_form, K)}")

print()
print("a sample of degree-0 forms at the lattice points:")
for vertex in enumerate_small_cubes(N, 0, K)[:4]:
    f = basis_form(vertex)
    at_anchor = f.evaluate(np.array([float(a) for a in vertex.anchor]))
    print(f"  anchor {vertex.anchor_numerators}: value at own anchor = "
          f"{at_anchor[()]:.6f}")
