"""Convergence of the interpolant under mesh refinement.

Interpolating a smooth 1-form on finer and finer meshes should drive
the sup-norm error down at order k.  The estimated order of
convergence (EOC) between consecutive pairs approaches k.
"""

from cubeforms.cli import run_convergence

for k in (1, 2):
    rows = run_convergence(2, 1, k, [2, 4, 8, 16])
    print(f"degree-1 interpolation at order k={k}:")
    print(f"  {'m':>4} {'h':>8} {'sup error':>12} {'EOC':>7}")
    for row in rows:
        eoc = "-" if row.eoc is None else f"{row.eoc:.3f}"
        print(f"  {row.subdivisions:>4} {row.mesh_size:>8.4f} "
              f"{row.sup_error:>12.4e} {eoc:>7}")
    print()

print("the same study, sheared so no cell is axis aligned:")
rows = run_convergence(2, 1, 2, [2, 4, 8], shear=0.5)
for row in rows:
    eoc = "-" if row.eoc is None else f"{row.eoc:.3f}"
    print(f"  m={row.subdivisions}: error {row.sup_error:.4e}  EOC {eoc}")
