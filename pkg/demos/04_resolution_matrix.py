"""
Base x Max resolution matrix
============================

Every pairing with base <= max. The diagonal is verification without
abstraction; all entries in a row report the same counterexample length.
"""
from voxrefine.cli import matrix, matrix_table
from voxrefine.scenario import bundled_dir

path = bundled_dir() / "collision.json"
records = matrix(path, bases=[2, 4, 8, 16], maxes=[16, 32, 64])
for value in ("cell_checks", "length", "refinements"):
    print(value)
    print(matrix_table(records, value))
