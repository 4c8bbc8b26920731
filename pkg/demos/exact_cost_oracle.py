"""Exact deterministic one-way cost by colouring the row-conflict graph.

Two rows of a partial function conflict when some column has opposite
defined values in them; Alice must send them different messages.
"""

from qoneway import exact_one_way_cost
from qoneway.oracle import distinct_rows
from qoneway.protocol import PartialFunction, equality_function, xor_shift_function

for name, f in [
    ("equality, 2 bits", equality_function(2)),
    ("xor-shift, n=4", xor_shift_function(4)),
    ("5-cycle", PartialFunction.from_rows(["01***", "*01**", "**01*", "***01", "1***0"])),
]:
    g = distinct_rows(f)
    res = exact_one_way_cost(f)
    print(f"{name:17s} rows {f.x_count:3d}  conflicts {len(g.edges):4d}  colours {res.chromatic_number}"
          f"  cost {res.bits} bits  exact {res.exact}")
