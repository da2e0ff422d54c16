"""Walk through one leading coefficient by both exact routes.

    python demos/coefficient_ledger.py [n] [m]
"""

import sys

from carleman_bpm.combinatorics import kappa_closed
from carleman_bpm.conjugation import split
from carleman_bpm.ibp import diag_ledger, i1i2_reduced, reduce_time, time_quadform

n = int(sys.argv[1]) if len(sys.argv) > 1 else 4
m = int(sys.argv[2]) if len(sys.argv) > 2 else n // 2

sp = split(n)
print(f"n = {n}")
print("  I1 =", sp.i1.to_latex())
print("  I2 =", sp.i2.to_latex())

print(f"\nback-propagation ledger for d_{m}:")
total = 0
for e in diag_ledger(n, m):
    total += e.contribution
    print(f"  node {e.node}:  h = {e.h!s:>6}  g = {e.g!s:>6}  h*g = {e.contribution}")
print(f"  total            {total}")

p = 2 * n - 2 * m - 2
print(f"rewriting oracle   {i1i2_reduced(n).diagonal.get((p, 1, m))}")
print(f"closed form        {kappa_closed(n, m)}")

cross = reduce_time(time_quadform(n, 1)).cross
print("\ncross terms of w_t * I2:", {k: str(v) for k, v in cross.items()} or "none")
