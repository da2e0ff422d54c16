"""Lambda sweep of both sides of the weighted inequality for one bump.

    python demos/carleman_sweep.py [n] [alpha]
"""

import sys

from carleman_bpm.numverify import verify_config

n = int(sys.argv[1]) if len(sys.argv) > 1 else 4
alpha = float(sys.argv[2]) if len(sys.argv) > 2 else -1.0

rep = verify_config(n, alpha)
print(f"n = {n}, alpha = {alpha:g}, grid {rep['config']['grid']['Nt']}x{rep['config']['grid']['Nx']}")
print(f"{'lambda':>8} {'rhs/lhs':>10} {'(leibniz)':>10} {'Q':>10}")
for rec, q in zip(rep["records"], rep["converted"]["q"]):
    print(f"{rec['lambda']:8.2f} {rec['ratio']:10.3f} {rec['ratio_leibniz']:10.3f} {q:10.3e}")
print(f"empirical threshold {rep['lambda_star']}, empirical C {rep['empirical_C']:.3e}, pass {rep['pass']}")
