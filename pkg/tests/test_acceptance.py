"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run under pytest (``pytest tests/test_acceptance.py -v``) or directly
(``python tests/test_acceptance.py``) for just the eight summary lines.
"""

import math
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from carleman_bpm.combinatorics import identity_sweep  # noqa: E402
from carleman_bpm.conjugation import closed_form_polynomial, conjugate_expand, split  # noqa: E402
from carleman_bpm.fracapp import TimeSeries, composition_check, lift_check, manufactured_cases, negative_control, power_rule_table  # noqa: E402
from carleman_bpm.ibp import (  # noqa: E402
    bpg_weight,
    cross_coeff_closed,
    cross_support,
    diag_coeff_bpg,
    diag_ledger,
    i1i2_reduced,
    reduce_time,
    time_quadform,
)
from carleman_bpm.numverify import conservation_check, verify_config  # noqa: E402
from oracles import path_weight_sum, random_grids  # noqa: E402

CANON = {
    (4, "i1"): '[{"coeff":"-6/1","m":2,"r":0,"s":1},{"coeff":"-4/1","m":3,"r":1,"s":0},{"coeff":"-6/1","m":0,"r":2,"s":1},{"coeff":"-4/1","m":1,"r":3,"s":0}]',
    (4, "i2"): '[{"coeff":"1/1","m":4,"r":0,"s":0},{"coeff":"12/1","m":1,"r":1,"s":1},{"coeff":"6/1","m":2,"r":2,"s":0},{"coeff":"1/1","m":0,"r":4,"s":0}]',
    (5, "i1"): '[{"coeff":"1/1","m":5,"r":0,"s":0},{"coeff":"30/1","m":2,"r":1,"s":1},{"coeff":"10/1","m":3,"r":2,"s":0},{"coeff":"10/1","m":0,"r":3,"s":1},{"coeff":"5/1","m":1,"r":4,"s":0}]',
    (5, "i2"): '[{"coeff":"-10/1","m":3,"r":0,"s":1},{"coeff":"-5/1","m":4,"r":1,"s":0},{"coeff":"-30/1","m":1,"r":2,"s":1},{"coeff":"-10/1","m":2,"r":3,"s":0},{"coeff":"-1/1","m":0,"r":5,"s":0}]',
}


def criterion_1():
    t0 = time.perf_counter()
    recs = identity_sweep(40)
    dt = time.perf_counter() - t0
    bad = [(r["n"], r["m"]) for r in recs if not r["ok"]]
    return not bad and dt < 5, f"{len(recs)} (n,m) pairs, {len(bad)} failures, {dt:.2f}s"


def criterion_2():
    t0 = time.perf_counter()
    bad = [n for n in range(31) if conjugate_expand(n) != closed_form_polynomial(n)]
    canon = all(getattr(split(n), part).to_json() == text for (n, part), text in CANON.items())
    dt = time.perf_counter() - t0
    return not bad and canon and dt < 10, f"n<=30 mismatches {bad}, n=4/5 splits canonical {canon}, {dt:.2f}s"


def criterion_3():
    bad = []
    for n in range(2, 21):
        red = i1i2_reduced(n)
        for m in range(n):
            want = Fraction(n * n, 2) * math.comb(n - 1, m)
            if not diag_coeff_bpg(n, m) == red.diagonal.get((2 * n - 2 * m - 2, 1, m)) == want:
                bad.append((n, m))
        if any(s % 2 == 0 for (_, s, _) in red.diagonal):
            bad.append((n, "even s"))
    ledger = [e.contribution for e in diag_ledger(4, 2)]
    ok_ledger = ledger == [-36, 48, -6, 36, -18, 0] and sum(ledger) == 24
    return not bad and ok_ledger, f"2<=n<=20 mismatches {bad}, ledger {[str(c) for c in ledger]} total {sum(ledger)}"


def criterion_4():
    bad = []
    for n in range(2, 16):
        cross = reduce_time(time_quadform(n, 1)).cross
        want = {k: cross_coeff_closed(n, *k) for k in cross_support(n)}
        if cross != want:
            bad.append(n)
    small = all(not reduce_time(time_quadform(n, 1)).cross for n in range(2, 7))
    seven = reduce_time(time_quadform(7, 1)).cross == {(0, 3, 0): -210}
    return not bad and small and seven, f"2<=n<=15 mismatches {bad}, empty for n<=6 {small}, n=7 gives -210 {seven}"


def criterion_5():
    cases = random_grids(250)
    bad = sum(bpg_weight(g, s) != path_weight_sum(g, s) for g, s in cases)
    return len(cases) >= 200 and bad == 0, f"{len(cases)} random grids, {bad} mismatches"


def _random_fields(count=5, seed=7):
    rng = random.Random(seed)
    fields = []
    for _ in range(count):
        params = []
        for _ in range(rng.randint(1, 3)):
            rt, rx = rng.uniform(0.1, 0.3), rng.uniform(0.1, 0.3)
            tc, xc = rng.uniform(rt + 0.02, 0.98 - rt), rng.uniform(rx + 0.02, 0.98 - rx)
            params.append((rng.uniform(0.5, 2.0), tc, xc, rt, rx))
        fields.append(params)
    return fields


def criterion_6():
    worst = 0.0
    for params in _random_fields():
        for n in (2, 3, 4):
            rec = conservation_check(n, params, lam=2.0)[-1]
            worst = max(worst, rec["space_rel_err"], rec["time_rel_err"])
    return worst < 1e-6, f"5 fields x n in (2,3,4), worst relative gap {worst:.2e}"


def criterion_7():
    t0 = time.perf_counter()
    rows = []
    for n in (2, 3, 4):
        for alpha in (1, -1):
            rep = verify_config(n, alpha)
            rows.append((n, alpha, rep["pass"], rep["lambda_star"]))
    dt = time.perf_counter() - t0
    ok = all(r[2] for r in rows) and dt < 120
    stars = ", ".join(f"n={n} a={a:+d} lam*={s:.1f}" if s else f"n={n} a={a:+d} none" for n, a, _, s in rows)
    return ok, f"{stars}; {dt:.1f}s"


def criterion_8():
    tables = [power_rule_table(g, mu) for g in (0.25, 1 / 3, 0.5, 2 / 3) for mu in (1 / 3, 2 / 3, 1.0, 2.0)]
    power_ok = all(t["pass"] for t in tables)
    worst = 0.0
    comp_ok = True
    for fn in (lambda t: t, lambda t: t**2, lambda t: t ** (4 / 3)):
        for g1, g2 in ((1 / 3, 1 / 3), (0.5, 0.5), (0.25, 0.5), (1 / 3, 2 / 3)):
            rep = composition_check(TimeSeries.uniform(fn, 1.0, 4096), g1, g2)
            worst = max(worst, rep.max_rel_discrepancy)
            comp_ok &= rep.hypotheses_ok and rep.max_rel_discrepancy < 1e-3
    lifts = {name: lift_check(case)["pass"] for name, case in manufactured_cases().items()}
    neg = not lift_check(negative_control())["pass"]
    ok = power_ok and comp_ok and sum(lifts.values()) >= 2 and all(lifts.values()) and neg
    return ok, f"power rule 16/16 {power_ok}, composition worst {worst:.1e}, lifts {lifts}, negative control rejected {neg}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


def report(k, ok, detail):
    return f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"


@pytest.mark.parametrize("k", range(1, 9))
def test_criterion(k, capsys):
    ok, detail = CRITERIA[k - 1]()
    with capsys.disabled():
        print("\n" + report(k, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = [(k, *fn()) for k, fn in enumerate(CRITERIA, 1)]
    for k, ok, detail in results:
        print(report(k, ok, detail))
    sys.exit(0 if all(ok for _, ok, _ in results) else 1)
