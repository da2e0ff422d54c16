"""Report builders for each command and their JSON / LaTeX / CSV renderings.

Builders return plain JSON-ready dicts with a top-level ``pass`` flag.
Exact rationals are serialized as ``"p/q"`` strings and non-finite floats as
``null``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from collections.abc import Sequence
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import fracapp, ibp, numverify
from .combinatorics import identity_sweep, to_ratio_str
from .conjugation import ConjPolynomial, closed_form_polynomial, conjugate_expand, latex_monomial, split

__all__ = [
    "COMMANDS",
    "build_expand",
    "build_coeffs",
    "build_identities",
    "build_verify",
    "build_caputo",
    "render",
    "load_schema",
    "write_atomic",
]

COMMANDS = ("expand", "coeffs", "identities", "verify", "caputo")
FORMATS = ("json", "latex", "csv")


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, Fraction):
        return to_ratio_str(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


# ---------------------------------------------------------------- builders


def build_expand(n: int, self_check: bool = True) -> dict:
    if n < 0:
        raise ValueError("n must be nonnegative")
    full = conjugate_expand(n)
    report: dict = {"command": "expand", "n": n, "expansion": full.to_records(), "split": None}
    if n >= 2:
        sp = split(n)
        report["split"] = {"I1": sp.i1.to_records(), "I2": sp.i2.to_records(), "I3": sp.i3.to_records()}
    ok = True
    if self_check:
        closed = closed_form_polynomial(n)
        bad = sorted(set(full) | set(closed))
        mism = [
            {"r": r, "s": s, "m": m, "expanded": to_ratio_str(full.coeff(r, s, m)), "closed": to_ratio_str(closed.coeff(r, s, m))}
            for r, s, m in bad
            if full.coeff(r, s, m) != closed.coeff(r, s, m)
        ]
        ok = not mism
        report["self_check"] = {"enabled": True, "ok": ok, "mismatches": mism}
    else:
        report["self_check"] = {"enabled": False, "ok": None, "mismatches": []}
    report["pass"] = ok
    return report


def build_coeffs(n: int, m: int | None = None) -> dict:
    if n < 2:
        raise ValueError("coeffs needs n >= 2")
    m = n // 2 if m is None else m
    if not 0 <= m <= n - 1:
        raise ValueError(f"m must lie in [0, {n - 1}]")
    red = ibp.i1i2_reduced(n)
    diag = []
    for k in range(n):
        bpg = ibp.diag_coeff_bpg(n, k)
        rew = red.diagonal.get((2 * n - 2 * k - 2, 1, k), Fraction(0))
        closed = Fraction(n * n, 2) * math.comb(n - 1, k)
        diag.append({"m": k, "bpg": bpg, "rewrite": rew, "closed": closed, "agree": bpg == rew == closed})
    ledger = ibp.diag_ledger(n, m)
    tform = ibp.reduce_time(ibp.time_quadform(n, 1))
    support = ibp.cross_support(n)
    cross = []
    for key in support:
        rew = tform.cross.get(key, Fraction(0))
        closed = ibp.cross_coeff_closed(n, *key)
        bpg = ibp.cross_coeff_bpg(n, *key)
        short = ibp.cross_coeff_shortcut(n, *key)
        cross.append(
            {"r": key[0], "s": key[1], "m": key[2], "rewrite": rew, "closed": closed, "bpg": bpg, "shortcut": short,
             "agree": rew == closed == bpg == short}
        )
    stray = [{"r": r, "s": s, "m": k, "coeff": c} for (r, s, k), c in sorted(tform.cross.items()) if (r, s, k) not in support]
    even_s = [{"r": r, "s": s, "m": k, "coeff": c} for (r, s, k), c in sorted(red.diagonal.items()) if s % 2 == 0]
    report = {
        "command": "coeffs",
        "n": n,
        "diagonal": diag,
        "ledger": {
            "m": m,
            "entries": [{"node": list(e.node), "h": e.h, "g": e.g, "contribution": e.contribution} for e in ledger],
            "total": sum((e.contribution for e in ledger), Fraction(0)),
        },
        "cross": [c for c in cross if c["rewrite"] != 0 or c["closed"] != 0],
        "cross_support_size": len(support),
        "cross_outside_support": stray,
        "even_s_diagonal": even_s,
        "lower_order": [{"r": r, "s": s, "m": k, "coeff": c} for (r, s, k), c in sorted(ibp.lower_order_table(n).items())],
        "discarded_count": {"space": red.discarded_count, "time": tform.discarded_count},
    }
    report["pass"] = all(d["agree"] for d in diag) and all(c["agree"] for c in cross) and not stray and not even_s
    return _clean(report)


def build_identities(max_n: int) -> dict:
    recs = identity_sweep(max_n)
    failures = [r for r in recs if not r["ok"]]
    return {"command": "identities", "max_n": max_n, "count": len(recs), "failures": failures, "records": recs, "pass": not failures}


def build_verify(
    n: int,
    alpha: Fraction,
    grid: numverify.Grid | None = None,
    weight: numverify.WeightSpec | None = None,
    octaves: int = 3,
    per_octave: int = 2,
    tol: float = 0.05,
) -> dict:
    if n < 2:
        raise ValueError("verify needs n >= 2")
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    grid = grid or numverify.Grid()
    weight = weight or numverify.default_weight(grid.T, grid.L)
    lams = numverify.lambda_sweep(weight, octaves, per_octave)
    rep = numverify.verify_config(n, float(alpha), grid, weight, lams, tol=tol)
    rep["config"]["alpha"] = to_ratio_str(alpha)
    rep["command"] = "verify"
    return _clean(rep)


def build_caputo(
    power_rule: bool = True,
    composition: bool = True,
    lift: bool = True,
    sizes: Sequence[int] = (256, 512, 1024, 2048, 4096),
) -> dict:
    report: dict = {"command": "caputo", "sizes": list(sizes)}
    ok = True
    if power_rule:
        tables = [fracapp.power_rule_table(g, mu, sizes) for g in (0.25, 1 / 3, 0.5, 2 / 3) for mu in (1 / 3, 2 / 3, 1.0, 2.0)]
        report["power_rule"] = tables
        ok &= all(t["pass"] for t in tables)
    if composition:
        zs = {"t": lambda t: t, "t^2": lambda t: t**2, "t^(4/3)": lambda t: t ** (4 / 3)}
        pairs = ((1 / 3, 1 / 3), (0.5, 0.5), (0.25, 0.5), (1 / 3, 2 / 3))
        rows = []
        for name, fn in zs.items():
            for g1, g2 in pairs:
                errs, hyp = [], True
                for N in sizes:
                    rep = fracapp.composition_check(fracapp.TimeSeries.uniform(fn, 1.0, N), g1, g2)
                    errs.append(rep.max_rel_discrepancy)
                    hyp &= rep.hypotheses_ok
                passed = hyp and errs[-1] < 1e-3 and errs[-1] <= errs[0]
                rows.append({"z": name, "gamma1": g1, "gamma2": g2, "errors": [{"N": N, "max_rel_discrepancy": e} for N, e in zip(sizes, errs)],
                             "hypotheses_ok": hyp, "pass": passed})
        report["composition"] = rows
        ok &= all(r["pass"] for r in rows)
    if lift:
        N = max(sizes)
        cases = [fracapp.lift_check(c, Nt=N) for c in fracapp.manufactured_cases().values()]
        neg = fracapp.lift_check(fracapp.negative_control(), Nt=N)
        report["lift"] = cases
        report["negative_control"] = {"report": neg, "detected": not neg["initial_checks"]["pass"]}
        ok &= all(c["pass"] for c in cases) and report["negative_control"]["detected"]
    report["pass"] = bool(ok)
    return _clean(report)


# ---------------------------------------------------------------- rendering


def load_schema(command: str) -> dict:
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    return json.loads(resources.files("carleman_bpm").joinpath("schemas", f"{command}.json").read_text())


def _json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv(rows: list[dict], fields: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _csv_for(report: dict) -> str:
    cmd = report["command"]
    if cmd == "expand":
        rows = [dict(rec, part="full") for rec in report["expansion"]]
        for part, recs in (report["split"] or {}).items():
            rows += [dict(rec, part=part) for rec in recs]
        return _csv(rows, ("part", "r", "s", "m", "coeff"))
    if cmd == "coeffs":
        rows = [{"table": "d_m", "r": 2 * report["n"] - 2 * d["m"] - 2, "s": 1, "m": d["m"], "coeff": d["closed"], "agree": d["agree"]}
                for d in report["diagonal"]]
        rows += [{"table": "d_C", "r": c["r"], "s": c["s"], "m": c["m"], "coeff": c["closed"], "agree": c["agree"]} for c in report["cross"]]
        rows += [dict(rec, table="lower_order", agree="") for rec in report["lower_order"]]
        return _csv(rows, ("table", "r", "s", "m", "coeff", "agree"))
    if cmd == "identities":
        rows = [dict(n=r["n"], m=r["m"], kappa=r["kappa"], ok=r["ok"]) for r in report["records"]]
        return _csv(rows, ("n", "m", "kappa", "ok"))
    if cmd == "verify":
        rows = [{"lambda": r["lambda"], "ratio": r["ratio"], "ratio_leibniz": r["ratio_leibniz"]} for r in report["records"]]
        return _csv(rows, ("lambda", "ratio", "ratio_leibniz"))
    if cmd == "caputo":
        rows = []
        for t in report.get("power_rule", []):
            rows += [{"study": "power_rule", "case": f"gamma={t['gamma']:.6g},mu={t['mu']:.6g}", "N": r["N"], "error": r["max_rel_err"]} for r in t["rows"]]
        for c in report.get("composition", []):
            rows += [{"study": "composition", "case": f"z={c['z']},g1={c['gamma1']:.6g},g2={c['gamma2']:.6g}", "N": e["N"], "error": e["max_rel_discrepancy"]}
                     for e in c["errors"]]
        return _csv(rows, ("study", "case", "N", "error"))
    raise ValueError(f"no CSV layout for {cmd}")


_PREAMBLE = "\\documentclass{article}\n\\usepackage{amsmath}\n\\allowdisplaybreaks\n\\begin{document}\n"
_END = "\\end{document}\n"


def _frac_tex(q: str | Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    sign = "-" if q < 0 else ""
    return f"{sign}\\tfrac{{{abs(q.numerator)}}}{{{q.denominator}}}"


def _poly_lines(recs: list[dict], per_line: int = 4) -> str:
    p = ConjPolynomial.from_records(recs)
    if not p:
        return "0"
    keys = sorted(p, key=lambda k: (k[1], -k[2], k[0]))
    parts = []
    for i, key in enumerate(keys):
        c = p[key]
        body = latex_monomial(abs(c), *key)
        sign = ("-" if c < 0 else "") if i == 0 else ("- " if c < 0 else "+ ")
        parts.append(sign + body)
    lines = [" ".join(parts[i : i + per_line]) for i in range(0, len(parts), per_line)]
    return " \\\\\n&\\quad ".join(lines)


def _latex_for(report: dict) -> str:
    cmd = report["command"]
    out = [_PREAMBLE]
    if cmd == "expand":
        n = report["n"]
        out.append("\\begin{align*}\n")
        out.append(f"\\theta\\partial_x^{{{n}}}\\theta^{{-1}}w &= {_poly_lines(report['expansion'])}\n")
        if report["split"]:
            for part in ("I1", "I2", "I3"):
                out.append(f"\\\\\nI_{part[1]} &= {_poly_lines(report['split'][part])}\n")
        out.append("\\end{align*}\n")
    elif cmd == "coeffs":
        n = report["n"]
        out.append(f"\\section*{{Leading diagonal coefficients, $n={n}$}}\n")
        out.append("\\begin{tabular}{rrrrl}\n$m$ & BPG & rewriting & $\\frac{n^2}{2}C_{n-1}^m$ & agree\\\\\\hline\n")
        for d in report["diagonal"]:
            out.append(f"{d['m']} & ${_frac_tex(d['bpg'])}$ & ${_frac_tex(d['rewrite'])}$ & ${_frac_tex(d['closed'])}$ & {'yes' if d['agree'] else 'no'}\\\\\n")
        out.append("\\end{tabular}\n\n")
        led = report["ledger"]
        out.append(f"\\section*{{Ledger for $d_{{{led['m']}}}$}}\n")
        out.append("\\begin{tabular}{lrrr}\nnode $(r,s,a,b)$ & $h$ & $g$ & $h\\cdot g$\\\\\\hline\n")
        for e in led["entries"]:
            out.append(f"$({','.join(map(str, e['node']))})$ & ${_frac_tex(e['h'])}$ & ${_frac_tex(e['g'])}$ & ${_frac_tex(e['contribution'])}$\\\\\n")
        out.append(f"\\hline\n\\multicolumn{{4}}{{r}}{{$\\Rightarrow$ Total = ${_frac_tex(led['total'])}$}}\\\\\n\\end{{tabular}}\n\n")
        out.append("\\section*{Time cross coefficients}\n")
        if report["cross"]:
            out.append("\\begin{tabular}{rrrr}\n$r$ & $s$ & $m$ & $d_C$\\\\\\hline\n")
            for c in report["cross"]:
                out.append(f"{c['r']} & {c['s']} & {c['m']} & ${_frac_tex(c['closed'])}$\\\\\n")
            out.append("\\end{tabular}\n")
        else:
            out.append("None: the support is empty.\n")
    elif cmd == "identities":
        out.append(f"Exact identities for $2\\le n\\le {report['max_n']}$: {report['count']} cases, "
                   f"{len(report['failures'])} failures.\n")
    elif cmd == "verify":
        cfg = report["config"]
        out.append(f"\\section*{{Weighted inequality sweep, $n={cfg['n']}$, $\\alpha={_frac_tex(cfg['alpha'])}$}}\n")
        out.append("\\begin{tabular}{rrr}\n$\\lambda$ & rhs/lhs & rhs/lhs (Leibniz)\\\\\\hline\n")
        for r in report["records"]:
            out.append(f"{r['lambda']:.4g} & {r['ratio']:.4g} & {r['ratio_leibniz']:.4g}\\\\\n")
        out.append("\\end{tabular}\n\n")
        out.append(f"Empirical threshold: {report['lambda_star']}. Pass: {'yes' if report['pass'] else 'no'}.\n")
    elif cmd == "caputo":
        if "power_rule" in report:
            out.append("\\section*{Power rule}\n\\begin{tabular}{rrrl}\n$\\gamma$ & $\\mu$ & error at largest $N$ & pass\\\\\\hline\n")
            for t in report["power_rule"]:
                out.append(f"{t['gamma']:.4g} & {t['mu']:.4g} & {t['rows'][-1]['max_rel_err']:.3e} & {'yes' if t['pass'] else 'no'}\\\\\n")
            out.append("\\end{tabular}\n\n")
        if "composition" in report:
            out.append("\\section*{Composition}\n\\begin{tabular}{lrrrl}\n$z$ & $\\gamma_1$ & $\\gamma_2$ & discrepancy & pass\\\\\\hline\n")
            for c in report["composition"]:
                out.append(f"${c['z']}$ & {c['gamma1']:.4g} & {c['gamma2']:.4g} & {c['errors'][-1]['max_rel_discrepancy']:.3e} & {'yes' if c['pass'] else 'no'}\\\\\n")
            out.append("\\end{tabular}\n\n")
        if "lift" in report:
            out.append("\\section*{Manufactured solutions}\n\\begin{tabular}{ll}\ncase & pass\\\\\\hline\n")
            for c in report["lift"]:
                name = c["case"].replace("_", "\\_")
                out.append(f"{name} & {'yes' if c['pass'] else 'no'}\\\\\n")
            out.append("\\end{tabular}\n")
    out.append(_END)
    return "".join(out)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return _json(report)
    if fmt == "csv":
        return _csv_for(report)
    if fmt == "latex":
        return _latex_for(report)
    raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")


def write_atomic(path: Path, text: str) -> None:
    """Write via a temporary file in the target directory and rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
