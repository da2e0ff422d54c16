"""Reduce a 1/3-order diffusion problem with known solution and check the lift.

u = t^(2/3) sin x + t^(1/3) x^3 solves d_t^(1/3) u - u_xx = f with u(0, x) = 0.
"""

from carleman_bpm.fracapp import lift_check, manufactured_cases, negative_control, stability_exponent

for name, case in manufactured_cases().items():
    rep = lift_check(case)
    errs = ", ".join(f"{k} {v:.1e}" for k, v in rep["trace_rel_err"].items())
    print(f"{name:18s} traces: {errs}; f_tilde {rep['f_tilde_rel_err']:.1e}; pass {rep['pass']}")

neg = lift_check(negative_control())
print(f"{'negative control':18s} initial checks {neg['initial_checks']['checks']}; pass {neg['pass']}")

se = stability_exponent(1.0, 3.0)
print(f"\nexponent for eps = 1, C = 3: tau = {se.tau}; {se.rule}")
