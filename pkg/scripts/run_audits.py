#!/usr/bin/env python3
"""Run the full audit battery with default settings and print a summary.

Thin driver over :mod:`mongecheck.audits` for quick interactive use; the
`mongecheck audit` subcommand is the reproducible JSON interface.

Usage:
    python3 scripts/run_audits.py [--strict] [--json PATH]
"""

import argparse
import json
import math
import sys

import numpy as np

from mongecheck.audits import (
    PhiField,
    antiderivative_audit,
    gradient_product_audit,
    leznov_sign_check,
    mixed_partials_audit,
    plus_branch_audit,
    separability_audit,
)
from mongecheck.core import builtin_solution


def collect_reports():
    grid = np.linspace(0.0, 0.3, 7)
    sep_grid = np.linspace(0.05, 0.25, 5)
    small_a = builtin_solution("fairlie", a=0.0)
    unit_a = builtin_solution("fairlie", a=1.0)
    return [
        antiderivative_audit("first"),
        antiderivative_audit("second"),
        gradient_product_audit(PhiField(small_a), grid, grid),
        mixed_partials_audit(unit_a, grid, grid),
        separability_audit(small_a, sep_grid, sep_grid, "a12"),
        separability_audit(small_a, sep_grid, sep_grid, "a14"),
        plus_branch_audit(math.pi / 2),
    ]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--strict", action="store_true",
                        help="exit 1 if any audit reports 'violated'")
    parser.add_argument("--json", metavar="PATH",
                        help="also dump the raw reports as JSON")
    args = parser.parse_args()

    reports = collect_reports()
    width = max(len(r.audit_name) for r in reports)
    for r in reports:
        print(f"{r.audit_name:<{width}}  {r.verdict:<12}  "
              f"sup={r.sup_deviation:<12.6g}  samples={r.samples_used}")
        for name, value in r.fitted_constants:
            shown = value.real if value.imag == 0.0 else value
            print(f"{'':<{width}}    {name} = {shown!r}")

    sign = leznov_sign_check()
    print(f"gauge-form sign: s = {sign['satisfied_sign']} "
          f"(residual {sign['sup_abs_residual_sign_minus']:.3g} vs "
          f"{sign['sup_abs_residual_sign_plus']:.3g} for s = +1)")

    if args.json:
        payload = [
            {
                "audit_name": r.audit_name,
                "sup_deviation": r.sup_deviation,
                "fitted_constants": [[n, v.real, v.imag] for n, v in r.fitted_constants],
                "worst_point": r.worst_point,
                "samples_used": r.samples_used,
                "verdict": r.verdict,
                "tolerance_used": r.tolerance_used,
            }
            for r in reports
        ]
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"reports": payload, "leznov_sign_check": sign}, fh,
                      indent=2, sort_keys=True)
        print(f"wrote {args.json}")

    if args.strict and any(r.verdict == "violated" for r in reports):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
