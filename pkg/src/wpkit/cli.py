"""Command-line front end.

Subcommands mirror the toolkit's verification surfaces; every run writes
CSV/JSON artifacts plus a reproducibility manifest into --outdir.  Flags
mirror the usual symbols: --kappa, --q-components (Q), --log-factor (A).

Exit codes: 0 success, 2 validation error, 3 resource cap, 4 numerical
failure, 5 verification failure (a checked property of the mathematics
failed on the tested instance; the most important code).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .errors import DomainError, NumericalError, ResourceCapError, VerificationError
from .reports import write_csv, write_json, write_manifest
from .volumes import default_cache

EXIT_VALIDATION = 2
EXIT_RESOURCE = 3
EXIT_NUMERICAL = 4
EXIT_VERIFICATION = 5


def _outdir(args):
    os.makedirs(args.outdir, exist_ok=True)
    return args.outdir


def cmd_volumes(args):
    cache = default_cache()
    out = _outdir(args)
    sigs = []
    for g in range(0, args.gmax + 1):
        for n in range(0, args.nmax + 1):
            if 2 * g - 2 + n > 0 and 3 * g - 3 + n <= cache.dimension_cap:
                cache.compute((g, n))
                sigs.append((g, n))
    csv_path = os.path.join(out, "volume_coefficients.csv")
    cache.export_csv(csv_path, signatures=sigs)
    if args.oracle_max_dim >= 0:
        from . import psi_kappa

        for g, n in sigs:
            if 3 * g - 3 + n <= args.oracle_max_dim:
                if cache.compute((g, n)).coeffs != psi_kappa.volume_polynomial((g, n)).coeffs:
                    raise VerificationError(f"oracle mismatch at (g={g}, n={n})")
    return [csv_path]


def cmd_expansion(args):
    from .expansion import fit_next_order, verify_error_shape

    out = _outdir(args)
    g_range = range(args.gmin, args.gmax + 1)
    scan = verify_error_shape(1, (args.x,), g_range)
    rows = [
        (g, x, r, (abs(x) + 1.0) * math.exp(x / 2.0) / (g + 1.0))
        for (g, x), r in sorted(scan.residuals.items())
    ]
    csv_path = os.path.join(out, "residual_scan.csv")
    write_csv(csv_path, ["g", "x", "residual", "bound_rhs"], rows)
    grid = tuple(np.geomspace(0.5, 6.0, 10))
    fit = fit_next_order(1, grid, g_range)
    json_path = os.path.join(out, "expansion_fits.json")
    write_json(
        json_path,
        {
            "order0_exponent": scan.fitted_exponent,
            "order0_constant": scan.fitted_constant,
            "post_fit_exponent": fit.post_fit_exponent,
            "condition_number": fit.condition_number,
            "ratio_regression_r2": fit.ratio_regression_r2,
            "basis": fit.basis_labels,
        },
    )
    return [csv_path, json_path]


def cmd_census(args):
    from .hypgeo import (census_loc_types, geodesic_length, pants_from_lengths,
                         verify_census)

    out = _outdir(args)
    model = pants_from_lengths(*args.boundaries)
    report = verify_census(model, args.kappa, args.log_factor, args.g,
                           word_cap=args.word_cap)
    json_path = os.path.join(out, "census_report.json")
    write_json(json_path, report)
    outputs = [json_path]
    if args.materialize:
        census = census_loc_types(args.kappa, args.log_factor, args.g,
                                  size_cap=args.size_cap)
        rows = [
            (" ".join(map(str, w)), geodesic_length(model, w))
            for w in census.words
        ]
        csv_path = os.path.join(out, "census_words.csv")
        write_csv(csv_path, ["word", "length"], rows)
        outputs.append(csv_path)
    if not report.ok:
        raise VerificationError(
            f"census verification failed: {len(report.escapes)} escapes, "
            f"{len(report.inequality_failures)} inequality failures"
        )
    return outputs


def cmd_orbits(args):
    from .multicurves import (count_numbered_classes, enumerate_splittings,
                              gluing_surjection_check, orbit_upper)

    out = _outdir(args)
    rows = []
    failures = 0
    for g in range(0, args.gmax + 1):
        for n in range(0, args.nmax + 1):
            if 2 * g - 2 + n <= 0:
                continue
            for j in range(0, args.jmax + 1):
                classes = enumerate_splittings(g, n, j, args.q_components)
                for st in classes:
                    rows.append(
                        (g, n, j, st.q, str(st.parts), str(st.edges), 1)
                    )
                if j >= 1:
                    seen = {}
                    for st in classes:
                        key = (st.q, tuple(sorted(
                            (gi, legs + d) for (gi, legs), d in
                            zip(st.parts, st.degrees()))))
                        seen[key] = seen.get(key, 0) + 1
                    for (q, parts), count in seen.items():
                        if count > orbit_upper(j, q):
                            failures += 1
                        exact = count_numbered_classes(g, n, j, parts)
                        ok, hit, allc, _ = gluing_surjection_check(g, n, j, q, parts)
                        if exact > orbit_upper(j, q) or not ok:
                            failures += 1
    csv_path = os.path.join(out, "splitting_classes.csv")
    write_csv(csv_path, ["g", "n", "j", "q", "parts", "edges", "count"], rows)
    if failures:
        raise VerificationError(f"{failures} orbit-bound failures")
    return [csv_path]


def cmd_series(args):
    from .multicurves import SeriesParams, prob_b_bound, tail_bound, y_moment_bound

    out = _outdir(args)
    params = SeriesParams(args.kappa, args.q_components, args.beta)
    sv = y_moment_bound(params)
    sv4 = y_moment_bound(SeriesParams(args.kappa, args.q_components, 4 * args.beta))
    scan = {
        str(g): prob_b_bound(g, args.kappa, args.q_components)
        for g in (args.g, 2 * args.g)
    }
    tail = tail_bound(args.g, args.kappa, args.q_components, args.n_power)
    json_path = os.path.join(out, "series_bounds.json")
    write_json(
        json_path,
        {
            "y_moment": sv,
            "y_moment_4beta": sv4,
            "second_moment_holds": sv.value ** 2 <= sv4.value,
            "prob_b_scan": scan,
            "prob_b_ratio": scan[str(2 * args.g)] / scan[str(args.g)],
            "prob_b_ratio_expected": 2.0 ** (-(args.q_components - 1)),
            "tail": tail,
        },
    )
    return [json_path]


def cmd_phi(args):
    from .inclexcl import ledger_json, ledger_pants, ledger_simple, phi_evaluate

    out = _outdir(args)
    rows = []
    for g in range(args.gmin, args.gmax + 1):
        for j in range(0, args.jmax + 1):
            ev = phi_evaluate(args.filling, j, args.q_components, g,
                              (args.x,) * (3 if args.filling == "pants" else 2)
                              if args.filling == "pants" else args.x,
                              (args.y,) * j)
            rows.append((g, j, args.q_components, args.x, args.y, ev.value))
    csv_path = os.path.join(out, "phi_scan.csv")
    write_csv(csv_path, ["g", "j", "Q", "x", "y", "value"], rows)
    ledger_path = os.path.join(out, "ledgers.json")
    write_json(
        ledger_path,
        {"simple": ledger_json(ledger_simple()), "pants": ledger_json(ledger_pants())},
    )
    return [csv_path, ledger_path]


def cmd_density(args):
    from .densities import assemble_density_pants, fr_decompose

    out = _outdir(args)
    grid = tuple(np.linspace(args.lmin, args.lmax, args.points))
    asm = assemble_density_pants(
        (1, -2), args.g, args.kappa, grid, with_corrections=args.corrections
    )
    rows = [
        (l, v, asm.truncation_certificate) for l, v in zip(asm.grid, asm.values)
    ]
    csv_path = os.path.join(out, "density.csv")
    write_csv(csv_path, ["ell", "value", "j_truncation_error"], rows)
    fr = fr_decompose(grid, [l * v for l, v in zip(asm.grid, asm.values)],
                      sigma=0.5, max_degree=3)
    json_path = os.path.join(out, "fr_fit.json")
    write_json(json_path, fr)
    return [csv_path, json_path]


def cmd_jkappa(args):
    from .hypgeo import j_kappa

    out = _outdir(args)
    rows = []
    worst = 0.0
    for ell in np.linspace(args.lmin, args.lmax, args.points):
        closed, direct = j_kappa(ell, args.kappa)
        rows.append((ell, closed, direct))
        if closed > 0:
            worst = max(worst, abs(closed - direct) / closed)
    csv_path = os.path.join(out, "jkappa.csv")
    write_csv(csv_path, ["ell", "closed_form", "direct_quadrature"], rows)
    if worst > args.tolerance:
        raise VerificationError(
            f"J_kappa representations disagree: rel gap {worst:.3e}"
        )
    return [csv_path]


def cmd_trace(args):
    from .tracefn import fourier_h, fourier_hl

    out = _outdir(args)
    rows = []
    for r in np.linspace(-args.rmax, args.rmax, args.samples):
        rows.append((r, "real", fourier_h(r)))
    for t in np.linspace(-0.5, 0.5, args.imag_samples):
        rows.append((t, "imag", fourier_h(1j * t)))
    csv_path = os.path.join(out, "hhat_samples.csv")
    write_csv(csv_path, ["r", "axis", "hhat"], rows)
    bad = [row for row in rows if row[2] < -1e-12]
    if bad:
        raise VerificationError(f"hat h negative at {len(bad)} sample(s)")
    # dilation identity spot check
    gap = abs(fourier_hl(0.7, 10.0) - 10.0 * fourier_h(7.0))
    if gap > 1e-10:
        raise VerificationError(f"dilation identity off by {gap:.2e}")
    return [csv_path]


def cmd_pipeline(args):
    from fractions import Fraction

    from .tracefn import BoundConstants, pipeline

    out = _outdir(args)
    constants = BoundConstants(
        eps=Fraction(args.epsilon).limit_denominator(10 ** 9),
        kappa=Fraction(args.kappa).limit_denominator(10 ** 9),
        m=args.m,
    )
    report = pipeline(constants)
    json_path = os.path.join(out, "pipeline_report.json")
    write_json(json_path, report)
    if not (report["exponent_arithmetic_consistent"] and report["alpha_identity"]):
        raise VerificationError("pipeline exponent bookkeeping failed")
    return [json_path]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wpkit", description="Weil-Petersson / tangle-free toolkit"
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--outdir", default="wpkit_out")

    p = sub.add_parser("volumes", help="exact volume coefficient tables")
    common(p)
    p.add_argument("--gmax", type=int, default=4)
    p.add_argument("--nmax", type=int, default=6)
    p.add_argument("--oracle-max-dim", type=int, default=6,
                   help="cross-check signatures with 3g-3+n up to this; -1 skips")
    p.set_defaults(func=cmd_volumes)

    p = sub.add_parser("expansion", help="residual scans and next-order fits")
    common(p)
    p.add_argument("--gmin", type=int, default=2)
    p.add_argument("--gmax", type=int, default=12)
    p.add_argument("--x", type=float, default=1.0)
    p.set_defaults(func=cmd_expansion)

    p = sub.add_parser("census", help="tangle-free word census verification")
    common(p)
    p.add_argument("--kappa", type=float, default=0.5)
    p.add_argument("--log-factor", type=float, default=2.0, help="A")
    p.add_argument("--g", type=float, default=50.0)
    p.add_argument("--boundaries", type=float, nargs=3, default=(0.6, 0.6, 3.0))
    p.add_argument("--word-cap", type=int, default=12)
    p.add_argument("--materialize", action="store_true")
    p.add_argument("--size-cap", type=int, default=500_000)
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("orbits", help="splitting enumeration and orbit bounds")
    common(p)
    p.add_argument("--gmax", type=int, default=3)
    p.add_argument("--nmax", type=int, default=2)
    p.add_argument("--jmax", type=int, default=3)
    p.add_argument("--q-components", type=int, default=4, help="Q")
    p.set_defaults(func=cmd_orbits)

    p = sub.add_parser("series", help="moment, probability and tail bounds")
    common(p)
    p.add_argument("--kappa", type=float, default=0.1)
    p.add_argument("--q-components", type=int, default=5)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--g", type=int, default=100)
    p.add_argument("--n-power", type=int, default=3, help="N")
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("phi", help="realization-sum scans and term ledgers")
    common(p)
    p.add_argument("--filling", choices=("cylinder", "pants"), default="cylinder")
    p.add_argument("--gmin", type=int, default=2)
    p.add_argument("--gmax", type=int, default=6)
    p.add_argument("--jmax", type=int, default=2)
    p.add_argument("--q-components", type=int, default=3)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--y", type=float, default=0.5)
    p.set_defaults(func=cmd_phi)

    p = sub.add_parser("density", help="pants density assembly and FR fit")
    common(p)
    p.add_argument("--g", type=int, default=8)
    p.add_argument("--kappa", type=float, default=0.3)
    p.add_argument("--lmin", type=float, default=4.0)
    p.add_argument("--lmax", type=float, default=14.0)
    p.add_argument("--points", type=int, default=12)
    p.add_argument("--corrections", action="store_true")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("jkappa", help="dual evaluation of the twist integral")
    common(p)
    p.add_argument("--kappa", type=float, default=0.5)
    p.add_argument("--lmin", type=float, default=2.0)
    p.add_argument("--lmax", type=float, default=20.0)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.set_defaults(func=cmd_jkappa)

    p = sub.add_parser("trace", help="test-function positivity checks")
    common(p)
    p.add_argument("--rmax", type=float, default=50.0)
    p.add_argument("--samples", type=int, default=101)
    p.add_argument("--imag-samples", type=int, default=21)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("pipeline", help="exact exponent bound chain")
    common(p)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--kappa", type=float, default=0.01)
    p.add_argument("--m", type=int, default=4)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        outputs = args.func(args)
        params = {
            k: v for k, v in vars(args).items() if k not in ("func", "command")
        }
        write_manifest(args.outdir, args.command, params, outputs)
        return 0
    except DomainError as exc:
        _emit_error(args, "validation", exc)
        return EXIT_VALIDATION
    except ResourceCapError as exc:
        _emit_error(args, "resource-cap", exc)
        return EXIT_RESOURCE
    except NumericalError as exc:
        _emit_error(args, "numerical", exc)
        return EXIT_NUMERICAL
    except VerificationError as exc:
        _emit_error(args, "verification", exc)
        return EXIT_VERIFICATION


def _emit_error(args, kind, exc):
    doc = {"error": kind, "message": str(exc)}
    print(json.dumps(doc), file=sys.stderr)
    outdir = getattr(args, "outdir", None)
    if outdir:
        try:
            os.makedirs(outdir, exist_ok=True)
            with open(os.path.join(outdir, "error.json"), "w") as fh:
                json.dump(doc, fh, sort_keys=True)
        except OSError:
            pass


if __name__ == "__main__":
    sys.exit(main())
