"""Command-line front end: parameter sweeps to CSV and a self-check report.

Exit codes: 0 success, 1 usage error, 2 config/IO error, 3 validation
failure.  Powers are dB-facing here and linear everywhere else.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

import numpy as np

from . import analytic
from .config import ConfigError, KNOWN_METRICS, SweepSpec, load_config
from .montecarlo import (
    ANALYTIC_SCHEMES,
    MetricEstimate,
    MetricSet,
    SweepRow,
    analytic_metric_set,
    analytic_sweep,
    estimate_outage,
    estimate_rates,
    run_sweep,
    write_csv,
)
from .selection import SCHEMES

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_VALIDATION = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the contract here is 1.
    def error(self, message):
        raise _UsageError(message)


def parse_power_grid(text: str) -> tuple[float, ...]:
    """'start:stop:step' (inclusive) or a comma-separated list, in dB."""
    if ":" in text:
        pieces = text.split(":")
        if len(pieces) != 3:
            raise _UsageError(f"bad power grid {text!r}; expected start:stop:step")
        try:
            start, stop, step = (float(p) for p in pieces)
        except ValueError:
            raise _UsageError(f"bad power grid {text!r}") from None
        if step <= 0 or stop < start:
            raise _UsageError(f"bad power grid {text!r}; need step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + i * step for i in range(count))
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise _UsageError(f"bad power grid {text!r}") from None


def _build_parser() -> _Parser:
    parser = _Parser(prog="fdnoma", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run a power sweep and write a CSV")
    sweep.add_argument("--config", required=True, help="path to a key=value config file")
    sweep.add_argument("--mode", choices=("mc", "analytic", "both"), default="mc")
    sweep.add_argument(
        "--schemes",
        default=None,
        help="comma list of scheme ids (default: all for mc, the closed-form "
        f"ones for analytic); known: {', '.join(SCHEMES)}",
    )
    sweep.add_argument("--power", default="0:50:5", help="dB grid, start:stop:step or comma list")
    sweep.add_argument("--relay-power-db", type=float, default=None,
                       help="fix the relay power instead of sweeping it jointly")
    sweep.add_argument("--metrics", default=",".join(KNOWN_METRICS),
                       help=f"comma list out of: {', '.join(KNOWN_METRICS)}")
    sweep.add_argument("--trials", type=int, default=1_000_000)
    sweep.add_argument("--seed", type=int, default=1)
    sweep.add_argument("--output", "-o", default="sweep.csv")
    sweep.set_defaults(func=cmd_sweep)

    check = sub.add_parser("validate", help="run the invariant suite against a config")
    check.add_argument("--config", required=True)
    check.add_argument("--trials", type=int, default=200_000,
                       help="trials for the simulation-vs-analytic checks")
    check.add_argument("--seed", type=int, default=1)
    check.set_defaults(func=cmd_validate)
    return parser


def _select_schemes(args) -> tuple[str, ...]:
    if args.schemes is not None:
        schemes = tuple(s.strip() for s in args.schemes.split(",") if s.strip())
    elif args.mode == "mc":
        schemes = SCHEMES
    else:
        schemes = ANALYTIC_SCHEMES
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise _UsageError(f"unknown scheme {scheme!r}; known: {', '.join(SCHEMES)}")
    if args.mode == "analytic":
        missing = [s for s in schemes if s not in ANALYTIC_SCHEMES]
        if missing:
            raise _UsageError(
                f"no closed forms for {', '.join(missing)}; analytic mode supports "
                f"{', '.join(ANALYTIC_SCHEMES)}"
            )
    return schemes


def _select_metrics(args) -> tuple[str, ...]:
    metrics = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    for metric in metrics:
        if metric not in KNOWN_METRICS:
            raise _UsageError(f"unknown metric {metric!r}; known: {', '.join(KNOWN_METRICS)}")
    return metrics


def _nan_metric_set() -> MetricSet:
    nan = MetricEstimate(math.nan, 0.0, 0, kind="analytic")
    return MetricSet(nan, nan, nan, nan, nan, nan)


def cmd_sweep(args) -> int:
    params = load_config(args.config)
    schemes = _select_schemes(args)
    metrics = _select_metrics(args)
    relay = None
    if args.relay_power_db is not None:
        relay = tuple(args.relay_power_db for _ in parse_power_grid(args.power))
    spec = SweepSpec(
        power_db=parse_power_grid(args.power),
        schemes=schemes,
        metrics=metrics,
        trials=args.trials,
        seed=args.seed,
        rho_r_db=relay,
    )

    rows: list[SweepRow] = []
    notes: list[str] = []
    if args.mode in ("mc", "both"):
        rows += run_sweep(params, spec)
    if args.mode in ("analytic", "both"):
        analytic_schemes = tuple(s for s in spec.schemes if s in ANALYTIC_SCHEMES)
        skipped = [s for s in spec.schemes if s not in ANALYTIC_SCHEMES]
        if skipped:
            notes.append(f"analytic rows skipped for: {', '.join(skipped)} (no closed forms)")
        if analytic_schemes:
            analytic_spec = replace(spec, schemes=analytic_schemes)
            for p_idx, power_db in enumerate(analytic_spec.power_db):
                point_spec = replace(
                    analytic_spec,
                    power_db=(power_db,),
                    rho_r_db=None if relay is None else (relay[p_idx],),
                )
                for scheme in analytic_schemes:
                    try:
                        rows += analytic_sweep(params, replace(point_spec, schemes=(scheme,)))
                    except analytic.NonConvergedError as exc:
                        notes.append(f"NON_CONVERGED at {power_db} dB / {scheme}: {exc}")
                        rows.append(
                            SweepRow(power_db, scheme, "analytic", 0, _nan_metric_set())
                        )

    rows.sort(key=lambda r: (r.power_db, spec.schemes.index(r.scheme), r.kind != "monte_carlo"))
    try:
        write_csv(rows, args.output)
    except OSError as exc:
        raise ConfigError("OUTPUT_UNWRITABLE", f"{args.output}: {exc}") from exc

    print(f"wrote {len(rows)} rows to {args.output}")
    for note in notes:
        print(note)
    _print_summary(rows, args.mode)
    return EXIT_OK


def _print_summary(rows: list[SweepRow], mode: str) -> None:
    header = f"{'dB':>5} {'scheme':<18} {'kind':<11} {'rate_u1':>10} {'rate_u2':>10} {'sum':>10} {'out_u1':>10} {'out_u2':>10} {'jain':>7}"
    print(header)
    by_key = {}
    for row in rows:
        m = row.metrics
        print(
            f"{row.power_db:>5g} {row.scheme:<18} {row.kind:<11} "
            f"{m.rate_u1.value:>10.5g} {m.rate_u2.value:>10.5g} {m.rate_sum.value:>10.5g} "
            f"{m.outage_u1.value:>10.4g} {m.outage_u2.value:>10.4g} {m.jain_index.value:>7.4f}"
        )
        by_key.setdefault((row.power_db, row.scheme), {})[row.kind] = m
    if mode == "both":
        print("\nrelative difference |mc - analytic| / |analytic|:")
        for (power_db, scheme), kinds in sorted(by_key.items()):
            if "monte_carlo" in kinds and "analytic" in kinds:
                diffs = []
                for name in ("rate_u1", "rate_u2", "outage_u1", "outage_u2"):
                    mc = getattr(kinds["monte_carlo"], name).value
                    an = getattr(kinds["analytic"], name).value
                    if math.isnan(mc) or math.isnan(an):
                        diffs.append(f"{name}=nan")
                    elif an == 0.0:
                        diffs.append(f"{name}={'0' if mc == 0 else 'inf'}")
                    else:
                        diffs.append(f"{name}={abs(mc - an) / abs(an):.3g}")
                print(f"{power_db:>5g} {scheme:<18} rel_diff " + " ".join(diffs))


def _check_alternating_identity(params, trials, seed):
    worst = 0.0
    for m in range(1, 17):
        total = m * math.fsum(
            (-1.0) ** p * math.comb(m - 1, p) / (p + 1) for p in range(m)
        )
        worst = max(worst, abs(total - 1.0))
    return worst <= 1e-12, f"max |sum - 1| = {worst:.2e} for orders 1..16"


def _check_cdf_sanity(params, trials, seed):
    cap = analytic.sinr_cap(params)
    cases = [
        (analytic.cdf_gamma1_max_u1, 60.0 * params.a1 * params.rho_s, False),
        (analytic.cdf_gamma1_max_u2, 60.0 * params.a1 * params.rho_s, False),
        (analytic.cdf_gamma2_max_u1, cap, True),
        (analytic.cdf_gamma2_max_u2, cap, True),
    ]
    for cdf, hi, capped in cases:
        grid = np.linspace(0.0, hi, 1000)
        values = [cdf(float(x), params) for x in grid]
        if values[0] != 0.0:
            return False, f"{cdf.__name__}: F(0) = {values[0]!r}"
        if any(b < a - 1e-12 for a, b in zip(values, values[1:])):
            return False, f"{cdf.__name__}: not nondecreasing"
        if capped and cdf(cap, params) != 1.0:
            return False, f"{cdf.__name__}: F(cap) != 1"
    return True, "4 distribution functions monotone with correct endpoints"


def _check_closed_form_vs_quadrature(params, trials, seed):
    pairs = [
        ("rate_u1_max_u1", analytic.rate_u1_max_u1(params),
         analytic.rate_from_cdf(lambda x: analytic.cdf_gamma1_max_u1(x, params)).value),
        ("rate_u1_max_u2", analytic.rate_u1_max_u2(params),
         analytic.rate_from_cdf(lambda x: analytic.cdf_gamma1_max_u2(x, params)).value),
    ]
    worst = 0.0
    for name, closed, quadrature in pairs:
        rel = abs(closed - quadrature) / abs(quadrature)
        worst = max(worst, rel)
        if rel > 1e-8:
            return False, f"{name}: closed {closed!r} vs quadrature {quadrature!r}"
    return True, f"max relative gap {worst:.2e}"


def _check_outage_identity(params, trials, seed):
    z = analytic.zeta(params)
    if math.isinf(z):
        ok = analytic.outage_u1_max_u1(params) == 1.0 and analytic.outage_u1_max_u2(params) == 1.0
        return ok, "threshold infeasible; outage pinned at 1"
    ok = (
        analytic.outage_u1_max_u1(params) == analytic.cdf_gamma1_max_u1(params.a1 * z, params)
        and analytic.outage_u1_max_u2(params) == analytic.cdf_gamma1_max_u2(params.a1 * z, params)
    )
    return ok, f"near-user outage equals its SINR distribution at a1*zeta = {params.a1 * z:.6g}"


def _check_mc_vs_analytic(params, trials, seed):
    worst = []
    for scheme in ANALYTIC_SCHEMES:
        rate_u1, rate_u2, _ = estimate_rates(params, scheme, trials, seed)
        out = estimate_outage(params, scheme, trials, seed)
        reference = analytic_metric_set(params, scheme, ("rates", "outage"))
        checks = [
            ("rate_u1", rate_u1, reference.rate_u1.value),
            ("rate_u2", rate_u2, reference.rate_u2.value),
            ("outage_u1", out.outage_u1, reference.outage_u1.value),
            ("outage_u2", out.outage_u2, reference.outage_u2.value),
        ]
        for name, estimate, target in checks:
            if name.startswith("outage"):
                se = math.sqrt(max(target * (1.0 - target), 0.0) / trials)
            else:
                se = estimate.std_error
            gap = abs(estimate.value - target)
            if gap > 4.0 * se + 1e-12:
                return False, f"{scheme}/{name}: |{estimate.value:.6g} - {target:.6g}| > 4 se"
            worst.append(gap / se if se > 0 else 0.0)
    return True, f"max deviation {max(worst):.2f} se across {len(worst)} comparisons"


DEFAULT_CHECKS = (
    ("alternating_sum_identity", _check_alternating_identity),
    ("cdf_sanity", _check_cdf_sanity),
    ("closed_form_vs_quadrature", _check_closed_form_vs_quadrature),
    ("outage_cdf_identity", _check_outage_identity),
    ("simulation_vs_analytic", _check_mc_vs_analytic),
)


def cmd_validate(args, checks=DEFAULT_CHECKS) -> int:
    params = load_config(args.config)
    all_ok = True
    print(f"{'check':<28} {'result':<6} detail")
    for name, fn in checks:
        ok, detail = fn(params, args.trials, args.seed)
        all_ok = all_ok and ok
        print(f"{name:<28} {'PASS' if ok else 'FAIL':<6} {detail}")
    return EXIT_OK if all_ok else EXIT_VALIDATION


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
