"""Command-line entry point: ``iotrisk {value,micromort,var,simulate,report}``.

Flags override values from the scenario file, which override built-in
defaults. Exit codes: 0 success, 2 parse error, 3 validation error,
4 computation or I/O error. Errors are also written to stderr as one JSON
record.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import IoError, IoTRiskError, ParseError
from .scenario import (
    FORMATS,
    bundled_scenario,
    build_report,
    curve_points_text,
    dumps,
    emit_report,
    load_loss_history,
    load_scenario,
    micromort_figures,
    render_money,
    value_figures,
    write_text,
)
from .var import (
    DEFAULT_GRID,
    GENERATOR,
    exact_distribution,
    historical_distribution,
    linear_var,
    simulate_losses,
    var_curve,
)


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} must be >= 1")
    return value


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", metavar="PATH",
                        help="scenario file; a bare bundled name such as "
                             "examples/paper_2017.scenario also works")
    common.add_argument("--trials", type=_positive_int, metavar="N")
    common.add_argument("--seed", type=_u64, metavar="U64")
    common.add_argument("--confidence", type=float, metavar="F")
    common.add_argument("--horizon-months", type=_positive_int, metavar="N")
    common.add_argument("--valuation-policy", metavar="LIST",
                        help="comma-separated order, e.g. market,intrinsic,subjective")
    common.add_argument("--output", metavar="PATH", help="write here instead of stdout")
    common.add_argument("--format", choices=FORMATS, default="structured")
    common.add_argument("--workers", type=_positive_int, default=1,
                        help="simulation threads; output does not depend on it")

    parser = argparse.ArgumentParser(prog="iotrisk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("value", parents=[common], help="total digital value and composition ratios")
    sub.add_parser("micromort", parents=[common], help="fleet IoTMM, scan rate and WTP figures")
    sub.add_parser("var", parents=[common], help="linear VaR")
    sim = sub.add_parser("simulate", parents=[common],
                         help="loss distribution and VaR curve")
    sim.add_argument("--method", choices=("monte_carlo", "exact", "historical"),
                     default="monte_carlo")
    sim.add_argument("--history", metavar="PATH", help="loss history for --method historical")
    sub.add_parser("report", parents=[common], help="everything, as one document")
    return parser


def _resolve(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        bundled = bundled_scenario(p.name)
        if bundled.exists():
            return bundled
    return p


def _scenario(args):
    if not args.scenario:
        raise ParseError("--scenario is required", field="--scenario")
    doc = load_scenario(_resolve(args.scenario))
    return doc.with_overrides(trials=args.trials, seed=args.seed, confidence=args.confidence,
                              horizon_months=args.horizon_months,
                              valuation_policy=args.valuation_policy)


def _emit(args, text: str) -> None:
    if args.output:
        write_text(args.output, text)
    else:
        sys.stdout.write(text)


def _cmd_value(args) -> None:
    doc = _scenario(args)
    figures = value_figures(doc)
    if args.output:
        write_text(args.output, dumps(figures))
        return
    cur = doc.currency
    print(f"total_value: {render_money(figures['total_value'], cur)}")
    print(f"core assets: {figures['n_core']}  operational assets: {figures['n_operational']}")
    for axis, ratio in figures["composition"].items():
        vr, cr = ratio["value_ratio"], ratio["count_ratio"]
        print(f"{axis}: value_ratio={'undefined' if vr is None else f'{vr:.6g}'} "
              f"count_ratio={'undefined' if cr is None else f'{cr:.6g}'}")


def _cmd_micromort(args) -> None:
    doc = _scenario(args)
    figures = micromort_figures(doc)
    if args.output:
        write_text(args.output, dumps(figures))
        return
    cur = doc.currency
    if figures["fleet"]:
        f = figures["fleet"]
        print(f"fleet_iotmm: {f['fleet_iotmm_rendered']} (full precision {f['fleet_iotmm']!r}, "
              f"{f['micromorts']:.6g} micromorts)")
    if figures["scan"]:
        s = figures["scan"]
        print(f"scan_rate: {s['rate_rendered']} (full precision {s['rate']!r})")
    if figures["wtp"]:
        w = figures["wtp"]
        if w["value_of_one_iotmm"] is not None:
            print(f"value_of_one_iotmm: {render_money(w['value_of_one_iotmm'], cur)}")
        if "group_wtp" in w:
            print(f"group_wtp: {render_money(w['group_wtp'], cur)}")
    if not any(figures.values()):
        print("no fleet, scan or willingness-to-pay inputs in scenario")


def _cmd_var(args) -> None:
    doc = _scenario(args)
    lv = linear_var(doc.exposures())
    if args.output:
        write_text(args.output, dumps({"linear_var": lv, "currency": doc.currency}))
        return
    print(f"linear_var: {render_money(lv, doc.currency)} (full precision {lv!r})")


def _cmd_simulate(args) -> None:
    if args.method == "historical":
        if not args.history:
            raise ParseError("--method historical needs --history PATH", field="--history")
        dist = historical_distribution(load_loss_history(args.history))
        grid = DEFAULT_GRID
        if args.scenario:
            grid = _scenario(args).var_grid
        prov = {"method": "historical", "history": Path(args.history).name}
    else:
        doc = _scenario(args)
        grid = doc.var_grid
        exposures = doc.exposures()
        if args.method == "exact":
            dist = exact_distribution(exposures)
            prov = {"method": "exact"}
        else:
            dist = simulate_losses(exposures, doc.sim, workers=args.workers)
            prov = {"method": "monte_carlo", "generator": GENERATOR, "seed": doc.sim.seed,
                    "trials": doc.sim.trials, "horizon_months": doc.sim.horizon_months}
        prov["valuation_policy"] = [b.value for b in doc.valuation_policy]
    prov["tool_version"] = __version__
    curve = var_curve(dist, grid)
    if args.format == "curve_points":
        text = curve_points_text(curve.points)
    else:
        text = dumps({"distribution": dist.to_dict(),
                      "var_curve": [list(p) for p in curve.points],
                      "provenance": prov})
    _emit(args, text)


def _cmd_report(args) -> None:
    doc = _scenario(args)
    report = build_report(doc, workers=args.workers)
    text = emit_report(report, args.format)
    _emit(args, text)


COMMANDS = {
    "value": _cmd_value,
    "micromort": _cmd_micromort,
    "var": _cmd_var,
    "simulate": _cmd_simulate,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except IoTRiskError as exc:
        print(json.dumps(exc.record()), file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        err = IoError(str(exc))
        print(json.dumps(err.record()), file=sys.stderr)
        return err.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
