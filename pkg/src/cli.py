"""
Command-line interface for the located/unlocated tradeoff toolkit.

    python -m src.cli bounds-region --n 10 --n 20 --kind generalized
    python -m src.cli asymptotic --r 0 --q-step 0.01
    python -m src.cli verify --code five --t 2 --m 1
    python -m src.cli scatter --L 5 --trials 2000 --seed 7
    python -m src.cli sweep --L 4 --point 0 0 --point 100 0 --trials-per-point 200
    python -m src.cli replay --manifest output/scatter/manifest.json --out output/replay

Exit codes: 0 success, 1 negative result (verify disagreement, replay
mismatch), 2 usage or invalid input, 3 enumeration refused by the cap,
4 internal assertion or decoder contradiction.
"""

import argparse
import itertools
import math
import sys
from functools import partial
from pathlib import Path

import numpy as np
import pandas as pd

from .bounds import (
    BoundKind,
    CodeParams,
    asymptotic_curve,
    bound_region,
    coherent_information_grid,
)
from .decoder import DecoderContradiction
from .montecarlo import (
    RateRectangle,
    SweepConfig,
    TrialConfig,
    failure_points,
    rate_points,
    records_to_dataframe,
    run_sweep,
    scatter_experiment,
    summarize_scatter,
)
from .report_generator import MANIFEST_NAME, ResultsWriter, RunManifest
from .stabilizer import (
    BUILTIN_CODES,
    DEFAULT_ENUMERATION_CAP,
    EnumerationCapExceeded,
    check_located_equivalence,
    get_code,
)
from .utils import TOOLKIT_VERSION, banner, default_thread_count, report

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_REFUSED = 3
EXIT_INTERNAL = 4

# Namespace entries that are not part of a run's configuration
_NON_CONFIG = ('func', 'out', 'quiet', 'command')


def _error(message):
    print(f"error: {message}", file=sys.stderr)


def _config_of(args):
    return {key: value for key, value in sorted(vars(args).items()) if key not in _NON_CONFIG}


def _writer(args):
    out = args.out or Path('output') / args.command
    return ResultsWriter(out, verbose=not args.quiet)


def _threads(args):
    return args.threads if args.threads else default_thread_count()


def _finite(value):
    return None if isinstance(value, float) and math.isnan(value) else value


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_bounds_region(args):
    verbose = not args.quiet
    kind = BoundKind(args.kind)
    writer = _writer(args)
    banner(f"📐 {kind.value.capitalize()} bound regions, k = {args.k}", verbose)
    for n in args.n:
        params = CodeParams(n, args.k)
        curve = bound_region(params, kind)
        stem = f"region_n{n}_k{args.k}_{kind.value}"
        if args.format in ('csv', 'both'):
            writer.write_csv(curve.to_dataframe(), f"{stem}.csv")
        if args.format in ('json', 'both'):
            writer.write_json(curve.to_json_pairs(), f"{stem}.json")
        if curve.points:
            report(f"  n = {n}: max t_l = {curve.points[0][1]} at t_u = 0, "
                   f"max t_u = {curve.points[-1][0]}", verbose)
        else:
            report(f"⚠ n = {n}: no (t_u, t_l) satisfies the {kind.value} bound", verbose)
    writer.write_manifest(args.command, _config_of(args))
    return EXIT_OK


def cmd_asymptotic(args):
    verbose = not args.quiet
    writer = _writer(args)
    banner(f"📉 Large-n boundary at rate r = {args.r}", verbose)
    curve = asymptotic_curve(args.r, q_step=args.q_step)
    writer.write_table(curve, f"asymptotic_r{args.r:g}", args.format)
    report(f"  {len(curve)} rows with a boundary", verbose)
    writer.write_manifest(args.command, _config_of(args))
    return EXIT_OK


def cmd_coherent_info(args):
    verbose = not args.quiet
    writer = _writer(args)
    banner("📊 Coherent information grid", verbose)
    p_values = np.linspace(0.0, 1.0, int(round(1.0 / args.p_step)) + 1)
    q_values = np.linspace(0.0, 1.0, int(round(1.0 / args.q_step)) + 1)
    grid = coherent_information_grid(p_values, q_values)
    writer.write_table(grid, 'coherent_information', args.format)
    writer.write_manifest(args.command, _config_of(args))
    return EXIT_OK


def cmd_verify(args):
    verbose = not args.quiet
    code = get_code(args.code)
    banner(f"🔍 Located/unlocated equivalence: {code.name} code, t = {args.t}, m = {args.m}", verbose)
    result = check_located_equivalence(code, args.t, args.m, cap=args.cap)

    def verdict(ok):
        return 'correctable' if ok else 'uncorrectable'

    print(f"operators checked: {result.operators_checked}")
    print(f"t = {result.t} unlocated: {verdict(result.unlocated_correctable)}")
    print(f"{2 * result.m} located + {result.t - result.m} unlocated: {verdict(result.located_correctable)}")
    print(f"equivalence: {'true' if result.equivalent else 'false'}")
    return EXIT_OK if result.equivalent else EXIT_NEGATIVE


def cmd_scatter(args):
    verbose = not args.quiet
    config = TrialConfig(
        code_name=args.code,
        levels=args.L,
        trials=args.trials,
        master_seed=args.seed,
        mode='uniform',
        rectangle=RateRectangle(args.p_range[0], args.p_range[1], args.q_range[0], args.q_range[1]),
        p_dec=args.p_dec,
        large_scale=args.large_scale,
    )
    writer = _writer(args)
    n = config.n
    records = scatter_experiment(config, threads=_threads(args), verbose=verbose)

    trials = records_to_dataframe(records)
    if args.format in ('csv', 'both'):
        writer.write_csv(trials, 'trials.csv')
    if args.format in ('json', 'both'):
        writer.write_jsonl(trials, 'trials.jsonl')
    writer.write_table(failure_points(records, n), 'failures', args.format)

    params = CodeParams(n, 1)
    generalized = bound_region(params, BoundKind.GENERALIZED).to_rate_dataframe()
    combined = bound_region(params, BoundKind.COMBINED).to_rate_dataframe()
    writer.write_table(generalized, 'boundary_generalized', args.format)
    writer.write_table(combined, 'boundary_combined', args.format)

    summary = summarize_scatter(records_to_dataframe(records, n), combined, generalized)
    summary = {key: _finite(value) for key, value in summary.items()}
    summary.update({'n': n, 'trials': len(records), 'failures': int(sum(not r.success for r in records))})
    writer.write_json(summary, 'summary.json')
    report(f"  failure fraction deep inside: {summary['inside_failure_fraction']}, "
           f"far outside: {summary['outside_failure_fraction']}", verbose)

    writer.write_manifest(args.command, _config_of(args), seed=args.seed)
    return EXIT_OK


def _sweep_points(args, n):
    points = [tuple(p) for p in (args.point or [])]
    if args.grid_t_u or args.grid_t_l:
        if not (args.grid_t_u and args.grid_t_l):
            raise ValueError("--grid-t-u and --grid-t-l must be given together")
        points.extend(itertools.product(args.grid_t_u, args.grid_t_l))
    if args.rate_point:
        points.extend(rate_points(n, args.rate_point))
    if not points:
        raise ValueError("no sweep points: use --point, --grid-t-u/--grid-t-l or --rate-point")
    return tuple((int(t_u), int(t_l)) for t_u, t_l in points)


def cmd_sweep(args):
    verbose = not args.quiet
    n = get_code(args.code).n ** args.L
    config = SweepConfig(
        code_name=args.code,
        levels=args.L,
        points=_sweep_points(args, n),
        trials_per_point=args.trials_per_point,
        master_seed=args.seed,
        p_dec=args.p_dec,
        large_scale=args.large_scale,
    )
    writer = _writer(args)
    table = run_sweep(config, threads=_threads(args), verbose=verbose)
    writer.write_table(table, 'sweep', args.format)
    writer.write_manifest(args.command, _config_of(args), seed=args.seed)
    return EXIT_OK


def _read_table(directory, stem):
    """A table written by write_table, from CSV when present, otherwise from JSON."""
    for suffix, reader in (('.csv', pd.read_csv), ('.json', partial(pd.read_json, orient='records'))):
        path = directory / f'{stem}{suffix}'
        if path.exists():
            return reader(path)
    return None


def cmd_plot(args):
    # imported here so the other commands never touch matplotlib
    from .visualization import BoundsVisualizer

    verbose = not args.quiet
    writer = _writer(args)
    viz = BoundsVisualizer(writer.output_dir, verbose=verbose)
    failures, boundaries = None, None
    if args.scatter_dir:
        scatter_dir = Path(args.scatter_dir)
        failures = _read_table(scatter_dir, 'failures')
        if failures is None:
            raise FileNotFoundError(f"{scatter_dir} holds neither failures.csv nor failures.json")
        boundaries = {}
        for kind in (BoundKind.GENERALIZED, BoundKind.COMBINED):
            curve = _read_table(scatter_dir, f'boundary_{kind.value}')
            if curve is not None and len(curve):
                boundaries[f'{kind.value} bound'] = curve
    paths = viz.create_figure_set(args.n, args.k, failures=failures, boundaries=boundaries)
    for path in paths.values():
        writer.register(path)
    writer.write_manifest(args.command, _config_of(args))
    return EXIT_OK


def cmd_replay(args):
    """Re-run a manifest's command into a fresh directory and compare data digests."""
    verbose = not args.quiet
    manifest = RunManifest.load(args.manifest)
    if manifest.command not in COMMANDS or manifest.command == 'replay':
        raise ValueError(f"manifest command '{manifest.command}' cannot be replayed")
    out = Path(args.out or Path('output') / 'replay')
    if (out / MANIFEST_NAME).exists():
        raise ValueError(f"{out} already holds a manifest; replay needs a fresh directory")
    if manifest.version != TOOLKIT_VERSION:
        report(f"⚠ manifest written by version {manifest.version}, running {TOOLKIT_VERSION}", verbose)

    banner(f"🔁 Replaying '{manifest.command}' from {args.manifest}", verbose)
    rerun = argparse.Namespace(**manifest.config, command=manifest.command, out=str(out), quiet=args.quiet)
    status = COMMANDS[manifest.command](rerun)
    if status != EXIT_OK:
        return status

    fresh = RunManifest.load(out / MANIFEST_NAME)
    mismatched = sorted(
        name for name in set(manifest.outputs) | set(fresh.outputs)
        if manifest.outputs.get(name) != fresh.outputs.get(name)
    )
    for name in mismatched:
        print(f"digest mismatch: {name}")
    print(f"replay: {len(fresh.outputs) - len(mismatched)} of {len(fresh.outputs)} data files identical")
    return EXIT_OK if not mismatched else EXIT_NEGATIVE


COMMANDS = {
    'bounds-region': cmd_bounds_region,
    'asymptotic': cmd_asymptotic,
    'coherent-info': cmd_coherent_info,
    'verify': cmd_verify,
    'scatter': cmd_scatter,
    'sweep': cmd_sweep,
    'plot': cmd_plot,
    'replay': cmd_replay,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_common(parser, formats=True):
    parser.add_argument('--out', default=None, help="output directory (default: output/<command>)")
    parser.add_argument('--quiet', action='store_true', help="suppress progress lines")
    if formats:
        parser.add_argument('--format', choices=['csv', 'json', 'both'], default='csv')


def _add_trial_flags(parser):
    parser.add_argument('--code', choices=sorted(BUILTIN_CODES), default='five')
    parser.add_argument('--L', type=int, default=5, help="concatenation levels")
    parser.add_argument('--seed', type=int, default=0, help="master seed")
    parser.add_argument('--p-dec', type=float, default=None,
                        help="fixed decoder prior rate (default: realized unlocated rate per trial)")
    parser.add_argument('--threads', type=int, default=None,
                        help="worker processes (default: $QECC_TRADEOFF_THREADS or CPU count)")
    parser.add_argument('--large-scale', action='store_true', help="allow up to 9 levels")


def build_parser():
    parser = argparse.ArgumentParser(
        prog='qecc-tradeoff',
        description="Correctability bounds and decoding experiments for located and unlocated errors.",
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {TOOLKIT_VERSION}')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('bounds-region', help="boundary curves of correctable (t_u, t_l) regions")
    p.add_argument('--n', type=int, action='append', required=True, help="block length (repeatable)")
    p.add_argument('--k', type=int, default=1)
    p.add_argument('--kind', choices=[kind.value for kind in BoundKind], default=BoundKind.GENERALIZED.value)
    _add_common(p)

    p = sub.add_parser('asymptotic', help="large-n boundary p(q) at a code rate")
    p.add_argument('--r', type=float, default=0.0)
    p.add_argument('--q-step', type=float, default=0.001)
    _add_common(p)

    p = sub.add_parser('coherent-info', help="coherent information on a (p, q) grid")
    p.add_argument('--p-step', type=float, default=0.01)
    p.add_argument('--q-step', type=float, default=0.01)
    _add_common(p)

    p = sub.add_parser('verify', help="exhaustive located/unlocated equivalence check")
    p.add_argument('--code', choices=sorted(BUILTIN_CODES), required=True)
    p.add_argument('--t', type=int, required=True)
    p.add_argument('--m', type=int, required=True)
    p.add_argument('--cap', type=int, default=DEFAULT_ENUMERATION_CAP)
    p.add_argument('--quiet', action='store_true')

    p = sub.add_parser('scatter', help="random-weight decoding trials over a rate rectangle")
    _add_trial_flags(p)
    p.add_argument('--trials', type=int, default=2000)
    p.add_argument('--p-range', type=float, nargs=2, default=[0.0, 0.4], metavar=('LO', 'HI'))
    p.add_argument('--q-range', type=float, nargs=2, default=[0.0, 0.7], metavar=('LO', 'HI'))
    _add_common(p)

    p = sub.add_parser('sweep', help="failure rates with Wilson intervals at chosen (t_u, t_l)")
    _add_trial_flags(p)
    p.add_argument('--point', type=int, nargs=2, action='append', metavar=('T_U', 'T_L'))
    p.add_argument('--grid-t-u', type=int, nargs='+', default=None)
    p.add_argument('--grid-t-l', type=int, nargs='+', default=None)
    p.add_argument('--rate-point', type=float, nargs=2, action='append', metavar=('P', 'Q'))
    p.add_argument('--trials-per-point', type=int, default=200)
    _add_common(p)

    p = sub.add_parser('plot', help="render region and failure-scatter figures")
    p.add_argument('--n', type=int, nargs='+', default=[10, 20, 30, 40, 50])
    p.add_argument('--k', type=int, default=1)
    p.add_argument('--scatter-dir', default=None, help="output directory of a scatter run")
    _add_common(p, formats=False)

    p = sub.add_parser('replay', help="re-run a manifest and compare output digests")
    p.add_argument('--manifest', required=True)
    _add_common(p, formats=False)

    for name, parser_ in sub.choices.items():
        parser_.set_defaults(func=COMMANDS[name])
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EnumerationCapExceeded as exc:
        _error(f"refused: {exc}")
        return EXIT_REFUSED
    except (DecoderContradiction, AssertionError) as exc:
        _error(f"internal check failed: {exc}")
        return EXIT_INTERNAL
    except (ValueError, FileNotFoundError) as exc:
        _error(str(exc))
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
