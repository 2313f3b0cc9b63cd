import argparse
import copy
import logging
import math
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from config import (
    ASYMPTOTIC_ENERGIES,
    EXIT_CHECK_FAILED,
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_RESOURCE,
    FIG1,
    IDS_ENERGIES,
    LOG_FILE,
    LOG_FORMAT,
    LOG_LEVEL,
    LOGGER_NAME,
    SCHEMA_VERSION,
    TOOL_NAME,
    TOOL_VERSION,
    boundary_conditions,
)
from bound_functions import (
    evaluate_curve,
    gauss_asymptotics,
    minimize_curve,
    problem_from_config,
)
from check_functions import run_checks
from estimator_functions import ensemble_from_config, ids_size_sweep
from field_functions import CovarianceModel, model_from_config, sample_field
from landau_functions import landau_staircase
from operator_functions import ConstantFieldGauge, GridSpec
from support_functions import (
    ConfigError,
    EnsembleError,
    LabError,
    ResourceLimitError,
    RunManifest,
    load_config,
    reports_frame,
    resolve_jobs,
    validate_config,
    write_csv,
    write_jsonl,
)

logger = logging.getLogger(LOGGER_NAME)


def fig1_config(cells: int = 64) -> dict:
    """Run config of the constant-field Gaussian example: B = 1, C(0) = (B/5)^2, tau = 100 B^(-1/2)."""
    start, stop, count = FIG1['energies']
    return {
        'schema_version': SCHEMA_VERSION,
        'field': {'kind': 'gaussian', 'c0': FIG1['c0'], 'tau': FIG1['tau']},
        'grid': {'dimension': FIG1['dimension'], 'cells': cells, 'spacing': 1.0,
                 'origin': -0.5 * cells},
        'gauge': {'B': FIG1['B']},
        'wegner': {'family': 'gauss', 'energies': [start, stop, count]},
    }


def energy_grid(triple: Sequence[float]) -> np.ndarray:
    start, stop, count = triple
    if int(count) != count or count < 1:
        raise ConfigError(f'Energy grid count must be a positive integer, got {count}')
    return np.linspace(float(start), float(stop), int(count))


def _load(args: argparse.Namespace) -> dict:
    if getattr(args, 'fig1', False):
        config = validate_config(fig1_config())
    elif args.config is None:
        raise ConfigError('Give a run config with --config (or --fig1 for the preset).')
    else:
        config = load_config(args.config)
    # --seed must not leak into the loaded config
    config = copy.deepcopy(config)
    if args.seed is not None:
        config.setdefault('ensemble', {})['base_seed'] = args.seed
    return config


def _grid_from_config(config: dict) -> GridSpec:
    section = config.get('grid')
    if section is None:
        raise ConfigError('The run config needs a grid section.')
    return GridSpec.cube(section['dimension'], section['cells'], section['spacing'], section.get('origin', 0.0))


def _planar_strength(gauge: ConstantFieldGauge) -> float:
    matrix = gauge.matrix
    if gauge.dimension != 2:
        raise ConfigError('The Landau staircase overlay needs a two-dimensional run.')
    return float(abs(matrix[0, 1]))


def _finish(manifest: RunManifest, out: Path, started: float) -> None:
    manifest.wall_time = round(time.perf_counter() - started, 3)
    manifest.write(out / 'manifest.json')
    logger.info(f'Manifest {manifest.digest[:12]} written to {out}')


def _metadata(manifest: RunManifest, **extra) -> dict:
    return {'manifest': manifest.digest, 'tool': f'{TOOL_NAME} {TOOL_VERSION}', 'command': manifest.command, **extra}


def run_field_sample(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config = _load(args)
    grid = _grid_from_config(config)
    model = model_from_config(config.get('field'), grid.dimension)
    seed = config.get('ensemble', {}).get('base_seed', 0)
    realization = sample_field(model, grid, seed)
    manifest = RunManifest('field sample', config, [seed])
    path = args.out / 'field.csv'
    manifest.outputs[path.name] = write_csv(realization.frame(), path, _metadata(manifest, model=realization.model_tag))
    _finish(manifest, args.out, started)
    print(f'Wrote {path}')
    return EXIT_OK


def run_ids(args: argparse.Namespace) -> int:
    """IDS curves for every configured boundary condition and cube size."""
    started = time.perf_counter()
    config = _load(args)
    jobs = resolve_jobs(args.jobs)
    section = config.get('ids', {})
    energies = energy_grid(section.get('energies', IDS_ENERGIES))
    # One size sweep per boundary condition; the seeds are shared
    frames, seeds = [], []
    for boundary in config.get('boundary', boundary_conditions):
        spec = ensemble_from_config(config, boundary)
        sizes = section.get('sizes', [spec.grid.side])
        frames.append(ids_size_sweep(spec, sizes, energies, jobs))
        seeds = spec.seeds
    frame = pd.concat(frames, ignore_index=True)
    if section.get('staircase', False):
        # Overlay the zero-disorder Landau staircase
        gauge = ConstantFieldGauge.from_config(config.get('gauge', {}).get('B'), config['grid']['dimension'])
        strength = _planar_strength(gauge)
        if not strength > 0:
            raise ConfigError('The Landau staircase overlay needs a nonzero field.')
        frame['staircase'] = landau_staircase(strength, frame['E'].to_numpy())
    manifest = RunManifest('ids run', config, seeds)
    path = args.out / 'ids.csv'
    manifest.outputs[path.name] = write_csv(frame, path, _metadata(manifest))
    _finish(manifest, args.out, started)
    print(f'Wrote {path}')
    return EXIT_OK


def _bound_params(section: dict, family: str) -> Optional[dict]:
    keys = ['beta'] if family != 'gauss' else ['beta', 'ell', 's']
    params = {key: float(section[key]) for key in keys if key in section}
    return params or None


def run_wegner(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config = _load(args)
    jobs = resolve_jobs(args.jobs)
    # Bounds need only a dimension, not a grid
    dimension = config['grid']['dimension'] if 'grid' in config else config.get('field', {}).get('dimension')
    if dimension is None:
        raise ConfigError('The wegner command needs grid.dimension or field.dimension.')
    model = model_from_config(config.get('field'), dimension)
    if model is None:
        raise ConfigError('The wegner command needs a random field model.')
    section = config.get('wegner', {})
    if args.family is not None:
        config['wegner'] = dict(section, family=args.family)
        section = config['wegner']
    problem = problem_from_config(config, model)
    # The preset minimizes unless a mode is given
    mode = 'minimize' if args.fig1 and args.mode is None else args.mode or 'eval'
    if mode == 'asymptotics':
        if not isinstance(model, CovarianceModel):
            raise ConfigError('Asymptotics are defined for Gaussian models only.')
        if 'energies' in section:
            energies = energy_grid(section['energies'])
        else:
            energies = np.asarray(ASYMPTOTIC_ENERGIES) * math.sqrt(model.c0)
        frame = gauss_asymptotics(model, float(section.get('s', 0.0)), energies)
    else:
        energies = energy_grid(section.get('energies', FIG1['energies']))
        if mode == 'minimize':
            curve = minimize_curve(problem, energies, jobs)
        else:
            curve = evaluate_curve(problem, energies, _bound_params(section, problem.family))
        frame = curve.frame()
    manifest = RunManifest(f'wegner {mode}', config, [])
    path = args.out / f'wegner_{mode}.csv'
    manifest.outputs[path.name] = write_csv(frame, path, _metadata(manifest, family=problem.family))
    _finish(manifest, args.out, started)
    print(f'Wrote {path}')
    return EXIT_OK


def run_verify(args: argparse.Namespace) -> int:
    """Runs the named checks; exit 4 unless every report passes."""
    started = time.perf_counter()
    jobs = resolve_jobs(args.jobs)
    seed = 0 if args.seed is None else args.seed
    reports = run_checks(args.checks, quick=args.quick, seed=seed, jobs=jobs)
    # A global tolerance replaces each check's own
    if args.tol is not None:
        reports = [report.with_tolerance(args.tol) for report in reports]
    snapshot = {'checks': sorted(args.checks), 'quick': args.quick, 'tol': args.tol}
    manifest = RunManifest('verify', snapshot, [seed])
    # The JSONL carries the full reports, the CSV a summary row each
    jsonl = args.out / 'reports.jsonl'
    summary = args.out / 'reports.csv'
    manifest.outputs[jsonl.name] = write_jsonl(reports, jsonl, manifest.digest)
    manifest.outputs[summary.name] = write_csv(reports_frame(reports), summary, _metadata(manifest))
    _finish(manifest, args.out, started)
    failed = [report.name for report in reports if not report.passed]
    for report in reports:
        print(f'{report.name:24s} {"pass" if report.passed else "FAIL"}  worst violation {report.worst_violation:.3g}')
    if failed:
        logger.warning(f'Failed checks: {failed}')
        return EXIT_CHECK_FAILED
    return EXIT_OK


def _common(parser: argparse.ArgumentParser, with_config: bool = True) -> None:
    if with_config:
        parser.add_argument('--config', type=Path, help='JSON run config')
    parser.add_argument('--seed', type=int, help='base seed (overrides ensemble.base_seed)')
    parser.add_argument('--jobs', type=int, help='worker processes (default: $WEGNER_LAB_JOBS or 1)')
    parser.add_argument('--out', type=Path, default=Path('out'), help='output directory')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL_NAME, description='Numerical lab for Wegner estimates of '
                                                                 'random magnetic Schroedinger operators.')
    parser.add_argument('--log-file', type=Path, default=Path(LOG_FILE))
    parser.add_argument('--verbose', action='store_true', help='log at INFO level')
    parser.add_argument('--version', action='version', version=f'{TOOL_NAME} {TOOL_VERSION}')
    commands = parser.add_subparsers(dest='command', required=True)

    field = commands.add_parser('field', help='random potentials')
    field_commands = field.add_subparsers(dest='action', required=True)
    sample = field_commands.add_parser('sample', help='write one realization as CSV')
    _common(sample)
    sample.add_argument('--fig1', action='store_true', help='use the constant-field Gaussian preset')
    sample.set_defaults(handler=run_field_sample)

    ids = commands.add_parser('ids', help='integrated density of states')
    ids_commands = ids.add_subparsers(dest='action', required=True)
    ids_run = ids_commands.add_parser('run', help='Monte Carlo IDS curves')
    _common(ids_run)
    ids_run.set_defaults(handler=run_ids)

    wegner = commands.add_parser('wegner', help='density-of-states bounds')
    wegner.add_argument('mode', nargs='?', choices=['eval', 'minimize', 'asymptotics'])
    wegner.add_argument('--family', choices=['alloy-uniform', 'alloy-laplace', 'gauss'])
    wegner.add_argument('--fig1', action='store_true', help='minimized Gaussian bound of the constant-field Gaussian preset')
    _common(wegner)
    wegner.set_defaults(handler=run_wegner)

    verify = commands.add_parser('verify', help='operator inequality checks')
    verify.add_argument('checks', nargs='+', help='check names or "all"')
    verify.add_argument('--quick', action='store_true', help='reduced instance counts')
    verify.add_argument('--tol', type=float, help='override every acceptance tolerance')
    _common(verify, with_config=False)
    verify.set_defaults(handler=run_verify)
    return parser


def _exit_code(exc: LabError) -> int:
    cause = exc.__cause__ if isinstance(exc, EnsembleError) and exc.__cause__ is not None else exc
    return EXIT_RESOURCE if isinstance(cause, ResourceLimitError) else EXIT_CONFIG


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        filename=str(args.log_file),
        level=logging.INFO if args.verbose else LOG_LEVEL,
        format=LOG_FORMAT,
        filemode='w')
    logger.setLevel(logging.INFO if args.verbose else LOG_LEVEL)
    logger.info(f'{TOOL_NAME} {TOOL_VERSION} started: {argv if argv is not None else sys.argv[1:]}')
    try:
        return args.handler(args)
    except ResourceLimitError as exc:
        logger.error(str(exc))
        print(f'error: {exc}', file=sys.stderr)
        return EXIT_RESOURCE
    except LabError as exc:
        logger.error(str(exc))
        print(f'error: {exc}', file=sys.stderr)
        return _exit_code(exc)


if __name__ == '__main__':
    sys.exit(main())
