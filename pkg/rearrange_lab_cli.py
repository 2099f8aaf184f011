#!/usr/bin/env python3
"""
Rearrangement Lab CLI

Main entry point for the rearrangement lab. Evaluates Lambda and
Lorentz-Zygmund quasinorms, dilation indices, separation certificates,
superadditivity verdicts and Moser-type noncompactness certificates, and
writes JSON / CSV / SVG artifacts.

Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence,
4 certificate conditions not met, 64 unknown subcommand.
"""

import asyncio
import argparse
import itertools
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from artifacts import load_json_argument, write_csv, write_json
from errors import (
    CertificateFailure,
    NoPositiveEpsilon,
    NonConvergenceError,
    PreconditionError,
    QuasinormBelowLambda,
    RearrangeLabError
)
from moser_dilation import (
    InvarianceRow,
    base_lz_quasinorm,
    certificate_quasinorm,
    check_membership,
    geometric_kappas,
    invariance_report,
    invariance_row,
    noncompactness_certificate
)
from quadrature import QuadratureConfig
from radial_profile import (
    BallGeometry,
    gradient_n_norm,
    moser_profile,
    profile_from_dict,
    spherical_rearrangement,
    tent_profile
)
from rearrangement import SimpleFunction, StepProfile, distribution_map, rearrangement
from separation import (
    EPSILON_GRID_POINTS,
    epsilon_of_lambda,
    euclidean_plane_domain,
    falsify_uniform_separation,
    plane_domain,
    separation_certificate,
    step_profile_domain,
    theta
)
from superadditivity import (
    empirical_superadd_constant,
    equal_split_ratio,
    equal_split_series,
    superadd_classify_lambda,
    superadd_classify_lz
)
from visualization import ReportPrinter, emit_plotdata
from weights import (
    LambdaParams,
    PowerLogWeight,
    Weight,
    format_exponent,
    lambda_quasinorm,
    lambda_quasinorm_distributional,
    lz_normable_classify,
    lz_quasi_kothe_classify,
    lz_quasinorm,
    parse_exponent,
    weight_from_dict
)

logger = logging.getLogger(__name__)

SUBCOMMANDS = (
    'qnorm', 'rearrange', 'theta', 'separation-cert', 'falsify',
    'superadd', 'verify-identities', 'certify', 'sweep'
)
EXIT_USAGE = 64
MAX_SWEEP_POINTS = 10 ** 6
JOBS_ENV = 'REARRANGE_LAB_JOBS'

IDENTITY_KAPPAS = (0.5, 0.1, 0.01)
IDENTITY_DIMENSIONS = (2, 3, 4)
IDENTITY_TOLERANCE = 1e-6
SUPPORT_LOG_TOLERANCE = 1e-10
IDENTITY_COLUMNS = ['kappa', 'R_kappa', 'grad_rel_err', 'qnorm_rel_err', 'qnorm_value', 'support_mass']
IDENTITY_SWEEP_COLUMNS = ['profile', 'n', 'q'] + IDENTITY_COLUMNS + ['support_log_err', 'pass']


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation needs besides its subcommand arguments"""
    subcommand: str
    inputs: Tuple[str, ...] = ()
    out: Optional[str] = None
    rel_tol: Optional[float] = None
    abs_tol: Optional[float] = None
    seed: int = 0
    jobs: int = 1
    fmt: Optional[str] = None
    quiet: bool = False

    @property
    def quadrature(self) -> QuadratureConfig:
        defaults = QuadratureConfig()
        return QuadratureConfig(
            self.rel_tol if self.rel_tol is not None else defaults.rel_tol,
            self.abs_tol if self.abs_tol is not None else defaults.abs_tol
        )


@dataclass
class Artifact:
    """What a subcommand produced, in every format it supports"""
    title: str
    record: Optional[Dict[str, Any]] = None
    columns: Optional[List[str]] = None
    rows: Optional[List[Sequence[Any]]] = None
    plot_kind: Optional[str] = None
    plot_rows: Optional[List[Sequence[Any]]] = None
    default_format: str = 'json'
    failure: Optional[RearrangeLabError] = field(default=None, repr=False)


def resolve_jobs(flag: Optional[int]) -> int:
    """--jobs, else REARRANGE_LAB_JOBS, else 1"""
    if flag is not None:
        jobs = flag
    else:
        try:
            jobs = int(os.environ.get(JOBS_ENV, '1'))
        except ValueError as e:
            raise PreconditionError(f"{JOBS_ENV} must be an integer") from e
    if jobs < 1:
        raise PreconditionError("parallelism degree must be >= 1")
    return jobs


async def gather_in_executor(jobs: int, fn: Callable, items: Sequence, return_exceptions: bool = False) -> List:
    """fn over items on a thread pool; results in input order"""
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [loop.run_in_executor(pool, fn, item) for item in items]
        return await asyncio.gather(*futures, return_exceptions=return_exceptions)


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------

def build_weight(args) -> Weight:
    if args.weight:
        return weight_from_dict(load_json_argument(args.weight))
    if args.p is None or args.q is None:
        raise PreconditionError("give --weight, or --p and --q for a Lorentz-Zygmund weight")
    return PowerLogWeight(parse_exponent(args.p), parse_exponent(args.q), args.alpha, args.M)


def build_params(args) -> LambdaParams:
    weight = build_weight(args)
    if args.q is not None:
        q = parse_exponent(args.q)
    elif isinstance(weight, PowerLogWeight):
        q = weight.q
    else:
        raise PreconditionError("--q is required with a tabulated weight")
    return LambdaParams(q, weight)


def load_profile(args):
    """StepProfile from a simple function or step JSON, RadialProfile from a radial kind"""
    if not args.profile:
        raise PreconditionError("--profile is required")
    data = load_json_argument(args.profile)
    if not isinstance(data, dict):
        raise PreconditionError("profile JSON must be an object")
    if data.get('kind') in ('tent', 'moser', 'segments'):
        return profile_from_dict(data, BallGeometry(args.n, args.R if args.R is not None else 1.0))
    if 'breakpoints' in data:
        return StepProfile.from_dict(data)
    if 'pieces' in data:
        return rearrangement(SimpleFunction.from_dict(data))
    raise PreconditionError("profile JSON needs 'pieces', 'breakpoints' or a radial 'kind'")


def parse_kappas(text: str) -> List[float]:
    """'0.5,0.1,0.01' or 'geometric:RATIO,COUNT'"""
    try:
        if text.startswith('geometric:'):
            ratio, count = text[len('geometric:'):].split(',')
            return geometric_kappas(float(ratio), int(count))
        return [float(k) for k in text.split(',') if k.strip()]
    except ValueError as e:
        raise PreconditionError(f"cannot parse κ list {text!r}") from e


def _require(value, flag: str):
    if value is None:
        raise PreconditionError(f"{flag} is required")
    return value


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

async def cmd_qnorm(args, cfg: RunConfig) -> Artifact:
    profile = load_profile(args)
    if args.weight or args.method == 'distributional':
        params = build_params(args)
        if args.method == 'distributional':
            if not isinstance(profile, StepProfile):
                raise PreconditionError("the distributional formula needs a simple function profile")
            result = lambda_quasinorm_distributional(profile.to_simple_function(), params, cfg.quadrature)
        else:
            result = lambda_quasinorm(profile, params, cfg.quadrature)
    else:
        p = parse_exponent(_require(args.p, '--p'))
        q = parse_exponent(_require(args.q, '--q'))
        result = lz_quasinorm(profile, p, q, args.alpha, cfg.quadrature)
    return Artifact('Quasinorm', record={'value': result.value, 'method': result.method,
                                         'abs_err_estimate': result.abs_err_estimate})


async def cmd_rearrange(args, cfg: RunConfig) -> Artifact:
    f = SimpleFunction.from_dict(load_json_argument(_require(args.profile, '--profile')))
    steps = rearrangement(f)
    dist = distribution_map(f)
    record = {
        'rearrangement': steps.to_dict(),
        'distribution': {'thresholds': list(dist.thresholds), 'masses': list(dist.masses)}
    }
    if args.spherical:
        geom = BallGeometry(args.n, args.R if args.R is not None else 1.0)
        record['spherical'] = spherical_rearrangement(f, geom).to_dict()
    rows = [[t, a] for t, a in zip(steps.breakpoints, steps.values)]
    return Artifact('Nonincreasing rearrangement', record=record, columns=['breakpoint', 'value'], rows=rows)


async def cmd_theta(args, cfg: RunConfig) -> Artifact:
    weight = build_weight(args)
    if args.lam is not None:
        value = theta(weight, args.lam, args.theta_method)
        return Artifact('Dilation index', record={'lambda': args.lam, 'theta': value, 'method': args.theta_method})
    lams = [k / 100 for k in range(1, 100)]
    values = await gather_in_executor(cfg.jobs, lambda lam: theta(weight, lam, args.theta_method), lams)
    rows = [[lam, v] for lam, v in zip(lams, values)]
    return Artifact(
        'Dilation index curve',
        record={'curve': rows},
        columns=['lambda', 'theta'],
        rows=rows,
        plot_kind='theta-curve',
        plot_rows=rows
    )


async def cmd_separation_cert(args, cfg: RunConfig) -> Artifact:
    params = build_params(args)
    r = args.r if args.r is not None else 1.0
    R = args.R if args.R is not None else 2.0
    if cfg.fmt in ('csv', 'svg'):
        lams = [k / (EPSILON_GRID_POINTS + 1) for k in range(1, EPSILON_GRID_POINTS + 1)]
        values = await gather_in_executor(
            cfg.jobs, lambda lam: epsilon_of_lambda(params.weight, params.q, r, R, lam), lams
        )
        rows = [[lam, e] for lam, e in zip(lams, values)]
        return Artifact('Separation constant curve', columns=['lambda0', 'epsilon'], rows=rows,
                        plot_kind='epsilon-curve', plot_rows=rows)
    cert = separation_certificate(params, r, R)
    return Artifact('Separation certificate', record=cert.to_dict())


async def cmd_falsify(args, cfg: RunConfig) -> Artifact:
    r = args.r if args.r is not None else 1.5
    R = args.R if args.R is not None else 2.0
    if args.qnorm == 'plane':
        domain = plane_domain()
    elif args.qnorm == 'euclidean':
        domain = euclidean_plane_domain()
    else:
        params = build_params(args)
        domain = step_profile_domain(params, [params.total_mass / args.cells] * args.cells)
    found = falsify_uniform_separation(domain, r, R, args.eps, args.budget, cfg.seed)
    record = {
        'domain': domain.name,
        'r': r,
        'R': R,
        'eps_claimed': args.eps,
        'budget': args.budget,
        'seed': cfg.seed,
        'found': found is not None,
        'counterexample': found.to_dict() if found else None
    }
    return Artifact('Separation falsifier', record=record)


async def cmd_superadd(args, cfg: RunConfig) -> Artifact:
    gamma = _require(args.gamma, '--gamma')
    params = build_params(args)
    M = params.total_mass

    if args.mode == 'classify':
        numeric = superadd_classify_lambda(params.weight, params.q, gamma, cfg.quadrature)
        record = {
            'numeric': numeric.to_dict(),
            'constant_bound': numeric.constant_bound,
            'constant_lower_bound': numeric.constant_lower_bound
        }
        if not args.weight:
            try:
                record['rule'] = superadd_classify_lz(args.p, params.q, args.alpha, gamma).to_dict()
            except PreconditionError as e:
                record['rule'] = {'out_of_scope': str(e)}
        return Artifact('Superadditivity verdict', record=record)

    series = equal_split_series(params, gamma, M, args.kmax)
    constant = empirical_superadd_constant(params, gamma, cfg.seed, kmax=min(args.kmax, 64))
    rows = [[k, ratio] for k, ratio in series]
    return Artifact(
        'Empirical superadditivity',
        record={'empirical_constant': constant, 'series': rows, 'gamma': gamma},
        columns=['k', 'ratio'],
        rows=rows,
        plot_kind='superadd-growth',
        plot_rows=rows
    )


def _identity_ok(row: InvarianceRow) -> bool:
    return (
        row.grad_rel_err <= IDENTITY_TOLERANCE
        and row.qnorm_rel_err <= IDENTITY_TOLERANCE
        and row.log_support_mass_err <= SUPPORT_LOG_TOLERANCE
    )


def _case_columns(row: InvarianceRow) -> List[Any]:
    return [row.kappa, row.R_kappa, row.grad_rel_err, row.qnorm_rel_err, row.qnorm_value, row.support_mass]


def _identity_rows(case: Tuple[str, int, float], cfg: QuadratureConfig) -> List[List[Any]]:
    kind, n, q = case
    geom = BallGeometry(n, 1.0)
    profile = tent_profile(geom) if kind == 'tent' else moser_profile(geom)
    return [
        [kind, n, format_exponent(q)] + _case_columns(row) + [row.log_support_mass_err, _identity_ok(row)]
        for row in invariance_report(profile, geom, q, IDENTITY_KAPPAS, cfg)
    ]


def _identity_failure(failing: List[Sequence[Any]]) -> Optional[NonConvergenceError]:
    """failing rows start with kappa, R_kappa, grad_rel_err, qnorm_rel_err"""
    if not failing:
        return None
    kappa, _, grad_err, qnorm_err = failing[0][:4]
    return NonConvergenceError(
        f"{len(failing)} identity checks exceed tolerance; first at κ = {kappa!r}",
        value=max(grad_err, qnorm_err)
    )


async def cmd_verify_identities(args, cfg: RunConfig) -> Artifact:
    if args.profile or args.q is not None or args.kappas:
        return await _verify_one_case(args, cfg)

    cases = [
        (kind, n, q)
        for kind in ('tent', 'moser')
        for n in IDENTITY_DIMENSIONS
        for q in (float(n), float(n + 1), float(2 * n), math.inf)
    ]
    per_case = await gather_in_executor(cfg.jobs, lambda c: _identity_rows(c, cfg.quadrature), cases)
    rows = [row for block in per_case for row in block]

    worst: Dict[float, List[float]] = {}
    for row in rows:
        entry = worst.setdefault(row[3], [0.0, 0.0])
        entry[0] = max(entry[0], row[5])
        entry[1] = max(entry[1], row[6])
    plot_rows = [[k, g, qn] for k, (g, qn) in sorted(worst.items())]

    failing = [row[3:] for row in rows if not row[-1]]
    return Artifact(
        'Dilation identities',
        columns=IDENTITY_SWEEP_COLUMNS,
        rows=rows,
        plot_kind='invariance',
        plot_rows=plot_rows,
        default_format='csv',
        failure=_identity_failure(failing)
    )


async def _verify_one_case(args, cfg: RunConfig) -> Artifact:
    """Invariance rows for the profile, n, q and κ list given on the command line"""
    geom = BallGeometry(args.n, args.R if args.R is not None else 1.0)
    if args.profile:
        profile = profile_from_dict(load_json_argument(args.profile), geom)
    else:
        profile = tent_profile(geom)
    q = parse_exponent(args.q) if args.q is not None else float(geom.n)
    kappas = parse_kappas(args.kappas) if args.kappas else list(IDENTITY_KAPPAS)

    if any(not 0 < k < 1 for k in kappas):
        raise PreconditionError("every κ must lie in (0, 1)")
    base_values = (gradient_n_norm(profile, geom), base_lz_quasinorm(profile, geom.n, q, cfg.quadrature).value)
    report = await gather_in_executor(
        cfg.jobs,
        lambda k: invariance_row(profile, geom, q, k, cfg.quadrature, base_values),
        kappas
    )
    return Artifact(
        'Dilation identities',
        columns=IDENTITY_COLUMNS,
        rows=[_case_columns(row) for row in report],
        plot_kind='invariance',
        plot_rows=[[row.kappa, row.grad_rel_err, row.qnorm_rel_err] for row in report],
        default_format='csv',
        failure=_identity_failure([_case_columns(row) for row in report if not _identity_ok(row)])
    )


async def cmd_certify(args, cfg: RunConfig) -> Artifact:
    geom = BallGeometry(args.n, args.R if args.R is not None else 1.0)
    if args.profile:
        profile = profile_from_dict(load_json_argument(args.profile), geom)
    else:
        profile = moser_profile(geom)
    q = parse_exponent(args.q) if args.q is not None else float(geom.n)
    kappas = parse_kappas(args.kappas)

    check_membership(profile, geom)
    if args.lam is not None:
        lam = args.lam
    else:
        lam = args.lambda_factor * base_lz_quasinorm(profile, geom.n, q, cfg.quadrature).value

    evaluated = await gather_in_executor(
        cfg.jobs,
        lambda k: certificate_quasinorm(profile, geom, q, k, lam, cfg.quadrature),
        kappas,
        return_exceptions=True
    )
    for outcome in evaluated:
        if isinstance(outcome, QuasinormBelowLambda):
            record = {
                'conditions_met': False,
                'lambda': lam,
                'failing_kappa': outcome.kappa,
                'quasinorm': outcome.quasinorm,
                'error': str(outcome)
            }
            return Artifact(
                'Noncompactness certificate',
                record=record,
                columns=['kappa', 'quasinorm', 'lambda'],
                rows=[[outcome.kappa, outcome.quasinorm, lam]],
                failure=outcome
            )
        if isinstance(outcome, BaseException):
            raise outcome

    cert = noncompactness_certificate(
        profile, geom, q, kappas, lam, cfg.quadrature, evaluated=evaluated, support_limit=args.support_limit
    )
    rows = [[k, r, v] for k, r, v in zip(cert.kappas, cert.log_support_radii, cert.quasinorms)]
    failure = None
    if not cert.conditions_met:
        failure = CertificateFailure(
            f"supports leave the ball of radius {cert.support_limit!r} or stop shrinking; need κ < κ₀ = {cert.kappa0!r}"
        )
    return Artifact(
        'Noncompactness certificate',
        record=cert.to_dict(),
        columns=['kappa', 'log_support_radius', 'quasinorm'],
        rows=rows,
        failure=failure
    )


# sweep operations: required parameters, output columns, evaluator
def _sweep_theta(point: Dict[str, Any], cfg: QuadratureConfig) -> List[Any]:
    weight = PowerLogWeight(point['p'], float(point['q']), float(point['alpha']), float(point.get('M', 1.0)))
    return [theta(weight, float(point['lambda']))]


def _sweep_epsilon(point: Dict[str, Any], cfg: QuadratureConfig) -> List[Any]:
    weight = PowerLogWeight(point['p'], float(point['q']), float(point['alpha']), float(point.get('M', 1.0)))
    try:
        cert = separation_certificate(LambdaParams(weight.q, weight), float(point['r']), float(point['R']))
    except NoPositiveEpsilon:
        return [math.nan, math.nan]
    return [cert.lambda0, cert.epsilon]


def _sweep_superadd_ratio(point: Dict[str, Any], cfg: QuadratureConfig) -> List[Any]:
    weight = PowerLogWeight(point['p'], float(point['q']), float(point['alpha']), float(point.get('M', 1.0)))
    params = LambdaParams(weight.q, weight)
    return [equal_split_ratio(params, float(point['gamma']), weight.total_mass, int(point['k']))]


def _sweep_qnorm_char(point: Dict[str, Any], cfg: QuadratureConfig) -> List[Any]:
    M = float(point.get('M', 1.0))
    profile = StepProfile.characteristic(float(point['t']), M)
    return [lz_quasinorm(profile, point['p'], point['q'], float(point['alpha']), cfg).value]


def _sweep_lz_classify(point: Dict[str, Any], cfg: QuadratureConfig) -> List[Any]:
    p, q, alpha = point['p'], point['q'], float(point['alpha'])
    return [lz_quasi_kothe_classify(p, q, alpha), lz_normable_classify(p, q, alpha)]


SWEEP_OPERATIONS = {
    'theta': (('p', 'q', 'alpha', 'lambda'), ('theta',), _sweep_theta),
    'epsilon': (('p', 'q', 'alpha', 'r', 'R'), ('lambda0', 'epsilon'), _sweep_epsilon),
    'superadd-ratio': (('p', 'q', 'alpha', 'gamma', 'k'), ('ratio',), _sweep_superadd_ratio),
    'qnorm-char': (('p', 'q', 'alpha', 't'), ('qnorm',), _sweep_qnorm_char),
    'lz-classify': (('p', 'q', 'alpha'), ('quasi_kothe', 'normable'), _sweep_lz_classify),
}


def sweep_points(grid: Dict[str, Any]) -> Tuple[str, List[str], List[Dict[str, Any]]]:
    """(operation, parameter names, points in row-major grid order)"""
    operation = grid.get('operation')
    if operation not in SWEEP_OPERATIONS:
        raise PreconditionError(f"unknown sweep operation {operation!r}; expected one of {sorted(SWEEP_OPERATIONS)}")
    params = grid.get('params', {})
    if not isinstance(params, dict) or any(not isinstance(v, list) for v in params.values()):
        raise PreconditionError("sweep params must map names to value lists")
    names = list(params)
    size = math.prod(len(v) for v in params.values()) if params else 0
    if size > MAX_SWEEP_POINTS:
        raise PreconditionError(f"sweep grid has {size} points, more than {MAX_SWEEP_POINTS}")
    if size == 0:
        return operation, names, []
    required = SWEEP_OPERATIONS[operation][0]
    missing = [name for name in required if name not in params]
    if missing:
        raise PreconditionError(f"sweep {operation!r} needs parameters {missing}")
    points = [dict(zip(names, combo)) for combo in itertools.product(*params.values())]
    return operation, names, points


async def cmd_sweep(args, cfg: RunConfig) -> Artifact:
    grid = load_json_argument(_require(args.grid, '--grid'))
    operation, names, points = sweep_points(grid)
    outputs = SWEEP_OPERATIONS[operation][1]
    evaluate = SWEEP_OPERATIONS[operation][2]
    results = await gather_in_executor(cfg.jobs, lambda point: evaluate(point, cfg.quadrature), points)
    rows = [[point[name] for name in names] + list(result) for point, result in zip(points, results)]
    columns = names + list(outputs) if names else list(SWEEP_OPERATIONS[operation][0]) + list(outputs)
    return Artifact(
        f'Sweep: {operation}',
        record={'operation': operation, 'columns': columns, 'rows': rows},
        columns=columns,
        rows=rows,
        default_format='csv'
    )


COMMANDS = {
    'qnorm': cmd_qnorm,
    'rearrange': cmd_rearrange,
    'theta': cmd_theta,
    'separation-cert': cmd_separation_cert,
    'falsify': cmd_falsify,
    'superadd': cmd_superadd,
    'verify-identities': cmd_verify_identities,
    'certify': cmd_certify,
    'sweep': cmd_sweep,
}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def write_artifact(artifact: Artifact, cfg: RunConfig):
    fmt = cfg.fmt or artifact.default_format
    if fmt == 'json':
        if artifact.record is None:
            raise PreconditionError(f"{cfg.subcommand} has no JSON output; use --format csv")
        write_json(artifact.record, cfg.out)
    elif fmt == 'csv':
        if artifact.columns is None:
            raise PreconditionError(f"{cfg.subcommand} has no CSV output; use --format json")
        write_csv(artifact.columns, artifact.rows or [], cfg.out)
    else:
        if artifact.plot_kind is None:
            raise PreconditionError(f"{cfg.subcommand} has no plot output")
        if cfg.out in (None, '-'):
            raise PreconditionError("--format svg needs --out")
        csv_path = os.path.splitext(cfg.out)[0] + '.csv'
        emit_plotdata(artifact.plot_kind, artifact.plot_rows or [], csv_path, cfg.out)

    if cfg.out not in (None, '-') and not cfg.quiet:
        if artifact.record is not None and fmt == 'json':
            ReportPrinter.print_record(artifact.title, artifact.record)
            for key in ('conditions_met', 'found'):
                if key in artifact.record:
                    ReportPrinter.print_verdict(key.replace('_', ' ').title(), artifact.record[key])
        elif artifact.columns is not None:
            ReportPrinter.print_table(artifact.title, artifact.columns, (artifact.rows or [])[:40])
        if artifact.plot_kind == 'superadd-growth':
            ReportPrinter.print_growth_bars(artifact.plot_rows or [])
        print(f"✓ {artifact.title} exported to {cfg.out}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', help='Output file (default: stdout)')
    common.add_argument('--seed', type=int, default=0, help='Seed for all random streams (default: 0)')
    common.add_argument('--rel-tol', type=float, help='Relative quadrature tolerance')
    common.add_argument('--abs-tol', type=float, help='Absolute quadrature tolerance')
    common.add_argument('--jobs', type=int, help=f'Parallel workers (default: ${JOBS_ENV} or 1)')
    common.add_argument('--format', dest='fmt', choices=('json', 'csv', 'svg'), help='Artifact format')
    common.add_argument('--verbose', action='store_true', help='Log progress')
    common.add_argument('--quiet', action='store_true', help='Only errors, no console report')
    common.add_argument('--n', type=int, default=2, help='Dimension of the ball (default: 2)')
    common.add_argument('--R', type=float, help='Ball radius, or the separation radius R')
    common.add_argument('--r', type=float, help='Separation radius r')
    common.add_argument('--M', type=float, default=1.0, help='Total mass of the measure space (default: 1)')
    common.add_argument('--p', help='Lorentz-Zygmund p (number or INF)')
    common.add_argument('--q', help='Exponent q (number or INF)')
    common.add_argument('--alpha', type=float, default=0.0, help='Log exponent α (default: 0)')
    common.add_argument('--gamma', type=float, help='Superadditivity exponent γ')
    common.add_argument('--lambda', dest='lam', type=float, help='λ')
    common.add_argument('--weight', help='Weight JSON, inline or a file')
    common.add_argument('--profile', help='Profile JSON, inline or a file')

    parser = argparse.ArgumentParser(
        description="Rearrangement Lab - limiting Sobolev embeddings, numerically",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Quasinorm of a characteristic function in L^{2,2}
  python rearrange_lab_cli.py qnorm --profile '{"pieces": [[1, 0.25]], "total_mass": 1}' --p 2 --q 2

  # Separation certificate for a Lorentz-Zygmund space
  python rearrange_lab_cli.py separation-cert --p INF --q 2 --alpha -1 --r 1 --R 2

  # Noncompactness certificate just below the quasinorm of the Moser profile
  python rearrange_lab_cli.py certify --n 2 --q 2 --kappas geometric:0.5,8

  # Acceptance identities as CSV
  python rearrange_lab_cli.py verify-identities --out identities.csv
        """
    )
    sub = parser.add_subparsers(dest='subcommand', metavar='SUBCOMMAND')

    p = sub.add_parser('qnorm', parents=[common], help='Lambda or Lorentz-Zygmund quasinorm')
    p.add_argument('--method', choices=('rearrangement', 'distributional'), default='rearrangement')

    p = sub.add_parser('rearrange', parents=[common], help='Rearrangement and distribution function')
    p.add_argument('--spherical', action='store_true', help='Also emit the radial profile on B_R')

    p = sub.add_parser('theta', parents=[common], help='Dilation index Θ(λ), or its curve')
    p.add_argument('--theta-method', choices=('auto', 'closed', 'numeric'), default='auto')

    sub.add_parser('separation-cert', parents=[common], help='Separation certificate ε_{r,R}')

    p = sub.add_parser('falsify', parents=[common], help='Search for separation counterexamples')
    p.add_argument('--qnorm', '--domain', dest='qnorm', choices=('plane', 'euclidean', 'lambda'), default='plane',
                   help='Quasinorm to attack (default: plane)')
    p.add_argument('--eps', type=float, default=0.01, help='Claimed separation constant')
    p.add_argument('--budget', type=int, default=1000, help='Trial budget')
    p.add_argument('--cells', type=int, default=4, help='Cells for the lambda domain')

    p = sub.add_parser('superadd', parents=[common], help='Disjoint superadditivity')
    p.add_argument('--mode', choices=('classify', 'empirical'), default='classify')
    p.add_argument('--kmax', type=int, default=64, help='Largest family size')

    p = sub.add_parser('verify-identities', parents=[common], help='Dilation invariance acceptance checks')
    p.add_argument('--kappas', help="'k1,k2,...' or 'geometric:RATIO,COUNT'; with --profile or --q checks one case")

    p = sub.add_parser('certify', parents=[common], help='Noncompactness certificate')
    p.add_argument('--kappas', default='geometric:0.5,8', help="'k1,k2,...' or 'geometric:RATIO,COUNT'")
    p.add_argument('--lambda-factor', type=float, default=0.99,
                   help='λ as a multiple of the profile quasinorm when --lambda is absent')
    p.add_argument('--support-limit', type=float,
                   help='Radius the supports must stay inside (default: R); sets the threshold κ₀')

    p = sub.add_parser('sweep', parents=[common], help='Cartesian parameter sweep to CSV')
    p.add_argument('--grid', help='Grid JSON {"operation": ..., "params": {...}}, inline or a file')

    return parser


def configure_logging(verbose: bool, quiet: bool):
    level = logging.ERROR if quiet else (logging.INFO if verbose else logging.WARNING)
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s', stream=sys.stderr, force=True)


async def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point with CLI argument parsing; returns the exit code"""

    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()

    if not argv or (argv[0] not in SUBCOMMANDS and argv[0] not in ('-h', '--help')):
        parser.print_usage(sys.stderr)
        print(f"unknown subcommand {argv[0] if argv else ''!r}; expected one of {', '.join(SUBCOMMANDS)}",
              file=sys.stderr)
        return EXIT_USAGE

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else PreconditionError.exit_code

    configure_logging(args.verbose, args.quiet)
    try:
        cfg = RunConfig(
            subcommand=args.subcommand,
            inputs=tuple(x for x in (args.profile, args.weight, getattr(args, 'grid', None)) if x),
            out=args.out,
            rel_tol=args.rel_tol,
            abs_tol=args.abs_tol,
            seed=args.seed,
            jobs=resolve_jobs(args.jobs),
            fmt=args.fmt,
            quiet=args.quiet
        )
        artifact = await COMMANDS[args.subcommand](args, cfg)
        write_artifact(artifact, cfg)
        if artifact.failure is not None:
            raise artifact.failure
    except RearrangeLabError as e:
        print(f"✗ {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except (OSError, ValueError) as e:
        # unreadable files and malformed JSON
        print(f"✗ {type(e).__name__}: {e}", file=sys.stderr)
        return PreconditionError.exit_code
    return 0


def run(argv: Optional[Sequence[str]] = None) -> int:
    return asyncio.run(main(argv))


if __name__ == "__main__":
    sys.exit(run())
