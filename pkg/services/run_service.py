# services/run_service.py - Run configuration parsing and task dispatch

import json
import logging
import math
import re
import time
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from config import get_config
from errors import DomainError, RotorError, ValidationError
from models import (
    BosonSpec, ExponentialSpec, Frame, GaussianSeedSpec, OutputBundle, RotorSpec, RunConfig,
    StateFamily, Task, TopExpansion, TopSpec
)
from services import observables, revivals, states, toprotor
from utils.logging_config import log_performance_metric, log_run_event
from utils.output_writer import OutputWriter

logger = logging.getLogger(__name__)

SPHERE_FAMILIES = {
    StateFamily.EXPONENTIAL, StateFamily.GAUSSIAN, StateFamily.UNIFORM, StateFamily.BOSON,
    StateFamily.INTELLIGENT, StateFamily.GENERAL,
}

REQUIRED_PARAMS = {
    StateFamily.EXPONENTIAL: ('N', 'eta'),
    StateFamily.GAUSSIAN: ('N', 'eta'),
    StateFamily.UNIFORM: ('etaN',),
    StateFamily.BOSON: ('k', 's'),
    StateFamily.INTELLIGENT: ('l', 'eta'),
    StateFamily.GENERAL: ('weights', 'eta'),
    StateFamily.JANSSEN: ('r', 'lambda'),
}

FAMILY_FREE_TASKS = {Task.DECOMPOSE, Task.COMPARE_BOSON}
TIMED_TASKS = {Task.EVOLVE, Task.DECOMPOSE, Task.CLONES, Task.TOP_EVOLVE}

_ANGLE = re.compile(r'^([+-]?\d*\.?\d*)\*?pi(?:/(\d+\.?\d*))?$')


# ---------------------------------------------------------------------------
# Value parsers; each raises ValueError with a readable message
# ---------------------------------------------------------------------------

def parse_float(text):
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"{text!r} is not finite")
    return value


def parse_positive(text):
    value = parse_float(text)
    if not value > 0:
        raise ValueError(f"{text!r} must be positive")
    return value


def parse_count(text):
    value = int(str(text))
    if value < 2:
        raise ValueError(f"{text!r} must be at least 2")
    return value


def parse_nonnegative_int(text):
    value = int(str(text))
    if value < 0:
        raise ValueError(f"{text!r} must be nonnegative")
    return value


def parse_angle(text):
    """Float or a multiple of pi such as 'pi/2', '2pi/3', '-pi/4'"""
    if isinstance(text, (int, float)):
        return float(text)
    token = str(text).replace(' ', '').lower()
    match = _ANGLE.match(token)
    if match:
        factor, divisor = match.groups()
        if factor in ('', '+'):
            factor = '1'
        elif factor == '-':
            factor = '-1'
        value = float(factor) * math.pi
        if divisor:
            value /= float(divisor)
        return value
    return parse_float(token)


def parse_bool(text):
    if isinstance(text, bool):
        return text
    token = str(text).strip().lower()
    if token in ('true', 'yes', '1'):
        return True
    if token in ('false', 'no', '0'):
        return False
    raise ValueError(f"{text!r} is not a boolean")


def parse_rational(text, cap=64):
    """'m/n' exactly, or a float reduced with the denominator cap"""
    if isinstance(text, Fraction):
        return text
    token = str(text).strip()
    if '/' in token:
        numerator, _, denominator = token.partition('/')
        value = Fraction(int(numerator), int(denominator))
    else:
        value = revivals.reduce_time(parse_float(token), cap)
    if value < 0:
        raise ValueError(f"time {token!r} must be nonnegative")
    return value


def parse_rational_delta(text):
    """'r/p' -> (p, r)"""
    token = str(text).strip()
    numerator, sep, denominator = token.partition('/')
    r = int(numerator)
    p = int(denominator) if sep else 1
    if p <= 0:
        raise ValueError(f"{token!r} needs a positive denominator")
    return p, r


def _split_list(value):
    if isinstance(value, (list, tuple)):
        return list(value)
    return [v for v in str(value).replace(';', ',').split(',') if v.strip()]


def parse_weights(value):
    weights = [parse_float(v) for v in _split_list(value)]
    if not weights:
        raise ValueError("weights list is empty")
    return weights


def parse_s(text):
    value = Fraction(str(text).strip())
    if value <= 0 or (2 * value).denominator != 1:
        raise ValueError(f"s={text!r} must be a positive integer or half-integer")
    return value


def parse_variant(text):
    token = str(text).strip().lower()
    if token not in ('quantum', 'classical'):
        raise ValueError(f"carpet_variant must be quantum or classical, got {text!r}")
    return token


KEY_PARSERS = {
    'N': parse_positive,
    'eta': parse_float,
    'epsilon': parse_float,
    'etaN': parse_positive,
    'k': parse_positive,
    'k2': parse_positive,
    's': parse_s,
    'integer_truncated': parse_bool,
    'l': parse_nonnegative_int,
    'weights': parse_weights,
    'r': parse_positive,
    'lambda': parse_angle,
    'omega0': parse_positive,
    'delta': parse_float,
    'rational_delta': parse_rational_delta,
    'theta': parse_angle,
    'beta': parse_angle,
    'frame': Frame,
    'sin_weighted': parse_bool,
    'carpet_variant': parse_variant,
    'n_theta': parse_count,
    'n_phi': parse_count,
    'n_alpha': parse_count,
    'n_gamma': parse_count,
    'n_time': parse_count,
    'samples': parse_count,
    'n_max': parse_nonnegative_int,
    'tail_tol': parse_positive,
}

SPECIAL_KEYS = ('task', 'family', 'times', 't_max', 'output_dir')


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def read_config_text(text):
    """Mapping of raw values from key=value lines or a JSON object; returns (mapping, errors)"""
    text = text or ''
    if text.lstrip().startswith('{'):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            return {}, [f"malformed JSON: {e}"]
        if not isinstance(data, dict):
            return {}, ["JSON config must be an object"]
        return data, []

    mapping, errors = {}, []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        if not sep or not key.strip():
            errors.append(f"line {number}: expected key=value, got {raw.strip()!r}")
            continue
        mapping[key.strip()] = value.strip()
    return mapping, errors


def parse_mapping(mapping, denominator_cap=64, default_output_dir='output', default_tail_tol=1e-12):
    """Validate a raw mapping into a RunConfig; every problem is reported"""
    errors = []
    params = {}

    unknown = sorted(k for k in mapping if k not in KEY_PARSERS and k not in SPECIAL_KEYS)
    errors.extend(f"unknown key {k!r}" for k in unknown)

    task = None
    if 'task' not in mapping:
        errors.append("missing key 'task'")
    else:
        try:
            task = Task(str(mapping['task']).strip())
        except ValueError:
            errors.append(f"task: unknown task {mapping['task']!r}")

    family = None
    if 'family' in mapping:
        try:
            family = StateFamily(str(mapping['family']).strip())
        except ValueError:
            errors.append(f"family: unknown family {mapping['family']!r}")

    for key, parser in KEY_PARSERS.items():
        if key not in mapping:
            continue
        try:
            params[key] = parser(mapping[key])
        except (ValueError, TypeError, ZeroDivisionError) as e:
            errors.append(f"{key}: {e}")

    times = ()
    if 'times' in mapping:
        try:
            times = tuple(parse_rational(v, denominator_cap) for v in _split_list(mapping['times']))
        except (ValueError, ZeroDivisionError) as e:
            errors.append(f"times: malformed rational ({e})")
    if 't_max' in mapping:
        try:
            params['t_max'] = parse_rational(mapping['t_max'], denominator_cap)
        except (ValueError, ZeroDivisionError) as e:
            errors.append(f"t_max: malformed rational ({e})")

    if task is not None:
        errors.extend(_check_task(task, family, params, mapping, times))

    if 'rational_delta' in params:
        p, r = params['rational_delta']
        params.setdefault('delta', r / p)
        try:
            RotorSpec(params.get('omega0', 1.0), params['delta'], params['rational_delta'])
        except DomainError as e:
            errors.append(f"rational_delta: {e}")

    if errors:
        raise ValidationError(errors)

    return RunConfig(
        task=task, family=family, params=params, times=times,
        output_dir=str(mapping.get('output_dir', default_output_dir)),
        tail_tol=params.get('tail_tol', default_tail_tol),
    )


def _check_task(task, family, params, mapping, times):
    errors = []
    if family is None and task not in FAMILY_FREE_TASKS and 'family' not in mapping:
        errors.append(f"missing key 'family' for task {task.value}")
    if family is not None:
        for key in REQUIRED_PARAMS[family]:
            if key not in mapping:
                errors.append(f"missing key {key!r} for family {family.value}")
        if task is Task.TOP_EVOLVE and family in SPHERE_FAMILIES:
            errors.append("task top-evolve needs family janssen")
        if family is StateFamily.JANSSEN and task not in (Task.TOP_EVOLVE, Task.AUTOCORR, Task.REPORT):
            errors.append(f"family janssen does not support task {task.value}")
    if task in TIMED_TASKS and not times and 'times' not in mapping:
        errors.append(f"missing key 'times' for task {task.value}")
    if task is Task.TOP_EVOLVE and 'delta' not in mapping and 'rational_delta' not in mapping:
        errors.append("missing key 'delta' (or 'rational_delta') for task top-evolve")
    if family is StateFamily.JANSSEN and 'delta' in params and not params['delta'] > -1:
        errors.append("delta must exceed -1")
    if params.get('frame') is Frame.EULER:
        errors.append('frame euler is only produced by top-evolve')
    return errors


def parse_config(text, overrides=None, denominator_cap=64, default_output_dir='output', default_tail_tol=1e-12):
    """Parse key=value (or JSON) text plus command-line overrides into a RunConfig"""
    mapping, errors = read_config_text(text)
    if overrides:
        mapping.update(overrides)
    if errors:
        # report syntax problems together with whatever the rest yields
        try:
            parse_mapping(mapping, denominator_cap, default_output_dir, default_tail_tol)
        except ValidationError as e:
            errors.extend(e.errors)
        raise ValidationError(errors)
    return parse_mapping(mapping, denominator_cap, default_output_dir, default_tail_tol)


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

def _plain(value):
    """JSON-safe derived values; infinities become strings"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
    if isinstance(value, np.integer):
        return int(value)
    return value


def _fraction_text(value):
    return f"{value.numerator}/{value.denominator}"


class RunService:
    def __init__(self, config_class=None):
        self.config = config_class or get_config()

    # -- state construction -------------------------------------------------

    def build_state(self, run, tail_tol=None):
        """Expansion for the configured family"""
        p = run.params
        tol, cap = tail_tol or run.tail_tol, self.config.L_MAX_CAP
        family = run.family
        if family is StateFamily.EXPONENTIAL:
            return states.exponential_wp(ExponentialSpec(p['N'], p['eta']), tol, cap)
        if family is StateFamily.GAUSSIAN:
            return states.gaussian_seed_wp(GaussianSeedSpec(p['N'], p['eta'], p.get('epsilon', 0.0)), tol, cap)
        if family is StateFamily.UNIFORM:
            return states.uniform_linear_wp(p['etaN'], tol, cap)
        if family is StateFamily.BOSON:
            return states.boson_circular_state(BosonSpec(p['k'], p['s'], p.get('integer_truncated', True)), tol, cap)
        if family is StateFamily.INTELLIGENT:
            return states.intelligent_harmonic(p['l'], p['eta'])
        if family is StateFamily.GENERAL:
            return states.general_wp(p['weights'], p['eta'])
        if family is StateFamily.JANSSEN:
            return states.janssen_top_state(TopSpec(p['r'], p['lambda']), tol, cap)
        raise DomainError(f"no state family configured for task {run.task.value}")

    def _rotor_spec(self, run):
        p = run.params
        return RotorSpec(p.get('omega0', 1.0), p.get('delta', 0.0), p.get('rational_delta'))

    def _grid_tail_tol(self, run):
        """Tighter truncation for pointwise grids unless the run sets tail_tol"""
        if 'tail_tol' in run.params:
            return run.tail_tol
        return min(run.tail_tol, self.config.GRID_TAIL_TOL)

    def _state_derived(self, state):
        return {
            'l_max': state.l_max,
            'truncation_residual': state.truncation_residual,
            'renormalization': state.renormalization,
        }

    # -- tasks ----------------------------------------------------------------

    def _task_density(self, run, writer):
        state = self.build_state(run, self._grid_tail_tol(run))
        frame = run.get('frame', Frame.LAB)
        n_theta = run.get('n_theta', self.config.THETA_NODES)
        n_phi = run.get('n_phi', self.config.PHI_NODES)
        sin_weighted = run.get('sin_weighted', False)
        derived = self._state_derived(state)
        integrals = []
        for index, t in enumerate(run.times or (Fraction(0),)):
            evolved = revivals.evolve_rational(state, t.numerator, t.denominator)
            grid = observables.density_grid(evolved, n_theta, n_phi, frame, sin_weighted)
            writer.write_matrix(f'density_t{index}.csv', 'theta', 'phi',
                                grid.theta_nodes, grid.phi_nodes, grid.values)
            integrals.append(grid.integral())
        derived['grid_integrals'] = integrals
        derived['frame'] = Frame(frame).value
        return derived

    def _task_evolve(self, run, writer):
        state = self.build_state(run)
        derived = self._state_derived(state)
        norms = []
        for index, t in enumerate(run.times):
            evolved = revivals.evolve_rational(state, t.numerator, t.denominator)
            rows = []
            for I in range(evolved.l_max + 1):
                for M in range(-I, I + 1):
                    c = evolved.coefficient(I, M)
                    rows.append((I, M, c.real, c.imag))
            writer.write_table(f'evolve_t{index}.csv', ('I', 'M', 're', 'im'), rows)
            norms.append(evolved.norm())
        derived['norms'] = norms
        return derived

    def _task_carpet(self, run, writer):
        state = self.build_state(run, self._grid_tail_tol(run))
        T_rev = 2.0 * math.pi / run.get('omega0', 1.0)
        t_max = run.get('t_max', Fraction(1, 2))
        n_time = run.get('n_time', self.config.TIME_NODES)
        variant = run.get('carpet_variant', 'quantum')
        fractions = np.linspace(0.0, float(t_max), n_time)
        times = fractions * T_rev
        derived = self._state_derived(state)
        if run.get('frame', Frame.LAB) is Frame.THETA_PRIME:
            theta_prime = np.linspace(0.0, math.pi, run.get('n_theta', self.config.THETA_NODES))
            values = revivals.carpet_linear(state, times, theta_prime, T_rev, variant)
            writer.write_matrix('carpet.csv', 't_over_T_rev', 'theta_prime', fractions, theta_prime, values)
        else:
            theta = run.get('theta', math.pi / 2)
            phi = np.linspace(0.0, 2.0 * math.pi, run.get('n_phi', self.config.PHI_NODES))
            values = revivals.carpet(state, theta, times, phi, T_rev, variant)
            writer.write_matrix('carpet.csv', 't_over_T_rev', 'phi', fractions, phi, values)
            derived['theta'] = theta
        derived['variant'] = variant
        return derived

    def _task_autocorr(self, run, writer):
        state = self.build_state(run)
        samples = run.get('samples', self.config.AUTOCORR_SAMPLES)
        derived = self._state_derived(state)
        if isinstance(state, TopExpansion):
            constants = toprotor.top_time_constants(state, self._rotor_spec(run))
            unit = constants.T_rev_IK or constants.T_rev_I
            t_max = run.get('t_max', Fraction(1))
            fractions = np.linspace(0.0, float(t_max), samples)
            values = toprotor.torus_autocorrelation(state, constants, run.get('beta', math.pi / 2),
                                                    fractions * unit)
            derived['time_constants'] = constants.__dict__
        else:
            constants = revivals.time_constants(state, run.get('omega0', 1.0))
            t_max = run.get('t_max', Fraction(1, 2))
            fractions = np.linspace(0.0, float(t_max), samples)
            values = observables.autocorrelation(state, observables.diatomic_spectrum(constants.omega0),
                                                 fractions * constants.T_rev)
            derived['time_constants'] = constants.__dict__
        writer.write_table('autocorr.csv', ('t_over_T', 'autocorrelation'), zip(fractions, values))
        return derived

    def _task_decompose(self, run, writer):
        derived = {'decompositions': []}
        for index, t in enumerate(run.times):
            # folded into [0, 1/2)
            parts = revivals.gauss_decompose(*revivals.fold_time(t.numerator, t.denominator))
            rows = [(s, _fraction_text(parts.t[s]), parts.a[s].real, parts.a[s].imag,
                     abs(parts.a[s]), s == parts.s0) for s in range(parts.l)]
            writer.write_table(f'decompose_t{index}.csv',
                               ('s', 't_s', 're_a', 'im_a', 'abs_a', 'is_s0'), rows)
            derived['decompositions'].append({
                'time': _fraction_text(t), 'm': parts.m, 'n': parts.n, 'l': parts.l, 'q': parts.q,
                's0': parts.s0, 'case': revivals.expected_case(parts.n),
            })
        return derived

    def _task_clones(self, run, writer):
        state = self.build_state(run)
        mirror = None
        if run.family is StateFamily.EXPONENTIAL:
            mirror = states.exponential_wp(ExponentialSpec(run.params['N'], -run.params['eta']),
                                           run.tail_tol, self.config.L_MAX_CAP)
            if mirror.l_max != state.l_max:
                mirror = None
        derived = self._state_derived(state)
        derived['reports'] = []
        for index, t in enumerate(run.times):
            report = revivals.clone_report(state, t.numerator, t.denominator, mirror,
                                           self.config.CLONE_THRESHOLD, self.config.ROTATION_SWEEP)
            rows = [(e.s, _fraction_text(e.t), e.fidelity_unrotated, e.fidelity_best, e.best_angle,
                     e.verdict.value, e.partner, e.pairing_error) for e in report.entries]
            writer.write_table(f'clones_t{index}.csv',
                               ('s', 't_s', 'fidelity_unrotated', 'fidelity_best', 'best_angle',
                                'verdict', 'partner', 'pairing_error'), rows)
            derived['reports'].append({
                'm': report.m, 'n': report.n, 'q': report.q, 's0': report.s0,
                'verdicts': {str(s): verdict.value for s, verdict in report.verdicts().items()},
            })
        derived.update(self._spread(run, state))
        return derived

    def _spread(self, run, state):
        if run.family not in (StateFamily.EXPONENTIAL, StateFamily.GAUSSIAN):
            return {}
        report = observables.angular_momentum_report(state)
        try:
            spread = revivals.spread_estimates(run.params['N'], report, run.get('omega0', 1.0))
        except DomainError:
            return {}
        return {'spread': {'tau_eta': spread.tau_eta, 'q_max': spread.q_max,
                           'delta_L_eta': spread.delta_L_eta}}

    def _task_top_evolve(self, run, writer):
        state = self.build_state(run)
        spec = self._rotor_spec(run)
        constants = toprotor.top_time_constants(state, spec)
        beta = run.get('beta', math.pi / 2)
        n_alpha = run.get('n_alpha', self.config.TORUS_NODES)
        n_gamma = run.get('n_gamma', self.config.TORUS_NODES)
        derived = self._state_derived(state)
        derived['time_constants'] = constants.__dict__
        derived['moments'] = toprotor.top_moments(state).to_dict()
        derived['clones'] = []
        for index, t in enumerate(run.times):
            if spec.rational_delta is not None:
                grid = toprotor.top_evolve(state, None, constants, beta, n_alpha, n_gamma,
                                           exact=(t.numerator, t.denominator), spec=spec)
            else:
                grid = toprotor.top_evolve(state, float(t) * constants.T_rev_I, constants,
                                           beta, n_alpha, n_gamma)
            writer.write_matrix(f'top_t{index}.csv', 'alpha', 'gamma',
                                grid.theta_nodes, grid.phi_nodes, grid.values)
            if spec.rational_delta is not None:
                report = toprotor.top_clone_check(state, t.numerator, t.denominator, spec, beta)
                rows = [(s, s2, abs(report.amplitudes[s, s2]), report.fidelities[s, s2], d_a, d_g)
                        for s, s2, d_a, d_g in report.shifts]
                writer.write_table(f'top_clones_t{index}.csv',
                                   ('s_alpha', 's_gamma', 'abs_amplitude', 'fidelity',
                                    'alpha_shift', 'gamma_shift'), rows)
                derived['clones'].append({'wave_count': report.wave_count,
                                          'reconstruction_error': report.reconstruction_error})
        return derived

    def _task_compare_boson(self, run, writer):
        N = run.get('N', 20.0)
        k2 = run.get('k2', 39.0)
        exponential = states.exponential_wp(ExponentialSpec(N, 1.0), run.tail_tol, self.config.L_MAX_CAP)
        boson = states.boson_circular_state(BosonSpec(math.sqrt(k2), Fraction(1, 2)),
                                            run.tail_tol, self.config.L_MAX_CAP)
        l_max = max(exponential.l_max, boson.l_max)
        left = exponential.padded(l_max).partial_wave_probabilities()
        right = boson.padded(l_max).partial_wave_probabilities()
        writer.write_table('compare_boson.csv', ('I', 'exponential', 'boson'),
                           zip(range(l_max + 1), left, right))
        return {
            'N': N, 'k2': k2,
            'max_abs_difference': float(np.max(np.abs(left - right))),
            'boson_renormalization': boson.renormalization,
        }

    def _task_report(self, run, writer):
        state = self.build_state(run)
        derived = self._state_derived(state)
        if isinstance(state, TopExpansion):
            moments = toprotor.top_moments(state).to_dict()
            derived['time_constants'] = toprotor.top_time_constants(state, self._rotor_spec(run)).__dict__
        else:
            moments = observables.angular_momentum_report(state).to_dict()
            derived['uncertainty'] = observables.uncertainty_check(state)
            derived['time_constants'] = revivals.time_constants(state, run.get('omega0', 1.0)).__dict__
            if run.family is StateFamily.EXPONENTIAL:
                derived['closed_form'] = observables.closed_form_moments(
                    run.params['N'], run.params['eta']).to_dict()
            derived.update(self._spread(run, state))
            largest, table = revivals.resolved_clone_count(state, run.get('n_max', 12))
            derived['resolved_clone_count'] = largest
            derived['ridges'] = {n: {'ridges': c, 'waves': q} for n, (c, q) in table.items()}
        writer.write_table('moments.csv', ('quantity', 'value'), sorted(moments.items()))
        derived['moments'] = moments
        return derived

    HANDLERS = {
        Task.DENSITY: _task_density,
        Task.EVOLVE: _task_evolve,
        Task.CARPET: _task_carpet,
        Task.AUTOCORR: _task_autocorr,
        Task.DECOMPOSE: _task_decompose,
        Task.CLONES: _task_clones,
        Task.TOP_EVOLVE: _task_top_evolve,
        Task.COMPARE_BOSON: _task_compare_boson,
        Task.REPORT: _task_report,
    }

    # -- entry points -----------------------------------------------------------

    def execute(self, run):
        """Run one configured task; returns (bundle, message)"""
        start = time.time()
        writer = OutputWriter(run.output_dir, self.config.CSV_DIGITS)
        log_run_event('run_started', run.echo(), task=run.task.value)
        try:
            derived = self.HANDLERS[run.task](self, run, writer)
        except RotorError as e:
            logger.error(f"Task {run.task.value} failed: {e}")
            self.write_error(run.output_dir, 'compute', [str(e)])
            log_run_event('run_failed', {'error': str(e)}, task=run.task.value)
            return None, str(e)
        except Exception as e:
            logger.exception(f"Task {run.task.value} raised an unexpected error")
            message = f"{type(e).__name__}: {e}"
            self.write_error(run.output_dir, 'compute', [message])
            log_run_event('run_failed', {'error': message}, task=run.task.value)
            return None, message

        elapsed = time.time() - start
        files = list(writer.files)
        meta = {
            'config': run.echo(),
            'derived': _plain(derived),
            'version': self.config.VERSION,
            'files': files,
            'wall_clock_seconds': elapsed,
            'timestamp': datetime.now(timezone.utc).isoformat(),
        }
        meta_path = writer.write_json('meta.json', meta, track=False)
        log_performance_metric('run_wall_clock', elapsed * 1000.0, tags={'task': run.task.value})
        log_run_event('run_finished', {'files': files}, task=run.task.value)
        bundle = OutputBundle(directory=str(run.output_dir), files=files, meta_path=meta_path,
                              derived=meta['derived'])
        return bundle, f"Wrote {len(files)} file(s) to {run.output_dir}"

    @staticmethod
    def write_error(directory, kind, errors):
        """error.json in the output directory, or None when it cannot be written"""
        writer = OutputWriter(directory)
        try:
            return writer.write_json('error.json', {'status': 'error', 'kind': kind, 'errors': list(errors)},
                                     track=False)
        except OSError as e:
            logger.error(f"Could not write error.json to {directory}: {e}")
            return None

    def run_text(self, text, overrides=None, output_dir=None):
        """Parse and execute; returns (bundle, message, exit_code)"""
        try:
            run = parse_config(text, overrides, self.config.DENOMINATOR_CAP, self.config.OUTPUT_DIR,
                               self.config.TAIL_TOL)
        except ValidationError as e:
            target = output_dir or self.config.OUTPUT_DIR
            self.write_error(target, 'validation', e.errors)
            log_run_event('run_failed', {'errors': e.errors})
            return None, str(e), 1
        if output_dir:
            run.output_dir = output_dir
        bundle, message = self.execute(run)
        return bundle, message, 0 if bundle else 2
