# services/recipes.py - Canned run configurations for the figure set

import logging
import math
from dataclasses import dataclass
from pathlib import Path

from errors import DomainError, ValidationError
from services.run_service import parse_mapping

logger = logging.getLogger(__name__)

FRACTIONAL_TIMES = '0,1/100,1/50,1/20,1/10,1/6,1/5,1/4,1/3,1/2'


@dataclass(frozen=True)
class Recipe:
    name: str
    description: str
    variants: tuple  # (label, raw config mapping)


def _exponential(eta, **extra):
    mapping = {'family': 'exponential', 'N': '20', 'eta': str(eta)}
    mapping.update(extra)
    return mapping


def figure_recipes():
    """Named configurations, one per figure; names are stable"""
    etas = ('1', '0.5', '0.25', '0')
    return [
        Recipe('fig1', 'Partial-wave weights of the circular packet N=20 against the spin-1/2 boson state k^2=39',
               (('compare', {'task': 'compare-boson', 'N': '20', 'k2': '39'}),)),
        Recipe('fig2', 'Autocorrelation over half a revival for N=20 and four values of eta',
               tuple((f'eta_{eta}', _exponential(eta, task='autocorr', samples='4096', t_max='1/2'))
                     for eta in etas)),
        Recipe('fig3', 'Circular packet N=20 at fractional revival times',
               (('circular', _exponential('1', task='density', times=FRACTIONAL_TIMES)),)),
        Recipe('fig4', 'Quantum carpet of the circular packet on the equator',
               (('carpet', _exponential('1', task='carpet', theta='pi/2', n_time='2048', n_phi='720',
                                        t_max='1/2')),)),
        Recipe('fig5', 'Classical carpet of the linear packet N=50 in the theta prime frame',
               (('classical', {'task': 'carpet', 'family': 'exponential', 'N': '50', 'eta': '0',
                               'frame': 'theta_prime', 'carpet_variant': 'classical', 't_max': '1'}),)),
        Recipe('fig6', 'Quantum carpet of the linear packet N=50 in the theta prime frame',
               (('quantum', {'task': 'carpet', 'family': 'exponential', 'N': '50', 'eta': '0',
                             'frame': 'theta_prime', 't_max': '1'}),)),
        Recipe('fig7', 'Uniform-density packet etaN=20 seen from the Oy axis',
               (('uniform', {'task': 'density', 'family': 'uniform', 'etaN': '20',
                             'frame': 'theta_double_prime', 'times': FRACTIONAL_TIMES}),)),
        Recipe('fig8', 'Fractional waves at T_rev/3 and T_rev/4 for four values of eta',
               tuple((f'eta_{eta}', _exponential(eta, task='density', times='1/3,1/4')) for eta in etas)),
        Recipe('fig9', 'Elliptic packet eta=0.5 at fractional revival times',
               (('elliptic', _exponential('0.5', task='density', times=FRACTIONAL_TIMES)),)),
        Recipe('fig10', 'Symmetric top r=4, lambda=pi/2 with irrational delta=1/sqrt(3)',
               (('irrational', {'task': 'top-evolve', 'family': 'janssen', 'r': '4', 'lambda': 'pi/2',
                                'beta': 'pi/2', 'delta': repr(1.0 / math.sqrt(3.0)),
                                'times': '0,1/6,1/4,1/3,1/2,1'}),)),
        Recipe('fig11', 'Symmetric top r=4, lambda=pi/2 with delta=1/2: clones and full revival',
               (('rational', {'task': 'top-evolve', 'family': 'janssen', 'r': '4', 'lambda': 'pi/2',
                              'beta': 'pi/2', 'rational_delta': '1/2', 'times': '1/6,1/3,1/2,1'}),)),
    ]


def get_recipe(name):
    for recipe in figure_recipes():
        if recipe.name == name:
            return recipe
    raise DomainError(f"unknown recipe {name!r}")


def run_recipe(recipe, service, output_dir):
    """Execute every variant into output_dir/<recipe>/<label>; returns [(label, bundle, message)]"""
    results = []
    for label, mapping in recipe.variants:
        target = str(Path(output_dir, recipe.name, label))
        try:
            run = parse_mapping(dict(mapping, output_dir=target), service.config.DENOMINATOR_CAP,
                                default_tail_tol=service.config.TAIL_TOL)
        except ValidationError as e:
            logger.error(f"Recipe {recipe.name}/{label} rejected: {e}")
            results.append((label, None, str(e)))
            continue
        bundle, message = service.execute(run)
        results.append((label, bundle, message))
    return results
