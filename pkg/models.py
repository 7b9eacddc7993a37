# models.py - Domain value types for rotor wave packets

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
import math
from typing import Optional

import numpy as np

from errors import DomainError


# Enums for better data consistency
class StateFamily(Enum):
    EXPONENTIAL = "exponential"
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"
    BOSON = "boson"
    INTELLIGENT = "intelligent"
    GENERAL = "general"
    JANSSEN = "janssen"


class Task(Enum):
    DENSITY = "density"
    EVOLVE = "evolve"
    CARPET = "carpet"
    AUTOCORR = "autocorr"
    DECOMPOSE = "decompose"
    CLONES = "clones"
    TOP_EVOLVE = "top-evolve"
    COMPARE_BOSON = "compare-boson"
    REPORT = "report"


class Frame(Enum):
    LAB = "lab"
    THETA_PRIME = "theta_prime"
    THETA_DOUBLE_PRIME = "theta_double_prime"
    EULER = "euler"


class CloneVerdict(Enum):
    CLONE = "clone"
    ROTATED_CLONE = "rotated-clone"
    MUTANT = "mutant"


@dataclass(frozen=True)
class AngularPoint:
    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError(f"theta={self.theta} outside [0, pi]")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise DomainError(f"phi={self.phi} outside [0, 2pi)")


@dataclass(frozen=True)
class ExponentialSpec:
    N: float
    eta: float

    def __post_init__(self):
        if not self.N > 0:
            raise DomainError(f"N must be positive, got {self.N}")
        if not math.isfinite(self.eta):
            raise DomainError("eta must be finite")


@dataclass(frozen=True)
class GaussianSeedSpec:
    """Oscillator-seeded packet; r0 = sigma*sqrt(N), r0*p0y = eta*N*hbar, r0*p0x = epsilon*N*hbar"""
    N: float
    eta: float
    epsilon: float = 0.0

    def __post_init__(self):
        if not self.N > 0:
            raise DomainError(f"N must be positive, got {self.N}")
        if not (math.isfinite(self.eta) and math.isfinite(self.epsilon)):
            raise DomainError("eta and epsilon must be finite")


@dataclass(frozen=True)
class BosonSpec:
    k: float
    s: Fraction
    integer_truncated: bool = True

    def __post_init__(self):
        if not self.k > 0:
            raise DomainError(f"k must be positive, got {self.k}")
        s = Fraction(self.s).limit_denominator(2)
        if s <= 0 or (2 * s).denominator != 1 or abs(float(s) - float(self.s)) > 1e-12:
            raise DomainError(f"s must be a positive integer or half-integer, got {self.s}")
        object.__setattr__(self, 's', s)


@dataclass(frozen=True)
class TopSpec:
    r: float
    lam: float

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError(f"r must be positive, got {self.r}")
        if not 0.0 <= self.lam <= math.pi:
            raise DomainError(f"lambda={self.lam} outside [0, pi]")


def _frozen(array, dtype=complex):
    data = np.array(array, dtype=dtype)
    data.setflags(write=False)
    return data


@dataclass(frozen=True, eq=False)
class SphericalExpansion:
    """Coefficients b[I, M + l_max] of a state on the sphere"""
    l_max: int
    coefficients: np.ndarray
    family: str = "custom"
    truncation_residual: float = 0.0
    renormalization: float = 1.0

    def __post_init__(self):
        shape = (self.l_max + 1, 2 * self.l_max + 1)
        if self.coefficients.shape != shape:
            raise DomainError(f"coefficient shape {self.coefficients.shape} != {shape}")
        object.__setattr__(self, 'coefficients', _frozen(self.coefficients))

    @property
    def degrees(self):
        return np.arange(self.l_max + 1)

    @property
    def orders(self):
        return np.arange(-self.l_max, self.l_max + 1)

    def coefficient(self, I, M):
        if I > self.l_max or abs(M) > I:
            return 0j
        return complex(self.coefficients[I, M + self.l_max])

    def norm(self):
        return float(np.sum(np.abs(self.coefficients) ** 2))

    def partial_wave_probabilities(self):
        return np.sum(np.abs(self.coefficients) ** 2, axis=1)

    def with_coefficients(self, coefficients, family=None):
        return SphericalExpansion(
            self.l_max, coefficients, family or self.family,
            self.truncation_residual, self.renormalization
        )

    def padded(self, l_max):
        """Same state embedded in a larger coefficient array"""
        if l_max < self.l_max:
            raise DomainError("cannot pad to a smaller l_max")
        out = np.zeros((l_max + 1, 2 * l_max + 1), dtype=complex)
        shift = l_max - self.l_max
        out[:self.l_max + 1, shift:shift + 2 * self.l_max + 1] = self.coefficients
        return SphericalExpansion(l_max, out, self.family, self.truncation_residual, self.renormalization)


@dataclass(frozen=True, eq=False)
class TopExpansion:
    """Coefficients C[I, K + l_max] of a symmetric-top state with M = -I"""
    l_max: int
    coefficients: np.ndarray
    truncation_residual: float = 0.0
    renormalization: float = 1.0

    def __post_init__(self):
        shape = (self.l_max + 1, 2 * self.l_max + 1)
        if self.coefficients.shape != shape:
            raise DomainError(f"coefficient shape {self.coefficients.shape} != {shape}")
        object.__setattr__(self, 'coefficients', _frozen(self.coefficients))

    def norm(self):
        return float(np.sum(np.abs(self.coefficients) ** 2))

    def with_coefficients(self, coefficients):
        return TopExpansion(self.l_max, coefficients, self.truncation_residual, self.renormalization)


@dataclass(frozen=True)
class AngularMomentumReport:
    mean_Lx: float
    mean_Ly: float
    mean_Lz: float
    mean_Lx2: float
    mean_Ly2: float
    mean_Lz2: float
    mean_L2: float
    var_Lx: float
    var_Ly: float
    uncertainty_product: float
    lz_bound: float

    @property
    def delta_L_eta2(self):
        """Total transverse spread <L^2> - <Lz^2>"""
        return self.mean_L2 - self.mean_Lz2

    def to_dict(self):
        data = dict(self.__dict__)
        data['delta_L_eta2'] = self.delta_L_eta2
        return data


@dataclass(frozen=True, eq=False)
class GridDensity:
    theta_nodes: np.ndarray
    phi_nodes: np.ndarray
    values: np.ndarray
    frame: Frame = Frame.LAB
    sin_weighted: bool = False
    theta_weights: Optional[np.ndarray] = None  # Gauss-Legendre dOmega row weights, periodic phi

    def integral(self):
        """Quadrature-weighted sum of the sampled density"""
        if self.frame is Frame.EULER:
            d_alpha = 2.0 * math.pi / len(self.theta_nodes)
            d_gamma = 2.0 * math.pi / len(self.phi_nodes)
            return float(np.sum(self.values) * d_alpha * d_gamma)
        if self.theta_weights is not None:
            rows = np.sum(self.values, axis=1)
            if self.sin_weighted:
                rows = rows / (2.0 * math.pi * np.sin(self.theta_nodes))
            return float(self.theta_weights @ rows)
        w_theta = _trapezoid_weights(self.theta_nodes)
        w_phi = _trapezoid_weights(self.phi_nodes)
        if not self.sin_weighted:
            w_theta = w_theta * np.sin(self.theta_nodes)
            return float(w_theta @ self.values @ w_phi)
        # values already carry 2*pi*sin(theta); average over phi
        return float(w_theta @ self.values @ w_phi) / (2.0 * math.pi)


def _trapezoid_weights(nodes):
    nodes = np.asarray(nodes, dtype=float)
    if len(nodes) < 2:
        return np.ones_like(nodes)
    w = np.empty_like(nodes)
    steps = np.diff(nodes)
    w[0] = steps[0] / 2
    w[-1] = steps[-1] / 2
    w[1:-1] = (steps[:-1] + steps[1:]) / 2
    return w


@dataclass(frozen=True)
class Spectrum:
    """Quadratic rotor spectrum; K terms only for tops"""
    T_rev: float
    T_rev_K: Optional[float] = None

    @property
    def is_top(self):
        return self.T_rev_K is not None


@dataclass(frozen=True)
class TimeConstants:
    omega0: float
    T_rev: float
    T_cl: float
    I_bar: float


@dataclass(frozen=True)
class FractionalDecomposition:
    m: int
    n: int
    l: int
    q: int
    a: np.ndarray
    t: tuple
    s0: Optional[int]

    def nonzero(self, tol=1e-9):
        return [s for s in range(self.l) if abs(self.a[s]) > tol]


@dataclass(frozen=True)
class FractionalWave:
    s: int
    t: Fraction
    a: complex
    state: SphericalExpansion


@dataclass(frozen=True)
class CloneEntry:
    s: int
    t: Fraction
    fidelity_unrotated: float
    fidelity_best: float
    best_angle: float
    verdict: CloneVerdict
    partner: Optional[int] = None
    pairing_error: Optional[float] = None


@dataclass(frozen=True)
class CloneReport:
    m: int
    n: int
    q: int
    s0: Optional[int]
    entries: tuple

    def verdicts(self):
        return {entry.s: entry.verdict for entry in self.entries}


@dataclass(frozen=True)
class SpreadEstimates:
    tau_eta: float
    q_max: float
    delta_L_eta: float
    omega0: float

    def lifetime(self, q):
        """Time for which q fractional waves stay separated"""
        return 2.0 * math.pi / (q * self.omega0 * self.delta_L_eta)


@dataclass(frozen=True)
class RotorSpec:
    omega0: float
    delta: float
    rational_delta: Optional[tuple] = None

    def __post_init__(self):
        if not self.omega0 > 0:
            raise DomainError("omega0 must be positive")
        if not self.delta > -1:
            raise DomainError(f"delta must exceed -1, got {self.delta}")
        if self.rational_delta is not None:
            p, r = self.rational_delta
            if p <= 0:
                raise DomainError("rational delta needs a positive p")
            if abs(self.delta - r / p) > 1e-12 * max(1.0, abs(self.delta)):
                raise DomainError(f"delta={self.delta} inconsistent with r/p={r}/{p}")


@dataclass(frozen=True)
class TopTimeConstants:
    T_cl_I: float
    T_rev_I: float
    T_cl_K: float
    T_rev_K: float
    T_rev_IK: Optional[float]
    I_bar: float
    K_bar: float


@dataclass(frozen=True)
class TopCloneReport:
    m: int
    n: int
    alpha: FractionalDecomposition
    gamma: FractionalDecomposition
    amplitudes: np.ndarray
    fidelities: np.ndarray
    shifts: tuple
    reconstruction_error: float

    @property
    def wave_count(self):
        return int(np.count_nonzero(np.abs(self.amplitudes) > 1e-9))


@dataclass
class RunConfig:
    task: Task
    family: Optional[StateFamily]
    params: dict = field(default_factory=dict)
    times: tuple = ()
    output_dir: str = 'output'
    tail_tol: float = 1e-12

    def get(self, key, default=None):
        return self.params.get(key, default)

    def echo(self):
        """JSON-friendly copy; rationals become 'm/n' strings"""
        def plain(value):
            if isinstance(value, Fraction):
                return f"{value.numerator}/{value.denominator}"
            if isinstance(value, (list, tuple)):
                return [plain(v) for v in value]
            if isinstance(value, Enum):
                return value.value
            return value
        return {
            'task': self.task.value,
            'family': self.family.value if self.family else None,
            'params': {k: plain(v) for k, v in sorted(self.params.items())},
            'times': plain(self.times),
            'output_dir': self.output_dir,
            'tail_tol': self.tail_tol,
        }


@dataclass
class OutputBundle:
    directory: str
    files: list = field(default_factory=list)
    meta_path: Optional[str] = None
    derived: dict = field(default_factory=dict)
