"""
Closed-form concentration bounds.

Constants and probability bounds for the event that a Haar-random state
violates the nonlinear inequality by more than v: c_{d,N}, Levy tails,
epsilon-net sizes, Lipschitz constants and the noiseless / noisy theorem
bounds, optionally minimized over the net resolution delta.

Net sizes and theorem prefactors overflow float64 at modest N, so every
such quantity is evaluated in log space and reported in log10. The Levy
sphere for the noiseless bound is S_{2d^N - 1} (real dimension 2d^N of the
state space); for the noisy bound it is S_{2^{N+1} - 1} with the noisy
Lipschitz constant. With those identifications the theorem exponents are
exactly the Levy exponents at epsilon = v - delta - c.
"""

import logging
import math
from dataclasses import asdict, dataclass
from functools import reduce
from typing import Optional, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from bellsurvey import config
from bellsurvey.errors import PreconditionError, ValidationError
from bellsurvey.qcore import MeasurementSettings, b_table

logger = logging.getLogger(__name__)

LEVY_DENOMINATOR = 9 * math.pi ** 3
LN10 = math.log(10.0)
AUTO = "auto"

DeltaLike = Union[float, str]


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundQuery:
    """One theorem evaluation request"""
    d: int
    n_sites: int
    v: float
    delta: DeltaLike = AUTO
    lam: float = 0.0

    def __post_init__(self):
        if self.d < 2:
            raise ValidationError(f"d must be >= 2, got {self.d}")
        if self.n_sites < 2:
            raise ValidationError(f"n_sites must be >= 2, got {self.n_sites}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValidationError(f"lambda must lie in [0, 1], got {self.lam}")
        if not math.isfinite(self.v):
            raise ValidationError(f"v must be finite, got {self.v}")
        if isinstance(self.delta, str):
            if self.delta != AUTO:
                raise ValidationError(f"delta must be a positive number or 'auto', got {self.delta!r}")
        else:
            delta = float(self.delta)
            if not delta > 0 or not math.isfinite(delta):
                raise ValidationError(f"delta must be > 0, got {self.delta}")
            object.__setattr__(self, "delta", delta)

    @property
    def auto_delta(self) -> bool:
        return self.delta == AUTO

    def to_dict(self) -> dict:
        return {'d': self.d, 'n_sites': self.n_sites, 'v': self.v,
                'delta': self.delta, 'lambda': self.lam}

    @classmethod
    def from_dict(cls, data: dict) -> 'BoundQuery':
        delta = data.get('delta', AUTO)
        return cls(
            d=int(data['d']),
            n_sites=int(data['n_sites']),
            v=float(data['v']),
            delta=delta if delta == AUTO else float(delta),
            lam=float(data.get('lambda', data.get('lam', 0.0))),
        )


@dataclass(frozen=True)
class NetParams:
    epsilon: float
    m: int
    net_size_log10: float
    net_bound_log10: float


@dataclass(frozen=True)
class BoundReport:
    """
    Evaluated theorem bound with every constant that enters it.

    tail_bound is the raw probability bound, or its log10 when the bound
    exceeds the reporting threshold (tail_bound_in_log10 is then true).
    net_size_log10 is the theorem's net bound (1/eps + 2)^(2 d^2 N);
    net_size_exact_log10 is the size of the grid construction (M + 2)^(2 d^2 N).
    """
    theorem: int
    d: int
    n_sites: int
    v: float
    lam: float
    c_dn: float
    chi: float
    epsilon: float
    m: int
    net_size_log10: float
    net_size_exact_log10: float
    sphere_dim: int
    lipschitz_state: float
    lipschitz_settings_factor: float
    lipschitz_noisy: float
    tail_bound: float
    tail_bound_log10: float
    tail_bound_in_log10: bool
    bound_clamped: float
    delta_used: float

    def to_dict(self) -> dict:
        data = asdict(self)
        data['lambda'] = data.pop('lam')
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'BoundReport':
        data = dict(data)
        data['lam'] = data.pop('lambda')
        return cls(**data)


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

def c_dn(d: int, n_sites: int) -> float:
    """(sqrt(2/d))^N + (d - 2)/d; equals 1 for qubits"""
    if d < 2 or n_sites < 1:
        raise ValidationError(f"need d >= 2 and n_sites >= 1, got d={d}, n_sites={n_sites}")
    if d == 2:
        return 1.0
    return (2.0 / d) ** (n_sites / 2) + (d - 2) / d


def _check_lambda(lam: float) -> None:
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"lambda must lie in [0, 1], got {lam}")


def chi(lam: float) -> float:
    """(lam + (1 - lam) sqrt 2)^2, decreasing from 2 at lam=0 to 1 at lam=1"""
    _check_lambda(lam)
    return (lam + (1.0 - lam) * math.sqrt(2.0)) ** 2


def chi_alternate(lam: float) -> float:
    """Same constant written as (sqrt 2 - lam (sqrt 2 - 1))^2"""
    _check_lambda(lam)
    return (math.sqrt(2.0) - lam * (math.sqrt(2.0) - 1.0)) ** 2


def lipschitz_constants(n_sites: int, lam: float = 0.0) -> Tuple[float, float, float]:
    """
    Returns:
        (state, settings_factor, noisy): 2^((N+1)/2), N 2^N and
        sqrt 2 (lam + (1 - lam) sqrt 2)^N
    """
    _check_lambda(lam)
    state = 2.0 ** ((n_sites + 1) / 2)
    settings_factor = float(n_sites * 2 ** n_sites)
    noisy = math.sqrt(2.0) * (lam + (1.0 - lam) * math.sqrt(2.0)) ** n_sites
    return state, settings_factor, noisy


def bell_operator_norm_bound(n_sites: int) -> float:
    return 2.0 ** ((n_sites - 1) / 2)


def expected_value_bounds(d: int, n_sites: int) -> Tuple[float, float]:
    """Bounds on E[Q_NL] for fixed non-dull settings and on E[Q_NL^lam]"""
    return c_dn(d, n_sites), 1.0


# ---------------------------------------------------------------------------
# Levy tail and nets
# ---------------------------------------------------------------------------

def levy_tail_log(sphere_dim_n: int, epsilon: float, lipschitz: float) -> float:
    """Natural log of the Levy tail"""
    if not epsilon > 0 or not lipschitz > 0:
        raise ValidationError(f"epsilon and lipschitz must be > 0, got {epsilon}, {lipschitz}")
    if sphere_dim_n < 1:
        raise ValidationError(f"sphere dimension must be >= 1, got {sphere_dim_n}")
    return math.log(2.0) - (sphere_dim_n + 1) * epsilon ** 2 / (LEVY_DENOMINATOR * lipschitz ** 2)


def levy_tail(sphere_dim_n: int, epsilon: float, lipschitz: float) -> float:
    """
    Levy's concentration tail on the unit sphere S_n.

    Args:
        sphere_dim_n: Sphere dimension n (S_n sits in R^(n+1))
        epsilon: Deviation from the mean
        lipschitz: Lipschitz constant of the function

    Returns:
        2 exp(-(n + 1) eps^2 / (9 pi^3 L^2))
    """
    return math.exp(levy_tail_log(sphere_dim_n, epsilon, lipschitz))


def _net_log(d: int, n_sites: int, delta: float, prefactor: float) -> float:
    """Natural log of (prefactor / delta + 2)^(2 d^2 N)"""
    return 2 * d * d * n_sites * math.log(prefactor / delta + 2.0)


def net_params(d: int, n_sites: int, delta: float) -> NetParams:
    """
    Epsilon-net over settings guaranteeing |Delta Q_NL| <= delta.

    Returns:
        NetParams with eps = delta / (d^2 N 2^(N+1)), M the largest integer
        below 1/eps, and log10 of (M + 2)^(2 d^2 N) and (1/eps + 2)^(2 d^2 N)
    """
    if not delta > 0:
        raise ValidationError(f"delta must be > 0, got {delta}")
    if d < 2 or n_sites < 1:
        raise ValidationError(f"need d >= 2 and n_sites >= 1, got d={d}, n_sites={n_sites}")
    prefactor = d * d * n_sites * 2.0 ** (n_sites + 1)
    epsilon = delta / prefactor
    m = max(math.ceil(1.0 / epsilon) - 1, 0)
    exponent = 2 * d * d * n_sites
    return NetParams(
        epsilon=epsilon,
        m=m,
        net_size_log10=exponent * math.log10(m + 2),
        net_bound_log10=_net_log(d, n_sites, delta, prefactor) / LN10,
    )


# ---------------------------------------------------------------------------
# Theorem bounds
# ---------------------------------------------------------------------------

def _theorem1_log(d: int, n_sites: int, v: float, delta: float) -> float:
    gap = v - delta - c_dn(d, n_sites)
    prefactor = n_sites * 2.0 ** (n_sites + 1) * d * d
    return (math.log(2.0) + _net_log(d, n_sites, delta, prefactor)
            - gap ** 2 * (d / 2) ** n_sites / LEVY_DENOMINATOR)


def _theorem2_log(n_sites: int, v: float, delta: float, lam: float) -> float:
    gap = v - delta - 1.0
    prefactor = n_sites * 2.0 ** (n_sites + 3)
    return (math.log(2.0) + 8 * n_sites * math.log(prefactor / delta + 2.0)
            - gap ** 2 * (2.0 / chi(lam)) ** n_sites / LEVY_DENOMINATOR)


def _optimal_delta(log_bound, upper: float) -> float:
    """
    Minimize log_bound over delta in (0, upper).

    A log-spaced scan brackets the minimum, bounded Brent refines it.
    """
    grid = upper * np.concatenate([np.logspace(-12, 0, 97, endpoint=False), [1.0 - 1e-12]])
    values = [log_bound(float(t)) for t in grid]
    k = int(np.argmin(values))
    lo = float(grid[max(k - 1, 0)]) if k > 0 else upper * 1e-15
    hi = float(grid[min(k + 1, len(grid) - 1)])
    best_delta, best_value = float(grid[k]), values[k]
    if hi > lo:
        result = minimize_scalar(log_bound, bounds=(lo, hi), method="bounded",
                                 options={'xatol': config.DELTA_SEARCH_RTOL * upper})
        if result.fun < best_value:
            best_delta = float(result.x)
    return best_delta


def _resolve_delta(query: BoundQuery, threshold: float, log_bound, constraint: str) -> float:
    if query.auto_delta:
        if not query.v > threshold:
            raise PreconditionError(f"no feasible delta: need {constraint} with delta > 0 (v={query.v})")
        return _optimal_delta(log_bound, query.v - threshold)
    if not query.v > threshold + query.delta:
        raise PreconditionError(
            f"infeasible query: need {constraint} + delta, got v={query.v}, delta={query.delta}"
        )
    return float(query.delta)


def _report(query: BoundQuery, theorem: int, log_bound: float, delta: float,
            c: float, sphere_dim: int) -> BoundReport:
    log10_bound = log_bound / LN10
    net = net_params(query.d, query.n_sites, delta)
    state, settings_factor, noisy = lipschitz_constants(query.n_sites, query.lam)
    in_log10 = log10_bound > math.log10(config.LOG10_REPORT_THRESHOLD)
    if in_log10:
        logger.warning(f"theorem {theorem} bound is vacuous at d={query.d}, N={query.n_sites}, "
                       f"v={query.v}: log10 = {log10_bound:.3f}")
    return BoundReport(
        theorem=theorem,
        d=query.d,
        n_sites=query.n_sites,
        v=query.v,
        lam=query.lam,
        c_dn=c,
        chi=chi(query.lam),
        epsilon=net.epsilon,
        m=net.m,
        net_size_log10=net.net_bound_log10,
        net_size_exact_log10=net.net_size_log10,
        sphere_dim=sphere_dim,
        lipschitz_state=state,
        lipschitz_settings_factor=settings_factor,
        lipschitz_noisy=noisy,
        tail_bound=log10_bound if in_log10 else math.exp(log_bound),
        tail_bound_log10=log10_bound,
        tail_bound_in_log10=in_log10,
        bound_clamped=min(1.0, math.exp(min(log_bound, 0.0))),
        delta_used=delta,
    )


def theorem1_bound(query: BoundQuery) -> BoundReport:
    """
    Probability that sup over settings of Q_NL exceeds v for a Haar state:

        2 (N 2^(N+1) d^2 / delta + 2)^(2 d^2 N) exp(-(v - delta - c)^2 (d/2)^N / (9 pi^3))

    Raises:
        PreconditionError: v <= c_{d,N} + delta
    """
    c = c_dn(query.d, query.n_sites)

    def log_bound(delta: float) -> float:
        return _theorem1_log(query.d, query.n_sites, query.v, delta)

    delta = _resolve_delta(query, c, log_bound, f"v > c_dn = {c!r}")
    return _report(query, 1, log_bound(delta), delta, c, 2 * query.d ** query.n_sites - 1)


def theorem2_bound(query: BoundQuery) -> BoundReport:
    """
    Noisy counterpart for qubits under local depolarizing noise lam:

        2 (N 2^(N+3) / delta + 2)^(8N) exp(-(v - delta - 1)^2 (2/chi)^N / (9 pi^3))

    Raises:
        ValidationError: d != 2
        PreconditionError: v <= 1 + delta
    """
    if query.d != 2:
        raise ValidationError(f"the noisy bound is defined for qubits only, got d={query.d}")

    def log_bound(delta: float) -> float:
        return _theorem2_log(query.n_sites, query.v, delta, query.lam)

    delta = _resolve_delta(query, 1.0, log_bound, "v > 1")
    return _report(query, 2, log_bound(delta), delta, 1.0, 2 ** (query.n_sites + 1) - 1)


def theorem_bound(query: BoundQuery, theorem: Optional[int] = None) -> BoundReport:
    """Dispatch on the theorem number; noisy queries default to the noisy bound"""
    if theorem is None:
        theorem = 2 if query.lam > 0 else 1
    if theorem == 1:
        return theorem1_bound(query)
    if theorem == 2:
        return theorem2_bound(query)
    raise ValidationError(f"theorem must be 1 or 2, got {theorem}")


# ---------------------------------------------------------------------------
# Per-settings expectation bounds
# ---------------------------------------------------------------------------

def _trace_tables(settings: MeasurementSettings) -> Tuple[np.ndarray, np.ndarray]:
    table = b_table(settings)
    trace_sq = np.einsum('jxab,jxba->jx', table, table).real
    trace = np.einsum('jxaa->jx', table).real
    return trace_sq, trace


def jensen_expectation_bound(settings: MeasurementSettings) -> float:
    """
    sum_X sqrt((prod_j Tr B^2 + prod_j (Tr B)^2) / (D (D + 1))), D = d^N:
    the bound on E[Q_NL] before the triangle step.
    """
    trace_sq, trace = _trace_tables(settings)
    dim = settings.d ** settings.n_sites
    squares = reduce(np.multiply.outer, trace_sq)
    traces = reduce(np.multiply.outer, trace)
    return float(np.sum(np.sqrt((squares + traces ** 2) / (dim * (dim + 1)))))


def product_expectation_bound(settings: MeasurementSettings) -> float:
    """(1/D) [prod_j (sqrt Tr B0^2 + sqrt Tr B1^2) + prod_j (|Tr B0| + |Tr B1|)]"""
    trace_sq, trace = _trace_tables(settings)
    dim = settings.d ** settings.n_sites
    first = np.prod(np.sqrt(trace_sq).sum(axis=1))
    second = np.prod(np.abs(trace).sum(axis=1))
    return float((first + second) / dim)
