"""
Maximal violation search.

See-saw maximization of Q_NL over Hermitian involutions with random
restarts, plus the closed-form references used to check it: the
two-qubit correlation-matrix maximum and the GHZ / Pauli x-y value.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from bellsurvey import config
from bellsurvey.belleval import (
    NoiseLike,
    SignFunction,
    _as_noise,
    _require_qubits,
    b_table,
    depolarize_dual,
    dual_channel_settings,
    sign_of_expectations,
)
from bellsurvey.errors import ValidationError
from bellsurvey.qcore import (
    PAULI,
    DichotomicPair,
    MeasurementSettings,
    ObservableMatrix,
    PureState,
    all_expectations,
    check_compatible,
    pauli_pair,
    sample_settings,
    uniform_settings,
    weighted_leaf_sums,
)
from bellsurvey.seeding import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SeesawConfig:
    """See-saw search parameters"""
    restarts: int = config.DEFAULT_RESTARTS
    max_sweeps: int = config.DEFAULT_MAX_SWEEPS
    improvement_tol: float = config.DEFAULT_IMPROVEMENT_TOL
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValidationError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_sweeps < 1:
            raise ValidationError(f"max_sweeps must be >= 1, got {self.max_sweeps}")
        if not self.improvement_tol > 0:
            raise ValidationError(f"improvement_tol must be > 0, got {self.improvement_tol}")

    def to_dict(self) -> dict:
        return {
            'restarts': self.restarts,
            'max_sweeps': self.max_sweeps,
            'improvement_tol': self.improvement_tol,
            'seed': self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'SeesawConfig':
        return cls(
            restarts=int(data.get('restarts', config.DEFAULT_RESTARTS)),
            max_sweeps=int(data.get('max_sweeps', config.DEFAULT_MAX_SWEEPS)),
            improvement_tol=float(data.get('improvement_tol', config.DEFAULT_IMPROVEMENT_TOL)),
            seed=int(data.get('seed', 0)),
        )


@dataclass(frozen=True)
class OptimizationResult:
    """Best settings found; trajectory and sweeps refer to the winning restart"""
    value: float
    settings: MeasurementSettings
    sweeps_used: int
    restarts_used: int
    trajectory: Tuple[float, ...]
    restart_values: Tuple[float, ...]
    best_restart: int

    def to_dict(self, include_settings: bool = False) -> dict:
        data = {
            'value': self.value,
            'sweeps_used': self.sweeps_used,
            'restarts_used': self.restarts_used,
            'best_restart': self.best_restart,
            'restart_values': list(self.restart_values),
            'trajectory': list(self.trajectory),
        }
        if include_settings:
            data['settings'] = self.settings.to_dict()
        return data


@dataclass(frozen=True)
class _RestartOutcome:
    value: float
    settings: MeasurementSettings
    sweeps: int
    trajectory: Tuple[float, ...]


# ---------------------------------------------------------------------------
# Half-step solvers
# ---------------------------------------------------------------------------

def msign(h: np.ndarray) -> ObservableMatrix:
    """
    Matrix sign of a Hermitian matrix, with sign(0) = +1.

    The result is the Hermitian involution A maximizing Tr(A h); the
    optimum equals the trace norm of h.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"msign needs a square matrix, got shape {h.shape}")
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.max(np.abs(h - h.conj().T)) > config.STRUCTURAL_TOL * scale:
        raise ValidationError("msign needs a Hermitian matrix")
    mu, v = np.linalg.eigh((h + h.conj().T) / 2)
    signs = np.where(mu >= 0, 1.0, -1.0)
    a = (v * signs) @ v.conj().T
    return ObservableMatrix((a + a.conj().T) / 2)


def trace_norm(h: np.ndarray) -> float:
    return float(np.sum(np.abs(np.linalg.eigvalsh(np.asarray(h, dtype=complex)))))


def _objective_table(settings: MeasurementSettings, noise: Optional[NoiseLike]) -> np.ndarray:
    return b_table(settings) if noise is None else dual_channel_settings(settings, noise)


def effective_operators(state: PureState, settings: MeasurementSettings, site: int,
                        s: SignFunction, noise: Optional[NoiseLike] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Linearize the signed functional in one site's pair.

    Args:
        state: Pure state
        settings: Current settings (the pair at `site` is ignored)
        site: Site index, 0-based
        s: Sign function
        noise: Optional local noise; the effective operators then include
            the dual channel on every site

    Returns:
        Hermitian (G0, G1) with linear value = Tr(A0 G0) + Tr(A1 G1) for any
        pair (A0, A1) placed at `site`
    """
    check_compatible(state, settings)
    n = state.n_sites
    if not 0 <= site < n:
        raise ValidationError(f"site {site} out of range for {n} sites")
    if s.n_sites != n:
        raise ValidationError(f"sign function covers {s.n_sites} sites, state {n}")
    if noise is not None:
        _require_qubits(state.d)
    table = _objective_table(settings, noise)
    others = [j for j in range(n) if j != site]

    # weights[r, x]: sign of the X with x at `site` and bits r on the other sites
    weights = np.empty((2 ** (n - 1), 2))
    for r in range(2 ** (n - 1)):
        high = r >> (n - 1 - site)
        low = r & ((1 << (n - 1 - site)) - 1)
        for x in (0, 1):
            index = (((high << 1) | x) << (n - 1 - site)) | low
            weights[r, x] = s.signs[index]

    psi = state.tensor
    sums = weighted_leaf_sums(psi, table, others, weights)
    psi_mat = np.moveaxis(psi, site, 0).reshape(state.d, -1)
    reduced = []
    for x in (0, 1):
        phi_mat = np.moveaxis(sums[x], site, 0).reshape(state.d, -1)
        r_x = phi_mat @ psi_mat.conj().T
        if noise is not None:
            r_x = depolarize_dual(r_x, _as_noise(noise).lam)
        reduced.append(r_x)
    g0 = (reduced[0] + reduced[1]) / 2
    g1 = (reduced[0] - reduced[1]) / 2
    return (g0 + g0.conj().T) / 2, (g1 + g1.conj().T) / 2


# ---------------------------------------------------------------------------
# See-saw
# ---------------------------------------------------------------------------

def _objective(state: PureState, settings: MeasurementSettings, noise: Optional[NoiseLike]) -> float:
    return float(np.sum(np.abs(all_expectations(state, _objective_table(settings, noise)))))


def _run_restart(state: PureState, cfg: SeesawConfig, restart: int,
                 noise: Optional[NoiseLike]) -> _RestartOutcome:
    settings = sample_settings(state.d, state.n_sites, derive_seed(cfg.seed, restart))
    value = _objective(state, settings, noise)
    trajectory = [value]
    sweeps = 0
    while sweeps < cfg.max_sweeps:
        previous = value
        s = sign_of_expectations(state, settings, noise)
        for site in range(state.n_sites):
            g0, g1 = effective_operators(state, settings, site, s, noise)
            settings = settings.with_pair(site, DichotomicPair(msign(g0), msign(g1)))
        value = _objective(state, settings, noise)
        trajectory.append(value)
        sweeps += 1
        if value - previous < cfg.improvement_tol:
            break
    logger.debug(f"restart {restart}: {value:.12f} after {sweeps} sweeps")
    return _RestartOutcome(value=value, settings=settings, sweeps=sweeps, trajectory=tuple(trajectory))


def seesaw_maximize(state: PureState, config_: Optional[SeesawConfig] = None,
                    noise: Optional[NoiseLike] = None, workers: int = 1) -> OptimizationResult:
    """
    Lower-bound sup over settings of Q_NL (or of its noisy version).

    Each restart starts from random settings and alternates between the
    sign function that realizes Q_NL and exact per-site pair updates
    (msign of the effective operators), so its trajectory never decreases.

    Args:
        state: Pure state
        config_: See-saw parameters (defaults when omitted)
        noise: Optional local noise level (qubits only)
        workers: Threads used to run restarts concurrently

    Returns:
        OptimizationResult of the best restart (ties go to the lowest index)
    """
    cfg = config_ or SeesawConfig()
    if noise is not None:
        _require_qubits(state.d)
        noise = _as_noise(noise)
    indices = range(cfg.restarts)
    if workers > 1 and cfg.restarts > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes: List[_RestartOutcome] = list(pool.map(lambda k: _run_restart(state, cfg, k, noise), indices))
    else:
        outcomes = [_run_restart(state, cfg, k, noise) for k in indices]

    best = max(range(len(outcomes)), key=lambda k: (outcomes[k].value, -k))
    winner = outcomes[best]
    return OptimizationResult(
        value=winner.value,
        settings=winner.settings,
        sweeps_used=winner.sweeps,
        restarts_used=len(outcomes),
        trajectory=winner.trajectory,
        restart_values=tuple(o.value for o in outcomes),
        best_restart=best,
    )


# ---------------------------------------------------------------------------
# Closed-form references
# ---------------------------------------------------------------------------

def horodecki_chsh(state: PureState) -> float:
    """
    Two-qubit maximum from the correlation matrix T_ab = <sigma_a (x) sigma_b>:
    sqrt(s1^2 + s2^2) with s1 >= s2 its two largest singular values.
    """
    if state.d != 2 or state.n_sites != 2:
        raise ValidationError(f"needs two qubits, got d={state.d}, n_sites={state.n_sites}")
    psi = state.amplitudes
    paulis = [PAULI['x'], PAULI['y'], PAULI['z']]
    t = np.array([
        [np.vdot(psi, np.kron(sa, sb) @ psi).real for sb in paulis]
        for sa in paulis
    ])
    s = np.linalg.svd(t, compute_uv=False)
    return float(np.sqrt(s[0] ** 2 + s[1] ** 2))


def mermin_reference(n_sites: int) -> Tuple[MeasurementSettings, float]:
    """
    Pauli x / Pauli y at every site and the value of Q_NL they give on the
    balanced GHZ state: 2^(-N/2) sum_k C(N, k) |cos((N - 2k) pi / 4)|.
    """
    if n_sites < 2:
        raise ValidationError(f"needs n_sites >= 2, got {n_sites}")
    settings = uniform_settings(pauli_pair('x', 'y'), n_sites)
    total = sum(
        math.comb(n_sites, k) * abs(math.cos((n_sites - 2 * k) * math.pi / 4))
        for k in range(n_sites + 1)
    )
    return settings, total / 2 ** (n_sites / 2)
