"""
Bell functional evaluation.

Nonlinear functional Q_NL, linear sign-function values, the classical
deterministic value and the locally depolarized functional. Noise is pushed
onto the observables through the dual channel; the explicit density-operator
construction is kept as a small-N oracle.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import reduce
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from bellsurvey import config
from bellsurvey.errors import CapacityError, ValidationError
from bellsurvey.qcore import (
    MeasurementSettings,
    PureState,
    SettingIndex,
    all_expectations,
    b_table,
    check_compatible,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignFunction:
    """S(X) in {+1, -1}, indexed by X read as a binary integer"""
    n_sites: int
    signs: np.ndarray

    def __post_init__(self):
        signs = np.array(self.signs, dtype=np.int8)
        if signs.shape != (2 ** self.n_sites,):
            raise ValidationError(
                f"sign table needs {2 ** self.n_sites} entries for {self.n_sites} sites, "
                f"got shape {signs.shape}"
            )
        if not np.all(np.abs(signs) == 1):
            raise ValidationError("sign table entries must be +1 or -1")
        signs.setflags(write=False)
        object.__setattr__(self, "signs", signs)

    def __getitem__(self, x: Union[int, SettingIndex]) -> int:
        index = x.to_int() if isinstance(x, SettingIndex) else int(x)
        return int(self.signs[index])

    @classmethod
    def constant(cls, n_sites: int, value: int = 1) -> 'SignFunction':
        return cls(n_sites=n_sites, signs=np.full(2 ** n_sites, value))

    @classmethod
    def from_values(cls, values: np.ndarray, n_sites: int) -> 'SignFunction':
        """Pointwise sign, with sign(0) = +1"""
        return cls(n_sites=n_sites, signs=np.where(np.asarray(values) < 0, -1, 1))


@dataclass(frozen=True)
class NoiseLevel:
    """Local white-noise strength"""
    lam: float

    def __post_init__(self):
        lam = float(self.lam)
        if not 0.0 <= lam <= 1.0:
            raise ValidationError(f"noise level must lie in [0, 1], got {self.lam}")
        object.__setattr__(self, "lam", lam)


@dataclass(frozen=True)
class DensityOperator:
    """Mixed state on (C^d)^(tensor n_sites), oracle scale only"""
    d: int
    n_sites: int
    entries: np.ndarray

    def __post_init__(self):
        check_oracle_scale(self.n_sites)
        dim = self.d ** self.n_sites
        rho = np.array(self.entries, dtype=complex)
        if rho.shape != (dim, dim):
            raise ValidationError(f"density operator must be {dim}x{dim}, got {rho.shape}")
        tol = config.STRUCTURAL_TOL
        if np.max(np.abs(rho - rho.conj().T)) > tol:
            raise ValidationError("density operator is not Hermitian")
        trace = np.trace(rho).real
        if abs(trace - 1.0) > tol:
            raise ValidationError(f"density operator has trace {trace!r}")
        if np.linalg.eigvalsh(rho)[0] < -tol:
            raise ValidationError("density operator is not positive semidefinite")
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)


NoiseLike = Union[NoiseLevel, float]


def _as_noise(noise: NoiseLike) -> NoiseLevel:
    return noise if isinstance(noise, NoiseLevel) else NoiseLevel(noise)


def check_oracle_scale(n_sites: int) -> None:
    if n_sites > config.ORACLE_MAX_SITES:
        raise CapacityError(
            f"dense oracle limited to {config.ORACLE_MAX_SITES} sites, got {n_sites}"
        )


def _require_qubits(d: int) -> None:
    if d != 2:
        raise ValidationError(f"the local noise model is defined for qubits only, got d={d}")


# ---------------------------------------------------------------------------
# Noiseless functionals
# ---------------------------------------------------------------------------

def expectations(state: PureState, settings: MeasurementSettings,
                 noise: Optional[NoiseLike] = None) -> np.ndarray:
    """All 2**N correlators, optionally under local noise"""
    check_compatible(state, settings)
    table = b_table(settings) if noise is None else dual_channel_settings(settings, noise)
    return all_expectations(state, table)


def qnl(state: PureState, settings: MeasurementSettings) -> float:
    """Q_NL = sum over X of |<psi| tensor_j B_{j,x_j} |psi>|"""
    return float(np.sum(np.abs(expectations(state, settings))))


def linear_value(state: PureState, settings: MeasurementSettings, s: SignFunction) -> float:
    """sum over X of S(X) <psi| tensor_j B_{j,x_j} |psi>"""
    if s.n_sites != settings.n_sites:
        raise ValidationError(f"sign function covers {s.n_sites} sites, settings {settings.n_sites}")
    return float(np.dot(s.signs, expectations(state, settings)))


def sign_of_expectations(state: PureState, settings: MeasurementSettings,
                         noise: Optional[NoiseLike] = None) -> SignFunction:
    """Sign function that turns the linear value into Q_NL"""
    return SignFunction.from_values(expectations(state, settings, noise), settings.n_sites)


def classical_nl_value(assignment: Sequence[Tuple[int, int]]) -> float:
    """
    Nonlinear functional for deterministic local outcomes.

    Args:
        assignment: Per-site (A0, A1) values, each +1 or -1

    Returns:
        sum over X of |prod_j (A0_j + (-1)^x_j A1_j) / 2|
    """
    if not assignment:
        raise ValidationError("assignment needs at least one site")
    factors = []
    for j, (a0, a1) in enumerate(assignment):
        if a0 not in (1, -1) or a1 not in (1, -1):
            raise ValidationError(f"site {j}: outcomes must be +1 or -1, got ({a0}, {a1})")
        factors.append(np.array([(a0 + a1) / 2, (a0 - a1) / 2]))
    products = reduce(np.multiply.outer, factors)
    return float(np.sum(np.abs(products)))


# ---------------------------------------------------------------------------
# Local depolarizing noise
# ---------------------------------------------------------------------------

def depolarize_dual(op: np.ndarray, lam: float) -> np.ndarray:
    """Qubit channel adjoint: O -> (1 - lam) O + lam (Tr O / 2) I"""
    return (1.0 - lam) * op + lam * (np.trace(op) / 2) * np.eye(2)


def dual_channel_settings(settings: MeasurementSettings, noise: NoiseLike) -> np.ndarray:
    """
    B-operator table seen through the local noise.

    Returns:
        Array of shape (n_sites, 2, 2, 2) with B'_{j,x} = (1 - lam) B_{j,x} + lam (Tr B_{j,x} / 2) I
    """
    _require_qubits(settings.d)
    lam = _as_noise(noise).lam
    table = b_table(settings)
    if lam == 0.0:
        return table
    return np.stack([
        np.stack([depolarize_dual(table[j, x], lam) for x in (0, 1)])
        for j in range(settings.n_sites)
    ])


def qnl_noisy(state: PureState, settings: MeasurementSettings, noise: NoiseLike) -> float:
    """Q_NL evaluated on the locally depolarized state"""
    _require_qubits(state.d)
    return float(np.sum(np.abs(expectations(state, settings, noise))))


# ---------------------------------------------------------------------------
# Dense oracle path
# ---------------------------------------------------------------------------

def pure_density(state: PureState) -> DensityOperator:
    check_oracle_scale(state.n_sites)
    psi = state.amplitudes
    return DensityOperator(d=state.d, n_sites=state.n_sites, entries=np.outer(psi, psi.conj()))


def partial_trace(rho: DensityOperator, traced: Sequence[int]) -> np.ndarray:
    """
    Trace out the given sites.

    Returns:
        Reduced density matrix on the remaining sites, kept in site order
    """
    n, d = rho.n_sites, rho.d
    traced = sorted(set(traced))
    if any(not 0 <= k < n for k in traced):
        raise ValidationError(f"sites {traced} out of range for n_sites={n}")
    rho_t = rho.entries.reshape((d,) * (2 * n))
    for removed, k in enumerate(traced):
        m = n - removed
        rho_t = np.trace(rho_t, axis1=k - removed, axis2=m + k - removed)
    kept = d ** (n - len(traced))
    return rho_t.reshape(kept, kept)


def _mix_sites(rho_t: np.ndarray, sites: Sequence[int], n: int) -> np.ndarray:
    """Replace the given sites of a (2,)*2n density tensor by I/2 after tracing them out"""
    for k in sites:
        reduced = np.trace(rho_t, axis1=k, axis2=n + k)
        reduced = np.expand_dims(np.expand_dims(reduced, axis=k), axis=n + k)
        shape = [1] * (2 * n)
        shape[k] = shape[n + k] = 2
        rho_t = reduced * (np.eye(2) / 2).reshape(shape)
    return rho_t


def noisy_density(state: PureState, noise: NoiseLike) -> DensityOperator:
    """
    Locally depolarized state as the explicit sum over traced-out subsets:
    sum_k lam^k (1 - lam)^(N - k) sum_{|K| = k} Tr_K |psi><psi| (x) I_K / 2^k.
    """
    _require_qubits(state.d)
    check_oracle_scale(state.n_sites)
    lam = _as_noise(noise).lam
    n = state.n_sites
    dim = 2 ** n
    psi = state.amplitudes
    rho_t = np.outer(psi, psi.conj()).reshape((2,) * (2 * n))
    total = np.zeros_like(rho_t)
    for k in range(n + 1):
        weight = lam ** k * (1.0 - lam) ** (n - k)
        if weight == 0.0:
            continue
        for traced in itertools.combinations(range(n), k):
            total += weight * _mix_sites(rho_t, traced, n)
    return DensityOperator(d=2, n_sites=n, entries=total.reshape(dim, dim))


def _dense_products(settings: MeasurementSettings):
    table = b_table(settings)
    for index in range(2 ** settings.n_sites):
        bits = SettingIndex.from_int(index, settings.n_sites).bits
        yield index, reduce(np.kron, [table[j, x] for j, x in enumerate(bits)])


def qnl_density(rho: DensityOperator, settings: MeasurementSettings) -> float:
    """sum over X of |Tr(tensor_j B_{j,x_j} rho)| by dense contraction"""
    check_oracle_scale(settings.n_sites)
    if rho.d != settings.d or rho.n_sites != settings.n_sites:
        raise ValidationError(
            f"density operator (d={rho.d}, n={rho.n_sites}) does not match "
            f"settings (d={settings.d}, n={settings.n_sites})"
        )
    return float(sum(
        abs(np.einsum('ij,ji->', product, rho.entries).real)
        for _, product in _dense_products(settings)
    ))


def bell_operator(settings: MeasurementSettings, s: SignFunction) -> np.ndarray:
    """Dense sum over X of S(X) tensor_j B_{j,x_j}"""
    check_oracle_scale(settings.n_sites)
    if s.n_sites != settings.n_sites:
        raise ValidationError(f"sign function covers {s.n_sites} sites, settings {settings.n_sites}")
    return sum(s.signs[index] * product for index, product in _dense_products(settings))


def bell_operator_norm(settings: MeasurementSettings, s: SignFunction) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(bell_operator(settings, s)))))
