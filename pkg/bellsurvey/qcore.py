"""
Dense complex linear-algebra core.

States, dichotomic observables, site-local expectation kernels, Haar sampling
and settings geometry. Amplitudes are indexed with site 1 as the most
significant base-d digit, so reshaping a state vector to ``(d,) * N`` in C
order puts site ``j`` on axis ``j - 1``. No ``d**N x d**N`` operator is ever
built here.
"""

import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from bellsurvey import config
from bellsurvey.errors import CapacityError, ValidationError

logger = logging.getLogger(__name__)

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def hilbert_dimension(d: int, n_sites: int) -> int:
    """d**n_sites after checking d >= 2 and n_sites >= 1"""
    if int(d) != d or d < 2:
        raise ValidationError(f"local dimension must be an integer >= 2, got {d}")
    if int(n_sites) != n_sites or n_sites < 1:
        raise ValidationError(f"n_sites must be an integer >= 1, got {n_sites}")
    return int(d) ** int(n_sites)


def check_capacity(d: int, n_sites: int, max_amplitudes: Optional[int] = None) -> int:
    """
    Validate (d, n_sites) and return d**n_sites.

    Raises:
        ValidationError: d < 2 or n_sites < 1
        CapacityError: d**n_sites above the amplitude cap
    """
    dim = hilbert_dimension(d, n_sites)
    cap = config.MAX_AMPLITUDES if max_amplitudes is None else max_amplitudes
    if dim > cap:
        raise CapacityError(
            f"{d}^{n_sites} = {dim} amplitudes exceeds the configured cap of {cap}"
        )
    return dim


def check_seed(seed: int) -> int:
    """Reject seeds outside the 64-bit unsigned range"""
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < 2 ** 64:
        raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    return int(seed)


def _complex_pairs(values: np.ndarray) -> List[List[float]]:
    return [[float(z.real), float(z.imag)] for z in np.ravel(values)]


def _from_complex_pairs(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError("expected a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PureState:
    """Unit vector of length d**n_sites"""
    d: int
    n_sites: int
    amplitudes: np.ndarray

    def __post_init__(self):
        dim = hilbert_dimension(self.d, self.n_sites)
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size != dim:
            raise ValidationError(
                f"expected {dim} amplitudes for d={self.d}, n_sites={self.n_sites}, "
                f"got shape {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > config.NORMALIZATION_TOL:
            raise ValidationError(f"state norm is {norm!r}, expected 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dimension(self) -> int:
        return self.amplitudes.size

    @property
    def tensor(self) -> np.ndarray:
        """Amplitudes as a tensor with one axis per site"""
        return self.amplitudes.reshape((self.d,) * self.n_sites)

    @classmethod
    def from_vector(cls, vector, d: int, n_sites: int) -> 'PureState':
        """Normalize an arbitrary nonzero vector into a state"""
        vec = np.asarray(vector, dtype=complex)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(d=d, n_sites=n_sites, amplitudes=vec / norm)

    def to_dict(self) -> dict:
        return {
            'd': self.d,
            'n_sites': self.n_sites,
            'amplitudes': _complex_pairs(self.amplitudes),
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'PureState':
        try:
            d = int(data['d'])
            n_sites = int(data['n_sites'])
            amplitudes = _from_complex_pairs(data['amplitudes'])
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"malformed state document: {str(e)}")
        return cls(d=d, n_sites=n_sites, amplitudes=amplitudes)


@dataclass(frozen=True)
class ObservableMatrix:
    """Hermitian d x d matrix"""
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValidationError(f"observable must be a square matrix, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > config.NORMALIZATION_TOL:
            raise ValidationError("observable is not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def is_involution(self, tol: float = config.STRUCTURAL_TOL) -> bool:
        square = self.entries @ self.entries
        return bool(np.max(np.abs(square - np.eye(self.d))) <= tol)

    def has_both_signs(self) -> bool:
        """True when eigenvalues +1 and -1 are both present"""
        eig = self.eigenvalues()
        return bool(eig[0] < 0 < eig[-1])


@dataclass(frozen=True)
class DichotomicPair:
    """The two +-1-valued observables measured at one site"""
    a0: ObservableMatrix
    a1: ObservableMatrix

    def __post_init__(self):
        for name in ('a0', 'a1'):
            value = getattr(self, name)
            if not isinstance(value, ObservableMatrix):
                value = ObservableMatrix(value)
                object.__setattr__(self, name, value)
            if not value.is_involution():
                raise ValidationError(f"{name} is not a Hermitian involution")
        if self.a0.d != self.a1.d:
            raise ValidationError(f"pair mixes dimensions {self.a0.d} and {self.a1.d}")

    @property
    def d(self) -> int:
        return self.a0.d

    @property
    def nondull(self) -> bool:
        return self.a0.has_both_signs() and self.a1.has_both_signs()


@dataclass(frozen=True)
class MeasurementSettings:
    """One dichotomic pair per site"""
    d: int
    pairs: Tuple[DichotomicPair, ...]
    nondull_flag: bool = field(init=False)

    def __post_init__(self):
        pairs = tuple(self.pairs)
        if not pairs:
            raise ValidationError("settings need at least one site")
        for j, pair in enumerate(pairs):
            if pair.d != self.d:
                raise ValidationError(f"site {j} has dimension {pair.d}, expected {self.d}")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "nondull_flag", any(p.nondull for p in pairs))

    @property
    def n_sites(self) -> int:
        return len(self.pairs)

    def with_pair(self, site: int, pair: DichotomicPair) -> 'MeasurementSettings':
        """Copy with one site's pair replaced"""
        if not 0 <= site < self.n_sites:
            raise ValidationError(f"site {site} out of range for {self.n_sites} sites")
        pairs = list(self.pairs)
        pairs[site] = pair
        return MeasurementSettings(d=self.d, pairs=tuple(pairs))

    @classmethod
    def from_matrices(cls, matrices: Sequence[Tuple[np.ndarray, np.ndarray]]) -> 'MeasurementSettings':
        pairs = tuple(DichotomicPair(ObservableMatrix(a0), ObservableMatrix(a1)) for a0, a1 in matrices)
        if not pairs:
            raise ValidationError("settings need at least one site")
        return cls(d=pairs[0].d, pairs=pairs)

    def to_dict(self) -> dict:
        return {
            'd': self.d,
            'n_sites': self.n_sites,
            'observables': [
                [_complex_pairs(p.a0.entries), _complex_pairs(p.a1.entries)]
                for p in self.pairs
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'MeasurementSettings':
        try:
            d = int(data['d'])
            n_sites = int(data['n_sites'])
            sites = data['observables']
            if len(sites) != n_sites:
                raise ValidationError(f"expected {n_sites} sites, found {len(sites)}")
            matrices = [
                tuple(_from_complex_pairs(flat).reshape(d, d) for flat in site)
                for site in sites
            ]
        except (KeyError, TypeError) as e:
            raise ValidationError(f"malformed settings document: {str(e)}")
        except ValueError as e:
            raise ValidationError(f"malformed settings document: {str(e)}")
        settings = cls.from_matrices(matrices)
        if settings.d != d:
            raise ValidationError(f"declared d={d} but matrices are {settings.d}x{settings.d}")
        return settings


@dataclass(frozen=True)
class SettingIndex:
    """Setting choice X = (x_1, ..., x_N)"""
    bits: Tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValidationError(f"setting digits must be 0 or 1, got {self.bits}")
        object.__setattr__(self, "bits", bits)

    @property
    def n_sites(self) -> int:
        return len(self.bits)

    def to_int(self) -> int:
        """Binary integer with x_1 most significant"""
        return reduce(lambda acc, b: 2 * acc + b, self.bits, 0)

    @classmethod
    def from_int(cls, value: int, n_sites: int) -> 'SettingIndex':
        if not 0 <= value < 2 ** n_sites:
            raise ValidationError(f"index {value} out of range for {n_sites} sites")
        return cls(tuple((value >> (n_sites - 1 - j)) & 1 for j in range(n_sites)))


@dataclass(frozen=True)
class HaarMomentReport:
    """Empirical fourth moments of Haar amplitudes against their exact values"""
    d: int
    n_sites: int
    samples: int
    mean_fourth: float
    se_fourth: float
    expected_fourth: float
    mean_cross: float
    se_cross: float
    expected_cross: float

    def z_scores(self) -> Tuple[float, float]:
        return (
            (self.mean_fourth - self.expected_fourth) / self.se_fourth,
            (self.mean_cross - self.expected_cross) / self.se_cross,
        )


# ---------------------------------------------------------------------------
# State constructors
# ---------------------------------------------------------------------------

def _gaussian_amplitudes(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def haar_state(d: int, n_sites: int, seed: int, max_amplitudes: Optional[int] = None) -> PureState:
    """
    Sample a state uniformly from the unit sphere of (C^d)^(tensor n_sites).

    Args:
        d: Local dimension
        n_sites: Number of sites
        seed: 64-bit seed; equal seeds give identical amplitudes
        max_amplitudes: Override of the capacity cap

    Returns:
        PureState
    """
    dim = check_capacity(d, n_sites, max_amplitudes)
    rng = np.random.default_rng(check_seed(seed))
    z = _gaussian_amplitudes(rng, dim)
    return PureState(d=d, n_sites=n_sites, amplitudes=z / np.linalg.norm(z))


def ghz_state(alpha: complex, beta: complex, n_sites: int) -> PureState:
    """alpha|0...0> + beta|1...1> on n_sites qubits"""
    if n_sites < 2:
        raise ValidationError(f"GHZ states need n_sites >= 2, got {n_sites}")
    norm_sq = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm_sq - 1.0) > config.STRUCTURAL_TOL:
        raise ValidationError(f"|alpha|^2 + |beta|^2 = {norm_sq!r}, expected 1")
    dim = check_capacity(2, n_sites)
    amps = np.zeros(dim, dtype=complex)
    amps[0] = alpha
    amps[-1] = beta
    return PureState(d=2, n_sites=n_sites, amplitudes=amps / np.sqrt(norm_sq))


def basis_state(d: int, digits: Sequence[int]) -> PureState:
    """Computational basis state |i_1 ... i_N>"""
    n_sites = len(digits)
    dim = check_capacity(d, n_sites)
    if any(not 0 <= i < d for i in digits):
        raise ValidationError(f"basis digits must lie in [0, {d}), got {digits}")
    amps = np.zeros(dim, dtype=complex)
    amps[reduce(lambda acc, i: d * acc + i, digits, 0)] = 1.0
    return PureState(d=d, n_sites=n_sites, amplitudes=amps)


def product_state(local_vectors: Sequence[np.ndarray]) -> PureState:
    """Tensor product of single-site vectors (each normalized here)"""
    vecs = [np.asarray(v, dtype=complex) / np.linalg.norm(v) for v in local_vectors]
    d = vecs[0].size
    if any(v.size != d for v in vecs):
        raise ValidationError("all local vectors must share one dimension")
    return PureState.from_vector(reduce(np.kron, vecs), d=d, n_sites=len(vecs))


# ---------------------------------------------------------------------------
# Observables and settings
# ---------------------------------------------------------------------------

def b_operator(pair: DichotomicPair, x: int) -> ObservableMatrix:
    """B = (A0 + (-1)^x A1) / 2"""
    if x not in (0, 1):
        raise ValidationError(f"x must be 0 or 1, got {x}")
    sign = 1.0 if x == 0 else -1.0
    return ObservableMatrix((pair.a0.entries + sign * pair.a1.entries) / 2)


def b_table(settings: MeasurementSettings) -> np.ndarray:
    """Array of shape (n_sites, 2, d, d) holding every B_{j,x}"""
    return np.stack([
        np.stack([b_operator(pair, 0).entries, b_operator(pair, 1).entries])
        for pair in settings.pairs
    ])


def pauli_pair(a0: str = 'x', a1: str = 'y') -> DichotomicPair:
    return DichotomicPair(ObservableMatrix(PAULI[a0]), ObservableMatrix(PAULI[a1]))


def uniform_settings(pair: DichotomicPair, n_sites: int) -> MeasurementSettings:
    """Same pair at every site"""
    return MeasurementSettings(d=pair.d, pairs=(pair,) * n_sites)


def random_observable(rng: np.random.Generator, d: int) -> ObservableMatrix:
    """Matrix sign of a traceless Gaussian Hermitian matrix"""
    from bellsurvey.optimize import msign

    g = _gaussian_amplitudes(rng, (d, d))
    h = (g + g.conj().T) / 2
    h -= (np.trace(h).real / d) * np.eye(d)
    return msign(h)


def sample_settings(d: int, n_sites: int, seed: int, require_nondull: bool = False) -> MeasurementSettings:
    """
    Draw random measurement settings.

    Args:
        d: Local dimension
        n_sites: Number of sites
        seed: 64-bit seed
        require_nondull: Redraw until at least one site has a non-dull pair

    Returns:
        MeasurementSettings
    """
    check_capacity(d, n_sites)
    rng = np.random.default_rng(check_seed(seed))
    resamples = 0
    while True:
        pairs = tuple(
            DichotomicPair(random_observable(rng, d), random_observable(rng, d))
            for _ in range(n_sites)
        )
        settings = MeasurementSettings(d=d, pairs=pairs)
        if not require_nondull or settings.nondull_flag:
            break
        resamples += 1
    if resamples:
        logger.warning(f"Resampled settings {resamples} time(s) to obtain a non-dull site")
    return settings


def settings_distance(q: MeasurementSettings, q2: MeasurementSettings) -> float:
    """sup over sites and settings of the operator norm of A - A~"""
    if q.d != q2.d or q.n_sites != q2.n_sites:
        raise ValidationError(
            f"cannot compare settings of shape (d={q.d}, n={q.n_sites}) "
            f"and (d={q2.d}, n={q2.n_sites})"
        )
    return max(
        float(np.linalg.norm(getattr(p, name).entries - getattr(p2, name).entries, ord=2))
        for p, p2 in zip(q.pairs, q2.pairs)
        for name in ('a0', 'a1')
    )


# ---------------------------------------------------------------------------
# Expectation kernels
# ---------------------------------------------------------------------------

def apply_local(tensor: np.ndarray, op: np.ndarray, site: int) -> np.ndarray:
    """Apply a d x d operator to one axis of a state tensor"""
    return np.moveaxis(np.tensordot(op, tensor, axes=([1], [site])), 0, site)


def _check_table(state: PureState, table: np.ndarray) -> None:
    expected = (state.n_sites, 2, state.d, state.d)
    if table.shape != expected:
        raise ValidationError(f"operator table has shape {table.shape}, expected {expected}")


def check_compatible(state: PureState, settings: MeasurementSettings) -> None:
    if state.d != settings.d or state.n_sites != settings.n_sites:
        raise ValidationError(
            f"state (d={state.d}, n={state.n_sites}) does not match "
            f"settings (d={settings.d}, n={settings.n_sites})"
        )


def product_expectation(state: PureState, settings: MeasurementSettings,
                        x: Union[SettingIndex, Sequence[int]]) -> float:
    """<psi| tensor_j B_{j,x_j} |psi>"""
    check_compatible(state, settings)
    if not isinstance(x, SettingIndex):
        x = SettingIndex(tuple(x))
    if x.n_sites != state.n_sites:
        raise ValidationError(f"setting index has {x.n_sites} digits, expected {state.n_sites}")
    phi = state.tensor
    for site, (pair, bit) in enumerate(zip(settings.pairs, x.bits)):
        phi = apply_local(phi, b_operator(pair, bit).entries, site)
    return float(np.vdot(state.tensor, phi).real)


def _batched_leaves(tensor: np.ndarray, table: np.ndarray, sites: Sequence[int]) -> np.ndarray:
    """
    Every product of one table operator per listed site applied to tensor,
    stacked along a leading axis of length 2**len(sites). The leading index
    reads the chosen x's as a binary integer, first listed site most significant.
    """
    batch = tensor[np.newaxis]
    for site in sites:
        applied = np.tensordot(table[site], batch, axes=([2], [site + 1]))
        applied = np.moveaxis(applied, [0, 1, 2], [1, site + 2, 0])
        batch = applied.reshape((2 * batch.shape[0],) + tensor.shape)
    return batch


def _fits_batch(tensor: np.ndarray, n_leaves: int) -> bool:
    return tensor.size * n_leaves <= config.BATCH_MAX_ELEMENTS


def all_expectations(state: PureState, table: np.ndarray) -> np.ndarray:
    """
    Expectations of tensor_j table[j, x_j] for every X.

    Partial applications are shared by all X with the same prefix: batched
    site by site when the stack of 2**N vectors fits the batch budget,
    depth-first otherwise (subtrees under a zero operator are skipped).

    Args:
        state: Pure state
        table: Operators of shape (n_sites, 2, d, d)

    Returns:
        Array of length 2**n_sites indexed by X read as a binary integer
    """
    table = np.asarray(table)
    _check_table(state, table)
    n = state.n_sites
    psi = state.tensor
    if _fits_batch(psi, 2 ** n):
        leaves = _batched_leaves(psi, table, range(n))
        return (leaves.reshape(2 ** n, -1) @ psi.conj().ravel()).real

    out = np.zeros(2 ** n, dtype=float)

    def descend(phi: np.ndarray, site: int, prefix: int) -> None:
        if site == n:
            out[prefix] = np.vdot(psi, phi).real
            return
        for x in (0, 1):
            op = table[site, x]
            if not op.any():
                continue
            descend(apply_local(phi, op, site), site + 1, 2 * prefix + x)

    descend(psi, 0, 0)
    return out


def weighted_leaf_sums(tensor: np.ndarray, table: np.ndarray, sites: Sequence[int],
                       weights: np.ndarray) -> np.ndarray:
    """
    Weighted sums of operator products over a subset of sites.

    Args:
        tensor: State tensor of shape (d,) * N
        table: Operators of shape (N, 2, d, d)
        sites: Sites that receive an operator, in significance order
        weights: Array of shape (2**len(sites), m)

    Returns:
        Array of shape (m,) + tensor.shape whose k-th entry is
        sum_r weights[r, k] (tensor over listed sites of table[j, r_j]) tensor
    """
    sites = list(sites)
    weights = np.asarray(weights)
    n_leaves = 2 ** len(sites)
    if weights.shape[0] != n_leaves:
        raise ValidationError(f"need {n_leaves} weight rows, got {weights.shape[0]}")
    if _fits_batch(tensor, n_leaves):
        leaves = _batched_leaves(tensor, table, sites)
        return np.tensordot(weights.T, leaves, axes=([1], [0]))

    out = np.zeros((weights.shape[1],) + tensor.shape, dtype=complex)

    def descend(phi: np.ndarray, depth: int, prefix: int) -> None:
        if depth == len(sites):
            out[...] += weights[prefix].reshape((-1,) + (1,) * tensor.ndim) * phi
            return
        site = sites[depth]
        for x in (0, 1):
            op = table[site, x]
            if not op.any():
                continue
            descend(apply_local(phi, op, site), depth + 1, 2 * prefix + x)

    descend(tensor, 0, 0)
    return out


def haar_moment_check(d: int, n_sites: int, samples: int, seed: int,
                      batch_size: int = 10000) -> HaarMomentReport:
    """
    Compare empirical |alpha_I|^4 and |alpha_I|^2 |alpha_L|^2 moments of the
    sampler with 2/(D(D+1)) and 1/(D(D+1)), D = d**n_sites.

    Each draw contributes its average over I (and over pairs I != L), so
    the standard errors are over independent draws.
    """
    dim = check_capacity(d, n_sites)
    if dim < 2:
        raise ValidationError("cross moments need at least two amplitudes")
    if samples < 2:
        raise ValidationError("need at least two samples for a standard error")
    rng = np.random.default_rng(seed)
    fourth: List[np.ndarray] = []
    cross: List[np.ndarray] = []
    remaining = samples
    while remaining > 0:
        size = min(batch_size, remaining)
        z = _gaussian_amplitudes(rng, (size, dim))
        p = np.abs(z) ** 2
        p /= p.sum(axis=1, keepdims=True)
        sum_sq = np.sum(p ** 2, axis=1)
        fourth.append(sum_sq / dim)
        cross.append((1.0 - sum_sq) / (dim * (dim - 1)))
        remaining -= size
    f = np.concatenate(fourth)
    c = np.concatenate(cross)
    return HaarMomentReport(
        d=d,
        n_sites=n_sites,
        samples=samples,
        mean_fourth=float(f.mean()),
        se_fourth=float(f.std(ddof=1) / np.sqrt(samples)),
        expected_fourth=2.0 / (dim * (dim + 1)),
        mean_cross=float(c.mean()),
        se_cross=float(c.std(ddof=1) / np.sqrt(samples)),
        expected_cross=1.0 / (dim * (dim + 1)),
    )


def trace_identities(pair: DichotomicPair) -> Dict[str, float]:
    """Tr B0^2 + Tr B1^2 and |Tr B0| + |Tr B1| for one pair"""
    b0 = b_operator(pair, 0).entries
    b1 = b_operator(pair, 1).entries
    return {
        'sum_trace_squares': float(np.trace(b0 @ b0).real + np.trace(b1 @ b1).real),
        'sum_abs_traces': float(abs(np.trace(b0).real) + abs(np.trace(b1).real)),
    }
