"""
Data models for surveys and their reports
"""

from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

from bellsurvey import config
from bellsurvey.errors import ValidationError
from bellsurvey.optimize import SeesawConfig

MODES = ('fixed_settings', 'optimized')

# Column order of the records CSV
RECORD_COLUMNS = (
    'trial_id', 'trial_seed', 'd', 'n_sites', 'lambda', 'mode',
    'qnl_value', 'sweeps_used', 'restarts_used', 'wall_ms',
)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Everything a survey depends on. Reports are pure functions of this
    config (wall_ms aside, which stays 0 unless record_timing is set).
    """
    d: int
    n_sites: int
    trials: int
    master_seed: int
    mode: str = 'optimized'
    noise_lambdas: Tuple[float, ...] = (0.0,)
    v_grid: Tuple[float, ...] = ()
    seesaw: SeesawConfig = field(default_factory=SeesawConfig)
    output_path: str = 'survey.csv'
    workers: int = config.DEFAULT_WORKERS
    record_timing: bool = False

    def __post_init__(self):
        if self.d < 2:
            raise ValidationError(f"d must be >= 2, got {self.d}")
        if self.n_sites < 2:
            raise ValidationError(f"n_sites must be >= 2, got {self.n_sites}")
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.workers < 1:
            raise ValidationError(f"workers must be >= 1, got {self.workers}")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValidationError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        lambdas = tuple(float(lam) for lam in self.noise_lambdas)
        for lam in lambdas:
            if not 0.0 <= lam <= 1.0:
                raise ValidationError(f"noise levels must lie in [0, 1], got {lam}")
        object.__setattr__(self, 'noise_lambdas', lambdas)
        object.__setattr__(self, 'v_grid', tuple(sorted(float(v) for v in self.v_grid)))

    def with_seesaw_seed(self, seed: int) -> 'ExperimentConfig':
        return replace(self, seesaw=replace(self.seesaw, seed=seed))

    def to_dict(self) -> dict:
        return {
            'd': self.d,
            'n_sites': self.n_sites,
            'trials': self.trials,
            'master_seed': self.master_seed,
            'mode': self.mode,
            'noise_lambdas': list(self.noise_lambdas),
            'v_grid': list(self.v_grid),
            'seesaw': self.seesaw.to_dict(),
            'output_path': self.output_path,
            'workers': self.workers,
            'record_timing': self.record_timing,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'ExperimentConfig':
        return cls(
            d=int(data['d']),
            n_sites=int(data['n_sites']),
            trials=int(data['trials']),
            master_seed=int(data['master_seed']),
            mode=data.get('mode', 'optimized'),
            noise_lambdas=tuple(data.get('noise_lambdas', (0.0,))),
            v_grid=tuple(data.get('v_grid', ())),
            seesaw=SeesawConfig.from_dict(data.get('seesaw', {})),
            output_path=data.get('output_path', 'survey.csv'),
            workers=int(data.get('workers', config.DEFAULT_WORKERS)),
            record_timing=bool(data.get('record_timing', False)),
        )


@dataclass(frozen=True)
class TrialRecord:
    """One sampled state and its (optimized or fixed-settings) Q_NL value"""
    trial_id: int
    trial_seed: int
    d: int
    n_sites: int
    lam: float
    mode: str
    qnl_value: float
    sweeps_used: int
    restarts_used: int
    wall_ms: int = 0

    def to_row(self) -> List[str]:
        """CSV fields in RECORD_COLUMNS order; floats use their round-trip repr"""
        return [
            str(self.trial_id), str(self.trial_seed), str(self.d), str(self.n_sites),
            repr(float(self.lam)), self.mode, repr(float(self.qnl_value)),
            str(self.sweeps_used), str(self.restarts_used), str(self.wall_ms),
        ]

    @classmethod
    def from_row(cls, row: dict) -> 'TrialRecord':
        return cls(
            trial_id=int(row['trial_id']),
            trial_seed=int(row['trial_seed']),
            d=int(row['d']),
            n_sites=int(row['n_sites']),
            lam=float(row['lambda']),
            mode=row['mode'],
            qnl_value=float(row['qnl_value']),
            sweeps_used=int(row['sweeps_used']),
            restarts_used=int(row['restarts_used']),
            wall_ms=int(row['wall_ms']),
        )

    def to_dict(self) -> dict:
        return {
            'trial_id': self.trial_id,
            'trial_seed': self.trial_seed,
            'd': self.d,
            'n_sites': self.n_sites,
            'lambda': self.lam,
            'mode': self.mode,
            'qnl_value': self.qnl_value,
            'sweeps_used': self.sweeps_used,
            'restarts_used': self.restarts_used,
            'wall_ms': self.wall_ms,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'TrialRecord':
        return cls.from_row(data)


@dataclass(frozen=True)
class TailRow:
    """
    Empirical fraction of trials above v, its Wilson interval, and the
    theorem bound at v (None where v is below the theorem's threshold)
    """
    v: float
    empirical_fraction: float
    wilson_ci_low: float
    wilson_ci_high: float
    theorem_bound_log10: Optional[float]
    bound_clamped: float
    delta_used: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            'v': self.v,
            'empirical_fraction': self.empirical_fraction,
            'wilson_ci_low': self.wilson_ci_low,
            'wilson_ci_high': self.wilson_ci_high,
            'theorem_bound_log10': self.theorem_bound_log10,
            'bound_clamped': self.bound_clamped,
            'delta_used': self.delta_used,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'TailRow':
        return cls(**data)


@dataclass(frozen=True)
class SurveySummary:
    """Aggregate of one survey at one noise level"""
    config: ExperimentConfig
    lam: float
    theorem: int
    empirical_mean: float
    empirical_std: float
    tail_table: Tuple[TailRow, ...]
    provenance: dict
    records: Tuple[TrialRecord, ...] = ()
    ghz_control: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            'config': self.config.to_dict(),
            'lambda': self.lam,
            'theorem': self.theorem,
            'empirical_mean': self.empirical_mean,
            'empirical_std': self.empirical_std,
            'tail_table': [row.to_dict() for row in self.tail_table],
            'provenance': dict(self.provenance),
            'ghz_control': self.ghz_control,
            'records': [record.to_dict() for record in self.records],
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'SurveySummary':
        return cls(
            config=ExperimentConfig.from_dict(data['config']),
            lam=float(data['lambda']),
            theorem=int(data['theorem']),
            empirical_mean=float(data['empirical_mean']),
            empirical_std=float(data['empirical_std']),
            tail_table=tuple(TailRow.from_dict(row) for row in data['tail_table']),
            provenance=dict(data['provenance']),
            records=tuple(TrialRecord.from_dict(r) for r in data.get('records', [])),
            ghz_control=data.get('ghz_control'),
        )
