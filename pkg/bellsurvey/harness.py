"""
Monte Carlo survey driver.

Samples Haar-random states, evaluates (or optimizes) the nonlinear
functional on each, tabulates empirical tail fractions against the theorem
bounds and writes reproducible CSV / JSON reports.

Every trial draws from its own seed, derive_seed(master_seed, trial_id),
so the records depend only on the config and never on the worker count.
"""

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.stats import binomtest

from bellsurvey import __version__, config
from bellsurvey.belleval import qnl, qnl_noisy
from bellsurvey.bounds import BoundQuery, c_dn, theorem_bound
from bellsurvey.errors import ReportIOError, ValidationError
from bellsurvey.models import (
    RECORD_COLUMNS,
    ExperimentConfig,
    SurveySummary,
    TailRow,
    TrialRecord,
)
from bellsurvey.optimize import mermin_reference, seesaw_maximize
from bellsurvey.qcore import MeasurementSettings, ghz_state, haar_state, sample_settings
from bellsurvey.seeding import SETTINGS_STREAM, derive_seed
from bellsurvey.storage import read_json, read_text, write_json, write_text

logger = logging.getLogger(__name__)

REPORT_FORMATS = ('csv', 'json')


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------

def fixed_settings_for(experiment: ExperimentConfig) -> MeasurementSettings:
    """The once-per-survey non-dull settings used in fixed_settings mode"""
    seed = derive_seed(experiment.master_seed, SETTINGS_STREAM)
    return sample_settings(experiment.d, experiment.n_sites, seed, require_nondull=True)


def run_trial(experiment: ExperimentConfig, lam: float, trial_id: int,
              settings: Optional[MeasurementSettings] = None) -> TrialRecord:
    """
    Sample one state and evaluate it.

    Args:
        experiment: Survey configuration
        lam: Local noise level (0 for the noiseless functional)
        trial_id: Trial index; selects the trial's seed stream
        settings: Fixed settings (required in fixed_settings mode)

    Returns:
        TrialRecord
    """
    trial_seed = derive_seed(experiment.master_seed, trial_id)
    started = time.perf_counter()
    state = haar_state(experiment.d, experiment.n_sites, trial_seed)
    noise = lam if lam > 0 else None

    if experiment.mode == 'fixed_settings':
        if settings is None:
            raise ValidationError("fixed_settings mode needs the survey settings")
        value = qnl(state, settings) if noise is None else qnl_noisy(state, settings, noise)
        sweeps, restarts = 0, 0
    else:
        seesaw = experiment.with_seesaw_seed(trial_seed).seesaw
        result = seesaw_maximize(state, seesaw, noise=noise)
        value, sweeps, restarts = result.value, result.sweeps_used, result.restarts_used

    wall_ms = int(round((time.perf_counter() - started) * 1000)) if experiment.record_timing else 0
    return TrialRecord(
        trial_id=trial_id,
        trial_seed=trial_seed,
        d=experiment.d,
        n_sites=experiment.n_sites,
        lam=lam,
        mode=experiment.mode,
        qnl_value=value,
        sweeps_used=sweeps,
        restarts_used=restarts,
        wall_ms=wall_ms,
    )


def _run_trial_args(args) -> TrialRecord:
    return run_trial(*args)


def run_survey(experiment: ExperimentConfig, lam: float = 0.0) -> List[TrialRecord]:
    """
    Run every trial of a survey at one noise level.

    Trials are spread over `experiment.workers` processes; results come back
    in trial order whatever the scheduling.

    Returns:
        Records sorted by trial_id
    """
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"noise level must lie in [0, 1], got {lam}")
    if lam > 0 and experiment.d != 2:
        raise ValidationError(f"the local noise model is defined for qubits only, got d={experiment.d}")
    settings = fixed_settings_for(experiment) if experiment.mode == 'fixed_settings' else None

    logger.info(f"Survey: d={experiment.d}, N={experiment.n_sites}, trials={experiment.trials}, "
                f"mode={experiment.mode}, lambda={lam}, workers={experiment.workers}")
    jobs = [(experiment, lam, trial_id, settings) for trial_id in range(experiment.trials)]
    if experiment.workers > 1 and experiment.trials > 1:
        chunksize = max(1, experiment.trials // (4 * experiment.workers))
        with ProcessPoolExecutor(max_workers=experiment.workers) as pool:
            records = list(pool.map(_run_trial_args, jobs, chunksize=chunksize))
    else:
        records = [_run_trial_args(job) for job in jobs]

    logger.info(f"✓ Survey complete: {len(records)} trials")
    return sorted(records, key=lambda r: r.trial_id)


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------

def wilson_interval(successes: int, total: int):
    ci = binomtest(successes, total).proportion_ci(
        confidence_level=config.WILSON_CONFIDENCE, method='wilson'
    )
    return float(ci.low), float(ci.high)


def _tail_row(values: np.ndarray, v: float, experiment: ExperimentConfig,
              lam: float, theorem: int, threshold: float) -> TailRow:
    above = int(np.sum(values > v))
    low, high = wilson_interval(above, values.size)
    if v <= threshold:
        bound_log10, clamped, delta = None, 1.0, None
    else:
        query = BoundQuery(d=experiment.d, n_sites=experiment.n_sites, v=v, delta='auto', lam=lam)
        report = theorem_bound(query, theorem)
        bound_log10, clamped, delta = report.tail_bound_log10, report.bound_clamped, report.delta_used
    return TailRow(
        v=v,
        empirical_fraction=above / values.size,
        wilson_ci_low=low,
        wilson_ci_high=high,
        theorem_bound_log10=bound_log10,
        bound_clamped=clamped,
        delta_used=delta,
    )


def empirical_tail(records: Sequence[TrialRecord], v_grid: Sequence[float],
                   experiment: ExperimentConfig) -> SurveySummary:
    """
    Tabulate P(Q_NL > v) against the concentration bound.

    Noiseless records are compared with the noiseless theorem, noisy ones
    with the noisy theorem; grid points at or below the theorem's threshold
    carry no bound and a clamped value of 1.

    Args:
        records: Trials of one survey at one noise level
        v_grid: Thresholds to tabulate
        experiment: Survey configuration (echoed into the summary)

    Returns:
        SurveySummary holding the tail table and the records
    """
    if not records:
        raise ValidationError("empirical_tail needs at least one record")
    lambdas = {r.lam for r in records}
    if len(lambdas) != 1:
        raise ValidationError(f"records mix noise levels {sorted(lambdas)}")
    lam = lambdas.pop()
    theorem = 2 if lam > 0 else 1
    threshold = 1.0 if theorem == 2 else c_dn(experiment.d, experiment.n_sites)

    values = np.array([r.qnl_value for r in records])
    rows = tuple(_tail_row(values, float(v), experiment, lam, theorem, threshold)
                 for v in sorted(v_grid))
    for row in rows:
        if row.empirical_fraction > row.bound_clamped:
            logger.warning(f"Empirical tail {row.empirical_fraction} exceeds the bound "
                           f"{row.bound_clamped} at v={row.v}")

    provenance = {
        'version': __version__,
        'master_seed': experiment.master_seed,
        'seed_derivation': 'splitmix64(master_seed + 0x9E3779B97F4A7C15 * (stream + 1))',
        'settings_seed': (derive_seed(experiment.master_seed, SETTINGS_STREAM)
                          if experiment.mode == 'fixed_settings' else None),
        'sampling_measure': config.SAMPLING_MEASURE,
        'value': config.OPTIMIZED_VALUE_LABEL if experiment.mode == 'optimized' else 'Q_NL at fixed settings',
    }
    return SurveySummary(
        config=experiment,
        lam=lam,
        theorem=theorem,
        empirical_mean=float(values.mean()),
        empirical_std=float(values.std(ddof=1)) if values.size > 1 else 0.0,
        tail_table=rows,
        provenance=provenance,
        records=tuple(sorted(records, key=lambda r: r.trial_id)),
    )


def survey(experiment: ExperimentConfig, lam: float = 0.0) -> SurveySummary:
    """run_survey followed by empirical_tail over the config's v grid"""
    return empirical_tail(run_survey(experiment, lam), experiment.v_grid, experiment)


def ghz_control_value(n_sites: int, lam: float) -> float:
    """Noisy Q_NL of the balanced GHZ state at Pauli x / y settings"""
    settings, _ = mermin_reference(n_sites)
    state = ghz_state(1 / np.sqrt(2), 1 / np.sqrt(2), n_sites)
    return qnl_noisy(state, settings, lam)


def noise_sweep(experiment: ExperimentConfig) -> List[SurveySummary]:
    """
    Repeat the survey at every configured noise level.

    The same trial seeds are used at every level, so the lam = 0 summary
    is identical to the noiseless survey.

    Returns:
        One SurveySummary per noise level, in config order
    """
    if experiment.d != 2:
        raise ValidationError(f"noise sweeps need qubits, got d={experiment.d}")
    if not experiment.noise_lambdas:
        raise ValidationError("noise sweep needs at least one noise level")
    summaries = []
    for lam in experiment.noise_lambdas:
        summary = survey(experiment, lam)
        control = ghz_control_value(experiment.n_sites, lam)
        logger.info(f"✓ lambda={lam}: mean={summary.empirical_mean:.6f}, GHZ control={control:.6f}")
        summaries.append(replace(summary, ghz_control=control))
    return summaries


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def records_csv(records: Sequence[TrialRecord]) -> str:
    """Records CSV in the order given"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(RECORD_COLUMNS)
    for record in records:
        writer.writerow(record.to_row())
    return buffer.getvalue()


def emit_report(summary: SurveySummary, fmt: str, path: Union[str, Path]) -> Path:
    """
    Write a survey report.

    Args:
        summary: Survey summary
        fmt: "csv" for the per-trial records, "json" for the full summary
        path: Destination file

    Returns:
        The written path

    Raises:
        ReportIOError: the path is not writable
    """
    if fmt not in REPORT_FORMATS:
        raise ValidationError(f"format must be one of {REPORT_FORMATS}, got {fmt!r}")
    if fmt == 'csv':
        return write_text(path, records_csv(summary.records))
    return write_json(path, summary.to_dict())


def load_records(path: Union[str, Path]) -> List[TrialRecord]:
    """Read a records CSV back"""
    reader = csv.DictReader(io.StringIO(read_text(path)))
    if tuple(reader.fieldnames or ()) != RECORD_COLUMNS:
        raise ReportIOError(path, f"unexpected columns {reader.fieldnames}")
    try:
        return [TrialRecord.from_row(row) for row in reader]
    except (KeyError, ValueError) as e:
        raise ReportIOError(path, f"malformed record: {str(e)}") from e


def load_summary(path: Union[str, Path]) -> SurveySummary:
    """Read a summary JSON back"""
    data = read_json(path)
    try:
        return SurveySummary.from_dict(data)
    except (KeyError, TypeError, ValueError) as e:
        raise ReportIOError(path, f"malformed summary: {str(e)}") from e
