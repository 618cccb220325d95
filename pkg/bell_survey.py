"""
One-click survey runner.
Checks the closed-form references, then runs a small set of surveys and
saves their records and summaries under reports/.
"""

import logging
import math
from pathlib import Path

from bellsurvey import config
from bellsurvey.bounds import c_dn
from bellsurvey.harness import emit_report, noise_sweep, survey
from bellsurvey.models import ExperimentConfig
from bellsurvey.optimize import SeesawConfig, horodecki_chsh, seesaw_maximize, mermin_reference
from bellsurvey.belleval import qnl
from bellsurvey.qcore import ghz_state

logging.basicConfig(
    level=config.LOG_LEVEL,
    format=config.LOG_FORMAT
)
logger = logging.getLogger(__name__)

REPORTS_DIR = Path("reports")
MASTER_SEED = 20240611


def check_references():
    """Print the GHZ and two-qubit reference values next to the computed ones"""
    print(f"\n{'='*70}")
    print("REFERENCE CHECKS")
    print(f"{'='*70}")

    for n_sites in range(2, 9):
        settings, reference = mermin_reference(n_sites)
        value = qnl(ghz_state(1 / math.sqrt(2), 1 / math.sqrt(2), n_sites), settings)
        logger.info(f"✓ GHZ_{n_sites}: closed form {reference:.12f}, contraction {value:.12f}")

    bell = ghz_state(1 / math.sqrt(2), 1 / math.sqrt(2), 2)
    result = seesaw_maximize(bell, SeesawConfig(restarts=5, seed=MASTER_SEED))
    logger.info(f"✓ Bell state: see-saw {result.value:.12f}, correlation matrix {horodecki_chsh(bell):.12f}")


def run_and_save(experiment: ExperimentConfig, name: str):
    """
    Run one survey and save its records and summary.

    Args:
        experiment: Survey configuration
        name: Report file stem
    """
    print(f"\n{'='*70}")
    print(f"SURVEY: {name.upper()} ({experiment.trials} trials)")
    print(f"{'='*70}")

    summary = survey(experiment)
    emit_report(summary, "csv", REPORTS_DIR / f"{name}.csv")
    emit_report(summary, "json", REPORTS_DIR / f"{name}.json")

    print(f"\n  mean = {summary.empirical_mean:.6f}  (c_dn = {c_dn(experiment.d, experiment.n_sites):.6f})")
    print(f"  std  = {summary.empirical_std:.6f}")
    for row in summary.tail_table:
        print(f"  v = {row.v:<6} fraction = {row.empirical_fraction:.4f}  "
              f"[{row.wilson_ci_low:.4f}, {row.wilson_ci_high:.4f}]  bound = {row.bound_clamped:.4g}")
    return summary


def main():
    """Run the reference checks and the default surveys"""

    print("=" * 70)
    print("BELL SURVEY")
    print("Random states against full-correlation Bell inequalities")
    print("=" * 70)
    print(f"\nReports will be saved to: {REPORTS_DIR}")

    check_references()

    seesaw = SeesawConfig(restarts=5, max_sweeps=200)
    tasks = [
        ("fixed_d2_n4", ExperimentConfig(d=2, n_sites=4, trials=2000, master_seed=MASTER_SEED,
                                         mode="fixed_settings", v_grid=(0.8, 1.0, 1.2))),
        ("fixed_d3_n3", ExperimentConfig(d=3, n_sites=3, trials=2000, master_seed=MASTER_SEED,
                                         mode="fixed_settings", v_grid=(0.8, 1.0, 1.2))),
        ("optimized_d2_n4", ExperimentConfig(d=2, n_sites=4, trials=100, master_seed=MASTER_SEED,
                                             mode="optimized", v_grid=(1.0, 1.5, 2.0), seesaw=seesaw,
                                             workers=config.DEFAULT_WORKERS)),
    ]

    completed = []
    for name, experiment in tasks:
        try:
            completed.append((name, run_and_save(experiment, name)))
        except Exception as e:
            logger.error(f"Failed to run {name}: {str(e)}")
            continue

    sweep = ExperimentConfig(d=2, n_sites=3, trials=200, master_seed=MASTER_SEED, mode="fixed_settings",
                             noise_lambdas=(0.0, 0.25, 0.5), v_grid=(1.0, 1.2))
    for summary in noise_sweep(sweep):
        emit_report(summary, "json", REPORTS_DIR / f"noise_d2_n3_lambda{summary.lam}.json")
        print(f"  lambda = {summary.lam:<5} mean = {summary.empirical_mean:.6f}  GHZ control = {summary.ghz_control:.6f}")

    # Final summary
    print("\n" + "=" * 70)
    print("SURVEYS COMPLETE!")
    print("=" * 70)
    print(f"\nReports location: {REPORTS_DIR}")
    print("\nBreakdown:")
    for name, summary in completed:
        print(f"  - {name}: mean {summary.empirical_mean:.6f}, std {summary.empirical_std:.6f}")

    print("\n" + "=" * 70)
    print("Next step: query bounds or optimize your own states")
    print("Run: python -m bellsurvey bounds --theorem 1 --d 2 --n 8 --v 3")
    print("=" * 70)


if __name__ == "__main__":
    main()
