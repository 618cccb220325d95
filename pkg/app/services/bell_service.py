import logging
from dataclasses import asdict
from typing import Optional

from bellsurvey import config
from bellsurvey.belleval import qnl, qnl_noisy
from bellsurvey.bounds import BoundQuery, net_params, theorem_bound
from bellsurvey.errors import ValidationError
from bellsurvey.optimize import SeesawConfig, horodecki_chsh, mermin_reference, seesaw_maximize
from bellsurvey.qcore import MeasurementSettings, PureState, check_capacity, ghz_state

logger = logging.getLogger(__name__)


class BellService:
    """Service wrapping the numerical core for the HTTP layer"""

    def __init__(self, max_restarts: int = config.DEFAULT_RESTARTS * 5):
        """
        Initialize the service.

        Args:
            max_restarts: Cap on see-saw restarts per request
        """
        self.max_restarts = max_restarts
        logger.info("Bell service initialized")

    @property
    def max_amplitudes(self) -> int:
        return config.MAX_AMPLITUDES

    def bounds(self, query: BoundQuery, theorem: Optional[int] = None) -> dict:
        return theorem_bound(query, theorem).to_dict()

    def net(self, d: int, n_sites: int, delta: float) -> dict:
        return asdict(net_params(d, n_sites, delta))

    def ghz(self, n_sites: int, alpha: float, beta: float) -> dict:
        """Closed-form GHZ / Pauli x-y value and the direct contraction for (alpha, beta)"""
        check_capacity(2, n_sites)
        settings, reference = mermin_reference(n_sites)
        value = qnl(ghz_state(alpha, beta, n_sites), settings)
        return {
            "n_sites": n_sites,
            "alpha": alpha,
            "beta": beta,
            "mermin_reference": reference,
            "qnl": value,
            "difference": value - reference,
        }

    def evaluate(self, state: PureState, settings: MeasurementSettings,
                 lam: Optional[float] = None) -> dict:
        value = qnl(state, settings) if lam is None else qnl_noisy(state, settings, lam)
        return {
            "qnl": value,
            "lambda": lam,
            "ceiling": 2.0 ** ((state.n_sites - 1) / 2),
        }

    def optimize(self, state: PureState, seesaw: SeesawConfig,
                 lam: Optional[float] = None, workers: int = 1) -> dict:
        """
        Run the see-saw search on a state.

        Returns:
            OptimizationResult as a dict, with the best settings
        """
        if seesaw.restarts > self.max_restarts:
            raise ValidationError(f"Too many restarts. Max: {self.max_restarts}")
        logger.info(f"Optimizing d={state.d}, N={state.n_sites} with {seesaw.restarts} restarts")
        result = seesaw_maximize(state, seesaw, noise=lam, workers=workers)
        data = result.to_dict(include_settings=True)
        if (state.d, state.n_sites) == (2, 2):
            data["horodecki_value"] = horodecki_chsh(state)
        return data
