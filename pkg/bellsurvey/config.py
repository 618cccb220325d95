"""
Configuration for the Bell survey laboratory.
"""

import os

from dotenv import load_dotenv

# Pick up optional overrides from a local .env file
load_dotenv(override=False)

# Tolerances
STRUCTURAL_TOL = 1e-10  # Hermiticity, involutions, trace identities
NORMALIZATION_TOL = 1e-12  # unit norm of pure states
CEILING_TOL = 1e-9  # slack on Q_NL <= 2^((N-1)/2)

# Capacity limits
MAX_AMPLITUDES = int(os.getenv("BELLSURVEY_MAX_AMPLITUDES", str(2 ** 24)))
ORACLE_MAX_SITES = 6  # dense density-operator paths only
BATCH_MAX_ELEMENTS = 2 ** 22  # complex entries held when batching over all X

# See-saw defaults
DEFAULT_RESTARTS = 20
DEFAULT_MAX_SWEEPS = 500
DEFAULT_IMPROVEMENT_TOL = 1e-10

# Survey settings
DEFAULT_WORKERS = int(os.getenv("BELLSURVEY_DEFAULT_WORKERS", "1"))
WILSON_CONFIDENCE = 0.95
LOG10_REPORT_THRESHOLD = 1e6  # bounds above this are reported in log10
DELTA_SEARCH_RTOL = 1e-6

# Logging
LOG_LEVEL = os.getenv("BELLSURVEY_LOG_LEVEL", "INFO")
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

# HTTP service
API_MAX_UPLOAD_BYTES = int(os.getenv("BELLSURVEY_API_MAX_UPLOAD_BYTES", str(64 * 1024 * 1024)))

# Provenance labels written into every survey summary
SAMPLING_MEASURE = "traceless gaussian hermitian, matrix sign"
OPTIMIZED_VALUE_LABEL = "see-saw lower bound on sup over settings"
