# config/settings.py
"""
Project-wide settings.

Every consumer reads these through getattr(settings, NAME, default), so a
trimmed settings module still works. Two environment variables override:
- GELFAND_TOL         -> ALGEBRAIC_TOL
- GELFAND_LEDGER_URL  -> LEDGER_URL
"""

import os

# Tolerances
ALGEBRAIC_TOL = float(os.environ.get("GELFAND_TOL", "1e-12"))
ORACLE_TOL = 1e-9
CONDITION_SCALE = True

# Sampling defaults
DEFAULT_SAMPLES = 1000
DEFAULT_SEED = 0
DEFAULT_TRIALS = 1000
RANDOM_WINDOW = 16  # random vectors over Z\{0} draw indices from +-1..RANDOM_WINDOW

# Spectral bookkeeping
DESCRIBE_WINDOW = 4096  # indices scanned per sign when describing analytic components
EIGEN_RESIDUAL_FACTOR = 64
INJECTIVITY_RATIO = 1e-14
EXACT_SUM_LIMIT = 10**6  # above this many terms, weight sums switch to closed-form tails
INSTANCE_CHECK_SAMPLES = 50  # pairing-identity samples when a catalog instance is built

# Verification harness
VERIFY_WORKERS = 1
LEDGER_URL = os.environ.get("GELFAND_LEDGER_URL") or None
