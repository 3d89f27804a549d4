import os
import logging

from dotenv import load_dotenv
load_dotenv(dotenv_path=os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), '.env'))

# -----------------------------
# Environment
# -----------------------------
DEFAULT_NODE_BUDGET = 5_000_000

LOG_LEVEL = os.environ.get("OSA_LOG_LEVEL", "INFO").upper()
MC_RECORD_LIMIT = int(os.environ.get("OSA_MC_RECORD_LIMIT", "1000"))

# -----------------------------
# Numerical tolerances
# -----------------------------
PROB_TOL = 1e-12        # simplex drift allowed before a belief row is rescaled
BRANCH_PRUNE = 1e-15    # observation branches below this probability are dropped
TIE_TOL = 1e-12         # channel Q values closer than this count as a tie
EQUALITY_TOL = 1e-9     # PU total vs requirement
ROC_TOL = 1e-9          # slack for on-curve feasibility checks
ETA_XTOL = 1e-12        # threshold root search

DEFAULT_PSI = 0.8
DEFAULT_HORIZONS = list(range(1, 9))


def node_budget(configured=None):
    """Resolve the exact-solver node budget: env var first, then config, then default."""
    raw = os.environ.get("OSA_NODE_BUDGET")
    if raw:
        try:
            return int(raw)
        except ValueError:
            logging.getLogger(__name__).warning(f"Ignoring non-integer OSA_NODE_BUDGET={raw!r}")
    if configured is not None:
        return int(configured)
    return DEFAULT_NODE_BUDGET


def setup_logging(level=None):
    logging.basicConfig(
        level=getattr(logging, (level or LOG_LEVEL), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
