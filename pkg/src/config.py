"""
Configuration Management
Loads pipeline defaults from .env file
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Project root is the parent of src/
PROJECT_ROOT = Path(__file__).parent.parent

# Load environment variables from project root
load_dotenv(PROJECT_ROOT / '.env')


def _float(name: str, default: str) -> float:
    return float(os.getenv(name, default))


def _int(name: str, default: str) -> int:
    return int(float(os.getenv(name, default)))


class Config:
    """Application configuration (desk-scale defaults)"""

    # Reproducibility
    SEED = _int('TREEPACK_SEED', '0')

    # Regularity surrogate
    EPS = _float('TREEPACK_EPS', '0.05')
    D = _float('TREEPACK_D', '0.2')
    CLUSTERS = _int('TREEPACK_CLUSTERS', '4')
    WITNESS_BUDGET = _int('TREEPACK_WITNESS_BUDGET', '200')

    # Embedder
    GAMMA = _float('TREEPACK_GAMMA', '0.3')
    C = _float('TREEPACK_C', '0.05')
    BETA = _float('TREEPACK_BETA', '0.2')
    MU = _float('TREEPACK_MU', '0.0')
    K0 = _int('TREEPACK_K0', '1000')

    # Search budgets
    SEARCH_BUDGET = _int('TREEPACK_SEARCH_BUDGET', '100000000')
    ASSIGN_BUDGET = _int('TREEPACK_ASSIGN_BUDGET', '1000000')

    # Packer
    PACK_C = _float('TREEPACK_PACK_C', '0.5')
    HUB_C = _float('TREEPACK_HUB_C', '8.0')

    # Database
    DB_PATH = os.getenv('DB_PATH', './data/bench_runs.db')

    # Logging
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO').upper()
    LOG_FILE = os.getenv('LOG_FILE', './logs/treepack.log')
    LOG_MAX_BYTES = int(os.getenv('LOG_MAX_BYTES', '10485760'))
    LOG_BACKUP_COUNT = int(os.getenv('LOG_BACKUP_COUNT', '5'))

    # Development
    DEBUG = os.getenv('DEBUG', 'False').lower() == 'true'

    @classmethod
    def validate(cls):
        """
        Validate knob ranges

        Raises:
            ValueError: naming the offending environment variable
        """
        if not 0 < cls.EPS < 1:
            raise ValueError(f"TREEPACK_EPS must lie in (0, 1), got {cls.EPS}")
        if not 0 <= cls.D < 1:
            raise ValueError(f"TREEPACK_D must lie in [0, 1), got {cls.D}")
        if cls.CLUSTERS < 1:
            raise ValueError(f"TREEPACK_CLUSTERS must be >= 1, got {cls.CLUSTERS}")
        if not 0 < cls.GAMMA < 0.5:
            raise ValueError(f"TREEPACK_GAMMA must lie in (0, 1/2), got {cls.GAMMA}")
        if cls.C <= 0:
            raise ValueError(f"TREEPACK_C must be positive, got {cls.C}")
        if not 0 < cls.BETA < 1:
            raise ValueError(f"TREEPACK_BETA must lie in (0, 1), got {cls.BETA}")
        if not 0 <= cls.MU < 0.1:
            raise ValueError(f"TREEPACK_MU must lie in [0, 0.1), got {cls.MU}")
        if cls.PACK_C <= 0 or cls.HUB_C <= 0:
            raise ValueError("TREEPACK_PACK_C and TREEPACK_HUB_C must be positive")
        if cls.WITNESS_BUDGET < 0 or cls.SEARCH_BUDGET < 1 or cls.ASSIGN_BUDGET < 1:
            raise ValueError("search budgets must be positive")
        if cls.LOG_LEVEL not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            raise ValueError(f"LOG_LEVEL is not a logging level: {cls.LOG_LEVEL}")

        # Ensure directories exist
        Path(cls.DB_PATH).parent.mkdir(parents=True, exist_ok=True)
        if cls.LOG_FILE:
            Path(cls.LOG_FILE).parent.mkdir(parents=True, exist_ok=True)

    @classmethod
    def as_dict(cls) -> dict:
        """Snapshot of the pipeline knobs, recorded alongside outputs"""
        return {
            'seed': cls.SEED,
            'eps': cls.EPS,
            'd': cls.D,
            'clusters': cls.CLUSTERS,
            'witness_budget': cls.WITNESS_BUDGET,
            'gamma': cls.GAMMA,
            'c': cls.C,
            'beta': cls.BETA,
            'mu': cls.MU,
            'k0': cls.K0,
            'search_budget': cls.SEARCH_BUDGET,
            'assign_budget': cls.ASSIGN_BUDGET,
            'pack_c': cls.PACK_C,
            'hub_c': cls.HUB_C,
        }
