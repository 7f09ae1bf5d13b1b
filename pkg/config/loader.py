import logging
import os
from typing import Dict, Iterable, Optional

from dotenv import dotenv_values

from core.errors import ConfigError

logger = logging.getLogger(__name__)

KNOWN_PREFIXES = ('WORKLOAD_', 'PRICE_', 'SUPPLIER_', 'EXPERIMENT_')


def load_config_file(path: Optional[str]) -> Dict[str, str]:
    """Read a KEY=value config file. A missing path means "all defaults"."""
    if path is None:
        return {}
    if not os.path.exists(path):
        raise ConfigError(f"Config file not found: {path}")

    values = {k: v for k, v in dotenv_values(path).items() if v is not None}
    stray = [k for k in values if not k.startswith(KNOWN_PREFIXES)]
    if stray:
        raise ConfigError(f"Unknown config keys in {path}: {', '.join(sorted(stray))}")

    logger.info(f"Loaded {len(values)} config values from {path}")
    return values


def section(values: Dict[str, str], prefix: str, known: Iterable[str]) -> Dict[str, str]:
    """Keys of one section with the prefix stripped; unknown keys in the section are rejected."""
    known = set(known)
    picked = {}
    for key, value in values.items():
        if not key.startswith(prefix):
            continue
        name = key[len(prefix):]
        if name not in known:
            raise ConfigError(f"Unknown config key {key}. Options: {sorted(prefix + k for k in known)}")
        picked[name] = value
    return picked
