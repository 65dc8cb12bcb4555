import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path

from dotenv import load_dotenv

from merosin.errors import ValidationError

# Load environment variables
load_dotenv()

DEFAULT_CACHE_PATH = Path(".merosin_cache") / "constants.json"
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


@dataclass(frozen=True)
class Settings:
    """Process-wide settings resolved from the environment."""
    threads: int
    cache_path: Path
    log_level: str
    use_cache: bool = True

    def with_overrides(self, threads=None, log_level=None, use_cache=None):
        """Apply command-line overrides on top of the environment values"""
        changes = {}
        if threads is not None:
            changes['threads'] = _validate_threads(threads, '--threads')
        if log_level is not None:
            changes['log_level'] = _validate_level(log_level, '--log-level')
        if use_cache is not None:
            changes['use_cache'] = use_cache
        return replace(self, **changes)


def _validate_threads(value, source):
    try:
        threads = int(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{source} must be an integer, got {value!r}")
    if threads < 1:
        raise ValidationError(f"{source} must be at least 1, got {threads}")
    return threads


def _validate_level(value, source):
    level = str(value).upper()
    if not isinstance(logging.getLevelName(level), int):
        raise ValidationError(f"{source} is not a logging level: {value!r}")
    return level


def load_settings(environ=None):
    """Create the settings from MEROSIN_* environment variables"""
    env = os.environ if environ is None else environ

    threads = env.get("MEROSIN_THREADS")
    threads = _validate_threads(threads, "MEROSIN_THREADS") if threads else (os.cpu_count() or 1)

    cache_path = Path(env.get("MEROSIN_CONSTANTS_CACHE") or DEFAULT_CACHE_PATH)
    log_level = _validate_level(env.get("MEROSIN_LOG_LEVEL", "INFO"), "MEROSIN_LOG_LEVEL")

    return Settings(threads=threads, cache_path=cache_path, log_level=log_level)


def configure_logging(level):
    # stdout carries JSON/CSV, so log records go to stderr
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT)
