"""Configuration helpers that read runtime defaults from the environment."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv

PACKAGE_ROOT = Path(__file__).resolve().parents[1]
PACKAGED_DATA_DIR = Path(__file__).resolve().parent / "data"


def _guess_user_root() -> Path:
    cwd = Path.cwd().resolve()
    if (cwd / ".env").exists() or (cwd / "pyproject.toml").exists():
        return cwd
    return PACKAGE_ROOT


USER_ROOT = _guess_user_root()

if os.getenv("S2CONTACT_SKIP_DOTENV") != "1":
    load_dotenv(dotenv_path=USER_ROOT / ".env")


def _env_path(env_var: str, fallback: Path) -> Path:
    value = os.getenv(env_var)
    if not value:
        return fallback
    candidate = Path(value).expanduser()
    if candidate.is_absolute():
        return candidate
    return (USER_ROOT / candidate).resolve()


def _env_int(env_var: str, default: int, minimum: int = 0) -> int:
    value = os.getenv(env_var)
    if value is None or not value.strip():
        return default
    try:
        parsed = int(value)
    except ValueError as exc:
        raise ValueError(f"{env_var} must be an integer, got {value!r}") from exc
    if parsed < minimum:
        raise ValueError(f"{env_var} must be at least {minimum}, got {parsed}")
    return parsed


def _env_str(env_var: str, default: str) -> str:
    value = os.getenv(env_var)
    return value.strip() if value and value.strip() else default


@dataclass(frozen=True)
class CliDefaults:
    data_dir: Path
    output_dir: Path
    samples: int
    seed: int
    log_level: str
    workers: int


def load_defaults() -> CliDefaults:
    return CliDefaults(
        data_dir=_env_path("S2CONTACT_DATA_DIR", PACKAGED_DATA_DIR),
        output_dir=_env_path("S2CONTACT_OUTPUT_DIR", Path.cwd() / "s2contact-out"),
        samples=_env_int("S2CONTACT_SAMPLES", 10000, minimum=2),
        seed=_env_int("S2CONTACT_SEED", 1),
        log_level=_env_str("S2CONTACT_LOG_LEVEL", "WARNING").upper(),
        workers=_env_int("S2CONTACT_WORKERS", 1, minimum=1),
    )


__all__ = ["CliDefaults", "load_defaults", "PACKAGE_ROOT", "PACKAGED_DATA_DIR", "USER_ROOT"]
