"""Loading halo-system descriptions from the versioned JSON data file.

File layout::

    {"version": "...",
     "systems": {"he6": {"name": "6He",
                         "core": {"two_J": 0, "parity": "+"},
                         "constituent_mass": 939.565,
                         "channels": [{"S": 0, "T": 1, "atilde": null}],
                         "levels": [{"energy": -0.972, "sigma": 0.006,
                                     "channel": "S0T1", "L": 0, "label": "0+"}],
                         "citations": ["..."]}}}

A channel's ``atilde`` is ``null`` when it is fitted, or
``{"value": ..., "sigma": ...}`` when it is taken as known.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, List, Mapping, Optional, Tuple

from .errors import SchemaError, SelectionRuleError
from .halo import Channel, HaloSystem, MeasuredLevel

logger = logging.getLogger(__name__)

DATA_FILE_NAME = "halo_systems.json"
PACKAGED_DATA_DIR = Path(__file__).resolve().parent / "data"


def data_file(data_dir: Optional[Path] = None) -> Path:
    return Path(data_dir or PACKAGED_DATA_DIR) / DATA_FILE_NAME


def read_data_file(path: Path) -> Mapping[str, Any]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise SchemaError(f"halo data file {path} does not exist") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"halo data file {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or "version" not in payload or "systems" not in payload:
        raise SchemaError(f"halo data file {path} needs 'version' and 'systems'")
    if not isinstance(payload["systems"], dict):
        raise SchemaError("'systems' must map names to system descriptions")
    return payload


def _parity(value: Any) -> int:
    if value in ("+", 1, "1", "+1"):
        return 1
    if value in ("-", -1, "-1"):
        return -1
    raise SchemaError(f"parity must be '+' or '-', got {value!r}")


def _channel(entry: Mapping[str, Any]) -> Channel:
    atilde = entry.get("atilde")
    if atilde is None:
        return Channel(spin=int(entry["S"]), isospin=int(entry["T"]))
    if not isinstance(atilde, Mapping):
        raise SchemaError("channel 'atilde' must be null or an object with value and sigma")
    return Channel(
        spin=int(entry["S"]),
        isospin=int(entry["T"]),
        atilde=float(atilde["value"]),
        atilde_sigma=float(atilde.get("sigma", 0.0)),
    )


def _level(entry: Mapping[str, Any]) -> MeasuredLevel:
    return MeasuredLevel(
        energy=float(entry["energy"]),
        sigma=float(entry.get("sigma", 0.0)),
        channel=str(entry["channel"]),
        L=int(entry["L"]),
        label=str(entry.get("label", "")),
    )


def parse_system(entry: Mapping[str, Any], version: str) -> HaloSystem:
    """Build a :class:`HaloSystem` from one entry of the data file."""

    try:
        core = entry["core"]
        return HaloSystem(
            name=str(entry["name"]),
            core_two_J=int(core["two_J"]),
            core_parity=_parity(core["parity"]),
            constituent_mass=float(entry["constituent_mass"]),
            channels=tuple(_channel(c) for c in entry["channels"]),
            measured_levels=tuple(_level(level) for level in entry.get("levels", [])),
            version=version,
            citations=tuple(str(c) for c in entry.get("citations", [])),
        )
    except SelectionRuleError as exc:
        raise SchemaError(str(exc)) from exc
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed halo system entry: {exc!r}") from exc


def list_halo_systems(path: Optional[Path] = None, data_dir: Optional[Path] = None) -> List[str]:
    payload = read_data_file(path or data_file(data_dir))
    return sorted(payload["systems"])


def load_halo_system(
    name: str, path: Optional[Path] = None, data_dir: Optional[Path] = None
) -> HaloSystem:
    """Look up ``name`` (key such as ``he6``) in the data file."""

    source = path or data_file(data_dir)
    payload = read_data_file(source)
    systems = payload["systems"]
    if name not in systems:
        raise SchemaError(f"{source} has no system {name!r}; known: {', '.join(sorted(systems))}")
    logger.debug("loading %s from %s (version %s)", name, source, payload["version"])
    return parse_system(systems[name], str(payload["version"]))


def system_summary(system: HaloSystem) -> Tuple[str, ...]:
    return tuple(
        f"{level.label or level.channel}: {level.energy:+.3f}({level.sigma:.3f}) MeV, L={level.L}"
        for level in system.measured_levels
    )


__all__ = [
    "DATA_FILE_NAME",
    "PACKAGED_DATA_DIR",
    "data_file",
    "read_data_file",
    "parse_system",
    "list_halo_systems",
    "load_halo_system",
    "system_summary",
]
