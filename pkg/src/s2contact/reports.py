"""Output helpers: float formatting, atomic writes, canonical JSON and run manifests."""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from .errors import SchemaError

SIGNIFICANT_DIGITS = 15


def artifact_version() -> str:
    try:
        return metadata.version("s2contact")
    except metadata.PackageNotFoundError:
        return "0.0.0+local"


def format_float(value: float) -> str:
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def round_float(value: float) -> Optional[float]:
    """Value rounded to the output precision; None for NaN and infinities."""

    if not math.isfinite(value):
        return None
    return float(format_float(value))


def _clean(value: Any) -> Any:
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return round_float(value)
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, Mapping):
        return {str(key): _clean(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(item) for item in value]
    if hasattr(value, "item"):
        return _clean(value.item())
    raise TypeError(f"cannot serialize {type(value).__name__}")


def canonical_json(payload: Mapping[str, Any]) -> str:
    """Sorted-key JSON with every float at the output precision."""

    return json.dumps(_clean(payload), sort_keys=True, indent=2) + "\n"


def write_text_atomic(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle = tempfile.NamedTemporaryFile(
        "w", encoding="utf-8", dir=path.parent, prefix=f".{path.name}.", delete=False
    )
    try:
        with handle:
            handle.write(text)
        os.replace(handle.name, path)
    except BaseException:
        Path(handle.name).unlink(missing_ok=True)
        raise
    return path


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to repeat a run: command, inputs, seed and versions."""

    command: str
    inputs: Dict[str, Any]
    seed: Optional[int] = None
    versions: Dict[str, Optional[str]] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "seed": self.seed,
            "versions": self.versions,
            "outputs": self.outputs,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunManifest":
        try:
            return cls(
                command=str(data["command"]),
                inputs=dict(data["inputs"]),
                seed=data.get("seed"),
                versions=dict(data.get("versions", {})),
                outputs=list(data.get("outputs", [])),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed run manifest: {exc!r}") from exc


def manifest_path(output: Path) -> Path:
    output = Path(output)
    return output.with_name(output.name + ".manifest.json")


def write_manifest(manifest: RunManifest, path: Path) -> Path:
    return write_text_atomic(path, canonical_json(manifest.to_dict()))


def read_json(path: Path) -> Mapping[str, Any]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise SchemaError(f"{path} does not exist") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise SchemaError(f"{path} must hold a JSON object")
    return payload


def read_manifest(path: Path) -> RunManifest:
    return RunManifest.from_dict(read_json(path))


__all__ = [
    "SIGNIFICANT_DIGITS",
    "RunManifest",
    "artifact_version",
    "canonical_json",
    "format_float",
    "manifest_path",
    "read_json",
    "read_manifest",
    "round_float",
    "write_manifest",
    "write_text_atomic",
]
