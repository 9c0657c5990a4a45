import json
import math
from pathlib import Path

import numpy as np
import pytest

from s2contact.errors import SchemaError
from s2contact.reports import (
    RunManifest,
    artifact_version,
    canonical_json,
    format_float,
    manifest_path,
    read_json,
    read_manifest,
    round_float,
    write_manifest,
    write_text_atomic,
)


def test_format_float_uses_fifteen_significant_digits() -> None:
    assert format_float(1.0) == "1"
    assert format_float(-0.1) == "-0.1"
    assert format_float(math.pi) == "3.14159265358979"
    assert format_float(1.0 / 3.0e12) == "3.33333333333333e-13"


def test_round_float() -> None:
    assert round_float(2.0 / 3.0) == 0.666666666666667
    assert round_float(float("nan")) is None
    assert round_float(float("-inf")) is None


def test_canonical_json_sorts_and_rounds() -> None:
    payload = {
        "b": [1.0 / 3.0, float("nan")],
        "a": {"path": Path("/tmp/x"), "flag": True, "n": np.int64(7), "v": np.float64(0.1 + 0.2)},
        "c": None,
    }
    text = canonical_json(payload)
    assert text.endswith("\n")
    decoded = json.loads(text)
    assert list(decoded) == ["a", "b", "c"]
    assert decoded["b"] == [0.333333333333333, None]
    assert decoded["a"] == {"flag": True, "n": 7, "path": "/tmp/x", "v": 0.3}
    assert canonical_json(payload) == text


def test_canonical_json_rejects_unknown_objects() -> None:
    with pytest.raises(TypeError):
        canonical_json({"value": object()})


def test_write_text_atomic_creates_parents_and_replaces(tmp_path: Path) -> None:
    target = tmp_path / "deep" / "dir" / "out.txt"
    assert write_text_atomic(target, "first\n") == target
    write_text_atomic(target, "second\n")
    assert target.read_text(encoding="utf-8") == "second\n"
    assert [p.name for p in target.parent.iterdir()] == ["out.txt"]


def test_manifest_round_trip(tmp_path: Path) -> None:
    output = tmp_path / "he6-fit.json"
    assert manifest_path(output) == tmp_path / "he6-fit.json.manifest.json"
    manifest = RunManifest(
        command="fit",
        inputs={"system": "he6", "samples": 100},
        seed=3,
        versions={"s2contact": artifact_version(), "data": "2024.2"},
        outputs=[str(output)],
    )
    written = write_manifest(manifest, manifest_path(output))
    assert read_manifest(written) == manifest


def test_artifact_version_is_a_string() -> None:
    assert isinstance(artifact_version(), str)
    assert artifact_version()


def test_read_json_errors(tmp_path: Path) -> None:
    with pytest.raises(SchemaError, match="does not exist"):
        read_json(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("[1, 2", encoding="utf-8")
    with pytest.raises(SchemaError, match="not valid JSON"):
        read_json(broken)
    listing = tmp_path / "list.json"
    listing.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(SchemaError, match="JSON object"):
        read_json(listing)
    partial = tmp_path / "partial.json"
    partial.write_text('{"command": "eval"}', encoding="utf-8")
    with pytest.raises(SchemaError, match="malformed run manifest"):
        read_manifest(partial)
