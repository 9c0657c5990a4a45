import json
from pathlib import Path

import pytest

import s2contact.controller as controller
from s2contact import (
    CurveRequest,
    EvalRequest,
    FitRequest,
    PredictRequest,
    ReplayRequest,
    ZerosRequest,
    fulfill_request,
)
from s2contact.analogs import ho_condition
from s2contact.controller import (
    CurveResult,
    EvalResult,
    FitOutcome,
    PredictOutcome,
    ZerosResult,
    condition_for,
    poles_through,
    request_from_manifest,
    request_inputs,
)
from s2contact.errors import PoleError, SchemaError, VersionMismatchError
from s2contact.quantization import band_zeros, z_closed, z_sum
from s2contact.reports import RunManifest, read_json, read_manifest


def test_eval_matches_closed_form() -> None:
    result = fulfill_request(EvalRequest(x=-1.0, band=1))
    assert isinstance(result, EvalResult)
    assert result.value == z_closed(1, -1.0)
    assert result.manifest_file is None


def test_eval_methods_and_geometries() -> None:
    general = fulfill_request(EvalRequest(x=2.5, band=0, method="general")).value
    assert general == pytest.approx(z_closed(0, 2.5), abs=1e-9)
    truncated = fulfill_request(EvalRequest(x=2.5, band=0, method="sum", cutoff=50.0)).value
    assert truncated == z_sum(0, 2.5, 50)
    shifted = fulfill_request(EvalRequest(x=2.5, geometry="ho", x_cm=1.0)).value
    assert shifted == ho_condition(1.5)


def test_eval_at_a_pole_raises() -> None:
    with pytest.raises(PoleError):
        fulfill_request(EvalRequest(x=4.0, band=0))


def test_sphere_rejects_centre_of_mass_shift() -> None:
    with pytest.raises(ValueError):
        fulfill_request(EvalRequest(x=1.0, x_cm=0.5))
    with pytest.raises(ValueError):
        condition_for("cube")  # type: ignore[arg-type]


def test_eval_manifest_and_replay(tmp_path: Path) -> None:
    manifest_file = tmp_path / "eval.manifest.json"
    first = fulfill_request(EvalRequest(x=-2.0, band=2, manifest=manifest_file))
    assert first.manifest_file == manifest_file
    manifest = read_manifest(manifest_file)
    assert manifest.command == "eval"
    assert manifest.inputs["x"] == -2.0
    assert "manifest" not in manifest.inputs
    assert manifest.versions["s2contact"]

    replayed = fulfill_request(ReplayRequest(manifest=manifest_file))
    assert isinstance(replayed, EvalResult)
    assert replayed.value == first.value


def test_poles_through() -> None:
    assert poles_through("s2", 0, 40.0) == (0.0, 4.0, 12.0, 24.0, 40.0)
    assert poles_through("s2", 1, 32.0) == (2.0, 8.0, 18.0, 32.0)
    assert poles_through("ho", 0, 6.0, x_cm=1.0) == (2.0, 4.0, 6.0)
    assert poles_through("torus", 0, 5.0) == (0.0, 1.0, 2.0, 4.0, 5.0)


def test_curve_writes_segmented_csv(tmp_path: Path) -> None:
    output = tmp_path / "curves" / "z0.csv"
    result = fulfill_request(CurveRequest(output=output, band=0, points=500))
    assert isinstance(result, CurveResult)
    assert result.path == output
    assert result.rows == 500
    assert result.poles == (0.0, 4.0, 12.0, 24.0, 40.0)
    assert result.segments == 6

    lines = output.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# s2contact ")
    assert "geometry=s2 band=0" in lines[0]
    assert lines[1] == "x,value,segment"
    rows = [line.split(",") for line in lines[2:]]
    assert len(rows) == 500
    assert float(rows[0][0]) == -9.0
    assert float(rows[-1][0]) == 40.0
    segments = [int(row[2]) for row in rows]
    assert segments == sorted(segments)
    assert set(segments) == {0, 1, 2, 3, 4, 5}
    assert rows[-1][1] == ""
    for x, value, segment in rows:
        if value and abs(float(value)) < 10.0:
            assert float(value) == pytest.approx(z_closed(0, float(x)), rel=1e-9, abs=1e-9)

    manifest = read_manifest(result.manifest_file)
    assert manifest.command == "curve"
    assert manifest.outputs == [str(output), str(result.manifest_file)]


def test_curve_replay_reproduces_the_file(tmp_path: Path) -> None:
    output = tmp_path / "ho.csv"
    result = fulfill_request(CurveRequest(output=output, geometry="ho", x_min=-3.0, x_max=8.0, points=200, x_cm=1.0))
    assert result.poles == (2.0, 4.0, 6.0, 8.0)
    original = output.read_bytes()
    output.unlink()
    fulfill_request(ReplayRequest(manifest=result.manifest_file))
    assert output.read_bytes() == original


def test_curve_rejects_empty_range(tmp_path: Path) -> None:
    with pytest.raises(ValueError):
        fulfill_request(CurveRequest(output=tmp_path / "a.csv", points=1))
    with pytest.raises(ValueError):
        fulfill_request(CurveRequest(output=tmp_path / "b.csv", x_min=3.0, x_max=3.0))


def test_zeros_request() -> None:
    result = fulfill_request(ZerosRequest(band=0, count=4))
    assert isinstance(result, ZerosResult)
    assert result.zeros == band_zeros(0, 4)
    assert result.poles == (0.0, 4.0, 12.0, 24.0)

    oscillator = fulfill_request(ZerosRequest(geometry="ho", count=2))
    assert oscillator.zeros[0] == pytest.approx(-1.92326, abs=1e-5)
    assert oscillator.poles == (1.0, 3.0)


def test_request_inputs_and_manifest_round_trip(tmp_path: Path) -> None:
    request = FitRequest(system="he6", output=tmp_path / "fit.json", samples=30, seed=4)
    inputs = request_inputs(request)
    assert inputs["output"] == str(tmp_path / "fit.json")
    assert inputs["data_file"] is None
    rebuilt = request_from_manifest(RunManifest(command="fit", inputs=inputs, seed=4))
    assert rebuilt == request

    with pytest.raises(SchemaError):
        request_from_manifest(RunManifest(command="download", inputs={}))
    with pytest.raises(SchemaError):
        request_from_manifest(RunManifest(command="eval", inputs={"x": 1.0, "genre": "trance"}))
    with pytest.raises(SchemaError):
        request_from_manifest(RunManifest(command="eval", inputs={"band": 1}))


def _fit(tmp_path: Path, name: str = "he6-fit.json", samples: int = 40) -> FitOutcome:
    result = fulfill_request(FitRequest(system="he6", output=tmp_path / name, samples=samples, seed=3))
    assert isinstance(result, FitOutcome)
    return result


def test_fit_writes_report_and_manifest(tmp_path: Path) -> None:
    result = _fit(tmp_path)
    report = read_json(result.path)
    assert report["command"] == "fit"
    assert report["system"] == "he6"
    assert report["data_version"] == "2024.2"
    fit = report["fits"]["S0T1"]
    assert fit["atilde"] == pytest.approx(-5.58, abs=0.01)
    assert fit["radius"] == pytest.approx(6.258, abs=0.005)
    assert fit["samples"] == 40
    assert report["manifest"]["seed"] == 3
    assert report["manifest"]["versions"]["data"] == "2024.2"
    assert result.manifest_file.exists()


def test_fit_is_byte_identical_on_repeat(tmp_path: Path) -> None:
    first = _fit(tmp_path).path.read_bytes()
    second = _fit(tmp_path).path.read_bytes()
    assert first == second


def test_fit_replay(tmp_path: Path) -> None:
    result = _fit(tmp_path)
    original = result.path.read_bytes()
    replayed = fulfill_request(ReplayRequest(manifest=result.manifest_file))
    assert isinstance(replayed, FitOutcome)
    assert replayed.path.read_bytes() == original


def test_predict_from_fit_report(tmp_path: Path) -> None:
    fit = _fit(tmp_path)
    output = tmp_path / "he6-levels.json"
    result = fulfill_request(PredictRequest(system="he6", fit_report=fit.path, output=output))
    assert isinstance(result, PredictOutcome)
    report = json.loads(output.read_text(encoding="utf-8"))
    assert report["command"] == "predict"
    energies = [level["energy"] for level in report["levels"]]
    assert energies == sorted(energies)
    excited = [level for level in report["levels"] if level["L"] == 0 and level["branch"] == 1]
    assert excited[0]["energy"] == pytest.approx(0.963, abs=0.005)
    assert excited[0]["parity"] == "+"
    for failure in report["failures"]:
        assert set(failure) == {"channel", "L", "branch", "message"}


def test_predict_rejects_mismatched_reports(tmp_path: Path) -> None:
    fit = _fit(tmp_path)
    report = read_json(fit.path)

    stale = dict(report, data_version="2023.9")
    stale_path = tmp_path / "stale.json"
    stale_path.write_text(json.dumps(stale), encoding="utf-8")
    with pytest.raises(VersionMismatchError):
        fulfill_request(PredictRequest(system="he6", fit_report=stale_path, output=tmp_path / "x.json"))

    with pytest.raises(VersionMismatchError):
        fulfill_request(PredictRequest(system="li11", fit_report=fit.path, output=tmp_path / "y.json"))

    tampered = json.loads(json.dumps(report))
    tampered["fits"]["S0T1"]["radius"] = 7.0
    tampered_path = tmp_path / "tampered.json"
    tampered_path.write_text(json.dumps(tampered), encoding="utf-8")
    with pytest.raises(SchemaError):
        fulfill_request(PredictRequest(system="he6", fit_report=tampered_path, output=tmp_path / "z.json"))

    with pytest.raises(SchemaError):
        fulfill_request(
            PredictRequest(system="he6", fit_report=fit.manifest_file, output=tmp_path / "w.json")
        )


def test_fit_uses_the_fit_system_hook(monkeypatch, tmp_path: Path) -> None:
    calls = []
    original = controller.fit_system

    def recording(system, samples, seed, workers=1):
        calls.append((system.name, samples, seed, workers))
        return original(system, samples, seed, workers)

    monkeypatch.setattr(controller, "fit_system", recording)
    fulfill_request(FitRequest(system="he6", output=tmp_path / "f.json", samples=20, seed=9, workers=2))
    assert calls == [("6He", 20, 9, 2)]
