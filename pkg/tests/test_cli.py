import asyncio
from pathlib import Path

import pytest

import s2contact.cli as cli
import s2contact.controller as controller
from s2contact.controller import CurveRequest, EvalRequest, FitRequest, PredictRequest, ReplayRequest, ZerosRequest
from s2contact.errors import BracketError, NoBracketError, PoleError, SchemaError
from s2contact.quantization import band_zeros, z_closed
from s2contact.reports import format_float


def _run(argv) -> int:
    return asyncio.run(cli.main(argv))


def test_parse_args_eval_defaults() -> None:
    args = cli.parse_args(["eval", "--x", "1.5"])
    assert args.command == "eval"
    assert args.x == 1.5
    assert args.band == 0
    assert args.geometry == "s2"
    assert args.method == "auto"
    assert args.cutoff == 200.0
    assert args.extrapolate
    assert args.x_cm == 0.0
    assert args.manifest is None


def test_parse_args_torus_options() -> None:
    args = cli.parse_args(
        ["curve", "--geometry", "torus", "--no-extrapolate", "--cutoff", "400", "--x-cm", "1"]
    )
    assert args.geometry == "torus"
    assert not args.extrapolate
    assert args.cutoff == 400.0
    assert args.x_cm == 1.0
    assert args.points == 2000
    assert (args.x_min, args.x_max) == (-9.0, 40.0)


def test_parse_args_fit_output_follows_env(monkeypatch, tmp_path: Path) -> None:
    monkeypatch.setenv("S2CONTACT_OUTPUT_DIR", str(tmp_path / "runs"))
    monkeypatch.setenv("S2CONTACT_SAMPLES", "250")
    monkeypatch.setenv("S2CONTACT_WORKERS", "3")
    args = cli.parse_args(["fit", "--system", "he6"])
    assert args.out == tmp_path / "runs" / "he6-fit.json"
    assert args.samples == 250
    assert args.workers == 3
    assert args.seed == 1

    predict = cli.parse_args(["predict", "--system", "li6", "--fit", "li6-fit.json", "--L-max", "3"])
    assert predict.out == tmp_path / "runs" / "li6-predict.json"
    assert predict.L_max == 3
    assert predict.levels == 4


def test_build_request_per_command(tmp_path: Path) -> None:
    out = str(tmp_path / "c.csv")
    assert cli.build_request(cli.parse_args(["eval", "--x", "2", "-L", "1", "--method", "general"])) == EvalRequest(
        x=2.0, band=1, method="general"
    )
    curve = cli.build_request(cli.parse_args(["curve", "--out", out, "--points", "10"]))
    assert curve == CurveRequest(output=Path(out), points=10)
    assert cli.build_request(cli.parse_args(["zeros", "-L", "2", "--count", "5"])) == ZerosRequest(band=2, count=5)

    fit = cli.build_request(cli.parse_args(["fit", "--system", "he6", "--samples", "30", "--out", out]))
    assert isinstance(fit, FitRequest)
    assert (fit.system, fit.samples, fit.output) == ("he6", 30, Path(out))

    predict = cli.build_request(
        cli.parse_args(["predict", "--system", "he6", "--fit", out, "--levels", "2", "--out", out])
    )
    assert isinstance(predict, PredictRequest)
    assert predict.fit_report == Path(out)
    assert predict.levels_per_band == 2

    assert cli.build_request(cli.parse_args(["replay", out])) == ReplayRequest(manifest=Path(out))


def test_main_eval_prints_value(capsys) -> None:
    assert _run(["eval", "--x", "-1", "--band", "2"]) == cli.EXIT_OK
    assert capsys.readouterr().out.strip() == format_float(z_closed(2, -1.0))


def test_main_zeros_lists_each_branch(capsys) -> None:
    assert _run(["zeros", "--band", "1", "--count", "3"]) == cli.EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines == [f"{i}\t{format_float(z)}" for i, z in enumerate(band_zeros(1, 3))]


def test_main_curve_reports_segments(capsys, tmp_path: Path) -> None:
    out = tmp_path / "z1.csv"
    assert _run(["curve", "-L", "1", "--points", "100", "--x-max", "20", "--out", str(out)]) == cli.EXIT_OK
    printed = capsys.readouterr().out
    assert f"Wrote 100 points in 4 segments to {out}" in printed
    assert "Poles: 2, 8, 18" in printed
    assert out.exists()


def test_main_exit_codes(capsys) -> None:
    assert _run(["eval", "--x", "4"]) == cli.EXIT_POLE
    assert capsys.readouterr().err.startswith("error: ")

    assert _run(["eval", "--x", "1", "--x-cm", "2"]) == cli.EXIT_USAGE
    assert _run(["fit", "--system", "c12"]) == cli.EXIT_USAGE
    assert _run(["eval"]) == cli.EXIT_USAGE
    assert _run([]) == cli.EXIT_USAGE
    assert "error: " in capsys.readouterr().err


def test_main_fit_failure_exit_code(monkeypatch, tmp_path: Path, capsys) -> None:
    def failing(*args, **kwargs):
        raise NoBracketError("no sign change in the radius scan")

    monkeypatch.setattr(controller, "fit_system", failing)
    code = _run(["fit", "--system", "he6", "--out", str(tmp_path / "f.json")])
    assert code == cli.EXIT_FIT
    assert "no sign change" in capsys.readouterr().err
    assert not (tmp_path / "f.json").exists()


def test_main_fit_and_predict(capsys, tmp_path: Path) -> None:
    fit_out = tmp_path / "he6-fit.json"
    assert _run(["fit", "--system", "he6", "--samples", "30", "--out", str(fit_out)]) == cli.EXIT_OK
    printed = capsys.readouterr().out
    assert "6He (data 2024.2):" in printed
    assert "measured 0+ ground state: -0.972(0.006) MeV, L=0" in printed
    assert "S0T1: atilde = -5.5" in printed or "S0T1: atilde = -5.6" in printed
    assert f"Report: {fit_out}" in printed

    levels_out = tmp_path / "he6-levels.json"
    code = _run(
        ["predict", "--system", "he6", "--fit", str(fit_out), "--L-max", "1", "--levels", "2", "--out", str(levels_out)]
    )
    assert code == cli.EXIT_OK
    printed = capsys.readouterr().out
    assert "6He predicted levels:" in printed
    assert "S0T1 L=1" in printed
    assert levels_out.exists()


def test_exit_code_for() -> None:
    assert cli.exit_code_for(PoleError("pole")) == cli.EXIT_POLE
    assert cli.exit_code_for(NoBracketError("none")) == cli.EXIT_FIT
    assert cli.exit_code_for(BracketError("no sign change")) == cli.EXIT_FIT
    assert cli.exit_code_for(SchemaError("bad")) == cli.EXIT_USAGE
    assert cli.exit_code_for(FileNotFoundError("gone")) == cli.EXIT_USAGE
    with pytest.raises(KeyError):
        cli.exit_code_for(KeyError("unexpected"))
