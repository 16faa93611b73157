"""Command-line behavior: parsing, exit codes, report determinism."""

import json
import sys
import types

import pytest

from ubound import cli, pipelines
from ubound.errors import NonConvergentError
from ubound.kernels import kernel_to_dict, preset_kernel


@pytest.fixture
def kernel_file(tmp_path):
    path = tmp_path / "rank2_5.json"
    path.write_text(json.dumps(kernel_to_dict(preset_kernel("rank2", 5))))
    return str(path)


def run_cli(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParsing:
    def test_float_lists(self):
        assert cli._parse_floats("2,3,4") == (2.0, 3.0, 4.0)
        assert cli._parse_floats("1:3:3") == (1.0, 2.0, 3.0)
        assert cli._parse_floats("5:5:1") == (5.0,)
        with pytest.raises(cli.CliError):
            cli._parse_floats("1:2")
        with pytest.raises(cli.CliError):
            cli._parse_floats("a,b")

    def test_box(self):
        assert cli._parse_box("10x10") == (10, 10)
        assert cli._parse_box("3X4") == (3, 4)
        with pytest.raises(cli.CliError):
            cli._parse_box("3x0")
        with pytest.raises(cli.CliError):
            cli._parse_box("wide")

    def test_config_floor(self):
        with pytest.raises(cli.CliError):
            cli.RunConfig(command="verify", p_list=(1.0,))
        with pytest.raises(cli.CliError):
            cli.RunConfig(command="bell", format="yaml")
        # bell allows small orders
        cli.RunConfig(command="bell", p_list=(0.5,))

    def test_bad_flag_exits_validation(self, capsys):
        code, _, err = run_cli(capsys, ["bell", "--nope"])
        assert code == cli.EXIT_VALIDATION
        assert "error" in err


class TestCommands:
    def test_bell_stdout(self, capsys):
        code, out, _ = run_cli(capsys, ["bell", "--p", "2", "--beta", "1"])
        assert code == cli.EXIT_OK
        report = json.loads(out)
        assert report["b"] == pytest.approx(2.0, rel=1e-10)
        assert report["b_root"] == pytest.approx(1.41421356, rel=1e-7)
        assert report["h0_lower"] == pytest.approx(0.7358, rel=1e-3)
        assert report["schema"] == "ubound/1"

    def test_bell_file_deterministic(self, tmp_path, capsys):
        out = tmp_path / "bell.json"
        argv = ["bell", "--p", "3", "--beta", "0.5", "--out", str(out)]
        assert cli.main(argv) == cli.EXIT_OK
        first = out.read_bytes()
        assert cli.main(argv) == cli.EXIT_OK
        assert out.read_bytes() == first
        assert first == pipelines.stable_json(pipelines.run_bell(3.0, 0.5))

    def test_sweep_csv(self, capsys):
        code, out, _ = run_cli(
            capsys,
            ["sweep", "--p-grid", "2,3", "--beta-grid", "1", "--format", "csv"],
        )
        assert code == cli.EXIT_OK
        lines = out.splitlines()
        assert lines[0].startswith("p,beta,b_root")
        assert len(lines) == 3

    def test_bound_onedim(self, capsys):
        code, out, _ = run_cli(
            capsys,
            ["bound", "one-dim", "--p", "2", "--m1", "0.5,0.5", "--mp", "0.5,0.5"],
        )
        assert code == cli.EXIT_OK
        report = json.loads(out)
        assert set(report) >= {"z", "v", "theta", "rosenthal", "triangle"}

    def test_bound_multisum(self, kernel_file, capsys):
        code, out, _ = run_cli(
            capsys,
            ["bound", "multisum", "--kernel", kernel_file, "--L", "3x3",
             "--p", "2", "--m-max", "2"],
        )
        assert code == cli.EXIT_OK
        report = json.loads(out)
        assert report["bounds"][0]["chosen"] > 0.0

    def test_tail_inline_equals_file(self, tmp_path, capsys):
        psi = '{"family": "power_log", "m": 2}'
        code, inline_out, _ = run_cli(capsys, ["tail", "--psi", psi, "--y", "3,5"])
        assert code == cli.EXIT_OK
        psi_path = tmp_path / "psi.json"
        psi_path.write_text(psi)
        code, file_out, _ = run_cli(
            capsys, ["tail", "--psi", f"@{psi_path}", "--y", "3,5"]
        )
        assert code == cli.EXIT_OK
        assert inline_out == file_out

    def test_tail_csv(self, capsys):
        code, out, _ = run_cli(
            capsys,
            ["tail", "--psi", '{"family": "constant", "c": 1.0}', "--y", "3,4",
             "--format", "csv"],
        )
        assert code == cli.EXIT_OK
        assert out.splitlines()[0] == "y,bound"

    def test_approx(self, kernel_file, capsys):
        code, out, _ = run_cli(capsys, ["approx", "--kernel", kernel_file, "--m-max", "2"])
        assert code == cli.EXIT_OK
        assert json.loads(out)["best"]["degree"] == 2

    def test_verify_pass(self, kernel_file, capsys):
        code, out, _ = run_cli(
            capsys,
            ["verify", "--kernel", kernel_file, "--L", "2x2", "--p", "2,3",
             "--n", "2000", "--seed", "7", "--m-max", "2"],
        )
        assert code == cli.EXIT_OK
        assert json.loads(out)["worst_status"] == "PASS"

    def test_verify_points_inline(self, kernel_file, capsys):
        code, out, _ = run_cli(
            capsys,
            ["verify", "--kernel", kernel_file, "--points", "[[1,1],[2,2]]",
             "--p", "2", "--n", "500", "--m-max", "2"],
        )
        assert code == cli.EXIT_OK
        assert json.loads(out)["config"]["is_box"] is False

    def test_verify_tail_csv(self, kernel_file, capsys):
        code, out, _ = run_cli(
            capsys,
            ["verify", "--kernel", kernel_file, "--L", "2x2", "--p", "2",
             "--n", "500", "--m-max", "2", "--format", "csv"],
        )
        assert code == cli.EXIT_OK
        assert out.splitlines()[0] == "y,empirical,ci_lo,ci_hi,bound"

    def test_battery_tiny(self, capsys):
        code, out, _ = run_cli(
            capsys,
            ["verify", "--battery", "--only", "constant", "--grid-n", "4",
             "--n", "200", "--chunks", "2", "--m-max", "2", "--no-scaled",
             "--p", "2"],
        )
        assert code == cli.EXIT_OK
        assert json.loads(out)["summary"]["worst_status"] == "PASS"


class TestExitCodes:
    def test_missing_kernel_file(self, capsys):
        code, _, err = run_cli(
            capsys, ["verify", "--kernel", "/no/such.json", "--L", "2x2", "--p", "2"]
        )
        assert code == cli.EXIT_VALIDATION
        assert "kernel file not found" in err

    def test_low_order_rejected(self, capsys):
        code, _, err = run_cli(
            capsys, ["bound", "one-dim", "--p", "1.5", "--m1", "1", "--mp", "1"]
        )
        assert code == cli.EXIT_VALIDATION
        assert "moment order" in err

    def test_csv_not_defined(self, capsys):
        code, _, err = run_cli(
            capsys, ["bell", "--p", "2", "--beta", "1", "--format", "csv"]
        )
        assert code == cli.EXIT_VALIDATION

    def test_fail_report_maps_to_2(self, monkeypatch, capsys, kernel_file):
        monkeypatch.setattr(
            cli.pipelines, "run_verify", lambda *a, **k: {"worst_status": "FAIL"}
        )
        code, _, err = run_cli(
            capsys, ["verify", "--kernel", kernel_file, "--L", "2x2", "--p", "2"]
        )
        assert code == cli.EXIT_BOUND_FAIL
        assert "bound violation" in err

    def test_battery_fail_maps_to_2(self, monkeypatch, capsys):
        monkeypatch.setattr(
            cli.pipelines,
            "run_battery",
            lambda *a, **k: {"summary": {"worst_status": "FAIL"}},
        )
        code, _, _ = run_cli(capsys, ["verify", "--battery"])
        assert code == cli.EXIT_BOUND_FAIL

    def test_numeric_failure_maps_to_3(self, monkeypatch, capsys):
        def boom(*a, **k):
            raise NonConvergentError("series did not converge")

        monkeypatch.setattr(cli.pipelines, "run_bell", boom)
        code, _, err = run_cli(capsys, ["bell", "--p", "2", "--beta", "1"])
        assert code == cli.EXIT_NUMERIC
        assert "numeric failure" in err


class TestServerMode:
    def _fake_httpx(self, status_code, payload):
        class FakeResponse:
            def __init__(self):
                self.status_code = status_code
                self.text = json.dumps(payload)

            def json(self):
                return payload

        calls = {}

        def post(url, json=None, timeout=None):
            calls["url"] = url
            calls["payload"] = json
            return FakeResponse()

        fake = types.ModuleType("httpx")
        fake.post = post
        fake.HTTPError = Exception
        return fake, calls

    def test_success_writes_server_report(self, monkeypatch, capsys):
        report = pipelines.run_bell(2.0, 1.0)
        fake, calls = self._fake_httpx(200, report)
        monkeypatch.setitem(sys.modules, "httpx", fake)
        code, out, _ = run_cli(
            capsys, ["bell", "--p", "2", "--beta", "1", "--server", "http://svc:1"]
        )
        assert code == cli.EXIT_OK
        assert calls["url"] == "http://svc:1/bell"
        assert calls["payload"] == {"p": 2.0, "beta": 1.0}
        assert out.encode() == pipelines.stable_json(report)

    def test_rejection_maps_to_1(self, monkeypatch, capsys):
        fake, _ = self._fake_httpx(422, {"detail": "bad"})
        monkeypatch.setitem(sys.modules, "httpx", fake)
        code, _, err = run_cli(
            capsys, ["bell", "--p", "2", "--beta", "1", "--server", "http://svc:1"]
        )
        assert code == cli.EXIT_VALIDATION

    def test_server_error_maps_to_3(self, monkeypatch, capsys):
        fake, _ = self._fake_httpx(500, {"detail": "exploded"})
        monkeypatch.setitem(sys.modules, "httpx", fake)
        code, _, _ = run_cli(
            capsys, ["bell", "--p", "2", "--beta", "1", "--server", "http://svc:1"]
        )
        assert code == cli.EXIT_NUMERIC

    def test_payload_routes(self, kernel_file):
        cases = [
            (cli.RunConfig(command="sweep", p_grid=(2.0,), beta_grid=(1.0,)), "/sweep"),
            (
                cli.RunConfig(command="bound", subcommand="one-dim", p=2.0,
                              p_list=(2.0,), m1=(1.0,), mp=(1.0,)),
                "/bound/one-dim",
            ),
            (
                cli.RunConfig(command="bound", subcommand="multisum",
                              kernel=kernel_file, l_box=(2, 2), p_list=(2.0,)),
                "/bound/multisum",
            ),
            (
                cli.RunConfig(command="tail", psi={"family": "constant", "c": 1.0},
                              y_grid=(3.0,)),
                "/tail",
            ),
            (cli.RunConfig(command="approx", kernel=kernel_file, p=2.0), "/approx"),
            (
                cli.RunConfig(command="verify", kernel=kernel_file,
                              points=((1, 1),), p_list=(2.0,)),
                "/verify",
            ),
            (cli.RunConfig(command="verify", battery=True), "/verify/battery"),
        ]
        for cfg, want in cases:
            path, payload = cli._server_payload(cfg)
            assert path == want
            assert isinstance(payload, dict)
