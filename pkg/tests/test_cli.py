import json
from pathlib import Path

from stiefel_xform.cli import run
from stiefel_xform.report import SCHEMA_VERSION, ReportEnvelope, aggregate_status
from stiefel_xform.special import ConstantKind

SCHEMA_PATH = Path(__file__).resolve().parent.parent / "src" / "stiefel_xform" / "schema" / "report_envelope.schema.json"


def check_required(instance, schema, defs):
    """Minimal structural validation against the shipped schema: required keys
    exist and nested estimates carry their required fields."""
    for key in schema.get("required", []):
        assert key in instance, f"missing {key}"
    for key, sub in schema.get("properties", {}).items():
        if key in instance and isinstance(instance[key], dict) and "$ref" in sub:
            ref = sub["$ref"].split("/")[-1]
            check_required(instance[key], defs[ref], defs)


class TestListCommands:
    def test_list(self, capsys):
        assert run(["list"]) == 0
        out = capsys.readouterr().out
        assert "ID-MASS-COS" in out and "ID-GTY" in out

    def test_list_json(self, capsys):
        assert run(["list", "--json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert {e["id"] for e in data} >= {"ID-ARN", "ID-EXL"}

    def test_list_constants(self, capsys):
        assert run(["list-constants"]) == 0
        out = capsys.readouterr().out
        for kind in ConstantKind:
            assert kind.value in out

    def test_list_constants_json(self, capsys):
        assert run(["list-constants", "--json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert len(data) == len(ConstantKind)


class TestVerifyCommand:
    def test_verify_pass_json(self, capsys):
        code = run([
            "verify", "ID-MASS-COS", "--n", "3", "--m", "1", "--k", "1", "--alpha", "2",
            "--samples", "30000", "--seed", "42", "--json",
        ])
        out = capsys.readouterr().out
        assert code == 0
        doc = json.loads(out)
        assert doc["schema_version"] == SCHEMA_VERSION
        report = doc["reports"][0]
        assert "z_score" in report
        assert report["verdict"] == "pass"

    def test_verify_rejects_violated_guard(self, capsys):
        code = run(["verify", "ID-GTY", "--n", "3", "--m", "2", "--k", "2", "--alpha", "2.5"])
        captured = capsys.readouterr()
        assert code == 3
        assert "k <= n-m" in captured.err

    def test_unknown_identity(self, capsys):
        assert run(["verify", "ID-NOPE"]) == 3

    def test_constant_mismatch_exit_code(self):
        code = run([
            "verify", "ID-ARN", "--samples", "40000", "--seed", "42", "--json",
            "--out", "/tmp/_arn_cli.json",
        ])
        assert code == 2
        doc = json.loads(Path("/tmp/_arn_cli.json").read_text())
        assert doc["status"] == "constant-mismatch"

    def test_out_file(self, tmp_path, capsys):
        target = tmp_path / "report.json"
        code = run([
            "verify", "ID-MASS-FUNK", "--samples", "20000", "--seed", "7", "--json",
            "--out", str(target),
        ])
        assert code == 0
        assert json.loads(target.read_text())["status"] == "pass"
        assert capsys.readouterr().out == ""

    def test_text_and_json_same_numbers(self, capsys):
        args = ["verify", "ID-MASS-FUNK", "--samples", "20000", "--seed", "7"]
        run(args + ["--json"])
        doc = json.loads(capsys.readouterr().out)
        run(args)
        text = capsys.readouterr().out
        mean = doc["reports"][0]["lhs"]["mean"]
        assert f"{mean:.8g}" in text

    def test_env_seed(self, capsys, monkeypatch):
        monkeypatch.setenv("STIEFEL_XFORM_SEED", "777")
        run(["verify", "ID-MASS-FUNK", "--samples", "20000", "--json"])
        doc = json.loads(capsys.readouterr().out)
        assert doc["config"]["seed"] == 777


class TestEvalCommand:
    def test_eval_cosine(self, capsys):
        code = run([
            "eval", "--kind", "cosine", "--n", "3", "--m", "1", "--k", "1",
            "--alpha", "2", "--field", "const", "--samples", "30000", "--seed", "5", "--json",
        ])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        est = doc["reports"][0]["estimate"]
        assert abs(est["mean"] - 0.5) <= 5 * est["se"]

    def test_eval_composite(self, capsys):
        code = run([
            "eval", "--kind", "composite-cosine", "--n", "4", "--m", "2", "--k", "3",
            "--lam", "1.5,0.5", "--field", "const", "--point", "random",
            "--samples", "20000", "--seed", "5", "--json",
        ])
        assert code == 0

    def test_eval_requires_dims(self, capsys):
        assert run(["eval", "--kind", "cosine", "--alpha", "2"]) == 3

    def test_eval_guard_violation(self, capsys):
        code = run([
            "eval", "--kind", "qsin", "--n", "3", "--m", "2", "--alpha", "2",
            "--field", "const", "--samples", "20000",
        ])
        assert code == 3


class TestAuditCommand:
    def test_audit(self, capsys):
        code = run(["audit", "ID-MASS-COS", "--samples", "30000", "--seed", "9", "--json"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        fit = doc["reports"][0]["constant_empirical"]["value"]
        assert abs(fit - 0.5) <= 0.05


class TestSuiteCommand:
    def test_smoke_suite(self, tmp_path, capsys):
        out = tmp_path / "suite.json"
        csv_path = tmp_path / "suite.csv"
        code = run([
            "suite", "--profile", "smoke", "--samples", "5000", "--seed", "42",
            "--json", "--out", str(out), "--csv", str(csv_path),
        ])
        assert code in (0, 2)
        doc = json.loads(out.read_text())
        assert len(doc["reports"]) >= 20
        assert doc["exit_code"] == code
        header = csv_path.read_text().splitlines()[0]
        assert header.startswith("id,params,verdict,z_score")
        # schema conformance of the envelope and its first report
        schema = json.loads(SCHEMA_PATH.read_text())
        defs = schema["definitions"]
        check_required(doc, schema, defs)
        check_required(doc["reports"][0], defs["identity_report"], defs)

    def test_figures(self, tmp_path):
        figdir = tmp_path / "figs"
        code = run([
            "suite", "--profile", "smoke", "--samples", "5000", "--seed", "42",
            "--json", "--out", str(tmp_path / "s.json"), "--figures", str(figdir),
        ])
        assert code in (0, 2)
        assert (figdir / "zscores.png").exists()
        assert (figdir / "constants.png").exists()


class TestUsageErrors:
    def test_no_command(self):
        assert run([]) == 3

    def test_bad_flag(self):
        assert run(["verify", "ID-MASS-COS", "--samples", "notanumber"]) == 3


class TestAggregation:
    def test_status_ordering(self):
        mk = lambda verdict, gated=True: {"verdict": verdict, "gated": gated}
        assert aggregate_status([mk("pass"), mk("pass")]) == "pass"
        assert aggregate_status([mk("pass"), mk("constant-mismatch")]) == "constant-mismatch"
        assert aggregate_status([mk("constant-mismatch"), mk("fail")]) == "fail"
        assert aggregate_status([mk("fail", gated=False), mk("pass")]) == "pass"

    def test_envelope_exit_codes(self):
        env = ReportEnvelope("verify", {}, [{"verdict": "constant-mismatch", "gated": True}])
        assert env.exit_code == 2


class TestEnvelopeRoundTrip:
    def test_lossless_serialization(self, capsys):
        run(["verify", "ID-MASS-FUNK", "--samples", "20000", "--seed", "3", "--json"])
        out = capsys.readouterr().out
        doc = json.loads(out)
        assert json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n" == out
