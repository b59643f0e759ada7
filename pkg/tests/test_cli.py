import inspect
import json
import shutil
import sys
import tempfile
import unittest
from io import StringIO
from pathlib import Path
from unittest.mock import patch

import config as conf
import run
from commands import CommandExecuter
from commands.validation import KNOWN_COMMANDS, SETTINGS_KEYS, validate_config
from svtail.bounds import shift_bound_constant
from svtail.ensemble import EnsembleSpec
from svtail.errors import NonConvergenceError

TAIL_ARGS = ["tail", "--n", "6", "--trials", "100", "--eps-min", "0.01", "--eps-max", "0.5", "--eps-points", "5"]


class TestCli(unittest.TestCase):
    """End-to-end runs of run.main against a temporary output directory."""

    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp())
        self.stdout_capture = StringIO()
        self.stderr_capture = StringIO()
        sys.stdout = self.stdout_capture
        sys.stderr = self.stderr_capture

    def tearDown(self):
        sys.stdout = sys.__stdout__
        sys.stderr = sys.__stderr__
        shutil.rmtree(self.tmp, ignore_errors=True)

    def _manifest(self, out: Path) -> dict:
        return json.loads((out / "manifest.json").read_text(encoding="utf-8"))

    def test_tail_run_writes_outputs(self):
        out = self.tmp / "tail"
        self.assertEqual(run.main(TAIL_ARGS + ["--out", str(out), "--seed", "3"]), run.EXIT_OK)
        for name in ("manifest.json", "data.csv", "summary.json"):
            self.assertTrue((out / name).is_file(), name)

        data = (out / "data.csv").read_bytes()
        self.assertTrue(data.startswith(b"eps,trials,successes,p_hat,ci_lo,ci_hi\r\n"))
        self.assertEqual(data.count(b"\r\n"), 6)

        manifest = self._manifest(out)
        self.assertEqual(manifest["command"], "tail")
        self.assertEqual(manifest["master_seed"], 3)
        self.assertEqual(len(manifest["config_hash"]), 64)
        self.assertEqual(manifest["config"]["params"]["n"], 6)

        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        self.assertEqual(summary["trials"], 100)
        self.assertEqual(len(summary["bounds"]), 5)

    def test_replay_from_manifest_is_identical(self):
        first, second = self.tmp / "first", self.tmp / "second"
        self.assertEqual(run.main(TAIL_ARGS + ["--out", str(first), "--seed", "9"]), run.EXIT_OK)
        code = run.main(["--from-manifest", str(first / "manifest.json"), "--out", str(second), "--jobs", "2"])
        self.assertEqual(code, run.EXIT_OK)
        self.assertEqual((first / "data.csv").read_bytes(), (second / "data.csv").read_bytes())
        self.assertEqual(self._manifest(first)["config_hash"], self._manifest(second)["config_hash"])

    def test_replay_rejects_extra_arguments(self):
        first = self.tmp / "first"
        run.main(TAIL_ARGS + ["--out", str(first)])
        code = run.main(["--from-manifest", str(first / "manifest.json"), "tail", "--n", "7"])
        self.assertEqual(code, run.EXIT_CONFIG)

    def test_flags_override_config_file(self):
        config_file = self.tmp / "tail.env"
        config_file.write_text("n=12\ntrials=100\neps-points=4\nseed=5\n", encoding="utf-8")
        out = self.tmp / "configured"
        code = run.main(["tail", "--config", str(config_file), "--n", "6", "--out", str(out)])
        self.assertEqual(code, run.EXIT_OK)
        manifest = self._manifest(out)
        self.assertEqual(manifest["config"]["params"]["n"], 6)
        self.assertEqual(manifest["config"]["params"]["trials"], 100)
        self.assertEqual(manifest["config"]["params"]["eps_points"], 4)
        self.assertEqual(manifest["master_seed"], 5)

    def test_bad_config_key(self):
        config_file = self.tmp / "bad.env"
        config_file.write_text("n=12\nwidth=3\n", encoding="utf-8")
        code = run.main(["tail", "--config", str(config_file), "--out", str(self.tmp / "bad")])
        self.assertEqual(code, run.EXIT_CONFIG)
        self.assertIn("width", self.stderr_capture.getvalue())

    def test_missing_config_file(self):
        code = run.main(["tail", "--config", str(self.tmp / "absent.env")])
        self.assertEqual(code, run.EXIT_CONFIG)

    def test_unknown_command(self):
        self.assertEqual(run.main(["tial"]), run.EXIT_CONFIG)
        self.assertIn("did you mean 'tail'", self.stderr_capture.getvalue())

    def test_bad_flag_value(self):
        self.assertEqual(run.main(["tail", "--n", "many"]), run.EXIT_CONFIG)

    def test_infeasible_parameters(self):
        code = run.main(["tail", "--delta", "1.5", "--out", str(self.tmp / "bad")])
        self.assertEqual(code, run.EXIT_CONFIG)

    def test_help(self):
        self.assertEqual(run.main(["--help"]), run.EXIT_OK)
        self.assertIn("net-check", self.stdout_capture.getvalue())
        self.assertEqual(run.main(["shift", "--help"]), run.EXIT_OK)
        self.assertIn("--lambda", self.stdout_capture.getvalue())
        self.assertEqual(run.main([]), run.EXIT_CONFIG)

    def test_constants_hold_on_grid(self):
        out = self.tmp / "constants"
        self.assertEqual(run.main(["constants", "--n-max", "1e6", "--out", str(out)]), run.EXIT_OK)
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        self.assertTrue(summary["all_hold"])
        self.assertEqual(summary["n_grid"][-1], "inf")

    @patch("commands.lab_commands.estimate_tail_curve")
    def test_nonconvergence_exit_code(self, mock_curve):
        mock_curve.side_effect = NonConvergenceError("inverse iteration stalled", 1e-3, 500)
        code = run.main(TAIL_ARGS + ["--out", str(self.tmp / "stalled")])
        self.assertEqual(code, run.EXIT_NONCONVERGENCE)
        self.assertIn("stalled", self.stderr_capture.getvalue())

    def test_known_commands_match_signatures(self):
        for name, keys in KNOWN_COMMANDS.items():
            func = CommandExecuter.get(name)
            params = {p.name for p in inspect.signature(func).parameters.values()
                      if p.kind == inspect.Parameter.POSITIONAL_OR_KEYWORD}
            self.assertEqual(params, set(keys), name)

    def test_validate_config(self):
        self.assertEqual(validate_config("tail", {"n": "5", "seed": "1", "tol": "1e-9"}), (True, None))
        ok, message = validate_config("shift", {"lam": ""})
        self.assertFalse(ok)
        self.assertIn("empty", message)
        ok, _ = validate_config("nope", {})
        self.assertFalse(ok)
        ok, message = validate_config("tail", {"c2": "1.0"})
        self.assertFalse(ok)
        self.assertIn("c2", message)

    def test_settings_keys_round_trip_through_update_config(self):
        previous = conf.update_config({})
        try:
            live = conf.update_config({"shift_failure_share": "0.02"})
            self.assertEqual(set(SETTINGS_KEYS) - set(live), set())
            self.assertEqual(conf.SHIFT_FAILURE_SHARE, 0.02)
            self.assertNotIn("c2", live)
        finally:
            conf.update_config({k: previous[k] for k in SETTINGS_KEYS})

    def test_shift_failure_share_from_config_file(self):
        config_file = self.tmp / "shift.env"
        config_file.write_text("n=20\ntrials=20\nshift_failure_share=0.05\n", encoding="utf-8")
        out = self.tmp / "shift"
        try:
            code = run.main(["shift", "--config", str(config_file), "--out", str(out)])
        finally:
            conf.update_config({"shift_failure_share": 0.01})
        self.assertEqual(code, run.EXIT_OK)
        self.assertEqual(self._manifest(out)["config"]["settings"]["shift_failure_share"], 0.05)
        spec = EnsembleSpec(n=20, delta=0.5)
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        self.assertAlmostEqual(summary["C"], shift_bound_constant(spec.p, 1.0 - spec.p, 0.05))


if __name__ == "__main__":
    unittest.main()
