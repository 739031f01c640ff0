"""End-to-end checks of the nmlab command line and its JSON outputs.

usage: cli_test.py <path-to-nmlab> <schema-dir>
"""

import csv
import io
import json
import os
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import jsonschema
import numpy as np
from referencing import Registry, Resource

NMLAB = None
SCHEMAS = None


def run(*args, check_rc=None):
    proc = subprocess.run([NMLAB, *map(str, args)], capture_output=True, text=True)
    if check_rc is not None and proc.returncode != check_rc:
        raise AssertionError(
            f"{args}: exit {proc.returncode}, expected {check_rc}\nstderr: {proc.stderr}")
    return proc


def validator(name):
    registry = Registry()
    for p in SCHEMAS.glob("*.schema.json"):
        registry = registry.with_resource(p.name, Resource.from_contents(json.loads(p.read_text())))
    schema = json.loads((SCHEMAS / f"{name}.schema.json").read_text())
    return jsonschema.Draft202012Validator(schema, registry=registry)


def validate(name, doc):
    validator(name).validate(doc)


class CliTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.dir = Path(cls.tmp.name)
        for name in ("hat_w", "w0", "remark_point", "prop1_minimum", "prop3_better"):
            run("weights", "export", name, "--out", cls.dir / f"{name}.json", check_rc=0)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def path(self, name):
        return self.dir / name

    # -- verify ------------------------------------------------------------

    def test_verify_all(self):
        proc = run("verify", "all", check_rc=0)
        reports = json.loads(proc.stdout)
        self.assertEqual([r["claim"] for r in reports],
                         ["thm1", "prop1", "prop2", "prop3", "blindspot", "lemma1"])
        for r in reports:
            validate("verification_report", r)
            self.assertNotEqual(r["status"], "Failed")
        by_claim = {r["claim"]: r for r in reports}
        self.assertEqual(by_claim["prop2"]["status"], "ConfirmedWithCorrection")
        bs = by_claim["blindspot"]["details"]
        validate("blindspot_report", bs["report"])
        validate("training_probe", bs["probe"])

    def test_verify_unknown_claim(self):
        self.assertEqual(run("verify", "thm9").returncode, 64)

    # -- certify -----------------------------------------------------------

    def test_certify_exit_codes(self):
        proc = run("certify", "--weights", self.path("hat_w.json"), "--dataset", "sigmoid10", check_rc=0)
        cert = json.loads(proc.stdout)
        validate("certificate", cert)
        self.assertEqual(cert["classification"], "LocalMinimum")
        self.assertEqual(len(cert["eigenvalues"]), 9)

        run("certify", "--weights", self.path("w0.json"), "--dataset", "sigmoid10", check_rc=3)
        run("certify", "--weights", self.path("remark_point.json"), "--dataset", "sigmoid10", check_rc=4)
        # kink at x = 3
        run("certify", "--weights", self.path("prop1_minimum.json"), "--dataset", "d1", check_rc=65)

    def test_certify_saddle(self):
        forged = self.path("saddle_data.json")
        run("forge", "--weights", self.path("hat_w.json"), "--dataset", "sigmoid10", "--random-start", 5,
            "--seed", 1005, "--out-dataset", forged, check_rc=2)
        run("certify", "--weights", self.path("hat_w.json"), "--dataset", forged, check_rc=2)

    def test_certify_bad_inputs(self):
        bad = self.path("bad.json")
        bad.write_text('{"arch": "sigmoid221", "params": {"w00": 1}}')
        run("certify", "--weights", bad, "--dataset", "sigmoid10", check_rc=64)
        bad.write_text("{not json")
        run("certify", "--weights", bad, "--dataset", "sigmoid10", check_rc=64)
        run("certify", "--weights", self.path("hat_w.json"), "--dataset", "nosuch", check_rc=64)
        run("certify", "--weights", self.path("hat_w.json"), "--dataset", "d1", check_rc=64)

    # -- forge -------------------------------------------------------------

    def test_forge_perturbed_converges(self):
        proc = run("forge", "--weights", self.path("hat_w.json"), "--dataset", "sigmoid10", "--perturb", 0.05,
                   "--seed", 0, check_rc=0)
        result = json.loads(proc.stdout)
        validate("forge_result", result)
        self.assertTrue(result["converged"])
        self.assertLess(result["final_gradnorm"], 1e-8)
        trace = result["objective_trace"]
        self.assertTrue(all(b <= a for a, b in zip(trace, trace[1:])))

    def test_forge_budget_exhausted(self):
        proc = run("forge", "--weights", self.path("hat_w.json"), "--dataset", "sigmoid10", "--perturb", 0.05,
                   "--max-iters", 1, check_rc=1)
        self.assertFalse(json.loads(proc.stdout)["converged"])

    # -- table1 ------------------------------------------------------------

    def table(self, out, *extra):
        return run("table1", "--trials", 1, "--h-min", 2, "--h-max", 4, "--gd-steps", 2000, "--adam-steps", 300,
                   "--out", out, *extra, check_rc=0)

    def test_table1_single_trial(self):
        out = self.path("t1")
        proc = self.table(out)
        rows = list(csv.DictReader(io.StringIO(proc.stdout)))
        self.assertEqual(len(rows), 3 * 8)
        self.assertTrue(all(float(r["fraction"]) in (0.0, 1.0) for r in rows))
        self.assertEqual((out / "table1.csv").read_text(), proc.stdout)
        validate("table_sidecar", json.loads((out / "table1.json").read_text()))

    def test_table1_rerun_identical(self):
        a, b = self.path("ta"), self.path("tb")
        self.table(a, "--threads", 1)
        self.table(b, "--threads", 2)
        self.assertEqual((a / "table1.csv").read_bytes(), (b / "table1.csv").read_bytes())
        self.assertEqual((a / "table1.json").read_bytes(), (b / "table1.json").read_bytes())

    def test_table1_unwritable(self):
        blocker = self.path("blocker")
        blocker.write_text("x")
        run("table1", "--trials", 1, "--out", blocker / "sub", check_rc=73)

    # -- sample-grid -------------------------------------------------------

    def read_grid(self, path):
        return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)

    def test_grid_zero_weights(self):
        zero = self.path("zero.json")
        zero.write_text(json.dumps({"arch": "sigmoid221", "params": {
            k: 0.0 for k in ("w00", "w01", "b0", "w10", "w11", "b1", "v0", "v1", "c")}}))
        run("sample-grid", "--weights", zero, "--bounds", "-2,2,-1,1", "--res", 7, "--out", self.path("z.csv"),
            check_rc=0)
        g = self.read_grid(self.path("z.csv"))
        self.assertEqual(g.shape, (49, 3))
        self.assertTrue(np.all(g[:, 2] == 0.5))

        run("sample-grid", "--weights", zero, "--res", 2, "--out", self.path("z2.csv"), check_rc=0)
        self.assertEqual(len(self.read_grid(self.path("z2.csv"))), 4)

    def test_grid_stuck_net_is_near_affine(self):
        # a failed GD run on flattened XOR (frozen: seed 1 stops at accuracy 0.5)
        w = self.path("stuck.json")
        proc = run("train", "--dataset", "fxor", "--activation", "relu", "--optimizer", "gd", "--width", 2,
                   "--seed", 1, "--out", w, check_rc=0)
        self.assertFalse(json.loads(proc.stdout)["converged"])
        validate("weights", json.loads(w.read_text()))
        run("sample-grid", "--weights", w, "--bounds", "0,1,0,1", "--res", 21, "--out", self.path("s.csv"),
            check_rc=0)
        g = self.read_grid(self.path("s.csv"))
        x = np.c_[g[:, 0], g[:, 1], np.ones(len(g))]
        coef, *_ = np.linalg.lstsq(x, g[:, 2], rcond=None)
        resid = g[:, 2] - x @ coef
        r2 = 1.0 - resid.var() / g[:, 2].var()
        self.assertGreaterEqual(r2, 0.99)

    def test_grid_rejects_relu_regressor(self):
        run("sample-grid", "--weights", self.path("prop1_minimum.json"), "--out", self.path("r.csv"), check_rc=64)

    # -- datasets and weights ---------------------------------------------

    def test_dataset_export_validate(self):
        for name in ("sigmoid10", "d1", "d2", "d3", "xor", "fxor"):
            out = self.path(f"{name}.json")
            run("dataset", "export", name, "--out", out, check_rc=0)
            validate("dataset", json.loads(out.read_text()))
            proc = run("dataset", "validate", out, check_rc=0)
            self.assertIn("ok", proc.stdout)
        bad = self.path("bad_ds.json")
        bad.write_text('{"task": "classification", "d": 1, "points": [{"x": [0], "y": 2}]}')
        run("dataset", "validate", bad, check_rc=64)
        run("dataset", "export", "nosuch", check_rc=64)

    def test_weights_export_all(self):
        names = run("weights", "list", check_rc=0).stdout.split()
        self.assertIn("hat_w", names)
        self.assertIn("prop2_global_printed", names)
        for name in names:
            doc = json.loads(run("weights", "export", name, check_rc=0).stdout)
            validate("weights", doc)

    def test_train_deterministic(self):
        a = run("train", "--dataset", "xor", "--activation", "sigmoid", "--optimizer", "adam", "--width", 3,
                "--seed", 4, "--out", self.path("ta.json"), check_rc=0)
        b = run("train", "--dataset", "xor", "--activation", "sigmoid", "--optimizer", "adam", "--width", 3,
                "--seed", 4, "--out", self.path("tb.json"), check_rc=0)
        self.assertEqual(a.stdout, b.stdout)
        self.assertEqual(self.path("ta.json").read_bytes(), self.path("tb.json").read_bytes())
        run("train", "--dataset", "d1", check_rc=64)


if __name__ == "__main__":
    NMLAB = os.path.abspath(sys.argv[1])
    SCHEMAS = Path(sys.argv[2])
    unittest.main(argv=[sys.argv[0], "-v"])
