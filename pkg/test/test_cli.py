import io
import json
import os
import tempfile
import unittest
from unittest.mock import patch

from cli import (EXIT_DEGENERATE, EXIT_DIMENSION, EXIT_FAILURE, EXIT_INTEGRITY, EXIT_OK, EXIT_PARSE, build_parser,
                 command_classes, run)
from errors import TruncationUnstableError


def invoke(*argv):
    stdout, stderr = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=stdout, stderr=stderr)
    return code, stdout.getvalue(), stderr.getvalue()


class TestParser(unittest.TestCase):

    def test_every_command_is_registered(self):
        self.assertEqual(set(command_classes), {"analyze", "spectrum", "nondegen", "volume", "curve", "betti"})
        parser = build_parser()
        args = parser.parse_args(["spectrum", "x", "--mode", "rank", "--seed", "4", "--json"])
        self.assertEqual((args.command, args.mode, args.seed, args.json), ("spectrum", "rank", 4, True))

    def test_unknown_flag_is_a_parse_error(self):
        with patch("sys.stderr", new_callable=io.StringIO):
            code, _, _ = invoke("analyze", "x", "--bogus")
        self.assertEqual(code, EXIT_PARSE)


class TestCommands(unittest.TestCase):

    def test_analyze_json(self):
        code, out, _ = invoke("analyze", "x + x^-1", "--json")
        self.assertEqual(code, EXIT_OK)
        data = json.loads(out)
        self.assertEqual(data["polytope"]["nvol"], 2)
        self.assertEqual(data["betti"], [0, 2])
        self.assertEqual(data["spectrum"]["rank"], [{"lambda": "0", "mult": 1}, {"lambda": "1", "mult": 1}])
        self.assertEqual(data["spectrum"]["euler"], data["spectrum"]["rank"])
        self.assertTrue(all(value is True for value in data["checks"].values()))

    def test_nondegen_text(self):
        code, out, _ = invoke("nondegen", "x^2 + 2*x*y + y^2")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out.strip(), "degenerate, face conv{(2,0),(0,2)}, witness (1,-1)")

    def test_require_nondegenerate(self):
        code, _, _ = invoke("nondegen", "x^2 + 2*x*y + y^2", "--require-nondegenerate")
        self.assertEqual(code, EXIT_DEGENERATE)
        code, _, _ = invoke("nondegen", "x + y + x^-1*y^-1", "--require-nondegenerate")
        self.assertEqual(code, EXIT_OK)

    def test_certify(self):
        code, out, _ = invoke("nondegen", "x + y + x^-1*y^-1", "--certify", "--json")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)["nondegeneracy"]["verdict"], "nondegenerate")

    def test_volume_dimension_deficiency(self):
        code, out, err = invoke("volume", "x*y")
        self.assertEqual(code, EXIT_DIMENSION)
        self.assertEqual(out, "")
        self.assertIn("dim Δ(f) = 1 < n = 2; split off a subtorus", err)

    def test_volume(self):
        code, out, _ = invoke("volume", "x^2 + x^-1", "--json")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)["polytope"]["nvol"], 3)

    def test_spectrum_with_explicit_vars(self):
        code, out, _ = invoke("spectrum", "a + b + a^-1*b^-1", "--vars", "a,b", "--json", "--mode", "euler")
        self.assertEqual(code, EXIT_OK)
        data = json.loads(out)
        self.assertEqual(data["input"]["vars"], ["a", "b"])
        self.assertEqual([entry["lambda"] for entry in data["spectrum"]["euler"]], ["0", "1", "2"])
        self.assertNotIn("rank", data["spectrum"])

    def test_betti(self):
        code, out, _ = invoke("betti", "x + y + x^-1*y^-1")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out, "betti: 0 0 3\n")

    def test_curve(self):
        code, out, _ = invoke("curve", "x^2 + x^-1", "--json")
        self.assertEqual(code, EXIT_OK)
        data = json.loads(out)
        self.assertEqual(data["curve"]["irregular"], [{"lambda": "0", "dim": 3}, {"lambda": "1/2", "dim": 2},
                                                  {"lambda": "1", "dim": 1}])
        self.assertEqual(data["checks"], {"curve_comparison": True, "curve_duality": True})

    def test_curve_needs_one_variable(self):
        code, _, err = invoke("curve", "x + y")
        self.assertEqual(code, EXIT_FAILURE)
        self.assertIn("n = 1", err)

    def test_parse_error(self):
        code, _, err = invoke("analyze", "x + + y")
        self.assertEqual(code, EXIT_PARSE)
        self.assertIn("parse error", err)

    def test_unknown_variable(self):
        code, _, _ = invoke("analyze", "x + z", "--vars", "x,y")
        self.assertEqual(code, EXIT_PARSE)

    @patch("cli.CurveEngine")
    def test_integrity_failure(self, mock_engine):
        mock_engine.return_value.compare.side_effect = TruncationUnstableError("truncation unstable")
        code, _, err = invoke("curve", "x + x^-1")
        self.assertEqual(code, EXIT_INTEGRITY)
        self.assertIn("truncation unstable", err)

    def test_seed_from_environment(self):
        with patch.dict(os.environ, {"EXPHODGE_SEED": "17"}):
            _, first, _ = invoke("nondegen", "x + y + x^-1*y^-1", "--json")
        _, second, _ = invoke("nondegen", "x + y + x^-1*y^-1", "--json", "--seed", "17")
        self.assertEqual(json.loads(first)["nondegeneracy"]["primes"], json.loads(second)["nondegeneracy"]["primes"])

    def test_bad_seed_environment(self):
        with patch.dict(os.environ, {"EXPHODGE_SEED": "abc"}):
            code, _, err = invoke("volume", "x")
        self.assertEqual(code, EXIT_FAILURE)
        self.assertIn("EXPHODGE_SEED", err)

    def test_json_is_byte_identical_across_runs(self):
        for argv in (("analyze", "x^2 + x^-1", "--json", "--seed", "9"),
                     ("analyze", "x + y + x^-1*y^-1", "--json", "--seed", "9"),
                     ("nondegen", "x^2 + 2*x*y + y^2", "--json")):
            _, first, _ = invoke(*argv)
            _, second, _ = invoke(*argv)
            self.assertEqual(first, second, argv)

    def test_text_and_json_agree(self):
        _, out, _ = invoke("spectrum", "x^2 + y + x^-1*y^-1", "--json")
        _, text, _ = invoke("spectrum", "x^2 + y + x^-1*y^-1")
        data = json.loads(out)
        for route, entries in data["spectrum"].items():
            pairs = ", ".join(f"({entry['lambda']}, {entry['mult']})" for entry in entries)
            self.assertIn(f"spectrum ({route}, H^2): {{{pairs}}}", text)
        _, out, _ = invoke("betti", "x^2 + x^-1", "--json")
        _, text, _ = invoke("betti", "x^2 + x^-1")
        self.assertEqual(text, "betti: " + " ".join(str(b) for b in json.loads(out)["betti"]) + "\n")

    def test_timing(self):
        code, out, _ = invoke("spectrum", "x + x^-1", "--json", "--timing")
        self.assertEqual(code, EXIT_OK)
        self.assertIn("rank", json.loads(out)["timing_ms"])

    def test_dump_and_plot(self):
        with tempfile.TemporaryDirectory() as directory:
            plot = os.path.join(directory, "report.svg")
            dumps = os.path.join(directory, "matrices")
            code, _, _ = invoke("analyze", "x + y + x^-1*y^-1", "--plot", plot, "--dump-matrices", dumps)
            self.assertEqual(code, EXIT_OK)
            self.assertTrue(os.path.exists(plot))
            self.assertEqual(sorted(os.listdir(dumps)), ["level_0_d0.txt", "level_0_d1.txt"])


if __name__ == "__main__":
    unittest.main()
