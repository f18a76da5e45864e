"""End-to-end tests for the auctionlab command line."""

import json

import pytest

from auctionlab_cli.main import EXIT_FAILED, EXIT_OK, EXIT_USAGE, create_parser, main

DISJOINT_X = "01" * 16
DISJOINT_Y = "10" * 16
ALL_ONES = "1" * 32

TWO_LEVEL_YAML = """\
bidder1:
  values: [5, 6]
  day1: ['1/2', '1/2']
  day2: ['0', '0']
bidder2:
  values: [5, 6]
  day1: ['1/2', '1/2']
  day2: ['0', '0']
"""


@pytest.fixture
def generated(tmp_path, capsys):
    """Instance file for a disjoint 32-bit input."""
    path = tmp_path / "inst.json"
    assert main(["gen", "--x", DISJOINT_X, "--y", DISJOINT_Y, "--out", str(path)]) == EXIT_OK
    capsys.readouterr()
    return path


def test_no_command_prints_help(capsys):
    assert main([]) == EXIT_USAGE
    assert "auctionlab" in capsys.readouterr().err


def test_parser_shapes():
    parser = create_parser()
    assert parser.parse_args(["disj", "--n", "4"]).command == "disj"
    assert parser.parse_args(["lp", "inst.json"]).instance == "inst.json"
    assert parser.parse_args(["verify", "--n", "8", "16"]).n == [8, 16]
    assert parser.parse_args(["verify", "--lp-n", "11"]).lp_n == [11]
    assert parser.parse_args(["certify", "inst.json", "--k-star", "3"]).k_star == 3


class TestGen:
    def test_writes_instance(self, tmp_path, capsys):
        path = tmp_path / "small.json"
        assert main(["gen", "--x", "10", "--y", "10", "--out", str(path)]) == EXIT_OK
        doc = json.loads(path.read_text())
        assert doc["x"] == "10"
        assert doc["bidder1"]["values"] == [5, 6, 7, 8]
        assert doc["traces"][0]["scaled_probs"] == [32, 205, 205, 198]
        assert "Written to" in capsys.readouterr().out

    def test_seeded_random_pair_is_reproducible(self, capsys):
        main(["gen", "--n", "8", "--seed", "11"])
        first = capsys.readouterr().out
        main(["gen", "--n", "8", "--seed", "11"])
        assert capsys.readouterr().out == first

    def test_x_without_y(self, capsys):
        assert main(["gen", "--x", "101"]) == EXIT_USAGE
        assert "--x and --y" in capsys.readouterr().err

    def test_length_mismatch_fails(self, capsys):
        assert main(["gen", "--x", "101", "--y", "10"]) == EXIT_FAILED


class TestInstanceCommands:
    def test_flow(self, generated, capsys):
        assert main(["flow", str(generated)]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["kind"] == "canonical"
        assert len(doc["bidder1"]["alpha"]) == 34

    def test_modified_flow(self, generated, capsys):
        assert main(["flow", str(generated), "--modified"]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["kind"] == "modified"
        assert doc["k_star"] >= 2

    def test_virtuals_csv(self, generated, capsys):
        assert main(["virtuals", str(generated), "--format", "csv"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "bidder,type,mass,phi"
        # Bidder One has mass at both interests on every level; Bidder Two only on day 1.
        assert len(lines) == 1 + 2 * 34 + 34

    def test_certify(self, generated, tmp_path, capsys):
        out = tmp_path / "cert.json"
        assert main(["certify", str(generated), "--out", str(out)]) == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["passed"] is True
        assert doc["mechanism"] == "spa1"
        assert doc["revenue"] == doc["lagrangian"]
        assert "witnessed optimal" in capsys.readouterr().out

    def test_missing_file(self, tmp_path, capsys):
        assert main(["flow", str(tmp_path / "absent.json")]) == EXIT_USAGE
        assert "File not found" in capsys.readouterr().err

    def test_lp_on_yaml_instance(self, tmp_path, capsys):
        path = tmp_path / "two.yaml"
        path.write_text(TWO_LEVEL_YAML)
        dump = tmp_path / "lp.txt"
        assert main(["lp", str(path), "--dump", str(dump)]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["value"] == "11/2"
        # Day-2 types carry no mass and stay out of the program.
        assert doc["variables"] == 12
        assert doc["constraints"] == 16
        assert doc["payments"]["1:(v1,2)"] == doc["payments"]["1:(v1,1)"]
        assert len(doc["allocation"]) == 16
        top = next(r for r in doc["allocation"] if r["t1"] == "(v2,1)" and r["t2"] == "(v2,1)")
        assert top["none"] == "0/1"
        assert dump.read_text()

    def test_lp_local_constraints(self, tmp_path, capsys):
        path = tmp_path / "two.yaml"
        path.write_text(TWO_LEVEL_YAML)
        assert main(["lp", str(path), "--constraints", "local"]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["value"] == "11/2"
        assert doc["constraint_set"] == "local"
        assert doc["constraints"] == 8


class TestCertifyOptions:
    @pytest.fixture
    def intersecting(self, tmp_path, capsys):
        path = tmp_path / "ones.json"
        assert main(["gen", "--x", ALL_ONES, "--y", ALL_ONES, "--out", str(path)]) == EXIT_OK
        capsys.readouterr()
        return path

    def test_forced_spa1_lists_failures(self, intersecting, capsys):
        assert main(["certify", str(intersecting), "--mechanism", "spa1"]) == EXIT_FAILED
        captured = capsys.readouterr()
        doc = json.loads(captured.out)
        assert doc["passed"] is False
        assert doc["flow"] == "canonical"
        assert doc["failures"]
        assert "No witness" in captured.err
        assert "[FAIL]" in captured.err

    def test_careful_uses_boosted_flow(self, intersecting, capsys):
        assert main(["certify", str(intersecting), "--mechanism", "careful"]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["flow"] == "modified"
        assert doc["mechanism"] == f"careful@{doc['k_star']}"
        assert doc["failures"] == []

    def test_flow_from_file(self, intersecting, tmp_path, capsys):
        flow_path = tmp_path / "modified.json"
        assert main(["flow", str(intersecting), "--modified", "--out", str(flow_path)]) == EXIT_OK
        k_star = json.loads(flow_path.read_text())["k_star"]
        capsys.readouterr()
        code = main(["certify", str(intersecting), "--flow", str(flow_path), "--mechanism", "careful"])
        assert code == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["flow"] == "file:modified"
        assert doc["k_star"] == k_star
        assert doc["revenue"] == doc["lagrangian"]


class TestSingleDimCommands:
    def test_iron_inline(self, capsys):
        assert main(["iron", "--values", "1,2,3", "--probs", "1/2,1/10,2/5", "--format", "json"]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["intervals"] == [[1, 2], [3, 3]]
        assert doc["phi_bar"] == ["-1/3", "-1/3", "3/1"]

    def test_iron_csv(self, capsys):
        assert main(["iron", "--values", "1,2,3", "--probs", "1/2,1/10,2/5"]) == EXIT_OK
        assert capsys.readouterr().out.splitlines() == [
            "k,value,phi,phi_bar,block",
            "1,1,0/1,-1/3,0",
            "2,2,-2/1,-1/3,0",
            "3,3,3/1,3/1,1",
        ]

    def test_iron_needs_input(self, capsys):
        assert main(["iron", "--values", "5,6"]) == EXIT_USAGE

    def test_single_dim_protocol(self, tmp_path, capsys):
        dist = tmp_path / "uniform.yaml"
        dist.write_text("values: [5, 6]\nprobs: ['1/2', '1/2']\n")
        code = main(["protocol", "--d1", str(dist), "--d2", str(dist), "--v1", "6", "--v2", "5"])
        assert code == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["winner"] == "bidder1"
        assert doc["price"] == "5/1"
        assert len(doc["messages"]) == 3

    def test_single_dim_protocol_uniform_seeded(self, capsys):
        assert main(["protocol", "--n", "8", "--seed", "3"]) == EXIT_OK
        first = capsys.readouterr().out
        doc = json.loads(first)
        assert all(1 <= v <= 8 for v in doc["values"])
        assert doc["winner"] in ("bidder1", "bidder2", "none")
        assert main(["protocol", "--n", "8", "--seed", "3"]) == EXIT_OK
        assert capsys.readouterr().out == first

    def test_single_dim_protocol_needs_both_files(self, tmp_path, capsys):
        dist = tmp_path / "uniform.yaml"
        dist.write_text("values: [5, 6]\nprobs: ['1/2', '1/2']\n")
        assert main(["protocol", "--d1", str(dist), "--v1", "5", "--v2", "6"]) == EXIT_USAGE

    def test_full_transfer_protocol(self, capsys):
        assert main(["protocol", "--mode", "full", "--x", DISJOINT_X, "--y", DISJOINT_Y]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["outcome"] == ["bidder1"]
        assert doc["bits_by_party"]["alice"] > doc["bits_by_party"]["bob"]


class TestDisj:
    def test_disjoint(self, capsys):
        assert main(["disj", "--x", DISJOINT_X, "--y", DISJOINT_Y]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "yes"
        assert "→ intersections: none" in lines

    def test_intersecting(self, capsys):
        assert main(["disj", "--x", ALL_ONES, "--y", ALL_ONES]) == EXIT_OK
        assert capsys.readouterr().out.splitlines()[0] == "no"

    def test_certified(self, capsys):
        assert main(["disj", "--x", DISJOINT_X, "--y", DISJOINT_Y, "--certify"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "yes"
        assert "mechanism: spa1" in out


class TestVerify:
    def test_list(self, capsys):
        assert main(["verify", "--list"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("# Auction Lab Check Reference")
        assert "probability_mass" in out

    def test_json_report(self, tmp_path, capsys):
        out = tmp_path / "verify.json"
        code = main([
            "verify", "--checks", "probability_mass", "--n", "8", "--trials", "1",
            "--format", "json", "--out", str(out),
        ])
        assert code == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["passed"] is True
        assert doc["checks"][0]["name"] == "probability_mass"
        assert "All 1 checks passed" in capsys.readouterr().out

    def test_csv_report(self, capsys):
        code = main(["verify", "--checks", "reduction", "--n", "8", "--trials", "1", "--format", "csv"])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "check,suite,status,passed,failed,skipped,first_failure"
        assert lines[1].startswith("probability_mass,reduction,pass,")

    def test_unknown_check(self, capsys):
        assert main(["verify", "--checks", "nonsense"]) == EXIT_USAGE

    def test_zero_trials(self, capsys):
        assert main(["verify", "--checks", "reduction", "--trials", "0"]) == EXIT_USAGE

    def test_bad_seed_environment(self, monkeypatch, capsys):
        monkeypatch.setenv("AUCTION_LAB_SEED", "abc")
        assert main(["verify", "--checks", "probability_mass", "--n", "4", "--trials", "1"]) == EXIT_USAGE
