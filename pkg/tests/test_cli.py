"""End-to-end command-line tests, driven through main() with captured stdout."""

import json
from pathlib import Path

import pytest

from socialchoice.cli import main, normalize_rule

DATA = Path(__file__).resolve().parent.parent / "data"


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


class TestRuleAliases:
    def test_hyphens_map_to_registry_names(self):
        assert normalize_rule("ranked-pairs") == "ranked_pairs"
        assert normalize_rule("instant-runoff") == "instant_runoff"
        assert normalize_rule("irv") == "instant_runoff"
        assert normalize_rule("K-Borda") == "k_borda"


class TestAggregate:
    def test_borda_on_three_way_profile(self, capsys):
        report = run_json(
            capsys, "aggregate", "--rule", "borda", "--profile", str(DATA / "fig1.vote")
        )
        assert report["payload"]["ranking"] == ["C", "B", "A"]
        assert report["payload"]["scores"] == {"A": 20.0, "B": 24.0, "C": 25.0}

    def test_ranked_pairs_reports_locked_pairs(self, capsys):
        report = run_json(
            capsys,
            "aggregate", "--rule", "ranked-pairs", "--profile", str(DATA / "fig1.vote"),
        )
        assert report["payload"]["ranking"] == ["B", "C", "A"]
        assert report["payload"]["locked_pairs"] == [["C", "A", 7], ["B", "C", 3]]

    def test_irv_on_single_voter(self, capsys):
        report = run_json(
            capsys, "aggregate", "--rule", "irv", "--profile", str(DATA / "single.vote")
        )
        assert report["payload"]["ranking"] == ["A", "B", "C"]

    def test_random_dictator_lottery(self, capsys):
        args = (
            "aggregate", "--rule", "random-dictator",
            "--profile", str(DATA / "fig1.vote"), "--seed", "3",
        )
        report = run_json(capsys, *args)
        lottery = report["payload"]["lottery"]
        assert lottery["A"] == pytest.approx(8 / 23, abs=1e-8)
        assert lottery["B"] == pytest.approx(9 / 23, abs=1e-8)
        assert lottery["C"] == pytest.approx(6 / 23, abs=1e-8)

    def test_alias_and_canonical_name_agree(self, capsys):
        by_alias = run_json(
            capsys, "aggregate", "--rule", "irv", "--profile", str(DATA / "fig1.vote")
        )
        by_name = run_json(
            capsys,
            "aggregate", "--rule", "instant_runoff", "--profile", str(DATA / "fig1.vote"),
        )
        assert by_alias == by_name

    def test_repeated_runs_byte_identical(self, capsys):
        args = ("aggregate", "--rule", "borda", "--profile", str(DATA / "fig1.vote"))
        _, first, _ = run_cli(capsys, *args)
        _, second, _ = run_cli(capsys, *args)
        assert first == second


class TestRateAndCommittee:
    def test_rate_median(self, capsys):
        report = run_json(
            capsys, "rate", "--rule", "median", "--ratings", str(DATA / "ratings.json")
        )
        assert report["payload"]["aggregates"] == {"x": 6.0}

    def test_rate_mean(self, capsys):
        report = run_json(
            capsys, "rate", "--rule", "mean", "--ratings", str(DATA / "ratings.json")
        )
        assert report["payload"]["aggregates"] == {"x": 5.0}

    def test_committee_k_borda(self, capsys):
        report = run_json(
            capsys,
            "committee", "--rule", "k-borda",
            "--profile", str(DATA / "fig1.vote"), "--k", "2",
        )
        assert report["payload"]["winners"] == ["C", "B"]
        assert report["payload"]["cc_score"] > 0


class TestJudge:
    def test_paradox_profile(self, capsys):
        report = run_json(capsys, "judge", "--profile", str(DATA / "judgments.json"))
        payload = report["payload"]
        assert payload["majority"] == {"safe": True, "helpful": True, "give": False}
        assert payload["consistent"] is False
        assert payload["repair"] == {"safe": True, "helpful": True, "give": True}
        assert payload["distance"] == 1


class TestParseFeedback:
    def test_compiles_to_ratings(self, capsys):
        report = run_json(
            capsys,
            "parse-feedback",
            "--statements", str(DATA / "feedback.txt"),
            "--context", "A,B,C",
        )
        payload = report["payload"]
        assert payload["ratings"] == {"A": 9.0, "B": 5.0, "C": 2.0}
        assert payload["order"] == [["A", "B"], ["A", "C"], ["B", "C"]]

    def test_unknown_id_is_input_error(self, capsys):
        code, _, err = run_cli(
            capsys,
            "parse-feedback",
            "--statements", str(DATA / "feedback.txt"),
            "--context", "A,B",
        )
        assert code == 1
        assert "C" in err


class TestSimulate:
    def test_rankings_variant_targets(self, capsys):
        report = run_json(
            capsys, "simulate", "--config", str(DATA / "pipeline_rankings.json")
        )
        case = report["payload"]["cases"][0]
        assert case["targets"] == {"A": 0.0, "B": 5.0, "C": 10.0}
        assert case["chosen"] == "C"

    def test_collective_variant_writes_dataset(self, capsys, tmp_path):
        out = tmp_path / "sft.jsonl"
        args = (
            "simulate", "--config", str(DATA / "pipeline_collective.json"),
            "--out", str(out),
        )
        code, first, err = run_cli(capsys, *args)
        assert code == 0, err
        record = json.loads(out.read_text().strip())
        assert record == {
            "prompt": "What should the three of us cook tonight?",
            "chosen": "B",
        }
        first_bytes = out.read_bytes()
        _, second, _ = run_cli(capsys, *args)
        assert first == second
        assert out.read_bytes() == first_bytes

    def test_inference_variant(self, capsys):
        report = run_json(
            capsys, "simulate", "--config", str(DATA / "pipeline_inference.json")
        )
        assert report["payload"]["cases"][0]["chosen"] == "A"

    def test_features_variant(self, capsys):
        report = run_json(
            capsys, "simulate", "--config", str(DATA / "pipeline_features.json")
        )
        case = report["payload"]["cases"][0]
        assert case["chosen"] == "C"
        assert case["rewards"]["C"] == pytest.approx(144 / 23, abs=1e-4)


class TestAudit:
    def test_clone_flip_on_restaurant_profile(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "audit", "clones", "--rule", "plurality",
            "--profile", str(DATA / "restaurant.vote"),
            "--target", "C", "--copies", "2",
        )
        assert code == 0  # a violation is a finding, not a failure
        payload = json.loads(out)["payload"]
        assert payload["verdict"] == "violated"
        assert payload["base_winner"] == "C"
        assert payload["cloned_winner"] == "I"

    def test_ranked_pairs_clone_independent(self, capsys):
        report = run_json(
            capsys,
            "audit", "clones", "--rule", "ranked-pairs",
            "--profile", str(DATA / "restaurant.vote"),
            "--target", "C", "--copies", "2",
        )
        assert report["payload"]["verdict"] == "independent"
        assert report["payload"]["cloned_winner"] in ["C1", "C2"]

    def test_cardinal_manipulation_median_robust(self, capsys):
        report = run_json(
            capsys,
            "audit", "manipulation", "--w", "median", "--ratings", "3,6,6", "--voter", "0",
        )
        assert report["payload"]["witness"] is None

    def test_cardinal_manipulation_mean_witness(self, capsys):
        report = run_json(
            capsys,
            "audit", "manipulation", "--w", "mean", "--ratings", "3,6,6", "--voter", "0",
        )
        witness = report["payload"]["witness"]
        assert witness["misreport"] == 0.0
        assert witness["honest_outcome"] == 5.0
        assert witness["manipulated_outcome"] == 4.0
        assert report["payload"]["reverified"] is True

    def test_ordinal_manipulation_via_profile(self, capsys, tmp_path):
        vote = tmp_path / "m.vote"
        vote.write_text("alternatives: A, B, C\n1: A > B > C\n2: B > A > C\n")
        report = run_json(
            capsys,
            "audit", "manipulation", "--rule", "borda",
            "--profile", str(vote), "--voter", "0",
        )
        witness = report["payload"]["witness"]
        assert witness["misreport"] == ["A", "C", "B"]
        assert report["payload"]["reverified"] is True

    def test_manipulation_requires_exactly_one_mode(self, capsys):
        code, _, err = run_cli(capsys, "audit", "manipulation", "--voter", "0")
        assert code == 1
        assert "exactly one" in err

    def test_anonymity_ordinal_and_cardinal(self, capsys):
        ordinal = run_json(
            capsys,
            "audit", "anonymity", "--rule", "ranked-pairs",
            "--profile", str(DATA / "fig1.vote"),
        )
        assert ordinal["payload"]["anonymous"] is True
        cardinal = run_json(
            capsys,
            "audit", "anonymity", "--rule", "mean",
            "--ratings", str(DATA / "ratings.json"),
        )
        assert cardinal["payload"]["anonymous"] is True

    def test_cycle_report(self, capsys):
        report = run_json(
            capsys, "audit", "cycle", "--profile", str(DATA / "condorcet.vote")
        )
        payload = report["payload"]
        assert payload["has_condorcet_winner"] is False
        assert payload["condorcet_winner"] is None
        assert payload["cycles"] == [["A", "B", "C"]]

    def test_condorcet_winner_reported_when_present(self, capsys, tmp_path):
        vote = tmp_path / "c.vote"
        vote.write_text("alternatives: A, B\n2: A > B\n1: B > A\n")
        report = run_json(capsys, "audit", "cycle", "--profile", str(vote))
        assert report["payload"]["has_condorcet_winner"] is True
        assert report["payload"]["condorcet_winner"] == "A"


class TestExitCodes:
    def test_missing_file_is_input_error(self, capsys):
        code, _, err = run_cli(
            capsys, "aggregate", "--rule", "borda", "--profile", "/does/not/exist.vote"
        )
        assert code == 1
        assert "error" in err

    def test_unknown_rule_is_input_error(self, capsys):
        code, _, err = run_cli(
            capsys, "aggregate", "--rule", "schulze", "--profile", str(DATA / "fig1.vote")
        )
        assert code == 1
        assert "schulze" in err

    def test_missing_required_flag_is_input_error(self, capsys):
        code, _, err = run_cli(capsys, "aggregate", "--rule", "borda")
        assert code == 1
        assert "--profile" in err

    def test_ballot_syntax_error_names_the_line(self, capsys, tmp_path):
        vote = tmp_path / "bad.vote"
        vote.write_text("alternatives: A, B\n2: A > Z\n")
        code, _, err = run_cli(
            capsys, "aggregate", "--rule", "borda", "--profile", str(vote)
        )
        assert code == 1
        assert "line 2" in err


class TestFormats:
    def test_csv_and_json_numbers_agree(self, capsys):
        args = ("rate", "--rule", "mean", "--ratings", str(DATA / "ratings.json"))
        as_json = run_json(capsys, *args)
        code, out, _ = run_cli(capsys, *args, "--format", "csv")
        assert code == 0
        rows = dict(line.split(",", 1) for line in out.splitlines()[1:])
        assert json.loads(rows["payload.aggregates.x"]) == as_json["payload"]["aggregates"]["x"]

    def test_csv_has_key_value_header(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "rate", "--rule", "mean", "--ratings", str(DATA / "ratings.json"),
            "--format", "csv",
        )
        assert code == 0
        assert out.splitlines()[0] == "key,value"
