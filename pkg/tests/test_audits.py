"""Auditor tests: clone independence, manipulation search, anonymity.

Sweep sizes here are trimmed; the acceptance suite runs the full 1000-profile
versions with its own seed.
"""

from itertools import permutations, product
from random import Random

import pytest

from socialchoice.audits import (
    CloneSpec,
    ManipulationWitness,
    anonymity_check,
    clone_test,
    cloned_profile,
    manipulation_search_cardinal,
    manipulation_search_ordinal,
    random_clone_spec,
    random_strict_profile,
    reverify_cardinal_witness,
    reverify_ordinal_witness,
)
from socialchoice.cardinal import RatingProfile
from socialchoice.ordinal import first_place_counts, ordinal_rule, random_dictator
from socialchoice.profiles import margin_matrix, profile_from_rankings

FIG_RANKINGS = (
    [("A", "B", "C")] * 4
    + [("A", "C", "B")] * 4
    + [("B", "C", "A")] * 9
    + [("C", "A", "B")] * 4
    + [("C", "B", "A")] * 2
)


@pytest.fixture
def three_way():
    return profile_from_rankings(FIG_RANKINGS, ("A", "B", "C"))


def restaurant_profile():
    rankings = [("C", "I")] * 52 + [("I", "C")] * 48
    return profile_from_rankings(rankings, ("C", "I"))


def alternating_clone_spec(n_voters=100):
    orders = {i: (("C1", "C2") if i % 2 == 0 else ("C2", "C1")) for i in range(n_voters)}
    return CloneSpec("C", 2, orders)


class TestCloneSpec:
    def test_clone_ids_are_suffixed(self):
        assert CloneSpec("C", 3).clone_ids() == ("C1", "C2", "C3")

    def test_single_copy_keeps_original_id(self):
        assert CloneSpec("C", 1).clone_ids() == ("C",)

    def test_zero_copies_rejected(self):
        with pytest.raises(ValueError, match="at least 1"):
            CloneSpec("C", 0)

    def test_negative_ballot_index_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            CloneSpec("C", 2, {-1: ("C1", "C2")})


class TestClonedProfile:
    def test_block_replaces_target_in_every_ballot(self):
        profile = profile_from_rankings([("B", "C", "A")], ("A", "B", "C"))
        expanded = cloned_profile(profile, CloneSpec("C", 2))
        assert expanded.unit_rankings() == (("B", "C1", "C2", "A"),)
        assert expanded.alternatives == ("A", "B", "C1", "C2")

    def test_per_ballot_orders_override_default(self):
        profile = profile_from_rankings([("B", "C", "A"), ("C", "A", "B")], ("A", "B", "C"))
        expanded = cloned_profile(profile, CloneSpec("C", 2, {1: ("C2", "C1")}))
        assert expanded.unit_rankings() == (
            ("B", "C1", "C2", "A"),
            ("C2", "C1", "A", "B"),
        )

    def test_single_copy_is_identity(self, three_way):
        expanded = cloned_profile(three_way, CloneSpec("B", 1))
        assert expanded.alternatives == three_way.alternatives
        assert expanded.unit_rankings() == three_way.unit_rankings()

    def test_unknown_target_rejected(self, three_way):
        with pytest.raises(ValueError, match="not an alternative"):
            cloned_profile(three_way, CloneSpec("Z", 2))

    def test_clone_id_collision_rejected(self):
        profile = profile_from_rankings([("C", "C1")], ("C", "C1"))
        with pytest.raises(ValueError, match="collide"):
            cloned_profile(profile, CloneSpec("C", 2))

    def test_order_must_be_permutation_of_clones(self, three_way):
        with pytest.raises(ValueError, match="permutation"):
            cloned_profile(three_way, CloneSpec("C", 2, {0: ("C1", "C1")}))

    def test_order_index_out_of_range_rejected(self):
        profile = profile_from_rankings([("A", "B")], ("A", "B"))
        with pytest.raises(ValueError, match="out of range"):
            cloned_profile(profile, CloneSpec("A", 2, {5: ("A1", "A2")}))


class TestCloneTest:
    def test_plurality_flips_to_nonclone_on_restaurant_profile(self):
        result = clone_test("plurality", restaurant_profile(), alternating_clone_spec())
        assert result.verdict == "violated"
        assert result.base_winner == "C"
        assert result.cloned_winner == "I"

    def test_restaurant_split_gives_48_firsts_to_nonclone(self):
        expanded = cloned_profile(restaurant_profile(), alternating_clone_spec())
        assert first_place_counts(expanded) == {"C1": 26, "C2": 26, "I": 48}

    def test_ranked_pairs_keeps_a_clone_winning(self):
        result = clone_test("ranked_pairs", restaurant_profile(), alternating_clone_spec())
        assert result.independent
        assert result.cloned_winner in {"C1", "C2"}

    def test_restaurant_margin_structure(self):
        # Both clones beat I by the original +4; the clones tie head-to-head.
        expanded = cloned_profile(restaurant_profile(), alternating_clone_spec())
        mm = margin_matrix(expanded)
        assert mm.margin("C1", "I") == 4
        assert mm.margin("C2", "I") == 4
        assert mm.margin("C1", "C2") == 0

    def test_single_voter_profiles_are_clone_proof(self):
        profile = profile_from_rankings([("A", "B", "C")], ("A", "B", "C"))
        for target in ("A", "B", "C"):
            for order in permutations((f"{target}1", f"{target}2")):
                spec = CloneSpec(target, 2, {0: order})
                for rule in ("plurality", "borda", "instant_runoff", "ranked_pairs"):
                    assert clone_test(rule, profile, spec).independent

    def test_single_copy_always_independent(self, three_way):
        for rule in ("plurality", "borda", "instant_runoff", "ranked_pairs"):
            assert clone_test(rule, three_way, CloneSpec("B", 1)).independent


class TestManipulationSearchOrdinal:
    def test_borda_textbook_witness(self):
        profile = profile_from_rankings(
            [("A", "B", "C"), ("B", "A", "C"), ("B", "A", "C")]
        )
        witness = manipulation_search_ordinal("borda", profile, 0)
        assert witness == ManipulationWitness(
            voter=0,
            truthful=("A", "B", "C"),
            misreport=("A", "C", "B"),
            honest_outcome="B",
            manipulated_outcome="A",
        )
        assert reverify_ordinal_witness("borda", profile, witness)

    def test_witness_is_lexicographically_first_improvement(self):
        profile = profile_from_rankings(
            [("A", "B", "C"), ("B", "A", "C"), ("B", "A", "C")]
        )
        witness = manipulation_search_ordinal("borda", profile, 0)
        truthful = profile.unit_rankings()[0]
        honest_rank = truthful.index(ordinal_rule("borda")(profile).winner)
        improving = []
        for misreport in permutations(sorted(profile.alternatives)):
            units = list(profile.unit_rankings())
            units[0] = misreport
            shifted = profile_from_rankings(units, profile.alternatives)
            if truthful.index(ordinal_rule("borda")(shifted).winner) < honest_rank:
                improving.append(misreport)
        assert witness.misreport == min(improving)

    def test_unanimous_profile_has_no_witness(self):
        profile = profile_from_rankings([("A", "B", "C")] * 5)
        for rule in ("plurality", "borda", "instant_runoff", "ranked_pairs"):
            for voter in range(5):
                assert manipulation_search_ordinal(rule, profile, voter) is None

    def test_plurality_on_two_alternatives_is_strategyproof(self):
        # Exhaustive over all 3-voter profiles and all voters.
        ballots = (("A", "B"), ("B", "A"))
        for combo in product(ballots, repeat=3):
            profile = profile_from_rankings(list(combo), ("A", "B"))
            for voter in range(3):
                assert manipulation_search_ordinal("plurality", profile, voter) is None

    def test_alternative_cap_enforced(self):
        alternatives = tuple("ABCDEFG")
        profile = profile_from_rankings([alternatives], alternatives)
        with pytest.raises(ValueError, match="exhaustive-search cap"):
            manipulation_search_ordinal("plurality", profile, 0)

    def test_voter_index_out_of_range(self, three_way):
        with pytest.raises(ValueError, match="out of range"):
            manipulation_search_ordinal("borda", three_way, 23)

    def test_voter_indexes_expanded_ballots(self, three_way):
        # Voter 8 is one of the nine B > C > A voters.
        witness = manipulation_search_ordinal("borda", three_way, 8)
        if witness is not None:
            assert witness.truthful == ("B", "C", "A")

    def test_tampered_witness_fails_reverification(self):
        profile = profile_from_rankings(
            [("A", "B", "C"), ("B", "A", "C"), ("B", "A", "C")]
        )
        fake = ManipulationWitness(0, ("A", "B", "C"), ("C", "A", "B"), "B", "A")
        assert not reverify_ordinal_witness("borda", profile, fake)


class TestManipulationSearchCardinal:
    def test_mean_is_manipulable_on_3_6_6(self):
        witness = manipulation_search_cardinal("mean", (3, 6, 6), 0)
        assert witness == ManipulationWitness(0, 3.0, 0.0, 5.0, 4.0)
        assert reverify_cardinal_witness("mean", (3, 6, 6), witness)

    def test_median_is_robust_on_3_6_6(self):
        assert manipulation_search_cardinal("median", (3, 6, 6), 0) is None

    def test_first_improving_grid_point_is_returned(self):
        # Honest mean of (4, 0, 10) is 14/3; reports 1..3 improve, 0 only ties.
        witness = manipulation_search_cardinal("mean", (4, 0, 10), 0)
        assert witness.misreport == 1.0

    def test_exact_distance_tie_is_not_a_witness(self):
        # Report 0 moves the mean from 14/3 to 10/3, equally far from 4.
        witness = manipulation_search_cardinal("mean", (4, 0, 10), 0, grid=(0.0,))
        assert witness is None

    def test_single_rater_cannot_gain(self):
        for rule in ("mean", "median"):
            assert manipulation_search_cardinal(rule, (3.5,), 0) is None

    def test_rater_cap_enforced(self):
        with pytest.raises(ValueError, match="cap"):
            manipulation_search_cardinal("mean", (1,) * 8, 0)

    def test_voter_index_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            manipulation_search_cardinal("mean", (3, 6, 6), 3)

    def test_tampered_witness_fails_reverification(self):
        fake = ManipulationWitness(0, 3.0, 10.0, 5.0, 4.0)
        assert not reverify_cardinal_witness("mean", (3, 6, 6), fake)


class TestAnonymity:
    def test_all_ordinal_rules_anonymous_on_three_way(self, three_way):
        for rule in ("plurality", "borda", "instant_runoff", "ranked_pairs"):
            assert anonymity_check(rule, three_way, seed=1)

    def test_cardinal_rules_anonymous(self):
        rp = RatingProfile(
            ("x",),
            ("e1", "e2", "e3", "e4"),
            {"e1": {"x": 3.0}, "e2": {"x": 6.0}, "e3": {"x": 6.0}, "e4": {"x": 9.0}},
        )
        assert anonymity_check("mean", rp, seed=2)
        assert anonymity_check("median", rp, seed=2)

    def test_random_dictator_lottery_is_anonymous(self, three_way):
        assert anonymity_check(lambda p: random_dictator(p, 7)[0], three_way, seed=3)

    def test_first_voter_counts_twice_is_not_anonymous(self):
        def biased_borda(profile):
            units = profile.unit_rankings()
            doubled = (units[0],) + units
            return ordinal_rule("borda")(profile_from_rankings(doubled, profile.alternatives))

        profile = profile_from_rankings([("A", "B"), ("B", "A")], ("A", "B"))
        assert not anonymity_check(biased_borda, profile, seed=4)

    def test_unsupported_profile_type_rejected(self):
        with pytest.raises(TypeError):
            anonymity_check("mean", 42, seed=0)


class TestRandomGenerators:
    def test_random_strict_profile_shape(self):
        rng = Random(0)
        profile = random_strict_profile(rng, 4, 7)
        assert profile.alternatives == ("A", "B", "C", "D")
        assert profile.num_voters == 7
        for ranking in profile.unit_rankings():
            assert sorted(ranking) == ["A", "B", "C", "D"]

    def test_random_clone_spec_covers_every_voter(self):
        rng = Random(1)
        profile = random_strict_profile(rng, 3, 5)
        spec = random_clone_spec(rng, profile)
        assert spec.target in profile.alternatives
        assert set(spec.orders) == set(range(5))
        for order in spec.orders.values():
            assert sorted(order) == sorted(spec.clone_ids())


@pytest.fixture(scope="module")
def clone_sweep_counts():
    # 300 random tournaments (no pairwise ties), random per-voter clone orders.
    rng = Random(8)
    counts = {"ranked_pairs": 0, "plurality": 0, "borda": 0}
    examined = 0
    while examined < 300:
        m = rng.choice((3, 4))
        n = rng.choice((3, 5, 7, 9))
        profile = random_strict_profile(rng, m, n)
        mm = margin_matrix(profile)
        pairs = [
            (a, b) for a in profile.alternatives for b in profile.alternatives if a < b
        ]
        if any(mm.margin(a, b) == 0 for a, b in pairs):
            continue
        examined += 1
        spec = random_clone_spec(rng, profile)
        for rule in counts:
            if not clone_test(rule, profile, spec).independent:
                counts[rule] += 1
    return counts


class TestCloneSweep:
    def test_ranked_pairs_never_violates(self, clone_sweep_counts):
        assert clone_sweep_counts["ranked_pairs"] == 0

    def test_plurality_and_borda_both_violate(self, clone_sweep_counts):
        assert clone_sweep_counts["plurality"] >= 1
        assert clone_sweep_counts["borda"] >= 1
