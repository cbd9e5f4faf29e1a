import random
import re

from hypothesis import given, settings
from hypothesis import strategies as st

from claimsense.patterns import Absent, Atom, parse_pattern, unify
from claimsense.reasoner import BeliefState

from conftest import (
    assert_consistent,
    random_facts,
    random_rules,
    rulebase_from,
    run_program,
)

IDENT = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_\-.:]*")

identifiers = st.from_regex(r"[a-z][a-z0-9_\-]{0,8}", fullmatch=True).filter(
    lambda s: s not in ("not", "absent")
)
variables = st.from_regex(r"\?[a-z][a-z0-9_\-]{0,6}", fullmatch=True)
quoted = st.text(
    alphabet=st.characters(min_codepoint=32, max_codepoint=126,
                           blacklist_characters='"'),
    max_size=12,
).filter(lambda s: not IDENT.fullmatch(s))
terms = st.one_of(identifiers, variables, st.integers(0, 10**6), quoted)

atoms = st.builds(
    Atom,
    predicate=identifiers,
    args=st.lists(terms, max_size=4).map(tuple),
    negated=st.booleans(),
)
patterns = st.one_of(atoms, st.builds(Absent, atoms))


@given(patterns)
@settings(max_examples=300)
def test_pattern_text_round_trip(pattern):
    assert parse_pattern(str(pattern)) == pattern


@given(atoms, st.dictionaries(variables, st.one_of(identifiers, st.integers(0, 99))))
@settings(max_examples=200)
def test_unify_inverts_substitution(pattern, binding):
    for v in pattern.variables():
        binding.setdefault(v, "ground")
    ground = pattern.substitute(binding)
    recovered = unify(pattern, ground)
    assert recovered is not None
    assert all(binding[v] == recovered[v] for v in pattern.variables())


def test_fixpoint_is_insensitive_to_declaration_and_insertion_order():
    rng = random.Random(7)
    for _ in range(30):
        rules = random_rules(rng)
        facts = random_facts(rng)
        reference = None
        for _ in range(20):
            shuffled_rules, shuffled_facts = rules[:], facts[:]
            rng.shuffle(shuffled_rules)
            rng.shuffle(shuffled_facts)
            state = run_program(shuffled_rules, shuffled_facts)
            snap = (state.snapshot(),
                    frozenset(d.as_tuple() for d in state.defeat_log))
            if reference is None:
                reference = snap
            assert snap == reference
            assert_consistent(state)


def test_retraction_sequences_match_scratch_reruns():
    rng = random.Random(13)
    for _ in range(50):
        rules = random_rules(rng)
        facts = random_facts(rng)
        state = run_program(rules, facts)
        remaining = facts[:]
        for fact in rng.sample(facts, rng.randint(1, len(facts))):
            state.retract_assertion(fact)
            remaining.remove(fact)
            assert_consistent(state)
            scratch = run_program(rules, remaining)
            assert state.snapshot() == scratch.snapshot()


def test_reassertion_restores_the_scratch_state():
    rng = random.Random(29)
    for _ in range(25):
        rules = random_rules(rng)
        facts = random_facts(rng)
        state = run_program(rules, facts)
        reference = state.snapshot()

        target = rng.choice(facts)
        state.retract_assertion(target)
        state.assert_fact(target)
        state.run_to_fixpoint()
        assert state.snapshot() == reference
        assert_consistent(state)


def test_defeat_log_never_names_a_losing_winner():
    """In every logged defeat the winner is the assertion pseudo-id, a
    strict rule, or a default that outranks the loser."""
    rng = random.Random(31)
    for _ in range(40):
        rules = random_rules(rng)
        rulebase = rulebase_from(rules)
        state = BeliefState(rulebase)
        for fact in random_facts(rng):
            state.assert_fact(fact)
        state.run_to_fixpoint()
        for record in state.defeat_log:
            winner = rulebase.rule(record.winner_rule_id)
            if winner is None or winner.kind == "strict":
                continue
            assert not rulebase.beats(record.loser_rule_id, record.winner_rule_id)
