"""Acceptance gate: one test per shipped guarantee, one verdict line each."""

import json
import random
import time

import pytest

from claimsense.cli import main
from claimsense.errors import FactNotIn, StillAmbiguous, UnresolvableMention
from claimsense.interlingua import parse_document
from claimsense.ontology import (
    ConceptGraph,
    RuleBase,
    load_rule_pack,
    serialize_rule_pack,
)
from claimsense.patterns import Atom
from claimsense.pipeline import interpret_document, load_rulebase

from conftest import (
    CORPUS,
    PACKS,
    assert_consistent,
    random_dag_edges,
    random_facts,
    random_rules,
    reachability_oracle,
    run_program,
)


def test_criterion_1_fixture_outcomes():
    rulebase = load_rulebase()
    started = time.perf_counter()
    results = {}
    for path in sorted(CORPUS.glob("*.claim")):
        doc = parse_document(path)
        results[doc.id] = interpret_document(doc, rulebase)
    elapsed = time.perf_counter() - started
    assert elapsed < 15.0, f"corpus took {elapsed:.1f}s"

    for doc_id, result in results.items():
        gold = json.loads(
            (CORPUS / "gold" / f"{doc_id}.result.json").read_text())
        assert result.to_json() == gold, doc_id

    a1 = results["A1"]
    a1_atoms = {str(a) for a in a1.state.in_atoms()}
    stopped = a1.state.justifications_for(Atom("stopped", ("v_writer",)))
    assert any(j.rule_id == "k.stop-sign-strict" for j in stopped)
    assert "script-active(v_writer, stop-sign-script)" in a1_atoms
    # the single left check supports two readings; both stay on record
    assert "intended-turn(v_writer, right)" in a1_atoms
    assert "explains-non-perception(v_writer, check-left)" in a1_atoms

    a3 = results["A3"]
    defeats = [d.as_tuple() for d in a3.state.defeat_log]
    assert ("k.typicality-vehicle", "assertion", "type(v_writer, car)") in defeats
    assert a3.state.is_in(Atom("right-of", ("v_B", "v_writer")))
    deviation = a3.strategy.deviations[0]
    assert deviation.script == "accident-aftermath"
    assert deviation.signaling_clause == 5

    a8 = results["A8"]
    droite = {r.target: r.chosen for r in a8.resolutions}["droite"]
    assert droite == "right-side"
    assert a8.scene.chains["v_B"] == ["m_veh", "m_car"]
    assert a8.state.is_in(Atom("prior-high-speed", ("v_B",)))

    a7 = results["A7"]
    kinds = {r.kind: r for r in a7.resolutions}
    assert kinds["reference-time"].chosen == "impact"
    assert kinds["intention"].chosen == "action-started"
    assert a7.state.is_in(Atom("blinker-side", ("v_writer", "left")))

    a15 = results["A15"]
    assert a15.scene.impact["evidence"] == "negated-ability-pattern"
    assert a15.strategy.verdict == "B"

    a12 = results["A12"]
    assert a12.strategy.verdict == "A"
    assert "violates-rule(v_B, markings-arrow-left)" in a12.strategy.strategy_a_evidence

    assert results["A14"].strategy.verdict == "both"

    for doc_id in ("B33", "C10", "B28", "A17"):
        roles = [e["role"] for e in results[doc_id].scene.entities]
        assert roles.count("participant-writer") == 1, doc_id
        assert roles.count("participant-opponent") == 1, doc_id
    assert results["B28"].state.is_in(Atom("driver-of", ("o1", "v_B")))
    assert results["B28"].scene.chains["v_B"] == ["m_B", "m_lv"]
    assert results["C10"].scene.chains["v_writer"] == ["m_va", "m_i"]
    assert results["A17"].state.is_in(Atom("located-in", ("s2", "s1")))
    print("criterion 1 (fixture outcomes, corpus under 15s): PASS")


def test_criterion_2_reasoner_property_suite():
    rng = random.Random(101)
    for _ in range(200):
        rules = random_rules(rng)
        facts = random_facts(rng)
        reference = None
        for _ in range(100):
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

    rng = random.Random(202)
    for _ in range(200):
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
    print("criterion 2 (determinism + TMS scratch equivalence): PASS")


def test_criterion_3_ontology_properties(tmp_path):
    rng = random.Random(303)
    for _ in range(1000):
        edges = random_dag_edges(rng, rng.randint(3, 10))
        graph = ConceptGraph(isa=edges)
        closure = reachability_oracle(edges)
        names = sorted(closure)
        for c in names:
            assert graph.subsumes(c, c)
        for a in names:
            for b in names:
                assert graph.subsumes(a, b) == (a in closure[b])
                if a != b and graph.subsumes(a, b):
                    assert not graph.subsumes(b, a)

    packs = [load_rule_pack(p) for p in sorted(PACKS.glob("*.pack"))]
    graph = RuleBase(packs).graph
    links = [l for pack in packs for l in pack.graph.typical]
    assert links
    for link in links:
        assert link.target != link.concept
        assert graph.subsumes(link.concept, link.target)

    for pack in packs:
        copy = tmp_path / pack.path.name
        copy.write_text(json.dumps(serialize_rule_pack(pack)), encoding="utf-8")
        again = load_rule_pack(copy)
        assert serialize_rule_pack(again) == serialize_rule_pack(pack)
    print("criterion 3 (partial order, typicality, round trip): PASS")


def test_criterion_4_ablations_reproduce_the_failures():
    without_f = load_rulebase(ablate=("F",))
    with pytest.raises(UnresolvableMention):
        interpret_document(parse_document(CORPUS / "B33.claim"), without_f)

    without_k = load_rulebase(ablate=("K",))
    with pytest.raises(StillAmbiguous, match="droite"):
        interpret_document(parse_document(CORPUS / "A8.claim"), without_k)

    without_e = load_rulebase(ablate=("E",))
    result = interpret_document(parse_document(CORPUS / "A7.claim"), without_e)
    assert result.state.query("blinker-side(?v, ?side)") == []
    with pytest.raises(FactNotIn):
        result.state.explain("blinker-side(v_writer, left)")
    print("criterion 4 (each pack's removal breaks its phenomenon): PASS")


def test_criterion_5_reruns_are_byte_identical(tmp_path):
    claims = [str(p) for p in sorted(CORPUS.glob("*.claim"))]
    for run_dir in ("one", "two"):
        code = main(["interpret", *claims, "--out", str(tmp_path / run_dir)])
        assert code == 0
    for path in sorted((tmp_path / "one").glob("*.result.json")):
        twin = tmp_path / "two" / path.name
        assert path.read_bytes() == twin.read_bytes(), path.name
        gold = CORPUS / "gold" / path.name
        assert path.read_bytes() == gold.read_bytes(), path.name
    print("criterion 5 (byte-identical corpus reruns): PASS")
