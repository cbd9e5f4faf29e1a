import json
import random

import pytest

from claimsense.errors import (
    CycleInHierarchy,
    DuplicateRuleId,
    PackError,
    SchemaError,
    UnknownConcept,
)
from claimsense.ontology import (
    Association,
    ConceptGraph,
    RuleBase,
    associated_host,
    coerce_type,
    load_rule_pack,
    serialize_rule_pack,
    subsumes,
    typical_specialization,
)

from conftest import PACKS, random_dag_edges, reachability_oracle


@pytest.fixture(scope="module")
def k_pack():
    return load_rule_pack(PACKS / "k-context.pack")


def write_pack(tmp_path, **overrides):
    data = {
        "context": "K",
        "concepts": ["entity"],
        "isa": [],
        "typical": [],
        "associations": [],
        "functional": [],
        "rules": [],
        "scripts": [],
        "coercions": [],
    }
    data.update(overrides)
    path = tmp_path / "tmp.pack"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_subsumes_on_shipped_hierarchy(k_pack):
    g = k_pack.graph
    assert g.subsumes("vehicle", "car")
    assert g.subsumes("car", "car")
    assert not g.subsumes("car", "vehicle")
    assert g.subsumes("entity", "motorcycle")
    assert not g.subsumes("person", "car")


def test_subsumes_matches_exhaustive_closure(k_pack):
    raw = json.loads((PACKS / "k-context.pack").read_text(encoding="utf-8"))
    closure = reachability_oracle([tuple(e) for e in raw["isa"]])
    g = k_pack.graph
    for specific in closure:
        for general in closure:
            assert g.subsumes(general, specific) == (general in closure[specific]), (
                general, specific,
            )


def test_module_level_queries_reject_unknown_concepts(k_pack):
    g = k_pack.graph
    assert subsumes("vehicle", "car", g)
    with pytest.raises(UnknownConcept):
        subsumes("vehicle", "hovercraft", g)
    with pytest.raises(UnknownConcept):
        typical_specialization("hovercraft", g)
    with pytest.raises(UnknownConcept):
        associated_host("hovercraft", g)
    # the graph methods stay total so pipeline probes never blow up
    assert not g.subsumes("vehicle", "hovercraft")


def test_typical_specialization_follows_pack_links(k_pack):
    g = k_pack.graph
    assert typical_specialization("vehicle", g) == "car"
    assert typical_specialization("two-wheeler", g) == "motorcycle"
    assert typical_specialization("car", g) is None
    assert typical_specialization("vehicle", g, culture="mars") is None


def test_typical_targets_are_strict_descendants(rulebase):
    g = rulebase.graph
    assert g.typical, "no typicality links shipped"
    for link in g.typical:
        assert link.target != link.concept
        assert g.subsumes(link.concept, link.target)


def test_associated_host_lookup(k_pack):
    g = k_pack.graph
    assert associated_host("gas-pump", g) == [("gas-station", "located-in")]
    assert associated_host("car-door", g) == [("car", "part-of")]
    assert associated_host("entity", g) == []


def test_associated_host_order_is_deterministic():
    g = ConceptGraph(
        isa=[("widget", "entity"), ("z-place", "entity"), ("a-place", "entity")],
        associations=[
            Association("widget", "z-place", "located-in"),
            Association("widget", "a-place", "located-in"),
        ],
    )
    assert g.associated_host("widget") == [
        ("a-place", "located-in"),
        ("z-place", "located-in"),
    ]


def test_metonymic_coercion(rulebase):
    assert coerce_type(rulebase, "squeeze", "agent", "car") == "driver-of"
    assert coerce_type(rulebase, "squeeze", "agent", "driver") is None
    assert coerce_type(rulebase, "want", "experiencer", "vehicle") == "driver-of"
    assert coerce_type(rulebase, "squeeze", "agent", "pedestrian") is None
    assert coerce_type(rulebase, "unknown-verb", "agent", "car") is None


def test_k_pack_carries_the_traffic_code(k_pack):
    assert k_pack.context == "K"
    assert len(k_pack.rules) >= 12
    expected_kinds = {
        "k.stop-sign-strict": "strict",
        "k.right-of-way-from-right": "strict",
        "k.pass-on-left": "strict",
        "k.markings-arrow-left": "strict",
        "k.curve-speed-default": "default",
        "k.right-blinker-at-stop-default": "default",
        "k.swerve-left-obstacle-default": "default",
    }
    for rule_id, kind in expected_kinds.items():
        rule = k_pack.rule(rule_id)
        assert rule is not None, rule_id
        assert rule.kind == kind, rule_id


def test_cycle_in_hierarchy_rejected():
    with pytest.raises(CycleInHierarchy):
        ConceptGraph(isa=[("a", "b"), ("b", "a")])


def test_concept_stranded_from_root_rejected():
    with pytest.raises(CycleInHierarchy, match="not reachable"):
        ConceptGraph(concepts=["entity", "orphan"])


def test_empty_pack_file_is_a_schema_error(tmp_path):
    path = tmp_path / "empty.pack"
    path.write_text("{}", encoding="utf-8")
    with pytest.raises(SchemaError):
        load_rule_pack(path)


def test_duplicate_rule_id_within_one_pack(tmp_path):
    rule = {"id": "k.twice", "kind": "default",
            "antecedent": ["p(?x)"], "consequent": "q(?x)"}
    path = write_pack(tmp_path, rules=[rule, dict(rule)])
    with pytest.raises(DuplicateRuleId):
        load_rule_pack(path)


def test_duplicate_rule_id_across_packs(tmp_path, k_pack):
    rule = {"id": "k.stop-sign-strict", "kind": "strict",
            "antecedent": ["p(?x)"], "consequent": "q(?x)"}
    clash = load_rule_pack(write_pack(tmp_path, rules=[rule]))
    with pytest.raises(DuplicateRuleId):
        RuleBase([k_pack, clash])


def test_unbound_consequent_variable_rejected(tmp_path):
    rule = {"id": "k.loose", "kind": "default",
            "antecedent": ["p(?x)"], "consequent": "q(?y)"}
    with pytest.raises(PackError, match="\\?y"):
        load_rule_pack(write_pack(tmp_path, rules=[rule]))


def test_absent_only_in_defaults(tmp_path):
    rule = {"id": "k.bad-strict", "kind": "strict",
            "antecedent": ["p(?x)", "absent(q(?x))"], "consequent": "r(?x)"}
    with pytest.raises(PackError, match="absent"):
        load_rule_pack(write_pack(tmp_path, rules=[rule]))


def test_pack_round_trip_identity(tmp_path):
    for name in ("k-context.pack", "f-context.pack", "e-context.pack"):
        pack = load_rule_pack(PACKS / name)
        out = tmp_path / name
        out.write_text(json.dumps(serialize_rule_pack(pack)), encoding="utf-8")
        again = load_rule_pack(out)
        assert again.context == pack.context
        assert again.graph.concepts == pack.graph.concepts
        assert again.graph.parents == pack.graph.parents
        assert again.graph.typical == pack.graph.typical
        assert again.graph.associations == pack.graph.associations
        assert again.functional == pack.functional
        assert again.rules == pack.rules
        assert again.scripts == pack.scripts
        assert again.coercions == pack.coercions


def test_subsumes_is_a_partial_order_on_random_dags():
    rng = random.Random(20260813)
    for _ in range(100):
        edges = random_dag_edges(rng, rng.randint(3, 14))
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


def test_specificity_outranks_explicit_priority(tmp_path):
    rules = [
        {"id": "k.general-default", "kind": "default",
         "antecedent": ["p(?x)"], "consequent": "q(?x)", "priority": 50},
        {"id": "k.specific-default", "kind": "default",
         "antecedent": ["p(?x)", "r(?x)"], "consequent": "not q(?x)", "priority": 1},
    ]
    rb = RuleBase([load_rule_pack(write_pack(tmp_path, rules=rules))])
    assert rb.beats("k.specific-default", "k.general-default")
    assert not rb.beats("k.general-default", "k.specific-default")


def test_priority_breaks_incomparable_conflicts(tmp_path):
    rules = [
        {"id": "k.one-way", "kind": "default",
         "antecedent": ["p(?x)"], "consequent": "s(?x)", "priority": 7},
        {"id": "k.other-way", "kind": "default",
         "antecedent": ["r(?x)"], "consequent": "not s(?x)", "priority": 3},
    ]
    rb = RuleBase([load_rule_pack(write_pack(tmp_path, rules=rules))])
    assert rb.beats("k.one-way", "k.other-way")
    assert not rb.beats("k.other-way", "k.one-way")


def test_conflicting_defaults_with_tied_priority_fail_at_load(tmp_path):
    rules = [
        {"id": "k.one-way", "kind": "default",
         "antecedent": ["p(?x)"], "consequent": "s(?x)", "priority": 3},
        {"id": "k.other-way", "kind": "default",
         "antecedent": ["r(?x)"], "consequent": "not s(?x)", "priority": 3},
    ]
    pack = load_rule_pack(write_pack(tmp_path, rules=rules))
    with pytest.raises(PackError, match="priorities tie"):
        RuleBase([pack])


def test_typicality_links_become_defaults(rulebase):
    rule = rulebase.rule("k.typicality-vehicle")
    assert rule is not None
    assert rule.kind == "default"
    assert str(rule.consequent) == "type(?e, car)"
    deeper = rulebase.rule("k.typicality-two-wheeler")
    assert deeper.priority > rule.priority
