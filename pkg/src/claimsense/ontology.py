"""Concept hierarchy, declarative rule packs and their combination.

A pack is a JSON file carrying one context's knowledge: a concept graph
fragment (isa DAG rooted at ``entity``, typicality links, association
links), defeasible rules, scripts, metonymic coercion entries and the
functional-predicate declarations used by the reasoner's conflict check.

Three packs ship with the repo:

    packs/k-context.pack   common knowledge about roads, vehicles, physics
    packs/f-context.pack   what an insurance claim form is for
    packs/e-context.pack   how claim reports argue

RuleBase combines loaded packs, synthesizes typicality defaults from the
graph and fixes the priority order between potentially conflicting
defaults: a default whose antecedent requires strictly more than
another's wins (specificity); otherwise the explicit priority field
decides; a remaining tie is a load-time error.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .errors import (
    CycleInHierarchy,
    DuplicateRuleId,
    PackError,
    SchemaError,
    UnknownConcept,
)
from .patterns import Absent, Atom, is_variable, parse_pattern

ROOT_CONCEPT = "entity"


def _schema_path(name: str) -> Path:
    return Path(__file__).resolve().parents[2] / "schemas" / name


def load_schema(name: str) -> dict:
    return json.loads(_schema_path(name).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# concept graph


@dataclass
class TypicalityLink:
    concept: str
    target: str
    culture: str = "default"


@dataclass
class Association:
    concept: str
    host: str
    relation: str


class ConceptGraph:
    """isa DAG plus typicality and association links."""

    def __init__(self, concepts=(), isa=(), typical=(), associations=()):
        self.concepts: set[str] = set(concepts)
        self.parents: dict[str, set[str]] = {c: set() for c in self.concepts}
        for child, parent in isa:
            self.parents.setdefault(child, set()).add(parent)
            self.concepts.add(child)
            self.concepts.add(parent)
            self.parents.setdefault(parent, set())
        self.typical: list[TypicalityLink] = list(typical)
        self.associations: list[Association] = list(associations)
        self._check_dag()

    def _check_dag(self):
        state: dict[str, int] = {}

        def visit(c, trail):
            if state.get(c) == 2:
                return
            if state.get(c) == 1:
                cycle = trail[trail.index(c):] + [c]
                raise CycleInHierarchy(" -> ".join(cycle))
            state[c] = 1
            for p in sorted(self.parents.get(c, ())):
                visit(p, trail + [c])
            state[c] = 2

        for c in sorted(self.concepts):
            visit(c, [])
        if self.concepts:
            stranded = sorted(
                c
                for c in self.concepts
                if c != ROOT_CONCEPT and not self.subsumes(ROOT_CONCEPT, c)
            )
            if stranded:
                raise CycleInHierarchy(
                    f"concepts not reachable from {ROOT_CONCEPT!r}: {', '.join(stranded)}"
                )

    def has(self, concept: str) -> bool:
        return concept in self.concepts

    def ancestors(self, concept: str) -> set[str]:
        seen: set[str] = set()
        stack = [concept]
        while stack:
            c = stack.pop()
            for p in self.parents.get(c, ()):
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return seen

    def subsumes(self, general: str, specific: str) -> bool:
        """Reflexive, transitive: does every ``specific`` count as a
        ``general``?"""
        if general == specific:
            return general in self.concepts
        return general in self.ancestors(specific)

    def comparable(self, a: str, b: str) -> bool:
        return self.subsumes(a, b) or self.subsumes(b, a)

    def depth(self, concept: str) -> int:
        if concept == ROOT_CONCEPT:
            return 0
        parents = self.parents.get(concept, ())
        if not parents:
            return 0
        return 1 + max(self.depth(p) for p in parents)

    def typical_specialization(self, concept: str, culture: str = "default") -> str | None:
        for link in self.typical:
            if link.concept == concept and link.culture == culture:
                return link.target
        return None

    def associated_host(self, concept: str) -> list[tuple[str, str]]:
        hosts = [
            (a.host, a.relation) for a in self.associations if a.concept == concept
        ]
        return sorted(hosts)

    def least_common_ancestor(self, concepts) -> str | None:
        """Deepest concept subsuming all the given ones, or None."""
        concepts = list(concepts)
        if not concepts or any(c not in self.concepts for c in concepts):
            return None
        common = set.intersection(
            *({c} | self.ancestors(c) for c in concepts)
        )
        if not common:
            return None
        return max(sorted(common), key=lambda c: (self.depth(c), c))

    def merge(self, other: "ConceptGraph") -> "ConceptGraph":
        merged = ConceptGraph()
        merged.concepts = set(self.concepts) | set(other.concepts)
        merged.parents = {c: set() for c in merged.concepts}
        for src in (self, other):
            for child, parents in src.parents.items():
                merged.parents.setdefault(child, set()).update(parents)
        merged.typical = self.typical + other.typical
        merged.associations = self.associations + other.associations
        merged._check_dag()
        return merged


# ---------------------------------------------------------------------------
# rules, scripts, coercions


@dataclass(frozen=True)
class DefeasibleRule:
    id: str
    context: str
    kind: str                      # "strict" | "default"
    antecedent: tuple              # Atom | Absent
    consequent: Atom
    priority: int = 0
    provenance_note: str = ""

    def positive_antecedents(self) -> list[Atom]:
        return [p for p in self.antecedent if isinstance(p, Atom)]


@dataclass(frozen=True)
class ScriptStep:
    name: str
    pattern: Atom


@dataclass(frozen=True)
class ScriptVariant:
    name: str
    guard: Atom
    steps: tuple  # step names


@dataclass(frozen=True)
class Script:
    name: str
    trigger: Atom
    roles: tuple
    steps: tuple           # ScriptStep, in canonical order
    variants: tuple = ()   # ScriptVariant, mutually exclusive by guard

    def step(self, name: str) -> ScriptStep:
        for s in self.steps:
            if s.name == name:
                return s
        raise KeyError(name)


@dataclass(frozen=True)
class CoercionEntry:
    predicate: str
    role: str
    required_type: str
    coercible_from: str
    bridge: str


@dataclass
class RulePack:
    context: str
    path: Path | None
    graph: ConceptGraph
    rules: list[DefeasibleRule]
    scripts: list[Script]
    coercions: list[CoercionEntry]
    functional: set[str]
    raw: dict = field(default_factory=dict)

    def rule(self, rule_id: str) -> DefeasibleRule | None:
        for r in self.rules:
            if r.id == rule_id:
                return r
        return None


# ---------------------------------------------------------------------------
# loading


def _parse_rule(entry: dict, context: str) -> DefeasibleRule:
    antecedent = tuple(parse_pattern(p) for p in entry["antecedent"])
    consequent = parse_pattern(entry["consequent"])
    if isinstance(consequent, Absent):
        raise PackError(f"rule {entry['id']}: consequent cannot be absent(...)")
    kind = entry["kind"]
    positives = set()
    for p in antecedent:
        if isinstance(p, Atom):
            positives |= p.variables()
    for p in antecedent:
        if isinstance(p, Absent):
            if kind != "default":
                raise PackError(
                    f"rule {entry['id']}: absent(...) only allowed in default rules"
                )
            loose = p.variables() - positives
            if loose:
                raise PackError(
                    f"rule {entry['id']}: absent(...) variables {sorted(loose)} "
                    "not bound by a positive antecedent"
                )
    loose = consequent.variables() - positives
    if loose:
        raise PackError(
            f"rule {entry['id']}: consequent variables {sorted(loose)} "
            "do not appear in the antecedent"
        )
    return DefeasibleRule(
        id=entry["id"],
        context=context,
        kind=kind,
        antecedent=antecedent,
        consequent=consequent,
        priority=int(entry.get("priority", 0)),
        provenance_note=entry.get("note", ""),
    )


def _parse_script(entry: dict) -> Script:
    steps = tuple(
        ScriptStep(s["name"], parse_pattern(s["pattern"])) for s in entry["steps"]
    )
    step_names = {s.name for s in steps}
    variants = []
    for v in entry.get("variants", ()):
        unknown = [s for s in v["steps"] if s not in step_names]
        if unknown:
            raise PackError(
                f"script {entry['name']}: variant {v['name']} uses unknown steps {unknown}"
            )
        variants.append(
            ScriptVariant(v["name"], parse_pattern(v["guard"]), tuple(v["steps"]))
        )
    return Script(
        name=entry["name"],
        trigger=parse_pattern(entry["trigger"]),
        roles=tuple(entry.get("roles", ())),
        steps=steps,
        variants=tuple(variants),
    )


def _guards_exclusive(a: Atom, b: Atom, functional: set[str]) -> bool:
    if a.negate() == b:
        return True
    return (
        a.predicate == b.predicate
        and a.predicate in functional
        and len(a.args) == len(b.args) >= 1
        and a.args[:-1] == b.args[:-1]
        and not is_variable(a.args[-1])
        and not is_variable(b.args[-1])
        and a.args[-1] != b.args[-1]
    )


def load_rule_pack(path) -> RulePack:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(data, load_schema("pack.schema.json"))
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"{path}: {exc.message} (at {'/'.join(map(str, exc.path))})") from exc

    graph = ConceptGraph(
        concepts=data.get("concepts", ()),
        isa=[tuple(edge) for edge in data.get("isa", ())],
        typical=[
            TypicalityLink(t["concept"], t["target"], t.get("culture", "default"))
            for t in data.get("typical", ())
        ],
        associations=[
            Association(a["concept"], a["host"], a["relation"])
            for a in data.get("associations", ())
        ],
    )
    for link in graph.typical:
        if not graph.subsumes(link.concept, link.target) or link.concept == link.target:
            raise PackError(
                f"{path}: typical target {link.target!r} is not a strict "
                f"descendant of {link.concept!r}"
            )

    context = data["context"]
    rules, seen = [], set()
    for entry in data.get("rules", ()):
        if entry["id"] in seen:
            raise DuplicateRuleId(f"{path}: rule id {entry['id']!r} declared twice")
        seen.add(entry["id"])
        rules.append(_parse_rule(entry, context))

    functional = set(data.get("functional", ()))
    scripts = [_parse_script(s) for s in data.get("scripts", ())]
    for script in scripts:
        for va, vb in itertools.combinations(script.variants, 2):
            if not _guards_exclusive(va.guard, vb.guard, functional):
                raise PackError(
                    f"{path}: script {script.name}: variant guards "
                    f"{va.guard} and {vb.guard} are not provably exclusive"
                )

    coercions = [
        CoercionEntry(
            c["predicate"], c["role"], c["required_type"], c["coercible_from"], c["bridge"]
        )
        for c in data.get("coercions", ())
    ]
    return RulePack(
        context=context,
        path=path,
        graph=graph,
        rules=rules,
        scripts=scripts,
        coercions=coercions,
        functional=functional,
        raw=data,
    )


def serialize_rule_pack(pack: RulePack) -> dict:
    """Schema-conforming JSON object rebuilt from the parsed structures.

    Loading the result again yields a pack equal to the input in every
    field except file path; the original text's key order is not kept.
    """
    return {
        "context": pack.context,
        "concepts": sorted(pack.graph.concepts),
        "isa": sorted(
            [child, parent]
            for child, parents in pack.graph.parents.items()
            for parent in parents
        ),
        "typical": [
            {"concept": t.concept, "target": t.target}
            if t.culture == "default"
            else {"concept": t.concept, "target": t.target, "culture": t.culture}
            for t in pack.graph.typical
        ],
        "associations": [
            {"concept": a.concept, "host": a.host, "relation": a.relation}
            for a in pack.graph.associations
        ],
        "functional": sorted(pack.functional),
        "rules": [
            {
                "id": r.id,
                "kind": r.kind,
                "antecedent": [str(p) for p in r.antecedent],
                "consequent": str(r.consequent),
                "priority": r.priority,
                "note": r.provenance_note,
            }
            for r in pack.rules
        ],
        "scripts": [
            {
                "name": s.name,
                "trigger": str(s.trigger),
                "roles": list(s.roles),
                "steps": [{"name": st.name, "pattern": str(st.pattern)} for st in s.steps],
                "variants": [
                    {"name": v.name, "guard": str(v.guard), "steps": list(v.steps)}
                    for v in s.variants
                ],
            }
            for s in pack.scripts
        ],
        "coercions": [
            {
                "predicate": c.predicate,
                "role": c.role,
                "required_type": c.required_type,
                "coercible_from": c.coercible_from,
                "bridge": c.bridge,
            }
            for c in pack.coercions
        ],
    }


# ---------------------------------------------------------------------------
# combination


def _pattern_set_subsumes(general: list[Atom], specific: list[Atom]) -> bool:
    """Is there a substitution mapping every pattern in ``general`` onto a
    member of ``specific``? (Then ``specific`` requires at least as much.)"""

    def assign(idx: int, binding: dict) -> bool:
        if idx == len(general):
            return True
        pat = general[idx]
        for candidate in specific:
            if pat.predicate != candidate.predicate or pat.negated != candidate.negated:
                continue
            if len(pat.args) != len(candidate.args):
                continue
            trial = dict(binding)
            ok = True
            for g, s in zip(pat.args, candidate.args):
                if is_variable(g):
                    if g in trial and trial[g] != s:
                        ok = False
                        break
                    trial[g] = s
                elif g != s:
                    ok = False
                    break
            if ok and assign(idx + 1, trial):
                return True
        return False

    return assign(0, {})


def _strictly_more_specific(a: DefeasibleRule, b: DefeasibleRule) -> bool:
    ga, gb = a.positive_antecedents(), b.positive_antecedents()
    return _pattern_set_subsumes(gb, ga) and not _pattern_set_subsumes(ga, gb)


def _standardize(atom: Atom, tag: str) -> Atom:
    return Atom(
        atom.predicate,
        tuple(f"{a}__{tag}" if is_variable(a) else a for a in atom.args),
        atom.negated,
    )


def _patterns_unifiable(a: Atom, b: Atom) -> bool:
    if a.predicate != b.predicate or a.negated != b.negated:
        return False
    if len(a.args) != len(b.args):
        return False
    # function-free terms: union-find over variable classes
    binding: dict = {}

    def find(t):
        while t in binding:
            t = binding[t]
        return t

    for x, y in zip(a.args, b.args):
        rx, ry = find(x), find(y)
        if rx == ry:
            continue
        if is_variable(rx):
            binding[rx] = ry
        elif is_variable(ry):
            binding[ry] = rx
        else:
            return False
    return True


def _potentially_conflicting(a: DefeasibleRule, b: DefeasibleRule, functional: set) -> bool:
    ca = _standardize(a.consequent, "l")
    cb = _standardize(b.consequent, "r")
    if _patterns_unifiable(ca, cb.negate()):
        return True
    if (
        not ca.negated
        and not cb.negated
        and ca.predicate == cb.predicate
        and ca.predicate in functional
        and len(ca.args) == len(cb.args) >= 1
    ):
        prefix_ok = all(
            _patterns_unifiable(
                Atom("x", (x,)), Atom("x", (y,))
            )
            for x, y in zip(ca.args[:-1], cb.args[:-1])
        )
        la, lb = ca.args[-1], cb.args[-1]
        if prefix_ok and (is_variable(la) or is_variable(lb) or la != lb):
            return True
    return False


class RuleBase:
    """Loaded packs combined: merged graph, merged rule set (plus typicality
    defaults synthesized from the graph), functional predicates and the
    precomputed defeat order between potentially conflicting defaults."""

    def __init__(self, packs):
        self.packs = list(packs)
        self.contexts = [p.context for p in self.packs]
        graph = ConceptGraph()
        for pack in self.packs:
            graph = graph.merge(pack.graph)
        self.graph = graph
        self.functional = frozenset().union(*(p.functional for p in self.packs)) if self.packs else frozenset()
        self.scripts = [s for p in self.packs for s in p.scripts]
        self.coercions = [c for p in self.packs for c in p.coercions]

        rules = [r for p in self.packs for r in p.rules]
        rules.extend(self._typicality_rules())
        seen = set()
        for r in rules:
            if r.id in seen:
                raise DuplicateRuleId(f"rule id {r.id!r} declared in two packs")
            seen.add(r.id)
        self.rules = {r.id: r for r in rules}
        self._strict = sorted(
            (r for r in rules if r.kind == "strict"), key=lambda r: r.id
        )
        self._default = sorted(
            (r for r in rules if r.kind == "default"), key=lambda r: r.id
        )
        self._beats: dict[tuple[str, str], bool] = {}
        self._order_defaults()

    def _typicality_rules(self):
        """One default per typicality link: an entity introduced under the
        general concept is, absent stronger information, its typical kind.
        Priority grows with concept depth so the more specific introduction
        wins when both apply."""
        synthesized = []
        order = {}
        for pack in self.packs:
            for link in pack.graph.typical:
                if link.culture != "default":
                    continue
                order.setdefault(link.concept, link)
        for idx, concept in enumerate(sorted(order)):
            link = order[concept]
            synthesized.append(
                DefeasibleRule(
                    id=f"k.typicality-{concept}",
                    context="K",
                    kind="default",
                    antecedent=(Atom("introduced-as", ("?e", concept)),),
                    consequent=Atom("type", ("?e", link.target)),
                    priority=100 * self.graph.depth(concept) + idx,
                    provenance_note=f"a {concept} is typically a {link.target}",
                )
            )
        return synthesized

    def _order_defaults(self):
        for a, b in itertools.combinations(self._default, 2):
            if not _potentially_conflicting(a, b, set(self.functional)):
                continue
            a_sp = _strictly_more_specific(a, b)
            b_sp = _strictly_more_specific(b, a)
            if a_sp:
                self._beats[(a.id, b.id)] = True
                self._beats[(b.id, a.id)] = False
            elif b_sp:
                self._beats[(a.id, b.id)] = False
                self._beats[(b.id, a.id)] = True
            elif a.priority != b.priority:
                self._beats[(a.id, b.id)] = a.priority > b.priority
                self._beats[(b.id, a.id)] = b.priority > a.priority
            else:
                raise PackError(
                    f"defaults {a.id} and {b.id} can conflict but neither is "
                    "more specific and their priorities tie; assign distinct "
                    "priorities"
                )

    # -- reasoner interface --------------------------------------------------

    def strict_rules(self):
        return self._strict

    def default_rules(self):
        return self._default

    def beats(self, challenger_id: str, incumbent_id: str) -> bool:
        """Does the challenger default override the incumbent's conclusion?"""
        return self._beats.get((challenger_id, incumbent_id), False)

    def rule(self, rule_id: str) -> DefeasibleRule | None:
        found = self.rules.get(rule_id)
        if found:
            return found
        for pack in self.packs:
            hit = pack.rule(rule_id)
            if hit:
                return hit
        return None

    def has_context(self, context: str) -> bool:
        return context in self.contexts

    def script(self, name: str) -> Script | None:
        for s in self.scripts:
            if s.name == name:
                return s
        return None

    # -- graph conveniences ----------------------------------------------------

    def subsumes(self, general: str, specific: str) -> bool:
        return self.graph.subsumes(general, specific)

    def typical_specialization(self, concept: str, culture: str = "default") -> str | None:
        return self.graph.typical_specialization(concept, culture)

    def associated_host(self, concept: str) -> list[tuple[str, str]]:
        return self.graph.associated_host(concept)

    def coerce_type(self, predicate: str, role: str, actual: str) -> str | None:
        """Bridge relation licensed when an argument's type mismatches the
        predicate's requirement but a coercion entry covers it."""
        for entry in self.coercions:
            if entry.predicate != predicate or entry.role != role:
                continue
            if self.graph.subsumes(entry.required_type, actual):
                return None  # no mismatch: nothing to coerce
            if self.graph.subsumes(entry.coercible_from, actual):
                return entry.bridge
        return None


def coerce_type(rulebase: RuleBase, predicate: str, role: str, actual: str) -> str | None:
    return rulebase.coerce_type(predicate, role, actual)


# module-level query surface: same answers as the graph methods, but unknown
# concepts are an error instead of a silent miss

def _require(graph: ConceptGraph, *concepts: str):
    for c in concepts:
        if not graph.has(c):
            raise UnknownConcept(f"concept {c!r} is not in the graph")


def subsumes(ancestor: str, descendant: str, graph: ConceptGraph) -> bool:
    _require(graph, ancestor, descendant)
    return graph.subsumes(ancestor, descendant)


def typical_specialization(concept: str, graph: ConceptGraph,
                           culture: str = "default") -> str | None:
    _require(graph, concept)
    return graph.typical_specialization(concept, culture)


def associated_host(concept: str, graph: ConceptGraph) -> list[tuple[str, str]]:
    _require(graph, concept)
    return graph.associated_host(concept)
