"""Forward chaining with prioritized defaults and justification bookkeeping.

The belief state is a justification-based TMS: every non-asserted in-fact
holds at least one valid justification (antecedents in, absence conditions
out). Defeat removes justifications, never facts directly; a fact with an
independent surviving justification stays in. Retraction cascades through
support links and re-derivation then runs back to fixpoint.

Chaining semantics, pinned for determinism: strict rules saturate first,
then the single best enabled default instantiation fires (explicit
priority desc, rule id asc, ground consequent asc), and the cycle repeats
until nothing is enabled. Agenda order therefore cannot influence the
result. Two in-facts conflict when one is the explicit negation of the
other or when they give different values to a declared functional
predicate; conflicts between defaults are resolved by rule priority
(specificity first, explicit priority second - see ontology.RuleBase),
conflicts where both sides have hard support raise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    ContradictsAssertion,
    ContradictsStrict,
    FactNotIn,
    ResourceLimit,
)
from .patterns import Absent, Atom, parse_pattern, rename_terms, unify

DEFAULT_MAX_FACTS = 10_000

ASSERTED = "asserted"
DERIVED_STRICT = "derived-strict"
DERIVED_DEFAULT = "derived-default"

# winner id used in the defeat log when an assertion (not a rule) wins
ASSERTION_WINNER = "assertion"


@dataclass(frozen=True)
class Justification:
    rule_id: str
    kind: str                     # "strict" | "default"
    antecedents: tuple = ()       # ground atoms that must be in
    absences: tuple = ()          # ground atoms that must be out
    note: str = ""

    def dedupe_key(self):
        return (self.rule_id, self.antecedents, self.absences)


@dataclass(frozen=True)
class Fact:
    """Read-only view of one belief: the atom plus its current standing."""

    predicate: str
    args: tuple
    negated: bool
    status: str
    in_: bool

    @property
    def atom(self) -> Atom:
        return Atom(self.predicate, self.args, self.negated)


@dataclass(frozen=True)
class DefeatRecord:
    loser_rule_id: str
    winner_rule_id: str
    fact: Atom

    def as_tuple(self):
        return (self.loser_rule_id, self.winner_rule_id, str(self.fact))


class _Node:
    __slots__ = ("atom", "asserted", "assert_note", "justifications", "in_")

    def __init__(self, atom: Atom):
        self.atom = atom
        self.asserted = False
        self.assert_note = ""
        self.justifications: list[Justification] = []
        self.in_ = False

    def status(self) -> str:
        if self.asserted:
            return ASSERTED
        if any(j.kind == "strict" for j in self.justifications):
            return DERIVED_STRICT
        return DERIVED_DEFAULT

    def is_hard(self) -> bool:
        """Hard facts cannot be defeated, only cascaded out."""
        return self.asserted or any(j.kind == "strict" for j in self.justifications)

    def copy(self) -> "_Node":
        dup = _Node(self.atom)
        dup.asserted = self.asserted
        dup.assert_note = self.assert_note
        dup.justifications = list(self.justifications)
        dup.in_ = self.in_
        return dup


@dataclass
class DerivationTree:
    fact: str
    rule_id: str | None
    note: str
    children: list

    def to_json(self) -> dict:
        return {
            "fact": self.fact,
            "rule_id": self.rule_id,
            "note": self.note,
            "children": [c.to_json() for c in self.children],
        }

    def rule_ids(self) -> set:
        out = {self.rule_id} if self.rule_id else set()
        for child in self.children:
            out |= child.rule_ids()
        return out


class BeliefState:
    """Single-writer store of facts, justifications and the defeat log."""

    def __init__(self, rulebase=None, max_facts: int = DEFAULT_MAX_FACTS):
        self.rulebase = rulebase
        self.max_facts = max_facts
        self._nodes: dict[Atom, _Node] = {}
        self.defeat_log: list[DefeatRecord] = []
        self._defeats_seen: set = set()
        self.agenda: list = []    # informational: candidates pending at last step
        self._in_view_cache = None

    # -- inspection ---------------------------------------------------------

    def is_in(self, atom: Atom) -> bool:
        node = self._nodes.get(atom)
        return bool(node and node.in_)

    def _in_view(self):
        """Cached (sorted atoms, predicate/polarity index) over the in-set.
        Rebuilt lazily after every relabel, so match loops see the same
        canonical order without re-sorting per call."""
        if self._in_view_cache is None:
            atoms = sorted((a for a, n in self._nodes.items() if n.in_), key=Atom.key)
            by_pred: dict = {}
            for atom in atoms:
                by_pred.setdefault((atom.predicate, atom.negated), []).append(atom)
            self._in_view_cache = (atoms, by_pred)
        return self._in_view_cache

    def in_atoms(self) -> list[Atom]:
        return list(self._in_view()[0])

    def facts(self) -> list[Fact]:
        return [
            Fact(a.predicate, a.args, a.negated, n.status(), True)
            for a, n in sorted(self._nodes.items(), key=lambda kv: kv[0].key())
            if n.in_
        ]

    def status(self, atom: Atom) -> str | None:
        node = self._nodes.get(atom)
        return node.status() if node and node.in_ else None

    def justifications_for(self, atom: Atom) -> list[Justification]:
        node = self._nodes.get(atom)
        return list(node.justifications) if node else []

    def query(self, pattern) -> list[tuple[Atom, dict]]:
        """All in-facts unifying with the pattern, with bindings."""
        if isinstance(pattern, str):
            pattern = parse_pattern(pattern)
        out = []
        for atom in self.in_atoms():
            binding = unify(pattern, atom)
            if binding is not None:
                out.append((atom, binding))
        return out

    def fork(self) -> "BeliefState":
        """Independent copy for hypothetical reasoning. Shares the rulebase."""
        dup = BeliefState(self.rulebase, self.max_facts)
        dup._nodes = {a: n.copy() for a, n in self._nodes.items()}
        dup.defeat_log = list(self.defeat_log)
        dup._defeats_seen = set(self._defeats_seen)
        return dup

    def snapshot(self) -> frozenset:
        return frozenset(self.in_atoms())

    # -- conflict machinery -------------------------------------------------

    def _functional(self) -> frozenset:
        return self.rulebase.functional if self.rulebase is not None else frozenset()

    def _conflicts(self, a: Atom, b: Atom) -> bool:
        if a.negate() == b:
            return True
        if a.negated or b.negated:
            return False
        return (
            a.predicate == b.predicate
            and a.predicate in self._functional()
            and len(a.args) == len(b.args)
            and len(a.args) >= 1
            and a.args[:-1] == b.args[:-1]
            and a.args[-1] != b.args[-1]
        )

    def _conflicting_in_nodes(self, atom: Atom) -> list[_Node]:
        # only two conflict shapes exist, so probe them directly instead of
        # scanning every in-atom
        rivals = []
        negation = atom.negate()
        node = self._nodes.get(negation)
        if node and node.in_:
            rivals.append(negation)
        if not atom.negated and atom.predicate in self._functional() and atom.args:
            for cand in self._in_view()[1].get((atom.predicate, False), ()):
                if (
                    len(cand.args) == len(atom.args)
                    and cand.args[:-1] == atom.args[:-1]
                    and cand.args[-1] != atom.args[-1]
                ):
                    rivals.append(cand)
        rivals.sort(key=Atom.key)
        return [self._nodes[a] for a in rivals]

    # -- mutation primitives --------------------------------------------------

    def _node(self, atom: Atom) -> _Node:
        node = self._nodes.get(atom)
        if node is None:
            node = self._nodes[atom] = _Node(atom)
        return node

    def _log_defeat(self, loser_rule_id: str, winner_rule_id: str, fact: Atom):
        rec = DefeatRecord(loser_rule_id, winner_rule_id, fact)
        if rec.as_tuple() not in self._defeats_seen:
            self._defeats_seen.add(rec.as_tuple())
            self.defeat_log.append(rec)

    def _defeat_node(self, node: _Node, winner_rule_id: str):
        for just in node.justifications:
            self._log_defeat(just.rule_id, winner_rule_id, node.atom)
        node.justifications = []
        self._relabel()

    def _check_cap(self):
        if sum(1 for n in self._nodes.values() if n.in_) > self.max_facts:
            raise ResourceLimit(f"fact cap exceeded ({self.max_facts})")

    def _relabel(self):
        """Recompute the well-founded in-set from assertions + stored
        justifications, dropping justifications that lost their support or
        whose absence conditions are now violated."""
        ordered = sorted(self._nodes.items(), key=lambda kv: kv[0].key())
        while True:
            in_set: set[Atom] = set()
            changed = True
            while changed:
                changed = False
                for atom, node in ordered:
                    if atom in in_set:
                        continue
                    if node.asserted:
                        in_set.add(atom)
                        changed = True
                        continue
                    for just in node.justifications:
                        if all(a in in_set for a in just.antecedents) and not any(
                            b in in_set for b in just.absences
                        ):
                            in_set.add(atom)
                            changed = True
                            break
            dropped = False
            for atom, node in self._nodes.items():
                keep = []
                for just in node.justifications:
                    ok = all(a in in_set for a in just.antecedents) and not any(
                        b in in_set for b in just.absences
                    )
                    if ok:
                        keep.append(just)
                    else:
                        dropped = True
                node.justifications = keep
            if not dropped:
                for atom, node in self._nodes.items():
                    node.in_ = atom in in_set
                self._in_view_cache = None
                return

    def _bring_in(self, atom: Atom, just: Justification):
        node = self._node(atom)
        if just.dedupe_key() not in {j.dedupe_key() for j in node.justifications}:
            node.justifications.append(just)
        self._relabel()
        self._check_cap()

    # -- public operations ----------------------------------------------------

    def assert_fact(self, fact, note: str = ""):
        """Place an externally given fact in. No derivation is performed,
        but a conflicting in-default is defeated immediately so the state
        never holds a fact together with its negation."""
        atom = parse_pattern(fact) if isinstance(fact, str) else fact
        if isinstance(atom, Absent) or not atom.is_ground():
            raise ContradictsAssertion(f"can only assert ground facts, got {fact!r}")
        for rival in self._conflicting_in_nodes(atom):
            if rival.asserted:
                raise ContradictsAssertion(
                    f"asserting {atom} contradicts asserted {rival.atom}"
                )
            if rival.is_hard():
                raise ContradictsStrict(
                    f"asserting {atom} contradicts strict-derived {rival.atom}",
                    trees=[self.explain(rival.atom)],
                )
            self._defeat_node(rival, ASSERTION_WINNER)
        node = self._node(atom)
        node.asserted = True
        if note:
            node.assert_note = note
        self._relabel()
        self._check_cap()
        return self

    def retract_assertion(self, fact):
        """Withdraw an asserted fact; support cascades and, when a rulebase
        is attached, re-derivation runs back to fixpoint."""
        atom = parse_pattern(fact) if isinstance(fact, str) else fact
        node = self._nodes.get(atom)
        if node is None or not node.asserted:
            raise FactNotIn(f"{atom} is not an asserted fact")
        node.asserted = False
        self._relabel()
        if self.rulebase is not None:
            self.run_to_fixpoint(self.rulebase)
        return self

    def retract_and_revise(self, contradicting, note: str = ""):
        """Assert a fact that contradicts a default conclusion. The defeated
        default goes out, everything resting only on it cascades out, and
        re-derivation runs to fixpoint. Raises if the contradicted fact has
        hard support."""
        atom = parse_pattern(contradicting) if isinstance(contradicting, str) else contradicting
        self.assert_fact(atom, note=note)
        if self.rulebase is not None:
            self.run_to_fixpoint(self.rulebase)
        return self

    def derive(self, fact, rule_id: str, antecedents=(), kind: str = "default",
               note: str = ""):
        """Record a conclusion reached outside the chaining loop (an
        interpretation step) as a regular justification, so it shows up in
        explanation trees and cascades like any derived fact."""
        atom = parse_pattern(fact) if isinstance(fact, str) else fact
        if isinstance(atom, Absent) or not atom.is_ground():
            raise ContradictsAssertion(f"can only derive ground facts, got {fact!r}")
        ants = tuple(
            parse_pattern(a) if isinstance(a, str) else a for a in antecedents
        )
        missing = [a for a in ants if not self.is_in(a)]
        if missing:
            raise FactNotIn(f"antecedent {missing[0]} of {rule_id} is not in")
        for rival in self._conflicting_in_nodes(atom):
            if rival.is_hard():
                raise ContradictsStrict(
                    f"deriving {atom} by {rule_id} contradicts {rival.atom}",
                    trees=[self.explain(rival.atom)],
                )
            self._defeat_node(rival, rule_id)
        self._bring_in(atom, Justification(rule_id, kind, ants, (), note))
        return self

    # -- chaining -------------------------------------------------------------

    def run_to_fixpoint(self, rulebase=None):
        if rulebase is not None:
            self.rulebase = rulebase
        if self.rulebase is None:
            return self
        cap = max(self.max_facts * 4, 1000)
        steps = 0
        while True:
            steps += 1
            if steps > cap:
                raise ResourceLimit(f"no fixpoint after {cap} chaining steps")
            if self._saturate_strict():
                continue
            candidates = self._default_candidates()
            self.agenda = [
                f"{rule.id}: {concl}" for rule, _, concl, _ in candidates
            ]
            if not candidates:
                return self
            self._fire_default(*candidates[0])

    def _match_antecedents(self, patterns, binding=None):
        """Deterministic backtracking join over in-atoms."""
        binding = binding or {}
        if not patterns:
            yield binding
            return
        head, rest = patterns[0], patterns[1:]
        for atom in self._in_view()[1].get((head.predicate, head.negated), ()):
            extended = unify(head, atom, binding)
            if extended is not None:
                yield from self._match_antecedents(rest, extended)

    def _saturate_strict(self) -> bool:
        fired = False
        progress = True
        while progress:
            progress = False
            for rule in self.rulebase.strict_rules():
                positives = [p for p in rule.antecedent if isinstance(p, Atom)]
                for binding in self._match_antecedents(positives):
                    concl = rule.consequent.substitute(binding)
                    node = self._nodes.get(concl)
                    just = Justification(
                        rule_id=rule.id,
                        kind="strict",
                        antecedents=tuple(p.substitute(binding) for p in positives),
                        note=rule.provenance_note,
                    )
                    if node and node.in_:
                        if just.dedupe_key() not in {
                            j.dedupe_key() for j in node.justifications
                        }:
                            node.justifications.append(just)
                        continue
                    for rival in self._conflicting_in_nodes(concl):
                        if rival.is_hard():
                            raise ContradictsStrict(
                                f"strict rule {rule.id} derives {concl}, "
                                f"contradicting {rival.atom}",
                                trees=[self.explain(rival.atom)],
                            )
                        self._defeat_node(rival, rule.id)
                    self._bring_in(concl, just)
                    fired = True
                    progress = True
        return fired

    def _default_candidates(self):
        """Enabled default instantiations, best first. Logs (deduped) the
        instantiations blocked by a conflicting winner."""
        out = []
        for rule in self.rulebase.default_rules():
            positives = [p for p in rule.antecedent if isinstance(p, Atom)]
            absences = [p.atom for p in rule.antecedent if isinstance(p, Absent)]
            for binding in self._match_antecedents(positives):
                concl = rule.consequent.substitute(binding)
                ground_absences = tuple(a.substitute(binding) for a in absences)
                if any(self.is_in(a) for a in ground_absences):
                    continue
                just = Justification(
                    rule_id=rule.id,
                    kind="default",
                    antecedents=tuple(p.substitute(binding) for p in positives),
                    absences=ground_absences,
                    note=rule.provenance_note,
                )
                node = self._nodes.get(concl)
                if node and node.in_ and just.dedupe_key() in {
                    j.dedupe_key() for j in node.justifications
                }:
                    continue
                rivals = self._conflicting_in_nodes(concl)
                blocked = False
                for rival in rivals:
                    if rival.is_hard():
                        # credit what makes the rival unbeatable, not whichever
                        # justification sorts first
                        winner = (
                            ASSERTION_WINNER
                            if rival.asserted
                            else sorted(
                                j.rule_id
                                for j in rival.justifications
                                if j.kind == "strict"
                            )[0]
                        )
                        self._log_defeat(rule.id, winner, concl)
                        blocked = True
                        break
                    for rjust in rival.justifications:
                        if not self.rulebase.beats(rule.id, rjust.rule_id):
                            self._log_defeat(rule.id, rjust.rule_id, concl)
                            blocked = True
                            break
                    if blocked:
                        break
                if not blocked:
                    out.append((rule, binding, concl, just))
        out.sort(key=lambda c: (-c[0].priority, c[0].id, c[2].key()))
        return out

    def _fire_default(self, rule, binding, concl, just):
        for rival in self._conflicting_in_nodes(concl):
            # candidate filtering guarantees every rival justification loses
            self._defeat_node(rival, rule.id)
        self._bring_in(concl, just)

    # -- explanation ------------------------------------------------------------

    def explain(self, fact) -> DerivationTree:
        atom = parse_pattern(fact) if isinstance(fact, str) else fact
        node = self._nodes.get(atom)
        if node is None or not node.in_:
            raise FactNotIn(
                f"{atom} is not in", suggestions=self._suggestions(atom)
            )
        return self._tree(atom, frozenset())

    def _tree(self, atom: Atom, seen: frozenset) -> DerivationTree:
        node = self._nodes[atom]
        if node.asserted or atom in seen:
            return DerivationTree(str(atom), None, node.assert_note or "asserted", [])
        just = sorted(
            node.justifications,
            key=lambda j: (j.kind != "strict", j.rule_id, j.antecedents),
        )[0]
        seen = seen | {atom}
        children = [self._tree(a, seen) for a in just.antecedents]
        children.extend(
            DerivationTree(f"absent({b})", None, "holds by absence", [])
            for b in just.absences
        )
        return DerivationTree(str(atom), just.rule_id, just.note, children)

    def _suggestions(self, atom: Atom) -> list[str]:
        same_pred = [a for a in self.in_atoms() if a.predicate == atom.predicate]
        if same_pred:
            overlap = lambda a: -len(set(a.args) & set(atom.args))
            return [str(a) for a in sorted(same_pred, key=lambda a: (overlap(a), a.key()))][:5]
        sharing = [a for a in self.in_atoms() if set(a.args) & set(atom.args)]
        return [str(a) for a in sharing[:5]]

    # -- entity renaming (used once, when discourse canonicalizes ids) ----------

    def rename_terms(self, mapping: dict):
        nodes: dict[Atom, _Node] = {}
        for atom, node in self._nodes.items():
            new_atom = rename_terms(atom, mapping)
            dup = _Node(new_atom)
            dup.asserted = node.asserted
            dup.assert_note = node.assert_note
            dup.in_ = node.in_
            dup.justifications = [
                Justification(
                    j.rule_id,
                    j.kind,
                    tuple(rename_terms(a, mapping) for a in j.antecedents),
                    tuple(rename_terms(b, mapping) for b in j.absences),
                    j.note,
                )
                for j in node.justifications
            ]
            if new_atom in nodes:
                prev = nodes[new_atom]
                prev.asserted = prev.asserted or dup.asserted
                prev.in_ = prev.in_ or dup.in_
                have = {j.dedupe_key() for j in prev.justifications}
                prev.justifications.extend(
                    j for j in dup.justifications if j.dedupe_key() not in have
                )
            else:
                nodes[new_atom] = dup
        self._nodes = nodes
        self.defeat_log = [
            DefeatRecord(r.loser_rule_id, r.winner_rule_id, rename_terms(r.fact, mapping))
            for r in self.defeat_log
        ]
        self._defeats_seen = {r.as_tuple() for r in self.defeat_log}
        self._relabel()
        return self


# module-level forms of the core operations, matching the documented surface

def assert_fact(state: BeliefState, fact, note: str = "") -> BeliefState:
    return state.assert_fact(fact, note=note)


def run_to_fixpoint(state: BeliefState, rulebase=None) -> BeliefState:
    return state.run_to_fixpoint(rulebase)


def retract_and_revise(state: BeliefState, contradicting, note: str = "") -> BeliefState:
    return state.retract_and_revise(contradicting, note=note)


def explain(state: BeliefState, fact) -> DerivationTree:
    return state.explain(fact)
