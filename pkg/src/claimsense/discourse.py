"""Scene reconstruction: who is involved, what happened, and the impact.

The clauses of a claim are folded into a belief state one at a time. Mentions
open or reuse discourse entities, each clause contributes facts, and the rule
base runs to fixpoint after every step so that defaults laid down early can be
revised by evidence arriving later.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import UnresolvableMention
from .interlingua import Clause, Document, Mention, MentionRef
from .patterns import Atom
from .reasoner import BeliefState

CLAIM_FORM = "claim-form"

# entities whose head falls under one of these are stage setting, not parties
SCENERY_ROOTS = ("roadside-object", "traffic-control", "road-part")

SPATIAL_PREDICATES = frozenset({
    "at", "at-intersection", "approaches-from", "in-lane", "in-curve",
    "keeps-right", "drives-between-lanes", "obstacle-side", "swerve-direction",
    "target-direction", "right-of", "left-of", "lane-width-interpretation",
    "must-go",
})

ROLE_WRITER = "participant-writer"
ROLE_OPPONENT = "participant-opponent"
ROLE_OTHER = "other"
ROLE_SCENERY = "scenery"
ROLE_GROUP = "group"


@dataclass
class Entity:
    id: str
    heads: list[str]
    role: str = ROLE_OTHER
    mentions: list[str] = field(default_factory=list)
    members: tuple[str, ...] = ()
    opponent_flag: bool = False
    last_clause: int = -1

    def to_json(self, type_name: str, properties: list[str]) -> dict:
        data = {
            "id": self.id,
            "type": type_name,
            "role": self.role,
            "heads": sorted(set(self.heads)),
            "mentions": list(self.mentions),
            "properties": properties,
        }
        if self.members:
            data["members"] = list(self.members)
        return data


@dataclass
class Event:
    clause: int
    predicate: str
    args: dict
    position: float

    def to_json(self) -> dict:
        return {
            "clause": self.clause,
            "predicate": self.predicate,
            "args": {k: self.args[k] for k in sorted(self.args)},
            "position": self.position,
        }


@dataclass
class ImpactEvent:
    participants: tuple[str, str]
    evidence: str
    clause: int | None = None

    def to_json(self) -> dict:
        return {
            "participants": list(self.participants),
            "evidence": self.evidence,
            "clause": self.clause,
        }


@dataclass
class Scene:
    entities: list[dict]
    chains: dict
    events: list[dict]
    impact: dict | None
    spatial: list[str]
    coercions: list[dict]

    def to_json(self) -> dict:
        return {
            "entities": self.entities,
            "chains": {k: self.chains[k] for k in sorted(self.chains)},
            "events": self.events,
            "impact": self.impact,
            "spatial": self.spatial,
            "coercions": self.coercions,
        }


class SceneDraft:
    """Mutable workspace shared by the interpretation passes."""

    def __init__(self, doc: Document, rulebase, state: BeliefState):
        self.doc = doc
        self.rulebase = rulebase
        self.state = state
        self.entities: dict[str, Entity] = {}
        self.order: list[str] = []
        self.mention_entity: dict[str, str] = {}
        self.writer_id: str | None = None
        self.opponent_id: str | None = None
        self.pending_clauses: list[int] = []
        self.events: dict[int, Event] = {}
        self.anchor_moves: dict[int, int] = {}
        self.impact: ImpactEvent | None = None
        self.lexeme_choice: dict[str, str] = {}
        self._counter = itertools.count(1)

    def predicate_of(self, clause: Clause) -> str:
        choice = self.lexeme_choice.get(clause.predicate)
        if choice:
            return choice
        return resolved_predicate(self.doc, clause.predicate)

    # -- entity bookkeeping ----------------------------------------------------

    def new_entity(self, head: str, role: str = ROLE_OTHER, members=()) -> Entity:
        ent = Entity(f"e{next(self._counter)}", [head], role, members=tuple(members))
        self.entities[ent.id] = ent
        self.order.append(ent.id)
        return ent

    def entity(self, eid: str) -> Entity:
        return self.entities[eid]

    def writer(self) -> Entity:
        if self.writer_id is None:
            ent = self.new_entity("driver", ROLE_WRITER)
            ent.heads.append("vehicle")
            self.writer_id = ent.id
            self.state.assert_fact(Atom("introduced-as", (ent.id, "vehicle")))
        return self.entities[self.writer_id]

    def new_participant(self, head: str = "vehicle") -> Entity:
        ent = self.new_entity(head, ROLE_OTHER)
        if "vehicle" not in ent.heads:
            ent.heads.append("vehicle")
        self.state.assert_fact(Atom("introduced-as", (ent.id, "vehicle")))
        return ent

    def flag_opponent(self, ent: Entity):
        ent.opponent_flag = True
        if self.opponent_id is None:
            self.opponent_id = ent.id

    def entity_type(self, ent: Entity) -> str:
        hits = self.state.query(Atom("type", (ent.id, "?t")))
        if hits:
            return hits[0][1]["?t"]
        graph = self.rulebase.graph
        for head in ent.heads:
            if head in graph.concepts and head != "vehicle":
                return head
        return ent.heads[0]

    def vehicle_faceted(self, ent: Entity) -> bool:
        graph = self.rulebase.graph
        return any(
            h == "vehicle" or graph.subsumes("vehicle", h)
            for h in ent.heads
            if h in graph.concepts or h == "vehicle"
        )

    def host_of_part(self, eid: str) -> str | None:
        hits = self.state.query(Atom("part-of", (eid, "?h")))
        return hits[0][1]["?h"] if hits else None


def _head_role(rulebase, head: str) -> str:
    graph = rulebase.graph
    if head in graph.concepts:
        for root in SCENERY_ROOTS:
            if graph.subsumes(root, head):
                return ROLE_SCENERY
    return ROLE_OTHER


def _comparable(rulebase, a: str, b: str) -> bool:
    graph = rulebase.graph
    if a == b:
        return True
    if a not in graph.concepts or b not in graph.concepts:
        return False
    return graph.subsumes(a, b) or graph.subsumes(b, a)


class _Resolver:
    def __init__(self, draft: SceneDraft):
        self.draft = draft
        self.doc = draft.doc
        self.rb = draft.rulebase
        self.state = draft.state

    def resolve(self, mention_id: str, clause: Clause) -> str:
        draft = self.draft
        if mention_id in draft.mention_entity:
            eid = draft.mention_entity[mention_id]
            draft.entities[eid].last_clause = clause.index
            return eid
        mention = self.doc.mention(mention_id)
        ent = self._dispatch(mention, clause)
        draft.mention_entity[mention_id] = ent.id
        if mention_id not in ent.mentions:
            ent.mentions.append(mention_id)
        ent.last_clause = clause.index
        return ent.id

    def _dispatch(self, m: Mention, clause: Clause) -> Entity:
        kind = m.kind
        if kind == "pronoun-1sg":
            return self.draft.writer()
        if kind in ("label-A", "label-B"):
            return self._label(m, kind[-1])
        if kind == "pronoun-1pl":
            return self._group(m, clause)
        if kind == "possessive":
            return self._possessive(m, clause)
        if kind in ("proper-name", "indefinite-NP"):
            return self._fresh(m)
        return self._definite(m, clause)

    def _fresh(self, m: Mention) -> Entity:
        draft, rb = self.draft, self.rb
        head = m.head_concept
        if head == "vehicle" or rb.graph.subsumes("vehicle", head):
            ent = draft.new_participant(head)
            self._assert_specific_type(ent, head)
            return ent
        ent = draft.new_entity(head, _head_role(rb, head))
        self.state.assert_fact(Atom("introduced-as", (ent.id, head)))
        return ent

    def _assert_specific_type(self, ent: Entity, head: str):
        rb = self.rb
        if (
            head in rb.graph.concepts
            and head != "vehicle"
            and rb.graph.subsumes("vehicle", head)
            and rb.typical_specialization(head) is None
        ):
            self.state.retract_and_revise(
                Atom("type", (ent.id, head)), note=f"stated as a {head}"
            )

    def _label(self, m: Mention, label: str) -> Entity:
        draft = self.draft
        writer_label = self.doc.form.writer_label
        if label == writer_label or (writer_label == "unknown" and label == "A"):
            return draft.writer()
        if draft.opponent_id is not None:
            return draft.entities[draft.opponent_id]
        ent = draft.new_participant()
        draft.flag_opponent(ent)
        return ent

    def _group(self, m: Mention, clause: Clause) -> Entity:
        draft = self.draft
        writer = draft.writer()
        partner = None
        if draft.opponent_id is not None:
            partner = draft.entities[draft.opponent_id]
        else:
            candidates = [
                draft.entities[eid]
                for eid in draft.order
                if eid != writer.id
                and draft.entities[eid].role == ROLE_OTHER
                and draft.vehicle_faceted(draft.entities[eid])
            ]
            if candidates:
                partner = candidates[-1]
            elif self.state.is_in(Atom("expected-participants", (CLAIM_FORM, 2))):
                # the form says there are two parties, so "we" licenses one
                partner = draft.new_participant()
                draft.flag_opponent(partner)
            else:
                raise UnresolvableMention(
                    m.id,
                    "plural first person needs a counterpart and none is "
                    "introduced or licensed",
                )
        return draft.new_entity("group", ROLE_GROUP, members=(writer.id, partner.id))

    def _possessive(self, m: Mention, clause: Clause) -> Entity:
        draft, rb = self.draft, self.rb
        owner = self._owner_entity(m, clause)
        head = m.head_concept
        graph = rb.graph
        if head == "vehicle" or (head in graph.concepts and graph.subsumes("vehicle", head)):
            if owner.id == draft.writer_id:
                self._merge_heads(owner, head)
                return owner
            return self._vehicle_of_person(owner, head)
        ent = draft.new_entity(head, _head_role(rb, head))
        self.state.assert_fact(Atom("introduced-as", (ent.id, head)))
        relation = "part-of" if graph.subsumes("vehicle-part", head) else "owned-by"
        self.state.assert_fact(Atom(relation, (ent.id, owner.id)))
        return ent

    def _owner_entity(self, m: Mention, clause: Clause) -> Entity:
        draft = self.draft
        if m.owner in (None, "writer"):
            return draft.writer()
        eid = self.resolve(m.owner, clause)
        return draft.entities[eid]

    def _vehicle_of_person(self, owner: Entity, head: str) -> Entity:
        """A vehicle possessed by a third party. When the form expects two
        participants and no counterpart is known yet, that vehicle is read
        as the other involved party rather than a bystander."""
        draft = self.draft
        if draft.opponent_id is not None:
            ent = draft.entities[draft.opponent_id]
            if not self.state.query(Atom("driver-of", ("?p", ent.id))):
                self._merge_heads(ent, head)
                self.state.assert_fact(Atom("driver-of", (owner.id, ent.id)))
                return ent
        if self.state.is_in(Atom("expected-participants", (CLAIM_FORM, 2))):
            ent = draft.new_participant()
            draft.flag_opponent(ent)
            self._merge_heads(ent, head)
            self.state.assert_fact(Atom("driver-of", (owner.id, ent.id)))
            return ent
        ent = draft.new_participant(head)
        self.state.assert_fact(Atom("driver-of", (owner.id, ent.id)))
        return ent

    def _merge_heads(self, ent: Entity, head: str):
        if head not in ent.heads:
            ent.heads.append(head)
        self._assert_specific_type(ent, head)

    def _definite(self, m: Mention, clause: Clause) -> Entity:
        draft, rb = self.draft, self.rb
        head = m.head_concept
        candidates = []
        for eid in draft.order:
            ent = draft.entities[eid]
            if eid == draft.writer_id or ent.role == ROLE_GROUP:
                continue
            if any(_comparable(rb, head, h) for h in ent.heads):
                candidates.append(ent)
        if candidates:
            candidates.sort(key=lambda e: (e.opponent_flag, e.last_clause))
            chosen = candidates[-1]
            self._merge_heads(chosen, head)
            return chosen
        hosts = rb.associated_host(head)
        for host_concept, relation in hosts:
            host_cands = [
                draft.entities[eid]
                for eid in draft.order
                if any(_comparable(rb, host_concept, h) for h in draft.entities[eid].heads)
            ]
            if host_cands:
                host_cands.sort(key=lambda e: e.last_clause)
                host = host_cands[-1]
                ent = draft.new_entity(head, _head_role(rb, head))
                self.state.assert_fact(Atom("introduced-as", (ent.id, head)))
                self.state.assert_fact(Atom(relation, (ent.id, host.id)))
                return ent
        return self._fresh(m)

# -- clause to fact conversion ----------------------------------------------


def _lexeme_pending(doc: Document, lexeme: str) -> bool:
    for ss in doc.lexicon_overrides:
        if ss.lexeme == lexeme and ss.resolved is None:
            return True
    return False


def resolved_predicate(doc: Document, predicate: str) -> str:
    for ss in doc.lexicon_overrides:
        if ss.lexeme == predicate and ss.resolved is not None:
            return ss.candidates[ss.resolved]
    return predicate


def _render_arg(draft: SceneDraft, value, clause: Clause, resolver: _Resolver):
    if isinstance(value, MentionRef):
        return resolver.resolve(value.ref, clause)
    return value


def clause_atom(draft: SceneDraft, clause: Clause, args: dict) -> Atom | None:
    """The base fact a clause contributes, or None when none applies."""
    predicate = draft.predicate_of(clause)
    values = tuple(args[role] for role in sorted(args))
    if clause.modality == "ability":
        if clause.polarity == "negative":
            agent = args.get("agent")
            return Atom("unable", (agent, args.get("action")))
        return None
    if clause.modality == "intention":
        return None
    atom = Atom(predicate, values)
    if clause.polarity == "negative":
        atom = atom.negate()
    return atom


def _distribute(draft: SceneDraft, atom: Atom) -> list[Atom]:
    """Unary statements about a group hold of each member; impacts are left
    to the impact pass, which knows the group stands for both parties."""
    if len(atom.args) != 1 or atom.negated:
        return [atom]
    arg = atom.args[0]
    ent = draft.entities.get(arg)
    if ent is None or ent.role != ROLE_GROUP:
        return [atom]
    if draft.rulebase.subsumes("impact-event", atom.predicate):
        return [atom]
    return [Atom(atom.predicate, (member,)) for member in ent.members] + [atom]


def resolve_mentions(doc: Document, rulebase, state: BeliefState | None = None) -> SceneDraft:
    """Fold the clauses into a belief state, opening entities as mentions
    arrive and revising defaults as later clauses contradict them."""
    if state is None:
        state = BeliefState(rulebase)
    draft = SceneDraft(doc, rulebase, state)
    state.assert_fact(Atom("accident-report", (CLAIM_FORM,)))
    state.run_to_fixpoint(rulebase)
    resolver = _Resolver(draft)

    for clause in doc.clauses:
        args = {
            role: _render_arg(draft, value, clause, resolver)
            for role, value in sorted(clause.args.items())
        }
        predicate = draft.predicate_of(clause)
        draft.events[clause.index] = Event(
            clause.index, predicate, dict(args), float(clause.index)
        )
        if clause.modality == "intention":
            agent = args.get("agent")
            if agent is not None:
                state.assert_fact(Atom("intends", (agent, predicate)))
                if predicate == "turn" and "direction" in args:
                    state.assert_fact(
                        Atom("reported-turning", (agent, args["direction"]))
                    )
            state.run_to_fixpoint(rulebase)
            continue
        if _lexeme_pending(doc, clause.predicate):
            draft.pending_clauses.append(clause.index)
            state.run_to_fixpoint(rulebase)
            continue
        atom = clause_atom(draft, clause, args)
        if atom is not None:
            for fact in _distribute(draft, atom):
                state.retract_and_revise(fact, note=f"clause {clause.index}")
        state.run_to_fixpoint(rulebase)

    _assert_form_facts(draft)
    return draft


def _assert_form_facts(draft: SceneDraft):
    form = draft.doc.form
    if draft.writer_id is None:
        return
    writer = draft.writer_id
    if sorted(form.report_signed_by) == ["A", "B"]:
        draft.state.assert_fact(Atom("signatures-complete", (writer,)))
    if form.boxes_checked and sorted(form.report_signed_by) == ["A", "B"]:
        draft.state.assert_fact(Atom("filled-form-jointly", (writer,)))


# -- impact reconstruction ----------------------------------------------------


def _impact_partner_pool(draft: SceneDraft) -> list[str]:
    pool = []
    for eid in draft.order:
        ent = draft.entities[eid]
        if eid == draft.writer_id or ent.role in (ROLE_GROUP, ROLE_SCENERY):
            continue
        if draft.host_of_part(eid):
            continue
        pool.append(eid)
    return pool


def _fallback_partner(draft: SceneDraft) -> str | None:
    if draft.opponent_id is not None:
        return draft.opponent_id
    pool = _impact_partner_pool(draft)
    vehicles = [eid for eid in pool if draft.vehicle_faceted(draft.entities[eid])]
    if vehicles:
        return vehicles[-1]
    if pool:
        return pool[-1]
    if draft.state.is_in(Atom("expected-participants", (CLAIM_FORM, 2))):
        # nobody else was mentioned, but the form expects a second party
        ent = draft.new_participant()
        draft.flag_opponent(ent)
        return ent.id
    return None


def _participant_ids(draft: SceneDraft, args: dict) -> list[str]:
    ids = []
    for role in ("agent", "patient", "object", "experiencer", "stimulus"):
        value = args.get(role)
        if not isinstance(value, str) or value not in draft.entities:
            continue
        ent = draft.entities[value]
        if ent.role == ROLE_GROUP:
            ids.extend(m for m in ent.members if m not in ids)
            continue
        host = draft.host_of_part(value)
        eid = host if host else value
        if eid not in ids:
            ids.append(eid)
    return ids


def reconstruct_impact(draft: SceneDraft) -> ImpactEvent | None:
    """Locate the impact: an explicit impact verb wins, then the negated
    ability to avoid, then the bare expectation created by the form."""
    doc, state = draft.doc, draft.state
    rb = draft.rulebase
    impact = None

    for clause in doc.clauses:
        if clause.polarity != "positive" or clause.modality != "none":
            continue
        pred = draft.predicate_of(clause)
        if not rb.subsumes("impact-event", pred):
            continue
        args = draft.events[clause.index].args
        ids = _participant_ids(draft, args)
        if not ids:
            continue
        if len(ids) == 1:
            partner = _fallback_partner(draft)
            if partner and partner != ids[0]:
                ids.append(partner)
        if len(ids) >= 2:
            impact = ImpactEvent((ids[0], ids[1]), "explicit-verb", clause.index)
            break
        scenery = [
            v for v in args.values()
            if isinstance(v, str)
            and v in draft.entities
            and draft.entities[v].role == ROLE_SCENERY
        ]
        if scenery:
            impact = ImpactEvent((ids[0], scenery[0]), "explicit-verb", clause.index)
            break

    if impact is None:
        for clause in doc.clauses:
            if clause.modality != "ability" or clause.polarity != "negative":
                continue
            action = clause.args.get("action")
            if not isinstance(action, str) or not rb.subsumes("avoidance-action", action):
                continue
            args = draft.events[clause.index].args
            ids = _participant_ids(draft, args)
            writer = draft.writer_id
            partner = next((i for i in ids if i != writer), None)
            if partner is None:
                partner = _fallback_partner(draft)
            if writer and partner:
                impact = ImpactEvent(
                    (writer, partner), "negated-ability-pattern", clause.index
                )
                break

    if impact is None and draft.writer_id is not None:
        if state.is_in(Atom("accident-expected", (CLAIM_FORM,))):
            partner = _fallback_partner(draft)
            if partner:
                impact = ImpactEvent(
                    (draft.writer_id, partner), "default-accident-parameter", None
                )

    if impact is None:
        return None

    a, b = impact.participants
    note = f"impact evidence: {impact.evidence}"
    state.retract_and_revise(Atom("impact-with", (a, b)), note=note)
    state.retract_and_revise(Atom("impact-with", (b, a)), note=note)
    if draft.writer_id:
        state.assert_fact(Atom("impact-occurred", (draft.writer_id,)))

    if impact.clause is not None:
        clause = doc.clause(impact.clause)
        side = clause.args.get("side") or clause.args.get("location")
        writer = draft.writer_id
        if isinstance(side, str) and writer in impact.participants:
            state.retract_and_revise(Atom("damage-side", (writer, side)))
    state.run_to_fixpoint(rb)
    draft.impact = impact
    return impact


def assign_roles(draft: SceneDraft):
    writer = draft.writer_id
    if writer:
        draft.entities[writer].role = ROLE_WRITER

    def party(eid):
        ent = draft.entities.get(eid)
        if ent and eid != writer and ent.role not in (ROLE_SCENERY, ROLE_GROUP):
            return eid
        return None

    opponent = None
    if draft.impact:
        for eid in draft.impact.participants:
            opponent = party(eid)
            if opponent:
                break
    if opponent is None:
        # the principal impact may involve scenery; any other reported
        # collision still identifies the opposing party
        for clause in draft.doc.clauses:
            if clause.polarity != "positive" or clause.modality != "none":
                continue
            pred = draft.predicate_of(clause)
            if not draft.rulebase.subsumes("impact-event", pred):
                continue
            for eid in _participant_ids(draft, draft.events[clause.index].args):
                opponent = party(eid)
                if opponent:
                    break
            if opponent:
                break
    if opponent is None and draft.opponent_id is not None:
        opponent = draft.opponent_id
    if opponent:
        draft.entities[opponent].role = ROLE_OPPONENT
        draft.opponent_id = opponent
    for eid, ent in draft.entities.items():
        if ent.role in (ROLE_WRITER, ROLE_OPPONENT, ROLE_GROUP, ROLE_SCENERY):
            continue
        if ent.heads and _head_role(draft.rulebase, ent.heads[0]) == ROLE_SCENERY:
            ent.role = ROLE_SCENERY
    participants = [eid for eid in (writer, opponent) if eid]
    for eid in participants:
        draft.state.assert_fact(Atom("participant", (eid,)))
    draft.state.run_to_fixpoint(draft.rulebase)


def canonicalize_ids(draft: SceneDraft):
    """Settle the provisional entity ids into stable public names."""
    mapping = {}
    if draft.writer_id:
        mapping[draft.writer_id] = "v_writer"
    if draft.opponent_id and draft.opponent_id != draft.writer_id:
        label = draft.doc.form.writer_label
        mapping[draft.opponent_id] = {
            "A": "v_B", "B": "v_A", "unknown": "v_opponent"
        }[label]
    scenery = others = groups = 0
    for eid in draft.order:
        if eid in mapping:
            continue
        ent = draft.entities[eid]
        if ent.role == ROLE_SCENERY:
            scenery += 1
            mapping[eid] = f"s{scenery}"
        elif ent.role == ROLE_GROUP:
            groups += 1
            mapping[eid] = f"g{groups}"
        else:
            others += 1
            mapping[eid] = f"o{others}"

    draft.state.rename_terms(mapping)
    draft.entities = {
        mapping[eid]: ent for eid, ent in draft.entities.items()
    }
    for eid, ent in draft.entities.items():
        ent.id = eid
        ent.members = tuple(mapping.get(m, m) for m in ent.members)
    draft.order = [mapping[eid] for eid in draft.order]
    draft.mention_entity = {
        m: mapping[eid] for m, eid in draft.mention_entity.items()
    }
    if draft.writer_id:
        draft.writer_id = mapping[draft.writer_id]
    if draft.opponent_id:
        draft.opponent_id = mapping[draft.opponent_id]
    for event in draft.events.values():
        event.args = {
            role: mapping.get(value, value) if isinstance(value, str) else value
            for role, value in event.args.items()
        }
    if draft.impact:
        draft.impact.participants = tuple(
            mapping.get(p, p) for p in draft.impact.participants
        )
    return mapping


def apply_spatial_rules(draft: SceneDraft) -> list[str]:
    """Run the base to fixpoint and collect the positional picture."""
    draft.state.run_to_fixpoint(draft.rulebase)
    return [
        str(atom)
        for atom in draft.state.in_atoms()
        if atom.predicate in SPATIAL_PREDICATES and not atom.negated
    ]


def _coercion_notes(draft: SceneDraft) -> list[dict]:
    notes = []
    seen = set()
    for clause in draft.doc.clauses:
        pred = draft.predicate_of(clause)
        args = draft.events[clause.index].args
        for role, value in sorted(args.items()):
            if not isinstance(value, str) or value not in draft.entities:
                continue
            actual = draft.entity_type(draft.entities[value])
            bridge = draft.rulebase.coerce_type(pred, role, actual)
            if bridge is None:
                continue
            key = (pred, role, value, bridge)
            if key in seen:
                continue
            seen.add(key)
            notes.append({
                "clause": clause.index,
                "predicate": pred,
                "role": role,
                "entity": value,
                "bridge": bridge,
            })
    return notes


def build_scene(draft: SceneDraft) -> Scene:
    state = draft.state
    entities = []
    chains = {}
    for eid in draft.order:
        ent = draft.entities[eid]
        props = sorted(
            str(atom)
            for atom in state.in_atoms()
            if eid in atom.args and atom.predicate != "introduced-as"
        )
        entities.append(ent.to_json(draft.entity_type(ent), props))
        chains[eid] = list(ent.mentions)
    events = [
        ev.to_json()
        for ev in sorted(draft.events.values(), key=lambda e: (e.position, e.clause))
    ]
    return Scene(
        entities=entities,
        chains=chains,
        events=events,
        impact=draft.impact.to_json() if draft.impact else None,
        spatial=apply_spatial_rules(draft),
        coercions=_coercion_notes(draft),
    )
