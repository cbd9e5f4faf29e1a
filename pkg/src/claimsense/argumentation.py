"""Argumentative interpretation: how the writer wants the story read.

Claim texts are pleas, not neutral reports. The passes here settle what the
writer left open (word senses, reference times, whether an intended action
was begun) in the way most favorable to them, then read off the strategy the
finished interpretation serves.
"""

from __future__ import annotations

from dataclasses import dataclass

from .discourse import SceneDraft
from .errors import StillAmbiguous
from .patterns import Atom

# markers whose presence argues "it could not be helped"
DEFENSIVE_MARKERS = (
    "surprise",
    "psychological-state",
    "suddenly",
    "circumlocution-of-impact",
)

VERDICT_A = "A"
VERDICT_B = "B"
VERDICT_BOTH = "both"
VERDICT_NEITHER = "neither"


@dataclass
class AmbiguityResolution:
    target: str
    kind: str
    candidates: tuple
    chosen: str | None
    basis: str

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "kind": self.kind,
            "candidates": list(self.candidates),
            "chosen": self.chosen,
            "basis": self.basis,
        }


@dataclass
class ScriptDeviation:
    script: str
    variant: str | None
    missing: tuple
    signaling_clause: int | None

    def to_json(self) -> dict:
        return {
            "script": self.script,
            "variant": self.variant,
            "missing": list(self.missing),
            "signaling_clause": self.signaling_clause,
        }


@dataclass
class StrategyReport:
    verdict: str
    strategy_a_evidence: list
    strategy_b_evidence: list
    devices: dict
    deviations: list

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "strategy_a_evidence": list(self.strategy_a_evidence),
            "strategy_b_evidence": list(self.strategy_b_evidence),
            "devices": {k: self.devices[k] for k in sorted(self.devices)},
            "deviations": [d.to_json() for d in self.deviations],
        }


# -- sense disambiguation ------------------------------------------------------


class _SenseTarget:
    def __init__(self, name, candidates, entity_id=None, lexeme=None, order=0):
        self.name = name
        self.candidates = tuple(candidates)
        self.entity_id = entity_id
        self.lexeme = lexeme
        self.order = order


def _writer_conformity(state, writer: str) -> set:
    return {
        atom
        for atom in state.in_atoms()
        if atom.predicate == "conforms-to-rule"
        and not atom.negated
        and atom.args
        and atom.args[0] == writer
    }


def _pending_clause_atoms(draft: SceneDraft, lexeme: str, chosen: str) -> list[Atom]:
    atoms = []
    for idx in draft.pending_clauses:
        clause = draft.doc.clause(idx)
        if clause.predicate != lexeme:
            continue
        args = draft.events[idx].args
        values = tuple(args[role] for role in sorted(args))
        atom = Atom(chosen, values)
        if clause.polarity == "negative":
            atom = atom.negate()
        atoms.append(atom)
    return atoms


def _sense_targets(draft: SceneDraft) -> list[_SenseTarget]:
    targets = []
    for m in draft.doc.mentions:
        ss = m.sense_set
        if ss is None or ss.resolved is not None:
            continue
        eid = draft.mention_entity.get(m.id)
        if eid is None:
            continue
        targets.append(
            _SenseTarget(ss.lexeme, ss.candidates, entity_id=eid,
                         order=m.clause_of_first_use)
        )
    offset = len(draft.doc.clauses)
    for ss in draft.doc.lexicon_overrides:
        if ss.resolved is not None:
            continue
        first = min(
            (c.index for c in draft.doc.clauses if c.predicate == ss.lexeme),
            default=0,
        )
        targets.append(
            _SenseTarget(ss.lexeme, ss.candidates, lexeme=ss.lexeme,
                         order=offset + first)
        )
    targets.sort(key=lambda t: (t.order, t.name))
    return targets


def _try_correct_behavior(draft: SceneDraft, target: _SenseTarget) -> str | None:
    """Prefer the candidate reading under which the writer, and only that
    reading, comes out conforming to some rule of the road."""
    rb = draft.rulebase
    writer = draft.writer_id
    if writer is None or rb.rule("e.correct-behavior") is None:
        return None
    base = _writer_conformity(draft.state, writer)
    gains = []
    for cand in target.candidates:
        branch = draft.state.fork()
        if target.entity_id is not None:
            branch.retract_and_revise(Atom("type", (target.entity_id, cand)))
        else:
            for atom in _pending_clause_atoms(draft, target.lexeme, cand):
                branch.retract_and_revise(atom)
        branch.run_to_fixpoint(rb)
        gains.append(len(_writer_conformity(branch, writer) - base))
    best = max(gains)
    if best == 0 or gains.count(best) != 1:
        return None
    return target.candidates[gains.index(best)]


def _try_typicality(draft: SceneDraft, target: _SenseTarget) -> tuple[str, str] | None:
    """Fall back on the typical specialization of what the senses share."""
    graph = draft.rulebase.graph
    lca = graph.least_common_ancestor(target.candidates)
    if lca is None:
        return None
    typical = draft.rulebase.typical_specialization(lca)
    if typical in target.candidates:
        return typical, f"k.typicality-{lca}"
    return None


def _apply_sense(draft: SceneDraft, target: _SenseTarget, chosen: str):
    state = draft.state
    if target.entity_id is not None:
        state.retract_and_revise(
            Atom("type", (target.entity_id, chosen)),
            note=f"sense of {target.name}",
        )
    else:
        draft.lexeme_choice[target.lexeme] = chosen
        for atom in _pending_clause_atoms(draft, target.lexeme, chosen):
            state.retract_and_revise(atom, note=f"sense of {target.name}")
        remaining = []
        for idx in draft.pending_clauses:
            clause = draft.doc.clause(idx)
            if clause.predicate == target.lexeme:
                draft.events[idx].predicate = chosen
            else:
                remaining.append(idx)
        draft.pending_clauses = remaining
    state.run_to_fixpoint(draft.rulebase)


def disambiguate_by_correct_behavior(sense, draft: SceneDraft) -> AmbiguityResolution:
    """Resolve one unresolved sense set, preferring the reading under which
    the writer behaved correctly; lexical typicality is the fallback."""
    for target in _sense_targets(draft):
        if target.name != sense.lexeme:
            continue
        if len(target.candidates) == 1:
            chosen, basis = target.candidates[0], "trivial"
        elif (hit := _try_correct_behavior(draft, target)) is not None:
            chosen, basis = hit, "e.correct-behavior"
        elif (fallback := _try_typicality(draft, target)) is not None:
            chosen, basis = fallback
        else:
            raise StillAmbiguous(target.name, list(target.candidates))
        _apply_sense(draft, target, chosen)
        return AmbiguityResolution(target.name, "sense", target.candidates, chosen, basis)
    raise StillAmbiguous(sense.lexeme, list(sense.candidates))


def disambiguate_senses(draft: SceneDraft, allow_ambiguous: bool = False) -> list[AmbiguityResolution]:
    """Settle open word senses: the conforming reading wins where one exists,
    typicality decides the rest, and anything left is an error."""
    out = []
    pending = _sense_targets(draft)
    for target in list(pending):
        if len(target.candidates) != 1:
            continue
        _apply_sense(draft, target, target.candidates[0])
        out.append(AmbiguityResolution(
            target.name, "sense", target.candidates, target.candidates[0],
            "trivial",
        ))
        pending.remove(target)
    progress = True
    while pending and progress:
        progress = False
        for target in list(pending):
            chosen = _try_correct_behavior(draft, target)
            if chosen is None:
                continue
            _apply_sense(draft, target, chosen)
            out.append(AmbiguityResolution(
                target.name, "sense", target.candidates, chosen,
                "e.correct-behavior",
            ))
            pending.remove(target)
            progress = True
        if progress:
            continue
        for target in list(pending):
            hit = _try_typicality(draft, target)
            if hit is None:
                continue
            chosen, basis = hit
            _apply_sense(draft, target, chosen)
            out.append(AmbiguityResolution(
                target.name, "sense", target.candidates, chosen, basis,
            ))
            pending.remove(target)
            progress = True
            break
    if pending:
        first = pending[0]
        if not allow_ambiguous:
            raise StillAmbiguous(first.name, list(first.candidates))
        for target in pending:
            out.append(AmbiguityResolution(
                target.name, "sense", target.candidates, None, "unresolved",
            ))
    return out


# -- reference time ------------------------------------------------------------


def _anchor_effect(state, subject: str, anchor: str, antecedents=()):
    if anchor == "impact":
        state.derive(
            Atom("effect-persists-to-impact", (subject,)),
            "e.reference-time", antecedents,
            note="the pluperfect's effect still holds at the impact",
        )
    else:
        state.derive(
            Atom("effect-expired-early", (subject,)),
            "e.reference-time", antecedents,
            note="the pluperfect's effect is confined to the earlier event",
        )


def resolve_reference_time(draft: SceneDraft) -> list[AmbiguityResolution]:
    """Anchor pluperfect clauses: each one describes the state of affairs at
    some salient past event, preferably one that puts the writer in the
    right."""
    rb = draft.rulebase
    if rb.rule("e.reference-time") is None:
        return []
    out = []
    writer = draft.writer_id
    for clause in draft.doc.clauses:
        if clause.tense != "pluperfect":
            continue
        args = draft.events[clause.index].args
        subject = args.get("agent") or args.get("experiencer")
        if not isinstance(subject, str) or subject not in draft.entities:
            continue
        candidates = []
        for other in draft.doc.clauses:
            if other.index == clause.index:
                continue
            pred = draft.predicate_of(other)
            other_subject = draft.events[other.index].args.get("agent")
            if pred in ("stop", "stopped") and other_subject == subject:
                candidates.append(f"stopping:{other.index}")
        if draft.impact is not None:
            candidates.append("impact")
        if not candidates:
            continue
        target = f"clause-{clause.index}"
        if len(candidates) == 1:
            chosen, basis = candidates[0], "single-candidate"
        else:
            base = _writer_conformity(draft.state, writer) if writer else set()
            scores = []
            for cand in candidates:
                branch = draft.state.fork()
                _anchor_effect(branch, subject, "impact" if cand == "impact" else "stop")
                branch.run_to_fixpoint(rb)
                gain = len(_writer_conformity(branch, writer) - base) if writer else 0
                scores.append(gain)
            best = max(scores)
            if best > 0 and scores.count(best) == 1:
                chosen, basis = candidates[scores.index(best)], "conforming-anchor"
            else:
                chosen, basis = candidates[-1], "recency"
        anchor_token = "impact" if chosen == "impact" else chosen.replace(":", "-")
        anchor_atom = Atom("anchor", (target, anchor_token))
        draft.state.derive(
            anchor_atom, "e.reference-time", (),
            note="pluperfect anchored to the event it is measured against",
        )
        _anchor_effect(
            draft.state, subject,
            "impact" if chosen == "impact" else "stop",
            (anchor_atom,),
        )
        draft.state.run_to_fixpoint(rb)
        if chosen == "impact" and draft.impact and draft.impact.clause is not None:
            draft.events[clause.index].position = draft.impact.clause - 0.5
        elif chosen.startswith("stopping:"):
            draft.events[clause.index].position = int(chosen.split(":")[1]) - 0.5
        out.append(AmbiguityResolution(
            target, "reference-time", tuple(candidates), chosen, basis,
        ))
    return out


# -- intention -----------------------------------------------------------------


def resolve_intention(draft: SceneDraft) -> list[AmbiguityResolution]:
    """Decide, per intention clause, between 'merely intended' and 'already
    begun'. The action counts as begun exactly when that is what it takes for
    the impact to make sense."""
    rb = draft.rulebase
    if rb.rule("e.intention-explicability") is None:
        return []
    writer = draft.writer_id
    if writer is None or draft.impact is None:
        return []
    out = []
    explained = Atom("impact-explained", (writer,))
    candidates = ("intention-only", "action-started")
    for clause in draft.doc.clauses:
        if clause.modality != "intention":
            continue
        agent = draft.events[clause.index].args.get("agent")
        if not isinstance(agent, str) or agent not in draft.entities:
            continue
        pred = draft.predicate_of(clause)
        started = Atom("action-started", (agent, pred))
        if draft.state.is_in(explained):
            chosen, basis = "intention-only", "impact-already-explained"
        else:
            branch = draft.state.fork()
            branch.assert_fact(started)
            branch.run_to_fixpoint(rb)
            if branch.is_in(explained):
                chosen, basis = "action-started", "explains-impact"
            else:
                chosen, basis = "intention-only", "no-explanatory-gain"
        if chosen == "action-started":
            draft.state.derive(
                started, "e.intention-explicability",
                (Atom("intends", (agent, pred)),),
                note="read as begun: only then does the impact follow",
            )
            draft.state.run_to_fixpoint(rb)
        out.append(AmbiguityResolution(
            f"clause-{clause.index}", "intention", candidates, chosen, basis,
        ))
    return out


# -- scripts -------------------------------------------------------------------


def detect_deviation_markers(draft: SceneDraft) -> list[ScriptDeviation]:
    """Match scripts the writer's narration activates and report steps the
    text pointedly leaves out, tying them to an 'only' signal when present."""
    rb = draft.rulebase
    state = draft.state
    writer = draft.writer_id
    if writer is None:
        return []
    out = []
    for script in rb.scripts:
        role_var = f"?{script.roles[0]}" if script.roles else None
        binding = None
        for _, b in state.query(script.trigger):
            if role_var is None or b.get(role_var) == writer:
                binding = b
                break
        if binding is None:
            continue
        state.assert_fact(Atom("script-active", (writer, script.name)))
        state.run_to_fixpoint(rb)
        variant = None
        for v in script.variants:
            guard = v.guard.substitute(binding)
            if guard.is_ground() and state.is_in(guard):
                variant = v
                break
        step_names = list(variant.steps) if variant else [s.name for s in script.steps]
        satisfied, missing = [], []
        for name in step_names:
            pattern = script.step(name).pattern.substitute(binding)
            if pattern.is_ground() and state.is_in(pattern):
                satisfied.append(name)
            else:
                missing.append(name)
        form = draft.doc.form
        form_evidence = bool(form.report_signed_by or form.boxes_checked)
        if not satisfied and not form_evidence:
            continue
        if not missing:
            continue
        step_preds = {script.step(n).pattern.predicate for n in step_names}
        signaling = None
        for clause in draft.doc.clauses:
            if "only" in clause.markers and draft.predicate_of(clause) in step_preds:
                signaling = clause.index
                break
        out.append(ScriptDeviation(
            script.name, variant.name if variant else None,
            tuple(missing), signaling,
        ))
    return out


# -- strategies ------------------------------------------------------------------


def _writer_subject(draft: SceneDraft, clause) -> bool:
    args = draft.events[clause.index].args
    subject = args.get("agent") or args.get("experiencer")
    return subject == draft.writer_id


def detect_strategies(draft: SceneDraft, resolutions, deviations) -> StrategyReport:
    """Read the finished interpretation back as argument: does the text build
    a case against the opponent (A), a case that nothing could be done (B),
    both, or neither."""
    rb = draft.rulebase
    state = draft.state
    writer = draft.writer_id
    if not rb.has_context("E") or writer is None:
        return StrategyReport(VERDICT_NEITHER, [], [], {}, list(deviations))

    a_evidence = []
    b_evidence = []
    devices: dict[str, int] = {}

    def bump(device):
        devices[device] = devices.get(device, 0) + 1

    for atom in state.in_atoms():
        if atom.negated or not atom.args:
            continue
        if atom.predicate == "violates-rule" and atom.args[0] != writer:
            a_evidence.append(str(atom))
        elif atom.predicate == "conforms-to-rule" and atom.args[0] == writer:
            a_evidence.append(str(atom))
        elif atom.predicate == "uncontrollable-circumstance":
            b_evidence.append(str(atom))
        elif atom.predicate == "redundant-statement" and atom.args[0] == writer:
            bump("redundancy-signal")

    doc = draft.doc
    for clause in doc.clauses:
        pred = draft.predicate_of(clause)
        if rb.subsumes("reckless-behavior", pred):
            a_evidence.append(f"blame-lexeme {pred} (clause {clause.index})")
            bump("blame-lexeme")
        for marker in clause.markers:
            if marker in DEFENSIVE_MARKERS:
                b_evidence.append(f"marker {marker} (clause {clause.index})")
            if marker in ("psychological-state", "surprise"):
                bump("psychological-state")
            if marker == "circumlocution-of-impact":
                bump("circumlocution-of-impact")
            if marker == "legal-framing":
                bump("legal-framing")
            if marker == "speed-qualifier":
                bump("speed-qualifier")
        if clause.polarity == "negative" and _writer_subject(draft, clause):
            bump("negation-opposition")
        if clause.voice in ("passive", "reflexive") and _writer_subject(draft, clause):
            bump("passive-or-reflexive-agent-suppression")
        agent = clause.args.get("agent")
        if agent is not None and hasattr(agent, "ref"):
            mention = doc.mention(agent.ref)
            if (
                mention.kind == "possessive"
                and mention.owner in (None, "writer")
                and rb.subsumes("vehicle", mention.head_concept)
                and draft.mention_entity.get(mention.id) == writer
            ):
                bump("passive-or-reflexive-agent-suppression")

    for res in resolutions:
        if res.kind == "intention" and res.chosen == "action-started":
            bump("self-serving-vagueness")

    a_evidence = sorted(set(a_evidence))
    b_evidence = sorted(set(b_evidence))
    if a_evidence and b_evidence:
        verdict = VERDICT_BOTH
    elif a_evidence:
        verdict = VERDICT_A
    elif b_evidence:
        verdict = VERDICT_B
    else:
        verdict = VERDICT_NEITHER
    return StrategyReport(verdict, a_evidence, b_evidence, devices, list(deviations))
