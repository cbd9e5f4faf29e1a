"""The claim interlingua: a small semantic-clause format for short
accident reports.

A document is UTF-8 JSON with top-level keys ``id``, ``form``,
``mentions``, ``clauses`` (optionally ``lexicon_override``s for ambiguous
predicates). Schema shipped at schemas/claim.schema.json. Parsing is
strict by default: unknown keys are an error; ``lenient=True`` drops them
instead.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .errors import (
    DanglingReference,
    DocumentSyntaxError,
    DuplicateId,
    UnknownTense,
)
from .ontology import load_schema

TENSES = ("present", "past-simple", "imperfect", "pluperfect", "participle")
MENTION_KINDS = (
    "pronoun-1sg",
    "pronoun-1pl",
    "definite-NP",
    "indefinite-NP",
    "proper-name",
    "label-A",
    "label-B",
    "possessive",
)


@dataclass(frozen=True)
class MentionRef:
    ref: str


@dataclass(frozen=True)
class SenseSet:
    lexeme: str
    candidates: tuple
    resolved: int | None = None

    def resolved_concept(self) -> str | None:
        if self.resolved is None:
            return None
        return self.candidates[self.resolved]


@dataclass(frozen=True)
class Mention:
    id: str
    kind: str
    head_concept: str
    clause_of_first_use: int
    sense_set: SenseSet | None = None
    owner: str | None = None  # "writer" or a mention id, possessives only


@dataclass(frozen=True)
class Clause:
    index: int
    predicate: str
    args: dict = field(default_factory=dict)  # role -> MentionRef | str | int
    polarity: str = "positive"
    tense: str = "past-simple"
    modality: str = "none"
    voice: str = "active"
    markers: tuple = ()

    def __hash__(self):
        return hash((self.index, self.predicate))

    def ref_args(self) -> dict:
        return {r: v for r, v in self.args.items() if isinstance(v, MentionRef)}

    def literal_args(self) -> dict:
        return {r: v for r, v in self.args.items() if not isinstance(v, MentionRef)}

    def has_marker(self, marker: str) -> bool:
        return marker in self.markers


@dataclass(frozen=True)
class FormMetadata:
    writer_label: str = "unknown"
    boxes_checked: tuple = ()
    report_signed_by: tuple = ()


@dataclass
class Document:
    id: str
    form: FormMetadata
    mentions: list
    clauses: list
    lexicon_overrides: list = field(default_factory=list)
    text: str | None = None  # original narrative, for humans only

    def mention(self, mention_id: str) -> Mention:
        for m in self.mentions:
            if m.id == mention_id:
                return m
        raise KeyError(mention_id)

    def clause(self, index: int) -> Clause:
        for c in self.clauses:
            if c.index == index:
                return c
        raise KeyError(index)

    def __eq__(self, other):
        if not isinstance(other, Document):
            return NotImplemented
        return serialize_document(self) == serialize_document(other)


@dataclass(frozen=True)
class Violation:
    clause_index: int  # -1 for document-level problems
    rule_id: str
    message: str


@dataclass
class ValidationReport:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


# ---------------------------------------------------------------------------
# parsing


def _strip_unknown(data, schema_fragment, schema):
    """Lenient mode: drop keys the schema does not know about."""
    if not isinstance(data, dict) or not isinstance(schema_fragment, dict):
        return data
    if "$ref" in schema_fragment:
        path = schema_fragment["$ref"].split("/")[1:]
        target = schema
        for part in path:
            target = target[part]
        return _strip_unknown(data, target, schema)
    props = schema_fragment.get("properties")
    if props is None:
        return data
    out = {}
    for key, value in data.items():
        if key not in props:
            continue
        sub = props[key]
        if isinstance(value, list) and "items" in sub:
            out[key] = [_strip_unknown(v, sub["items"], schema) for v in value]
        else:
            out[key] = _strip_unknown(value, sub, schema)
    return out


def parse_document(source, lenient: bool = False) -> Document:
    """Parse a claim file (path or raw JSON text)."""
    if isinstance(source, Path) or (
        isinstance(source, str) and "\n" not in source and source.endswith(".claim")
    ):
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise DocumentSyntaxError(f"cannot read {source}: {exc}") from exc
    else:
        text = source
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentSyntaxError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    return parse_document_data(data, lenient=lenient)


def parse_document_data(data: dict, lenient: bool = False) -> Document:
    schema = load_schema("claim.schema.json")
    if lenient:
        data = _strip_unknown(copy.deepcopy(data), schema, schema)
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "(document root)"
        raise DocumentSyntaxError(f"{exc.message} at {where}")

    mentions, seen_ids = [], set()
    for raw in data.get("mentions", ()):
        if raw["id"] in seen_ids:
            raise DuplicateId(f"mention id {raw['id']!r} declared twice")
        seen_ids.add(raw["id"])
        sense = raw.get("sense_set")
        mentions.append(
            Mention(
                id=raw["id"],
                kind=raw["kind"],
                head_concept=raw["head_concept"],
                clause_of_first_use=raw["clause_of_first_use"],
                sense_set=_sense_set(sense) if sense else None,
                owner=raw.get("owner"),
            )
        )

    clauses, seen_idx = [], set()
    for raw in data.get("clauses", ()):
        if raw["index"] in seen_idx:
            raise DuplicateId(f"clause index {raw['index']} declared twice")
        seen_idx.add(raw["index"])
        if raw["tense"] not in TENSES:
            raise UnknownTense(
                f"clause {raw['index']}: tense {raw['tense']!r} not one of {', '.join(TENSES)}"
            )
        args = {}
        for role, value in sorted(raw.get("args", {}).items()):
            args[role] = MentionRef(value["ref"]) if isinstance(value, dict) else value
        clauses.append(
            Clause(
                index=raw["index"],
                predicate=raw["predicate"],
                args=args,
                polarity=raw.get("polarity", "positive"),
                tense=raw["tense"],
                modality=raw.get("modality", "none"),
                voice=raw.get("voice", "active"),
                markers=tuple(raw.get("markers", ())),
            )
        )
    clauses.sort(key=lambda c: c.index)

    for clause in clauses:
        for role, value in clause.ref_args().items():
            if value.ref not in seen_ids:
                raise DanglingReference(
                    f"clause {clause.index} role {role!r} refers to unknown mention {value.ref!r}"
                )
    for m in mentions:
        if m.owner and m.owner != "writer" and m.owner not in seen_ids:
            raise DanglingReference(
                f"mention {m.id!r} owner refers to unknown mention {m.owner!r}"
            )

    form_raw = data["form"]
    form = FormMetadata(
        writer_label=form_raw.get("writer_label", "unknown"),
        boxes_checked=tuple(form_raw.get("boxes_checked", ())),
        report_signed_by=tuple(form_raw.get("report_signed_by", ())),
    )
    overrides = [_sense_set(s) for s in data.get("lexicon_overrides", ())]
    return Document(
        id=data["id"],
        form=form,
        mentions=mentions,
        clauses=clauses,
        lexicon_overrides=overrides,
        text=data.get("text"),
    )


def _sense_set(raw: dict) -> SenseSet:
    return SenseSet(
        lexeme=raw["lexeme"],
        candidates=tuple(raw["candidates"]),
        resolved=raw.get("resolved"),
    )


# ---------------------------------------------------------------------------
# serialization (canonical: every defaultable field written out)


def serialize_document(doc: Document) -> dict:
    out = {
        "id": doc.id,
        "form": {
            "writer_label": doc.form.writer_label,
            "boxes_checked": list(doc.form.boxes_checked),
            "report_signed_by": list(doc.form.report_signed_by),
        },
        "mentions": [],
        "clauses": [],
    }
    if doc.text is not None:
        out["text"] = doc.text
    if doc.lexicon_overrides:
        out["lexicon_overrides"] = [_sense_json(s) for s in doc.lexicon_overrides]
    for m in doc.mentions:
        entry = {
            "id": m.id,
            "kind": m.kind,
            "head_concept": m.head_concept,
            "clause_of_first_use": m.clause_of_first_use,
        }
        if m.sense_set:
            entry["sense_set"] = _sense_json(m.sense_set)
        if m.owner:
            entry["owner"] = m.owner
        out["mentions"].append(entry)
    for c in sorted(doc.clauses, key=lambda c: c.index):
        out["clauses"].append(
            {
                "index": c.index,
                "predicate": c.predicate,
                "args": {
                    role: ({"ref": v.ref} if isinstance(v, MentionRef) else v)
                    for role, v in sorted(c.args.items())
                },
                "polarity": c.polarity,
                "tense": c.tense,
                "modality": c.modality,
                "voice": c.voice,
                "markers": list(c.markers),
            }
        )
    return out


def _sense_json(s: SenseSet) -> dict:
    out = {"lexeme": s.lexeme, "candidates": list(s.candidates)}
    if s.resolved is not None:
        out["resolved"] = s.resolved
    return out


# ---------------------------------------------------------------------------
# validation


def validate_document(doc: Document, graph=None) -> ValidationReport:
    """Well-formedness beyond the schema. Violations come back ordered by
    (clause index, rule id); document-level problems use clause index -1."""
    violations = []

    if doc.form.boxes_checked and doc.form.writer_label == "unknown":
        violations.append(
            Violation(-1, "writer-label-required",
                      "boxes are checked but the writer label is unknown")
        )

    indexes = [c.index for c in doc.clauses]
    if indexes != list(range(len(indexes))):
        violations.append(
            Violation(
                -1,
                "clause-index-gap",
                f"clause indexes {indexes} are not dense from 0",
            )
        )

    for m in doc.mentions:
        if m.kind in ("label-A", "label-B") and graph is not None:
            if not graph.subsumes("vehicle", m.head_concept):
                violations.append(
                    Violation(
                        m.clause_of_first_use,
                        "label-implies-vehicle",
                        f"mention {m.id!r} has kind {m.kind} but head concept "
                        f"{m.head_concept!r} is not a vehicle",
                    )
                )
        if m.sense_set:
            violations.extend(_check_sense(m.sense_set, m.clause_of_first_use, m.id))
    for s in doc.lexicon_overrides:
        violations.extend(_check_sense(s, -1, s.lexeme))

    impact_marked: dict = {}
    for c in doc.clauses:
        if c.modality == "ability" and "action" not in c.args:
            violations.append(
                Violation(
                    c.index,
                    "ability-requires-action",
                    f"clause {c.index} has ability modality but no embedded action argument",
                )
            )
        if c.has_marker("impact-explicit"):
            k = (c.predicate, tuple(sorted(
                (r, v.ref if isinstance(v, MentionRef) else v) for r, v in c.args.items()
            )))
            if k in impact_marked:
                violations.append(
                    Violation(
                        c.index,
                        "duplicate-impact-marker",
                        f"clauses {impact_marked[k]} and {c.index} both mark the same "
                        "event impact-explicit",
                    )
                )
            else:
                impact_marked[k] = c.index

    violations.sort(key=lambda v: (v.clause_index, v.rule_id))
    return ValidationReport(violations)


def _check_sense(s: SenseSet, clause_index: int, owner: str) -> list:
    out = []
    if len(set(s.candidates)) != len(s.candidates):
        out.append(
            Violation(clause_index, "sense-set-underspecified",
                      f"sense set for {owner!r} repeats a candidate")
        )
    if s.resolved is None and len(s.candidates) < 2:
        out.append(
            Violation(clause_index, "sense-set-underspecified",
                      f"unresolved sense set for {owner!r} needs at least 2 candidates")
        )
    if s.resolved is not None and not (0 <= s.resolved < len(s.candidates)):
        out.append(
            Violation(clause_index, "sense-set-resolved-range",
                      f"sense set for {owner!r} resolves to index {s.resolved}, "
                      f"out of range")
        )
    return out
