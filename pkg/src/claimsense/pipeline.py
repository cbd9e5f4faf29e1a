"""End-to-end interpretation: from a parsed claim to a full reading."""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from pathlib import Path

from .argumentation import (
    StrategyReport,
    detect_deviation_markers,
    detect_strategies,
    disambiguate_senses,
    resolve_intention,
    resolve_reference_time,
)
from .discourse import (
    Scene,
    SceneDraft,
    assign_roles,
    build_scene,
    canonicalize_ids,
    reconstruct_impact,
    resolve_mentions,
)
from .errors import DocumentSyntaxError
from .interlingua import Document, validate_document
from .ontology import RuleBase, load_rule_pack

PACKS_ENV = "CLAIMSENSE_PACKS"
DEFAULT_PACK_DIR = Path(__file__).resolve().parents[2] / "packs"


def pack_directory(override: str | Path | None = None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get(PACKS_ENV)
    if env:
        return Path(env)
    return DEFAULT_PACK_DIR


def load_rulebase(pack_dir: str | Path | None = None, ablate=()) -> RuleBase:
    """Load every pack file in the directory, minus any ablated contexts."""
    directory = pack_directory(pack_dir)
    ablated = {a.upper() for a in ablate}
    packs = []
    for path in sorted(directory.glob("*.pack")):
        pack = load_rule_pack(path)
        if pack.context in ablated:
            continue
        packs.append(pack)
    return RuleBase(packs)


@dataclass
class InterpretationResult:
    document_id: str
    scene: Scene
    strategy: StrategyReport
    resolutions: list
    traces: dict
    pack_versions: dict
    draft: SceneDraft

    @property
    def state(self):
        return self.draft.state

    def to_json(self, include_traces: bool = False) -> dict:
        return {
            "document": self.document_id,
            "scene": self.scene.to_json(),
            "strategy": self.strategy.to_json(),
            "resolutions": [r.to_json() for r in self.resolutions],
            "defeats": [
                {
                    "loser_rule": d.loser_rule_id,
                    "winner_rule": d.winner_rule_id,
                    "fact": str(d.fact),
                }
                for d in self.draft.state.defeat_log
            ],
            "traces": dict(self.traces) if include_traces else {},
            "pack_versions": {
                k: self.pack_versions[k] for k in sorted(self.pack_versions)
            },
        }


def pack_versions(rulebase: RuleBase) -> dict:
    versions = {}
    for pack in rulebase.packs:
        if pack.path is None:
            versions[pack.context] = "unversioned"
            continue
        digest = hashlib.sha256(Path(pack.path).read_bytes()).hexdigest()
        versions[pack.context] = digest
    return versions


def interpret_document(
    doc: Document,
    rulebase: RuleBase,
    allow_ambiguous: bool = False,
) -> InterpretationResult:
    report = validate_document(doc, rulebase.graph)
    if not report.ok:
        lines = "; ".join(
            f"clause {v.clause_index}: {v.rule_id}: {v.message}"
            for v in report.violations
        )
        raise DocumentSyntaxError(f"document {doc.id} failed validation: {lines}")

    draft = resolve_mentions(doc, rulebase)
    reconstruct_impact(draft)
    assign_roles(draft)
    canonicalize_ids(draft)
    draft.state.run_to_fixpoint(rulebase)

    resolutions = []
    resolutions.extend(disambiguate_senses(draft, allow_ambiguous))
    resolutions.extend(resolve_reference_time(draft))
    resolutions.extend(resolve_intention(draft))
    deviations = detect_deviation_markers(draft)
    strategy = detect_strategies(draft, resolutions, deviations)
    scene = build_scene(draft)

    traces = {}
    state = draft.state
    for atom in state.in_atoms():
        if state.status(atom) == "asserted":
            continue
        traces[str(atom)] = state.explain(atom).to_json()

    return InterpretationResult(
        document_id=doc.id,
        scene=scene,
        strategy=strategy,
        resolutions=resolutions,
        traces=traces,
        pack_versions=pack_versions(rulebase),
        draft=draft,
    )
