"""claimsense: knowledge-driven interpretation of car-accident claim reports.

Reconstructs the factual scene (entities, coreference, events, impact) and
the writer's argumentative strategy from a semantic-clause encoding of the
report, by forward chaining over three declarative context packs: common
road knowledge (K), what a claim form is for (F) and how claim reports
argue (E).
"""

from .argumentation import (
    AmbiguityResolution,
    ScriptDeviation,
    StrategyReport,
    detect_deviation_markers,
    detect_strategies,
    disambiguate_by_correct_behavior,
    disambiguate_senses,
    resolve_intention,
    resolve_reference_time,
)
from .discourse import (
    Entity,
    ImpactEvent,
    Scene,
    SceneDraft,
    apply_spatial_rules,
    assign_roles,
    build_scene,
    canonicalize_ids,
    reconstruct_impact,
    resolve_mentions,
)
from .errors import (
    ClaimsenseError,
    ContradictsAssertion,
    ContradictsStrict,
    CycleInHierarchy,
    DanglingReference,
    DocumentSyntaxError,
    DuplicateId,
    DuplicateRuleId,
    FactNotIn,
    MissingGold,
    PackError,
    PatternSyntaxError,
    ResourceLimit,
    SchemaError,
    StillAmbiguous,
    UnknownConcept,
    UnknownTense,
    UnresolvableMention,
)
from .interlingua import (
    Clause,
    Document,
    FormMetadata,
    Mention,
    MentionRef,
    SenseSet,
    ValidationReport,
    parse_document,
    serialize_document,
    validate_document,
)
from .ontology import (
    ConceptGraph,
    CoercionEntry,
    DefeasibleRule,
    RuleBase,
    RulePack,
    Script,
    associated_host,
    coerce_type,
    load_rule_pack,
    serialize_rule_pack,
    subsumes,
    typical_specialization,
)
from .patterns import Atom, parse_pattern
from .pipeline import (
    InterpretationResult,
    interpret_document,
    load_rulebase,
    pack_versions,
)
from .reasoner import (
    BeliefState,
    DerivationTree,
    Fact,
    Justification,
    assert_fact,
    explain,
    retract_and_revise,
    run_to_fixpoint,
)

__version__ = "0.1.0"
