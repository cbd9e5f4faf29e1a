"""Exception hierarchy for the claimsense pipeline.

Every error that a caller is expected to catch and act on gets its own
class; the CLI maps them to exit codes.
"""


class ClaimsenseError(Exception):
    """Base class for all errors raised deliberately by this package."""


# ---------------------------------------------------------------------------
# document parsing / validation

class DocumentSyntaxError(ClaimsenseError):
    """Malformed claim file. Carries line/column when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class DanglingReference(ClaimsenseError):
    """A clause argument refers to a mention id that does not exist."""


class DuplicateId(ClaimsenseError):
    """Two mentions (or two clauses) share an id/index."""


class UnknownTense(ClaimsenseError):
    """Clause tense outside the closed tense vocabulary."""


# ---------------------------------------------------------------------------
# rule packs

class SchemaError(ClaimsenseError):
    """Pack or document fails its JSON schema."""


class CycleInHierarchy(ClaimsenseError):
    """isa edges do not form a DAG."""


class UnknownConcept(ClaimsenseError):
    """Concept id queried against a graph that does not contain it."""


class DuplicateRuleId(ClaimsenseError):
    """Same rule id declared twice."""


class PackError(ClaimsenseError):
    """Semantic pack problem: unbound consequent variable, priority tie
    between potentially conflicting defaults, bad typicality target..."""


class PatternSyntaxError(ClaimsenseError):
    """Unparseable fact pattern."""


# ---------------------------------------------------------------------------
# reasoning

class ContradictsAssertion(ClaimsenseError):
    """An asserted fact conflicts with another asserted fact."""


class ContradictsStrict(ClaimsenseError):
    """A revision or derivation conflicts with strict knowledge."""

    def __init__(self, message, trees=()):
        self.trees = list(trees)
        super().__init__(message)


class ResourceLimit(ClaimsenseError):
    """Fact cap or iteration cap exceeded during forward chaining."""


class FactNotIn(ClaimsenseError):
    """explain() asked about a fact that is not currently in."""

    def __init__(self, message, suggestions=()):
        self.suggestions = list(suggestions)
        super().__init__(message)


# ---------------------------------------------------------------------------
# discourse / argumentation

class UnresolvableMention(ClaimsenseError):
    """No licensed resolution for a mention (e.g. plural pronoun without
    an accommodation license)."""

    def __init__(self, mention_id, message=None):
        self.mention_id = mention_id
        super().__init__(message or f"no licensed resolution for mention {mention_id!r}")


class StillAmbiguous(ClaimsenseError):
    """Every disambiguation path failed to separate the candidates."""

    def __init__(self, target, candidates, message=None):
        self.target = target
        self.candidates = list(candidates)
        super().__init__(
            message
            or f"cannot disambiguate {target!r} between {', '.join(map(str, candidates))}"
        )


class MissingGold(ClaimsenseError):
    """score asked to compare against a gold result that does not exist."""
