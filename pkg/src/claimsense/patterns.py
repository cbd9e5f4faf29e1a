"""Ground atoms, fact patterns and unification.

The textual grammar (documented in docs/patterns.md):

    at(?v, stop-sign)            positive pattern, ?v is a variable
    not stopped(?v)              explicit negation
    absent(check(?v, right))     negation-as-failure condition (default
                                 antecedents only)

Constants are hyphenated identifiers, double-quoted strings or integers.
A ground atom is a pattern without variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import PatternSyntaxError

_IDENT = r"[A-Za-z0-9_][A-Za-z0-9_\-.:]*"
_TOKEN = re.compile(
    r'\s*(?:(?P<var>\?[A-Za-z0-9_\-]+)|(?P<str>"[^"]*")|(?P<ident>%s)|(?P<punct>[(),]))'
    % _IDENT
)


def is_variable(term) -> bool:
    return isinstance(term, str) and term.startswith("?")


@dataclass(frozen=True)
class Atom:
    """A predicate applied to constant or variable terms, optionally negated.

    Ground atoms double as facts; atoms with variables are rule patterns.
    """

    predicate: str
    args: tuple = ()
    negated: bool = False

    def __post_init__(self):
        # atoms key every reasoner dict; hashing per lookup adds up
        object.__setattr__(self, "_hash", hash((self.predicate, self.args, self.negated)))

    def __hash__(self):
        return self._hash

    def is_ground(self) -> bool:
        return not any(is_variable(a) for a in self.args)

    def variables(self) -> set:
        return {a for a in self.args if is_variable(a)}

    def negate(self) -> "Atom":
        return Atom(self.predicate, self.args, not self.negated)

    def substitute(self, binding: dict) -> "Atom":
        return Atom(
            self.predicate,
            tuple(binding.get(a, a) if is_variable(a) else a for a in self.args),
            self.negated,
        )

    def key(self):
        """Total-order sort key. Keeps every engine iteration canonical."""
        return (self.predicate, tuple(map(_term_key, self.args)), self.negated)

    def __str__(self) -> str:
        inner = ", ".join(render_term(a) for a in self.args)
        text = f"{self.predicate}({inner})"
        return f"not {text}" if self.negated else text


@dataclass(frozen=True)
class Absent:
    """Negation-as-failure wrapper: holds while no in-fact matches ``atom``."""

    atom: Atom

    def variables(self) -> set:
        return self.atom.variables()

    def substitute(self, binding: dict) -> "Absent":
        return Absent(self.atom.substitute(binding))

    def __str__(self) -> str:
        return f"absent({self.atom})"


def _term_key(term):
    # ints sort before strings, stable across runs
    if isinstance(term, int) and not isinstance(term, bool):
        return (0, term)
    return (1, str(term))


def render_term(term) -> str:
    if isinstance(term, int) and not isinstance(term, bool):
        return str(term)
    term = str(term)
    if re.fullmatch(_IDENT, term) or is_variable(term):
        return term
    return '"%s"' % term


def _tokenize(text: str):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise PatternSyntaxError(f"cannot tokenize {text[pos:]!r} in pattern {text!r}")
            break
        out.append(m)
        pos = m.end()
    return out


def parse_pattern(text: str):
    """Parse one pattern. Returns an Atom, or Absent for absent(...) forms."""
    stripped = text.strip()
    negated = False
    if stripped.startswith("not ") or stripped.startswith("not("):
        negated = True
        stripped = stripped[3:].strip()
    m = re.match(r"^absent\s*\((.*)\)$", stripped, re.S)
    if m:
        if negated:
            raise PatternSyntaxError(f"cannot negate an absent(...) condition: {text!r}")
        return Absent(parse_pattern(m.group(1)))
    atom = _parse_atom(stripped)
    return atom.negate() if negated else atom


def _parse_atom(text: str) -> Atom:
    tokens = _tokenize(text)
    if not tokens:
        raise PatternSyntaxError("empty pattern")
    head = tokens[0]
    if not head.group("ident"):
        raise PatternSyntaxError(f"expected predicate name in {text!r}")
    predicate = head.group("ident")
    if len(tokens) == 1:
        return Atom(predicate)
    if tokens[1].group("punct") != "(" or tokens[-1].group("punct") != ")":
        raise PatternSyntaxError(f"expected '(' args ')' in {text!r}")
    args, expect_term = [], True
    for tok in tokens[2:-1]:
        if tok.group("punct") == ",":
            if expect_term:
                raise PatternSyntaxError(f"misplaced comma in {text!r}")
            expect_term = True
        elif expect_term:
            args.append(_term_value(tok, text))
            expect_term = False
        else:
            raise PatternSyntaxError(f"missing comma in {text!r}")
    if expect_term and args:
        raise PatternSyntaxError(f"trailing comma in {text!r}")
    return Atom(predicate, tuple(args))


def _term_value(tok, text):
    if tok.group("var"):
        return tok.group("var")
    if tok.group("str"):
        return tok.group("str")[1:-1]
    if tok.group("ident"):
        ident = tok.group("ident")
        return int(ident) if re.fullmatch(r"-?\d+", ident) else ident
    raise PatternSyntaxError(f"unexpected token {tok.group(0)!r} in {text!r}")


def unify(pattern: Atom, fact: Atom, binding: dict | None = None):
    """Match a pattern against a ground fact. Returns the extended binding
    dict, or None. Polarity must agree."""
    if pattern.predicate != fact.predicate or pattern.negated != fact.negated:
        return None
    if len(pattern.args) != len(fact.args):
        return None
    binding = dict(binding) if binding else {}
    for p, f in zip(pattern.args, fact.args):
        if is_variable(p):
            if p in binding and binding[p] != f:
                return None
            binding[p] = f
        elif p != f:
            return None
    return binding


def rename_terms(atom: Atom, mapping: dict) -> Atom:
    """Rewrite constant terms (entity renames). Variables pass through."""
    return Atom(
        atom.predicate,
        tuple(mapping.get(a, a) if not is_variable(a) else a for a in atom.args),
        atom.negated,
    )
