"""Command line front end.

Three subcommands:

    claimsense interpret FILE...   interpret claims, write <id>.result.json
    claimsense explain FILE FACT   show why a fact holds for a claim
    claimsense score               compare the corpus against gold results

Exit codes: 0 success, 1 score mismatch under --strict, 2 unreadable or
invalid document, 3 unresolved ambiguity, 4 fact not in when explaining,
65 missing gold file, 70 any other pipeline error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import (
    ClaimsenseError,
    DanglingReference,
    DocumentSyntaxError,
    DuplicateId,
    FactNotIn,
    MissingGold,
    StillAmbiguous,
    UnknownTense,
)
from .interlingua import parse_document
from .pipeline import interpret_document, load_rulebase

EXIT_OK = 0
EXIT_SCORE_MISMATCH = 1
EXIT_BAD_DOCUMENT = 2
EXIT_AMBIGUOUS = 3
EXIT_FACT_NOT_IN = 4
EXIT_MISSING_GOLD = 65
EXIT_PIPELINE_ERROR = 70

_PARSE_ERRORS = (DocumentSyntaxError, DanglingReference, DuplicateId, UnknownTense)


def _add_common(parser):
    parser.add_argument("--packs", metavar="DIR", default=None,
                        help="rule pack directory (default: CLAIMSENSE_PACKS or bundled packs)")
    parser.add_argument("--ablate", action="append", default=[],
                        choices=["K", "F", "E", "k", "f", "e"], metavar="CONTEXT",
                        help="drop one context's pack (repeatable)")
    parser.add_argument("--lenient", action="store_true",
                        help="ignore unknown keys in claim files")
    parser.add_argument("--format", choices=["json", "text"], default="json",
                        help="stdout format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="claimsense",
        description="Reconstruct the scene and the argumentative strategy of "
                    "short car-accident claim reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_int = sub.add_parser("interpret", help="interpret claim files")
    p_int.add_argument("files", nargs="+", metavar="FILE")
    p_int.add_argument("--trace", action="store_true",
                       help="include derivation trees in the result")
    p_int.add_argument("--allow-ambiguous", action="store_true",
                       help="record unresolved senses instead of failing")
    p_int.add_argument("--out", metavar="DIR", default=None,
                       help="directory for result files (default: next to each input)")
    _add_common(p_int)

    p_exp = sub.add_parser("explain", help="derivation tree for one fact")
    p_exp.add_argument("file", metavar="FILE")
    p_exp.add_argument("fact", metavar="FACT",
                       help="ground fact, e.g. 'blinker-side(v_writer, left)'")
    p_exp.add_argument("--allow-ambiguous", action="store_true")
    _add_common(p_exp)

    p_sco = sub.add_parser("score", help="compare interpretations against gold")
    p_sco.add_argument("--corpus", metavar="DIR", default="corpus")
    p_sco.add_argument("--gold", metavar="DIR", default=None,
                       help="gold directory (default: <corpus>/gold)")
    p_sco.add_argument("--strict", action="store_true",
                       help="exit 1 when any column mismatches")
    _add_common(p_sco)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rulebase = load_rulebase(args.packs, ablate=args.ablate)
        if args.command == "interpret":
            return _cmd_interpret(args, rulebase)
        if args.command == "explain":
            return _cmd_explain(args, rulebase)
        return _cmd_score(args, rulebase)
    except _PARSE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_DOCUMENT
    except StillAmbiguous as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("hint: rerun with --allow-ambiguous to keep going", file=sys.stderr)
        return EXIT_AMBIGUOUS
    except FactNotIn as exc:
        print(f"error: {exc}", file=sys.stderr)
        for s in exc.suggestions:
            print(f"  close: {s}", file=sys.stderr)
        return EXIT_FACT_NOT_IN
    except MissingGold as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_GOLD
    except ClaimsenseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE_ERROR


def render_result(data: dict) -> str:
    """Readable one-screen summary of a result document."""
    scene = data["scene"]
    strategy = data["strategy"]
    lines = [f"{data['document']} - verdict {strategy['verdict']}"]
    for ent in scene["entities"]:
        mentions = ", ".join(ent["mentions"]) or "-"
        lines.append(f"  entity {ent['id']}: {ent['type']} ({ent['role']}; mentions {mentions})")
    impact = scene["impact"]
    if impact:
        where = "form expectation" if impact["clause"] is None else f"clause {impact['clause']}"
        lines.append(
            f"  impact: {impact['participants'][0]} + {impact['participants'][1]} "
            f"[{impact['evidence']}, {where}]"
        )
    else:
        lines.append("  impact: none")
    lines.append("  strategy A evidence: " + ("; ".join(strategy["strategy_a_evidence"]) or "-"))
    lines.append("  strategy B evidence: " + ("; ".join(strategy["strategy_b_evidence"]) or "-"))
    if strategy["devices"]:
        lines.append("  devices: " + ", ".join(
            f"{name} x{count}" for name, count in sorted(strategy["devices"].items())
        ))
    for dev in strategy["deviations"]:
        signal = f", signaled by clause {dev['signaling_clause']}" \
            if dev["signaling_clause"] is not None else ""
        variant = f" [{dev['variant']}]" if dev["variant"] else ""
        lines.append(
            f"  deviation: {dev['script']}{variant} missing "
            f"{', '.join(dev['missing'])}{signal}"
        )
    for res in data["resolutions"]:
        lines.append(
            f"  resolved {res['target']} -> {res['chosen']} ({res['basis']})"
        )
    for d in data["defeats"]:
        lines.append(f"  defeat: {d['loser_rule']} lost {d['fact']} to {d['winner_rule']}")
    return "\n".join(lines)


def result_path(input_path: Path, out_dir: str | None, doc_id: str) -> Path:
    base = Path(out_dir) if out_dir else input_path.parent
    return base / f"{doc_id}.result.json"


def _cmd_interpret(args, rulebase) -> int:
    for name in args.files:
        path = Path(name)
        doc = parse_document(path, lenient=args.lenient)
        result = interpret_document(doc, rulebase, allow_ambiguous=args.allow_ambiguous)
        data = result.to_json(include_traces=args.trace)
        target = result_path(path, args.out, doc.id)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n",
                          encoding="utf-8")
        if args.format == "text":
            print(render_result(data))
        else:
            print(f"wrote {target}")
    return EXIT_OK


def render_tree(tree: dict, depth: int = 0) -> str:
    label = tree["rule_id"] or ("asserted" if tree["note"] in ("", "asserted") else tree["note"])
    line = "  " * depth + f"{tree['fact']}   [{label}]"
    parts = [line]
    for child in tree["children"]:
        parts.append(render_tree(child, depth + 1))
    return "\n".join(parts)


def _cmd_explain(args, rulebase) -> int:
    doc = parse_document(Path(args.file), lenient=args.lenient)
    result = interpret_document(doc, rulebase, allow_ambiguous=args.allow_ambiguous)
    tree = result.state.explain(args.fact)
    data = tree.to_json()
    if args.format == "json":
        print(json.dumps(data, sort_keys=True, indent=2))
    else:
        print(render_tree(data))
    return EXIT_OK


# -- scoring -------------------------------------------------------------------

SCORE_COLUMNS = ("participants", "coreference", "impact", "verdict", "resolutions")


def score_columns(data: dict) -> dict:
    """The compared facets of one result document, in canonical form."""
    scene = data["scene"]
    participants = sorted(
        ent["id"] for ent in scene["entities"]
        if ent["role"] in ("participant-writer", "participant-opponent")
    )
    coref = sorted(
        sorted(mentions) for mentions in scene["chains"].values() if mentions
    )
    impact = scene["impact"] and {
        "participants": sorted(scene["impact"]["participants"]),
        "evidence": scene["impact"]["evidence"],
    }
    resolutions = {r["target"]: r["chosen"] for r in data["resolutions"]}
    return {
        "participants": participants,
        "coreference": coref,
        "impact": impact,
        "verdict": data["strategy"]["verdict"],
        "resolutions": resolutions,
    }


def _cmd_score(args, rulebase) -> int:
    corpus = Path(args.corpus)
    gold_dir = Path(args.gold) if args.gold else corpus / "gold"
    claims = sorted(corpus.glob("*.claim"))

    rows = []
    tallies = {col: 0 for col in SCORE_COLUMNS}
    exact = 0
    for path in claims:
        doc = parse_document(path, lenient=args.lenient)
        gold_path = gold_dir / f"{doc.id}.result.json"
        if not gold_path.exists():
            raise MissingGold(f"no gold result for {doc.id} at {gold_path}")
        gold = score_columns(json.loads(gold_path.read_text(encoding="utf-8")))
        got = score_columns(
            interpret_document(doc, rulebase, allow_ambiguous=True).to_json()
        )
        marks = {col: gold[col] == got[col] for col in SCORE_COLUMNS}
        rows.append((doc.id, marks))
        for col, ok in marks.items():
            tallies[col] += ok
        exact += all(marks.values())

    width = max([len("claim")] + [len(r[0]) for r in rows])
    header = "  ".join(col.ljust(len(col)) for col in SCORE_COLUMNS)
    print(f"{'claim'.ljust(width)}  {header}")
    for doc_id, marks in rows:
        cells = "  ".join(
            ("ok" if marks[col] else "MISMATCH").ljust(len(col))
            for col in SCORE_COLUMNS
        )
        print(f"{doc_id.ljust(width)}  {cells}")
    total = len(rows)
    print()
    for col in SCORE_COLUMNS:
        print(f"{col}: {tallies[col]}/{total}")
    print(f"exact match: {exact}/{total}")

    if args.strict and exact != total:
        return EXIT_SCORE_MISMATCH
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
