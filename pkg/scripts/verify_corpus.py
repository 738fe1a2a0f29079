#!/usr/bin/env python3
"""Exhaustive desk-scale verification over the standard fixture corpus.

For every corpus instance: validates the advertised valuation class,
builds the pipeline's sketch, checks the structural invariants, and
compares the estimate against the truth on all 2^n bundles. Prints one
line per fixture and a summary; exits 1 if anything is violated.

    python3 scripts/verify_corpus.py
    python3 scripts/verify_corpus.py --limit 20 --quiet
"""

import argparse
import sys

import valsketch as vs


def check_entry(pipeline_name: str, spec) -> tuple:
    pipeline = vs.get_pipeline(pipeline_name)
    oracle = spec.build(vs.QueryLedger())
    pipeline.check_compatible(oracle)

    class_ok, witness = vs.validate_class(oracle, pipeline.property)
    sketch = vs.build_sketch(oracle, pipeline.card, pipeline.xos)
    violations = vs.family_invariant_check(sketch)
    report = vs.exhaustive_ratio_report(oracle, sketch)

    ok = class_ok and not violations and report.sound and report.within_bound
    notes = []
    if not class_ok:
        notes.append(f"class violated at {witness}")
    notes.extend(violations)
    if not report.sound:
        notes.append(f"unsound: over-ratio {report.max_over}")
    if not report.within_bound:
        notes.append(f"coverage: under-ratio {report.max_under} > {report.bound}")
    return ok, report, notes


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--limit", type=int, help="check only the first N fixtures")
    parser.add_argument("--quiet", action="store_true", help="print failures and summary only")
    args = parser.parse_args(argv)

    corpus = vs.standard_fixture_corpus()
    if args.limit:
        corpus = corpus[: args.limit]

    failures = 0
    worst = 1.0
    for pipeline_name, spec in corpus:
        ok, report, notes = check_entry(pipeline_name, spec)
        worst = max(worst, report.max_under)
        if not ok:
            failures += 1
        if not ok or not args.quiet:
            status = "ok" if ok else "FAIL"
            print(
                f"{status} {pipeline_name:<11} {spec.family:<17} "
                f"n={spec.n:<3} seed={spec.seed:<3} "
                f"under={report.max_under:7.3f} bound={report.bound:9.1f}"
            )
            for note in notes:
                print(f"     {note}")

    print(f"checked {len(corpus)} fixtures: {failures} failures, worst ratio {worst:.3f}")
    return 0 if failures == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
