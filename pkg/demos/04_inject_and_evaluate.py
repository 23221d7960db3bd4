"""
Injecting the sixteen error kinds and scoring a detector
========================================================

Each kind is injected once into the clean fixture.  Two scripted detectors
bracket the scoring: one that knows every answer and one that never flags
anything.
"""

from confctx.mutation import (
    always_clean_script,
    default_cases,
    evaluate,
    llm_detector,
    omniscient_script,
)
from confctx.providers import script_from_dict

cases = default_cases()
for case in cases:
    rec = case.record
    first = rec.mutated.splitlines()[0] if rec.mutated else ""
    print(f"{rec.kind.value:<22} {rec.category.row_label:<13} {first[:70]}")

print("\nomniscient detector")
print(evaluate(llm_detector(script_from_dict(omniscient_script(cases))), cases).to_markdown())

print("always-clean detector")
print(evaluate(llm_detector(script_from_dict(always_clean_script())), cases).to_markdown())
