"""
The request-driven review loop, offline
=======================================

A scripted provider plays the model: it asks for neighbouring lines, then for
similar and referenceable ones together, then rules on the line.  The last
message of every request is printed so the protocol is visible.
"""

import json

from confctx import DetectionFocus, ScriptedProvider, parse_juniper, run_detection
from confctx.mutation import MutationKind, build_case, fixture_text

# inject a dangling filter reference and review the mutated line
case = build_case(fixture_text(), MutationKind.NONEXISTENT_FILTER, source_id="rtsw-alba.conf")
print("mutated line:", case.mutated.line)

provider = ScriptedProvider(
    [
        {"action": "request_context", "context_types": ["N"]},
        {"action": "request_context", "context_types": ["S", "R"]},
        {
            "action": "verdict",
            "misconfigured": True,
            "errParameter": ["input-list"],
            "reason": "filter 'uplink' is not defined under firewall",
        },
    ]
)
verdict = run_detection(provider, [case.mutated.tree], case.mutated.path, DetectionFocus.parse("D/C"))

for i, call in enumerate(provider.calls, 1):
    print(f"\n--- request {i}: last message ---")
    print(call[-1].content)

print("\nverdict:", json.dumps({
    "misconfigured": verdict.misconfigured,
    "errParameter": list(verdict.err_parameters),
    "requested": [t.wire for t in verdict.requested_contexts],
    "iterations": verdict.iterations,
}))
