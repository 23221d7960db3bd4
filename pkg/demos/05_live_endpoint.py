"""
Optional: the same evaluation against a live chat model
=======================================================

Not part of the test suite.  Point it at any OpenAI-compatible endpoint;
the API key is read from the environment variable named by --api-key-env.

    PROVIDER_API_KEY=... python demos/05_live_endpoint.py \\
        --endpoint https://api.openai.com/v1 --model gpt-4o-2024-05-13

Results depend entirely on the model behind the endpoint.
"""

import argparse
import json
import sys

from confctx.mutation import default_cases, evaluate, llm_detector
from confctx.prompting import DetectionOptions
from confctx.providers import HttpProvider, ProviderConfig, ProviderKind

ap = argparse.ArgumentParser()
ap.add_argument("--endpoint", required=True)
ap.add_argument("--model", default="gpt-4o-2024-05-13")
ap.add_argument("--api-key-env", default="PROVIDER_API_KEY")
ap.add_argument("--out", default="live_report.json")
args = ap.parse_args()

provider = HttpProvider(
    ProviderConfig(ProviderKind.HTTP, endpoint_url=args.endpoint, model_name=args.model, api_key_env=args.api_key_env)
)
cases = default_cases()
report = evaluate(llm_detector(provider, DetectionOptions()), cases)
print(report.to_markdown())
for row in report.rows:
    status = "hit " if row.correct else "miss"
    print(status, row.record.kind.value, row.error or "", file=sys.stderr)
with open(args.out, "w") as fh:
    json.dump(report.to_dict(), fh, indent=2)
