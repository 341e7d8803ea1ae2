"""Attribution-grounded multi-hop QA curation and evaluation."""

import json

from . import _core
from ._core import (
    DataError,
    ParseError,
    UsageError,
    citation_scores,
    exact_match,
    extract_answer,
    f1_score,
    instruction,
    normalize_answer,
)

__all__ = [
    "DataError",
    "ParseError",
    "UsageError",
    "apply_noise",
    "build_prompt",
    "citation_scores",
    "correlation",
    "curate",
    "exact_match",
    "extract_answer",
    "f1_score",
    "fingerprint",
    "instruction",
    "main",
    "normalize_answer",
    "parse_chain",
    "render_chain",
    "run_cli",
]


def parse_chain(text, mode):
    return json.loads(_core.parse_chain(text, mode))


def render_chain(chain, mode):
    return _core.render_chain(json.dumps(chain), mode)


def curate(samples):
    """Returns {"kept", "verdicts", "report"} for a list of sample dicts."""
    return json.loads(_core.curate(json.dumps(list(samples))))


def apply_noise(instance, ratio, seed):
    return json.loads(_core.apply_noise(json.dumps(instance), ratio, seed))


def build_prompt(instance, mode, demos=(), budget=15872):
    """`demos` holds {"instance": ..., "target": ...} dicts."""
    return json.loads(_core.build_prompt(json.dumps(instance), mode, json.dumps(list(demos)), budget))


def correlation(xs, ys, method, permutations=10000, seed=0):
    return json.loads(_core.correlation(list(xs), list(ys), method, permutations, seed))


def fingerprint(request):
    return _core.fingerprint(json.dumps(request))


def run_cli(args):
    """Runs the command line in-process; returns (exit_code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])


def main():
    import sys

    code, out, err = run_cli(sys.argv[1:])
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code
