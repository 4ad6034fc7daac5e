import argparse
import re
from pathlib import Path

import pytest

from parcolor.cli import build_parser
from parcolor.harness import REPORT_FIELDS

README = (Path(__file__).resolve().parents[1] / "README.md").read_text()


def _parsers():
    root = build_parser()
    yield "parcolor", root
    for action in root._actions:
        if isinstance(action, argparse._SubParsersAction):
            yield from action.choices.items()


PARSERS = dict(_parsers())


@pytest.mark.parametrize("name", sorted(PARSERS))
def test_every_flag_documented(name):
    if name != "parcolor":
        assert f"parcolor {name}" in README
    for action in PARSERS[name]._actions:
        if isinstance(action, (argparse._HelpAction, argparse._SubParsersAction)):
            continue
        assert action.help, f"{name}: {action.dest} has no help text"
        for opt in action.option_strings or [action.dest]:
            assert f"`{opt}" in README or f"{opt}`" in README, f"{name} {opt} missing from README"


def test_readme_flags_exist():
    known = {o for p in PARSERS.values() for a in p._actions for o in a.option_strings}
    cli = README[README.index("## Command line"): README.index("## File formats")]
    mentioned = set(re.findall(r"(?<![\w-])--[a-z][a-z-]*", cli))
    assert mentioned <= known, mentioned - known


def test_report_fields_documented():
    for f in REPORT_FIELDS:
        assert f"`{f}`" in README, f
