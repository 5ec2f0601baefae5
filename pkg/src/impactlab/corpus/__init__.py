"""Bundled MiniOO sample projects with all-green test suites.

Each project lives in ``<name>/src/*.moo`` next to an ``expected.json``
holding its recorded statistics.  ``fixtures/`` holds small programs that
are not evaluation projects (they have no tests).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..callgraph import GraphVariant, build
from ..frontend import FrontendError, load_units, parse_and_check
from ..frontend.model import CheckedProgram
from ..interpreter import DEFAULT_STEP_BUDGET, run_suite

CORPUS_ROOT = Path(__file__).resolve().parent
FIXTURES = CORPUS_ROOT / "fixtures"

# roles of individual projects, used by the acceptance suite
REFLECTION_PROJECT = "calc"
OVERRIDE_FIELD_PROJECT = "shapes"
ISOLATED_PROJECT = "inventory"
INHERITANCE_PROJECT = "zoo"
LOOP_PROJECT = "loops"


@dataclass(frozen=True)
class CorpusProject:
    name: str
    source_dir: Path
    expected: dict

    def load(self) -> CheckedProgram:
        return parse_and_check(load_units(self.source_dir))


def project_names() -> list[str]:
    return sorted(p.parent.name for p in CORPUS_ROOT.glob("*/expected.json"))


def project(name: str) -> CorpusProject:
    root = CORPUS_ROOT / name
    expected_path = root / "expected.json"
    if not expected_path.is_file():
        raise KeyError(f"no corpus project named {name!r}")
    return CorpusProject(name, root / "src", json.loads(expected_path.read_text()))


def projects() -> list[CorpusProject]:
    return [project(n) for n in project_names()]


def fixture_dir(name: str) -> Path:
    """A directory holding only the fixture file ``<name>.moo``."""
    path = FIXTURES / name
    if not path.is_dir():
        raise KeyError(f"no fixture named {name!r}")
    return path


def statistics(checked: CheckedProgram, step_budget: int = DEFAULT_STEP_BUDGET) -> dict:
    """The statistics recorded in expected.json."""
    suite = run_suite(checked, step_budget)
    graphs = {}
    for v in GraphVariant:
        g = build(checked, v)
        graphs[v.value] = {"nodes": len(g.nodes), "edges": len(g.edges)}
    return {
        "methods": len(checked.methods),
        "tests": len(checked.tests),
        "max_baseline_steps": max(o.steps_used for o in suite.outcomes.values()),
        "graphs": graphs,
    }


def check_project(proj: CorpusProject, step_budget: int = DEFAULT_STEP_BUDGET) -> Optional[str]:
    """None when the project matches its contract, else a description of the first problem."""
    try:
        checked = proj.load()
    except FrontendError as exc:
        return f"does not compile: {exc}"
    if not checked.tests:
        return "has no tests"
    suite = run_suite(checked, step_budget)
    failing = sorted(str(t) for t in suite.failing())
    if failing:
        return f"baseline failures: {', '.join(failing)}"
    actual = statistics(checked, step_budget)
    problems = []
    for key in ("methods", "tests"):
        if actual[key] != proj.expected.get(key):
            problems.append(f"{key}: expected {proj.expected.get(key)}, got {actual[key]}")
    for v, counts in actual["graphs"].items():
        want = proj.expected.get("graphs", {}).get(v, {})
        for key, value in counts.items():
            if want.get(key) != value:
                problems.append(f"{v} {key}: expected {want.get(key)}, got {value}")
    return "; ".join(problems) or None


def verify_corpus(step_budget: int = DEFAULT_STEP_BUDGET) -> list[tuple[str, bool, str]]:
    results = []
    for proj in projects():
        problem = check_project(proj, step_budget)
        results.append((proj.name, problem is None, problem or ""))
    return results


def record_expected(name: str) -> dict:
    """Recompute and overwrite a project's expected.json (maintainer helper)."""
    root = CORPUS_ROOT / name
    stats = statistics(parse_and_check(load_units(root / "src")))
    (root / "expected.json").write_text(json.dumps(stats, indent=2) + "\n")
    return stats
