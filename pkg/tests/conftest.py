import json
import zipfile

import pytest

from scratch_anomaly.ingest import extract_scripts, parse_project
from scratch_anomaly.synthetic import make_project, write_project

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_record():
    def record(name, ok, detail=""):
        _ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" ({detail})" if detail else ""))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def scripts_of(project_json, name="p"):
    return extract_scripts(parse_project(project_json, f"{name}.json"))


def one_script(steps, sprite="Sprite1"):
    [script] = scripts_of(make_project({sprite: [steps]}))
    return script


@pytest.fixture
def write_corpus(tmp_path):
    """Write ``{name: project_json}`` as .sb3 files into a fresh directory."""
    def write(projects, subdir="corpus"):
        root = tmp_path / subdir
        root.mkdir(parents=True, exist_ok=True)
        for name, project in projects.items():
            write_project(root / f"{name}.sb3", project)
        return root
    return write


def write_zip(path, entries):
    with zipfile.ZipFile(path, "w") as zf:
        for name, payload in entries.items():
            zf.writestr(name, payload if isinstance(payload, str) else json.dumps(payload))
    return path
