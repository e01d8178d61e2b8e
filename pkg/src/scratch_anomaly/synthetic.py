"""Build small Scratch 3 projects from nested opcode lists.

A script is a list of steps. A step is an opcode string, or a tuple
``(opcode, body)`` for C-blocks, or ``(opcode, then_body, else_body)`` for
``control_if_else``. Used by the test-suite and to generate demo corpora::

    python -m scratch_anomaly.synthetic planted-bug OUTDIR
"""

from __future__ import annotations

import argparse
import itertools
import json
import zipfile
from pathlib import Path
from typing import Sequence, Union

Step = Union[str, tuple]

# a few realistic argument inputs; the analysis ignores them
_INPUTS = {
    "motion_movesteps": {"STEPS": [1, [4, "10"]]},
    "motion_gotoxy": {"X": [1, [4, "0"]], "Y": [1, [4, "0"]]},
    "looks_say": {"MESSAGE": [1, [10, "Hello!"]]},
    "control_repeat": {"TIMES": [1, [6, "10"]]},
}
_FIELDS = {
    "event_whenkeypressed": {"KEY_OPTION": ["space", None]},
}


class _Ids:
    def __init__(self, prefix: str):
        self.prefix = prefix
        self.counter = itertools.count(1)

    def __call__(self) -> str:
        return f"{self.prefix}{next(self.counter)}"


def _add_stack(blocks: dict, steps: Sequence[Step], ids: _Ids, parent: str | None,
               top_level: bool, x: int = 0, y: int = 0) -> str | None:
    first = None
    prev = None
    for step in steps:
        opcode, bodies = (step, ()) if isinstance(step, str) else (step[0], step[1:])
        block_id = ids()
        block = {
            "opcode": opcode,
            "next": None,
            "parent": prev if prev is not None else parent,
            "inputs": dict(_INPUTS.get(opcode, {})),
            "fields": dict(_FIELDS.get(opcode, {})),
            "shadow": False,
            "topLevel": first is None and top_level,
        }
        if block["topLevel"]:
            block["x"], block["y"] = x, y
        blocks[block_id] = block
        for key, body in zip(("SUBSTACK", "SUBSTACK2"), bodies):
            entry = _add_stack(blocks, body, ids, block_id, top_level=False)
            block["inputs"][key] = [2, entry]
        if prev is not None:
            blocks[prev]["next"] = block_id
        first = first or block_id
        prev = block_id
    return first


def make_target(name: str, scripts: Sequence[Sequence[Step]], is_stage: bool = False,
                id_prefix: str | None = None) -> dict:
    ids = _Ids(id_prefix or f"{name}-")
    blocks: dict = {}
    for i, script in enumerate(scripts):
        _add_stack(blocks, script, ids, None, top_level=True, x=0, y=200 * i)
    return {
        "isStage": is_stage,
        "name": name,
        "variables": {},
        "lists": {},
        "broadcasts": {},
        "blocks": blocks,
        "comments": {},
        "currentCostume": 0,
        "costumes": [],
        "sounds": [],
        "volume": 100,
    }


def make_project(sprites: dict[str, Sequence[Sequence[Step]]] | None = None,
                 stage_scripts: Sequence[Sequence[Step]] = (), id_prefix: str = "") -> dict:
    """project.json content with one stage and the given sprites (in order)."""
    targets = [make_target("Stage", stage_scripts, is_stage=True, id_prefix=f"{id_prefix}stage-")]
    for name, scripts in (sprites or {}).items():
        targets.append(make_target(name, scripts, id_prefix=f"{id_prefix}{name}-"))
    return {"targets": targets, "monitors": [], "extensions": [],
            "meta": {"semver": "3.0.0", "vm": "0.2.0", "agent": "synthetic"}}


def write_project(path: str | Path, project: dict) -> Path:
    """Write ``project`` as an ``.sb3`` archive, or as bare JSON if ``path`` ends in ``.json``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = json.dumps(project, indent=1, sort_keys=True)
    if path.suffix == ".json":
        path.write_text(payload, encoding="utf-8")
    else:
        # fixed timestamp keeps archives byte-identical across runs
        info = zipfile.ZipInfo("project.json", date_time=(2020, 1, 1, 0, 0, 0))
        with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
            zf.writestr(info, payload)
    return path


CONFORMING = ["event_whenkeypressed", "motion_movesteps", "looks_nextcostume"]
DEVIANT = ["event_whenkeypressed", "motion_gotoxy", "looks_nextcostume"]


def planted_bug_corpus(directory: str | Path, conforming: int = 18, deviant: int = 2,
                       sprite: str = "Sprite1") -> list[Path]:
    """Solutions moving a sprite on a key press; ``deviant`` of them jump with go-to-xy instead.

    Deviant solutions are spread through the file order rather than placed at
    the end. Returns the written paths; deviants are named ``solution_NN_deviant``.
    """
    directory = Path(directory)
    total = conforming + deviant
    step = total // deviant if deviant else 0
    deviant_slots = {step * i + step // 2 for i in range(deviant)}
    paths = []
    for i in range(total):
        is_deviant = i in deviant_slots
        name = f"solution_{i + 1:02d}" + ("_deviant" if is_deviant else "")
        script = DEVIANT if is_deviant else CONFORMING
        paths.append(write_project(directory / f"{name}.sb3", make_project({sprite: [script]})))
    return paths


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(prog="python -m scratch_anomaly.synthetic")
    sub = parser.add_subparsers(dest="corpus", required=True)
    p = sub.add_parser("planted-bug", help="18 key-press/move solutions, 2 using go-to-xy instead")
    p.add_argument("outdir", type=Path)
    p.add_argument("--conforming", type=int, default=18)
    p.add_argument("--deviant", type=int, default=2)
    args = parser.parse_args(argv)
    for path in planted_bug_corpus(args.outdir, args.conforming, args.deviant):
        print(path)


if __name__ == "__main__":
    main()
