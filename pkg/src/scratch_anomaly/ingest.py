"""Loading Scratch 3 projects and splitting them into actors and scripts."""

from __future__ import annotations

import json
import logging
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple

from .errors import EmptyCorpus, MalformedProject, UnreadableFile

log = logging.getLogger(__name__)

SUBSTACK_KEYS = ("SUBSTACK", "SUBSTACK2")

HAT_OPCODES = frozenset({
    "event_whenflagclicked",
    "event_whenkeypressed",
    "event_whenthisspriteclicked",
    "event_whenstageclicked",
    "event_whenbackdropswitchesto",
    "event_whengreaterthan",
    "event_whenbroadcastreceived",
    "event_whentouchingobject",
    "control_start_as_clone",
    "procedures_definition",
})

REPORTER_OPCODES = frozenset({
    "motion_xposition", "motion_yposition", "motion_direction",
    "looks_costumenumbername", "looks_backdropnumbername", "looks_size",
    "sound_volume",
    "sensing_touchingobject", "sensing_touchingcolor",
    "sensing_coloristouchingcolor", "sensing_distanceto", "sensing_answer",
    "sensing_keypressed", "sensing_mousedown", "sensing_mousex",
    "sensing_mousey", "sensing_loudness", "sensing_loud", "sensing_timer",
    "sensing_of", "sensing_current", "sensing_dayssince2000",
    "sensing_username",
    "operator_add", "operator_subtract", "operator_multiply",
    "operator_divide", "operator_random", "operator_gt", "operator_lt",
    "operator_equals", "operator_and", "operator_or", "operator_not",
    "operator_join", "operator_letter_of", "operator_length",
    "operator_contains", "operator_mod", "operator_round", "operator_mathop",
    "data_variable", "data_listcontents", "data_itemoflist",
    "data_itemnumoflist", "data_lengthoflist", "data_listcontainsitem",
    "argument_reporter_string_number", "argument_reporter_boolean",
    "music_getTempo", "videoSensing_videoOn",
    "translate_getTranslate", "translate_getViewerLanguage",
})


def is_hat(opcode: str) -> bool:
    if opcode in HAT_OPCODES:
        return True
    # extension hats follow the "<ext>_when<Event>" naming
    _, _, rest = opcode.partition("_")
    return rest.lower().startswith("when")


def is_reporter(opcode: str) -> bool:
    return opcode in REPORTER_OPCODES or opcode.endswith("menu") or "_menu_" in opcode


def normalize_actor_name(name: str) -> str:
    return name.strip().casefold()


@dataclass(frozen=True)
class RawBlock:
    id: str
    opcode: str
    next: str | None = None
    parent: str | None = None
    top_level: bool = False
    substacks: tuple[str | None, ...] = ()
    proc_signature: str | None = None
    shadow: bool = False


@dataclass
class Actor:
    name: str
    is_stage: bool
    raw_blocks: dict[str, RawBlock] = field(default_factory=dict)

    @property
    def key(self) -> str:
        return normalize_actor_name(self.name)


@dataclass
class Project:
    source_path: Path
    name: str
    actors: list[Actor]


class ScriptId(NamedTuple):
    project: str
    actor: str
    index: int

    def __str__(self) -> str:
        return f"{self.project}/{self.actor}/{self.index}"


@dataclass
class Script:
    script_id: ScriptId
    actor_is_stage: bool
    root_block: str
    blocks: dict[str, RawBlock]

    @property
    def root(self) -> RawBlock:
        return self.blocks[self.root_block]

    @property
    def dead_code(self) -> bool:
        return not is_hat(self.root.opcode)


@dataclass
class SkipRecord:
    file: str
    reason: str


@dataclass
class Corpus:
    """Projects loaded from one directory, plus the files that failed to load."""

    projects: list[Project]
    skipped: list[SkipRecord] = field(default_factory=list)

    def __iter__(self) -> Iterator[Project]:
        return iter(self.projects)

    def __len__(self) -> int:
        return len(self.projects)

    def __getitem__(self, i):
        return self.projects[i]


def _read_project_json(path: Path) -> dict:
    try:
        if zipfile.is_zipfile(path):
            with zipfile.ZipFile(path) as zf:
                try:
                    raw = zf.read("project.json")
                except KeyError:
                    raise MalformedProject(f"{path}: archive has no project.json entry") from None
        else:
            raw = path.read_bytes()
    except MalformedProject:
        raise
    except (OSError, zipfile.BadZipFile) as exc:
        raise UnreadableFile(f"{path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except (ValueError, UnicodeDecodeError) as exc:
        raise MalformedProject(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise MalformedProject(f"{path}: top-level JSON value is not an object")
    return data


def _stack_ref(value) -> str | None:
    # sb3 encodes substack inputs as [shadow-kind, block-id, ...]
    if isinstance(value, list) and len(value) > 1 and isinstance(value[1], str):
        return value[1]
    return None


def _proccode(block: dict) -> str | None:
    mutation = block.get("mutation")
    if isinstance(mutation, dict) and isinstance(mutation.get("proccode"), str):
        return mutation["proccode"]
    return None


def _parse_blocks(where: str, blocks: dict) -> dict[str, RawBlock]:
    if not isinstance(blocks, dict):
        raise MalformedProject(f"{where}: 'blocks' is not an object")
    raw: dict[str, RawBlock] = {}
    for block_id, block in blocks.items():
        if isinstance(block, list):
            # top-level variable/list reporters are stored in array form
            continue
        if not isinstance(block, dict) or not isinstance(block.get("opcode"), str):
            raise MalformedProject(f"{where}: block {block_id!r} has no opcode")
        inputs = block.get("inputs") or {}
        if not isinstance(inputs, dict):
            raise MalformedProject(f"{where}: block {block_id!r} has invalid inputs")
        substacks: tuple[str | None, ...] = ()
        if any(k in inputs for k in SUBSTACK_KEYS):
            substacks = tuple(_stack_ref(inputs.get(k)) for k in SUBSTACK_KEYS)
        signature = _proccode(block)
        if block["opcode"] == "procedures_definition":
            proto = blocks.get(_stack_ref(inputs.get("custom_block")) or "")
            if isinstance(proto, dict):
                signature = _proccode(proto)
        raw[block_id] = RawBlock(
            id=block_id,
            opcode=block["opcode"],
            next=block.get("next"),
            parent=None if block.get("topLevel") else block.get("parent"),
            top_level=bool(block.get("topLevel", False)),
            substacks=substacks,
            proc_signature=signature,
            shadow=bool(block.get("shadow", False)),
        )
    for block in raw.values():
        for ref in (block.next, *block.substacks):
            if ref is not None and (not isinstance(ref, str) or ref not in raw):
                raise MalformedProject(f"{where}: block {block.id!r} references missing block {ref!r}")
    _check_stacks_disjoint(where, raw)
    return raw


def _walk(blocks: dict[str, RawBlock], root: str) -> Iterator[str]:
    stack = [root]
    while stack:
        block_id = stack.pop()
        yield block_id
        block = blocks[block_id]
        stack.extend(ref for ref in reversed(block.substacks) if ref is not None)
        if block.next is not None:
            stack.append(block.next)


def _check_stacks_disjoint(where: str, raw: dict[str, RawBlock]) -> None:
    seen: set[str] = set()
    for block in raw.values():
        if not block.top_level:
            continue
        for block_id in _walk(raw, block.id):
            if block_id in seen:
                raise MalformedProject(f"{where}: block {block_id!r} is reachable twice (cycle or shared stack)")
            seen.add(block_id)


def load_project(path: str | Path) -> Project:
    """Read a ``.sb3`` archive or bare ``project.json`` into a :class:`Project`."""
    path = Path(path)
    return parse_project(_read_project_json(path), path)


def parse_project(data: dict, path: str | Path = "project.json") -> Project:
    """Build a :class:`Project` from decoded project.json content.

    The stage is moved to the front; sprites keep their file order.
    """
    path = Path(path)
    targets = data.get("targets") if isinstance(data, dict) else None
    if not isinstance(targets, list):
        raise MalformedProject(f"{path}: missing 'targets' array")

    actors = []
    for i, target in enumerate(targets):
        if not isinstance(target, dict):
            raise MalformedProject(f"{path}: target {i} is not an object")
        for key in ("isStage", "name", "blocks"):
            if key not in target:
                raise MalformedProject(f"{path}: target {i} lacks {key!r}")
        if not isinstance(target["name"], str):
            raise MalformedProject(f"{path}: target {i} has a non-string name")
        where = f"{path} [{target['name']}]"
        actors.append(Actor(target["name"], bool(target["isStage"]), _parse_blocks(where, target["blocks"])))

    stages = [a for a in actors if a.is_stage]
    if len(stages) != 1:
        raise MalformedProject(f"{path}: expected exactly one stage, found {len(stages)}")
    keys = [a.key for a in actors]
    if len(set(keys)) != len(keys):
        raise MalformedProject(f"{path}: actor names collide after normalization")
    actors = stages + [a for a in actors if not a.is_stage]
    return Project(source_path=path, name=path.stem, actors=actors)


def _is_script_root(block: RawBlock) -> bool:
    return block.top_level and not block.shadow and not is_reporter(block.opcode)


def extract_scripts(project: Project) -> list[Script]:
    scripts = []
    for actor in project.actors:
        roots = sorted(b.id for b in actor.raw_blocks.values() if _is_script_root(b))
        for index, root in enumerate(roots):
            tree = {bid: actor.raw_blocks[bid] for bid in _walk(actor.raw_blocks, root)}
            scripts.append(Script(
                script_id=ScriptId(project.name, actor.name, index),
                actor_is_stage=actor.is_stage,
                root_block=root,
                blocks=tree,
            ))
    return scripts


def load_corpus(directory: str | Path, recursive: bool = False) -> Corpus:
    """Load every ``*.sb3`` and ``*.json`` file in ``directory``.

    Files that fail to load are logged and recorded in ``Corpus.skipped``.
    Raises :class:`EmptyCorpus` if nothing could be loaded.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise UnreadableFile(f"{directory}: not a directory")
    pattern = "**/*" if recursive else "*"
    files = sorted(
        (p for p in directory.glob(pattern) if p.is_file() and p.suffix.lower() in (".sb3", ".json")),
        key=lambda p: p.relative_to(directory).as_posix(),
    )
    projects: list[Project] = []
    skipped: list[SkipRecord] = []
    names: set[str] = set()
    for path in files:
        rel = path.relative_to(directory).as_posix()
        try:
            project = load_project(path)
        except (MalformedProject, UnreadableFile) as exc:
            log.warning("skipping %s: %s", rel, exc)
            skipped.append(SkipRecord(rel, str(exc).removeprefix(f"{path}: ")))
            continue
        if project.name in names:
            project.name = rel
        names.add(project.name)
        projects.append(project)
    if not projects:
        raise EmptyCorpus(f"{directory}: no loadable projects")
    return Corpus(projects, skipped)
