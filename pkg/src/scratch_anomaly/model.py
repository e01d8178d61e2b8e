"""Script models (control-location automata) and their temporal properties."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .ingest import RawBlock, Script

IF_OPCODES = frozenset({"control_if"})
IF_ELSE_OPCODES = frozenset({"control_if_else"})
LOOP_OPCODES = frozenset({
    "control_repeat",
    "control_repeat_until",
    "control_while",
    "control_for_each",
})
FOREVER_OPCODES = frozenset({"control_forever"})
TERMINAL_OPCODES = frozenset({"control_stop", "control_delete_this_clone"})


@dataclass(frozen=True)
class BlockLabel:
    """What a transition executes: the opcode, plus the signature for custom blocks."""

    opcode: str
    qualifier: str | None = None

    def sort_key(self) -> tuple[str, str]:
        return (self.opcode, self.qualifier or "")

    def __lt__(self, other: BlockLabel) -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        if self.qualifier is None:
            return self.opcode
        return f"{self.opcode}:{self.qualifier}"

    @classmethod
    def of(cls, block: RawBlock) -> BlockLabel:
        return cls(block.opcode, block.proc_signature)


@dataclass(frozen=True)
class TemporalProperty:
    """``pred`` can be followed (eventually) by ``succ`` in a script's control flow."""

    pred: BlockLabel
    succ: BlockLabel

    def sort_key(self):
        return (self.pred.sort_key(), self.succ.sort_key())

    def __lt__(self, other: TemporalProperty) -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return f"{self.pred} -> {self.succ}"

    def as_pair(self) -> list[str]:
        return [str(self.pred), str(self.succ)]


class Transition(NamedTuple):
    src: int
    label: BlockLabel | None  # None is an epsilon move
    dst: int


EPSILON = None


@dataclass(frozen=True)
class ScriptModel:
    locations: frozenset[int]
    initial: int
    transitions: frozenset[Transition]

    @property
    def labeled(self) -> list[Transition]:
        return sorted((t for t in self.transitions if t.label is not None),
                      key=lambda t: (t.src, t.dst, t.label.sort_key()))

    @property
    def epsilons(self) -> list[Transition]:
        return sorted(t for t in self.transitions if t.label is None)

    def labels(self) -> set[BlockLabel]:
        return {t.label for t in self.transitions if t.label is not None}


@dataclass
class _Builder:
    blocks: dict[str, RawBlock]
    n_locations: int = 1
    transitions: set[Transition] = field(default_factory=set)

    def fresh(self) -> int:
        loc = self.n_locations
        self.n_locations += 1
        return loc

    def step(self, src: int, label: BlockLabel | None, dst: int | None = None) -> int:
        if dst is None:
            dst = self.fresh()
        if not (label is None and src == dst):
            self.transitions.add(Transition(src, label, dst))
        return dst

    def substack(self, block: RawBlock, i: int) -> str | None:
        return block.substacks[i] if i < len(block.substacks) else None

    def chain(self, block_id: str | None, loc: int) -> int | None:
        """Lay out the stack starting at ``block_id`` from ``loc``.

        Returns the exit location, or None if control cannot leave the stack.
        """
        while block_id is not None:
            block = self.blocks[block_id]
            op = block.opcode
            label = BlockLabel.of(block)
            if op in IF_OPCODES:
                head = self.step(loc, label)
                body_exit = self.chain(self.substack(block, 0), head)
                if body_exit is None or body_exit == head:
                    body_exit = self.fresh()
                self.step(head, EPSILON, body_exit)
                loc = body_exit
            elif op in IF_ELSE_OPCODES:
                head = self.step(loc, label)
                exits = []
                for i in (0, 1):
                    entry = self.step(head, EPSILON)
                    exits.append(self.chain(self.substack(block, i), entry))
                exits = [e for e in exits if e is not None]
                if not exits:
                    return None
                loc = self.fresh()
                for e in exits:
                    self.step(e, EPSILON, loc)
            elif op in LOOP_OPCODES or op in FOREVER_OPCODES:
                head = self.step(loc, label)
                tail = self.chain(self.substack(block, 0), head)
                if tail is not None:
                    self.step(tail, EPSILON, head)
                if op in FOREVER_OPCODES:
                    return None
                loc = self.step(head, EPSILON)
            elif block.substacks:
                # unknown C-block: treat like an if
                head = self.step(loc, label)
                exit_ = self.fresh()
                self.step(head, EPSILON, exit_)
                for i in range(len(block.substacks)):
                    body_exit = self.chain(self.substack(block, i), head)
                    if body_exit is not None:
                        self.step(body_exit, EPSILON, exit_)
                loc = exit_
            else:
                loc = self.step(loc, label)
                if op in TERMINAL_OPCODES and block.next is None:
                    return None
            block_id = block.next
        return loc


def build_model(script: Script) -> ScriptModel:
    """Build the control-location automaton of one script.

    Every executed block contributes exactly one labeled transition; C-blocks
    add epsilon moves for skipping, branching, looping back and leaving loops.
    """
    builder = _Builder(script.blocks)
    builder.chain(script.root_block, 0)
    return ScriptModel(
        locations=frozenset(range(builder.n_locations)),
        initial=0,
        transitions=frozenset(builder.transitions),
    )


def _reachability(model: ScriptModel, labeled: bool = True) -> dict[int, set[int]]:
    succ: dict[int, set[int]] = defaultdict(set)
    for t in model.transitions:
        if labeled or t.label is None:
            succ[t.src].add(t.dst)
    reach = {}
    for start in model.locations:
        seen = {start}
        todo = [start]
        while todo:
            for nxt in succ[todo.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        reach[start] = seen
    return reach


def extract_properties(model: ScriptModel, adjacent_only: bool = False,
                       self_pairs: bool = True) -> frozenset[TemporalProperty]:
    """Ordered label pairs (a, b) where b's transition can start after a's ends.

    With ``adjacent_only`` only epsilon moves may separate the two blocks.
    """
    reach = _reachability(model, labeled=not adjacent_only)
    by_src: dict[int, set[BlockLabel]] = defaultdict(set)
    for t in model.transitions:
        if t.label is not None:
            by_src[t.src].add(t.label)
    props = set()
    for t in model.transitions:
        if t.label is None:
            continue
        for loc in reach.get(t.dst, {t.dst}):
            for succ in by_src.get(loc, ()):
                if self_pairs or succ != t.label:
                    props.add(TemporalProperty(t.label, succ))
    return frozenset(props)


def script_properties(script: Script, adjacent_only: bool = False,
                      self_pairs: bool = True) -> frozenset[TemporalProperty]:
    return extract_properties(build_model(script), adjacent_only, self_pairs)


def to_dot(model: ScriptModel, name: str = "script") -> str:
    lines = [f'digraph "{_dot_escape(name)}" {{', "  rankdir=TB;"]
    for loc in sorted(model.locations):
        shape = "doublecircle" if loc == model.initial else "circle"
        lines.append(f'  l{loc} [label="l{loc}", shape={shape}];')
    for t in model.labeled:
        lines.append(f'  l{t.src} -> l{t.dst} [label="{_dot_escape(str(t.label))}"];')
    for t in model.epsilons:
        lines.append(f'  l{t.src} -> l{t.dst} [label="ε", style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def sorted_properties(props: Iterable[TemporalProperty]) -> list[TemporalProperty]:
    return sorted(props, key=TemporalProperty.sort_key)
