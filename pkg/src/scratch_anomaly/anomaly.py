"""Violation detection, confidence scoring and the end-to-end detection pipeline."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

from .errors import NoScripts
from .ingest import Corpus, ScriptId, SkipRecord, extract_scripts, load_corpus, normalize_actor_name
from .miner import MinerConfig, Pattern, PropertyDB, mine_patterns
from .model import ScriptModel, TemporalProperty, build_model, extract_properties

ALL_SCRIPTS = "*"
STAGE_KEY = "#stage"


@dataclass
class ScriptGroup:
    group_key: str
    scripts: list[tuple[ScriptId, frozenset[TemporalProperty]]]


@dataclass(frozen=True)
class Violation:
    script: ScriptId
    pattern: int
    missing: frozenset[TemporalProperty]
    same_way_count: int
    confidence: float
    support: int
    present: frozenset[TemporalProperty]
    same_way: frozenset[ScriptId] = frozenset()
    group: str = ALL_SCRIPTS

    def rank_key(self):
        return (-self.confidence, -self.support, len(self.missing), self.script,
                sorted(self.missing), self.group, self.pattern)


@dataclass(frozen=True)
class Anomaly:
    rank: int
    violation: Violation
    dead_code: bool

    @property
    def script(self) -> ScriptId:
        return self.violation.script

    @property
    def confidence(self) -> float:
        return self.violation.confidence

    @property
    def missing(self) -> frozenset[TemporalProperty]:
        return self.violation.missing

    @property
    def group(self) -> str:
        return self.violation.group

    def to_dict(self) -> dict:
        v = self.violation
        return {
            "rank": self.rank,
            "confidence": v.confidence,
            "support": v.support,
            "same_way_count": v.same_way_count,
            "project": v.script.project,
            "actor": v.script.actor,
            "script_index": v.script.index,
            "dead_code": self.dead_code,
            "pattern_id": v.pattern,
            "missing": [p.as_pair() for p in sorted(v.missing)],
            "present": [p.as_pair() for p in sorted(v.present)],
            "annotation": None,
        }


@dataclass
class GroupResult:
    key: str
    scripts: int
    min_support: int
    patterns: list[Pattern]


@dataclass
class AnomalyReport:
    mode: str
    config: MinerConfig
    projects: int
    skipped: list[SkipRecord]
    scripts: int
    groups: list[GroupResult]
    violations: list[Violation]
    anomalies: list[Anomaly]
    models: dict[ScriptId, ScriptModel] = field(default_factory=dict, repr=False)

    @property
    def violations_found(self) -> int:
        return len(self.violations)

    def group(self, key: str) -> GroupResult:
        return next(g for g in self.groups if g.key == key)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "config": self.config.echo(),
            "corpus": {
                "projects": self.projects,
                "skipped": [{"file": s.file, "reason": s.reason} for s in self.skipped],
                "scripts": self.scripts,
            },
            "groups": [{"key": g.key, "scripts": g.scripts, "patterns": len(g.patterns)} for g in self.groups],
            "violations_found": self.violations_found,
            "anomalies": [a.to_dict() for a in self.anomalies],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def pattern_records(self) -> list[dict]:
        out = []
        for g in self.groups:
            for p in g.patterns:
                out.append({
                    "group": g.key,
                    "pattern_id": p.pattern_id,
                    "properties": [q.as_pair() for q in sorted(p.properties)],
                    "support": p.support,
                    "supporters": [list(s) for s in sorted(p.supporters)],
                })
        return out

    def patterns_json(self) -> str:
        return json.dumps(self.pattern_records(), indent=2, ensure_ascii=False) + "\n"


def group_key(actor: str, is_stage: bool, mode: str) -> str:
    if mode == "AA":
        return ALL_SCRIPTS
    return STAGE_KEY if is_stage else normalize_actor_name(actor)


def group_scripts(entries: Iterable[tuple[ScriptId, str, bool, frozenset[TemporalProperty]]],
                  mode: str) -> list[ScriptGroup]:
    """Partition scripts: one pool in AA mode, one group per actor name in AS mode."""
    groups: dict[str, list] = defaultdict(list)
    for script_id, actor, is_stage, props in entries:
        groups[group_key(actor, is_stage, mode)].append((script_id, frozenset(props)))
    if mode == "AA" and not groups:
        groups[ALL_SCRIPTS] = []
    return [ScriptGroup(key, groups[key]) for key in sorted(groups)]


def find_violations(group: ScriptGroup, patterns: list[Pattern], config: MinerConfig) -> list[Violation]:
    """Near-miss violations of ``patterns`` within ``group``.

    A non-supporting script violates a pattern when it lacks between 1 and
    ``config.max_missing`` of its properties but still has at least one.
    Confidence is ``support / (support + same_way_count)`` where the second
    term counts the group's scripts lacking exactly the same properties.
    """
    found: dict[tuple[ScriptId, frozenset], Violation] = {}
    for pattern in patterns:
        by_missing: dict[frozenset, list[ScriptId]] = defaultdict(list)
        for script_id, props in group.scripts:
            if script_id in pattern.supporters:
                continue
            missing = pattern.properties - props
            if not missing or len(missing) > config.max_missing:
                continue
            if len(pattern.properties) - len(missing) < 1:
                continue
            by_missing[frozenset(missing)].append(script_id)
        for missing, violators in by_missing.items():
            same_way = frozenset(violators)
            confidence = pattern.support / (pattern.support + len(same_way))
            for script_id in violators:
                v = Violation(
                    script=script_id,
                    pattern=pattern.pattern_id,
                    missing=missing,
                    same_way_count=len(same_way),
                    confidence=confidence,
                    support=pattern.support,
                    present=pattern.properties - missing,
                    same_way=same_way,
                    group=group.group_key,
                )
                key = (script_id, missing)
                kept = found.get(key)
                if kept is None or (-v.confidence, v.pattern) < (-kept.confidence, kept.pattern):
                    found[key] = v
    return sorted(found.values(), key=Violation.rank_key)


def analyze(corpus: Corpus, config: MinerConfig) -> AnomalyReport:
    """Run the four phases (models, properties, patterns, violations) on a loaded corpus."""
    entries = []
    models = {}
    dead = {}
    for project in corpus:
        for script in extract_scripts(project):
            model = build_model(script)
            props = extract_properties(model, adjacent_only=config.adjacent_only,
                                       self_pairs=not config.no_self_pairs)
            models[script.script_id] = model
            dead[script.script_id] = script.dead_code
            entries.append((script.script_id, script.script_id.actor, script.actor_is_stage, props))
    if not entries:
        raise NoScripts("corpus contains no scripts")

    groups = []
    violations = []
    for group in group_scripts(entries, config.mode):
        patterns = mine_patterns(PropertyDB(group.scripts), config)
        groups.append(GroupResult(group.group_key, len(group.scripts),
                                  config.support_for(len(group.scripts)), patterns))
        violations.extend(find_violations(group, patterns, config))
    violations.sort(key=Violation.rank_key)

    reported = [v for v in violations if v.confidence >= config.min_confidence][:config.top_n]
    anomalies = [Anomaly(rank, v, dead[v.script]) for rank, v in enumerate(reported, start=1)]
    return AnomalyReport(
        mode=config.mode,
        config=config,
        projects=len(corpus),
        skipped=list(corpus.skipped),
        scripts=len(entries),
        groups=groups,
        violations=violations,
        anomalies=anomalies,
        models=models,
    )


def detect(corpus_dir: str | Path, config: MinerConfig | None = None, recursive: bool = False) -> AnomalyReport:
    config = config or MinerConfig()
    return analyze(load_corpus(corpus_dir, recursive=recursive), config)


def anomaly_keys(report: AnomalyReport) -> set[tuple[ScriptId, frozenset]]:
    return {(a.script, a.missing) for a in report.anomalies}


@dataclass
class ModeComparison:
    aa: AnomalyReport
    as_: AnomalyReport

    @property
    def overlap(self) -> list[tuple[ScriptId, frozenset]]:
        shared = anomaly_keys(self.aa) & anomaly_keys(self.as_)
        return sorted(shared, key=lambda k: (k[0], sorted(k[1])))

    def to_dict(self) -> dict:
        return {
            "mode": "compare",
            "aa": self.aa.to_dict(),
            "as": self.as_.to_dict(),
            "overlap": [
                {
                    "project": sid.project,
                    "actor": sid.actor,
                    "script_index": sid.index,
                    "missing": [p.as_pair() for p in sorted(missing)],
                }
                for sid, missing in self.overlap
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


def compare_modes(corpus_dir: str | Path, config: MinerConfig | None = None,
                  recursive: bool = False) -> ModeComparison:
    """Run both AA and AS detection on one corpus load."""
    config = config or MinerConfig()
    corpus = load_corpus(corpus_dir, recursive=recursive)
    return ModeComparison(
        aa=analyze(corpus, replace(config, mode="AA")),
        as_=analyze(corpus, replace(config, mode="AS")),
    )
