"""Anomaly detection over corpora of Scratch 3 student solutions."""

from .anomaly import AnomalyReport, compare_modes, detect
from .errors import (
    AnomalyError,
    EmptyCorpus,
    MalformedProject,
    NoScripts,
    UnreadableFile,
)
from .ingest import extract_scripts, load_corpus, load_project
from .miner import MinerConfig, PropertyDB, mine_patterns
from .model import BlockLabel, TemporalProperty, build_model, extract_properties

__all__ = [
    "AnomalyError",
    "AnomalyReport",
    "BlockLabel",
    "EmptyCorpus",
    "MalformedProject",
    "MinerConfig",
    "NoScripts",
    "PropertyDB",
    "TemporalProperty",
    "UnreadableFile",
    "build_model",
    "compare_modes",
    "detect",
    "extract_properties",
    "extract_scripts",
    "load_corpus",
    "load_project",
    "mine_patterns",
]
