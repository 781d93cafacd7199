"""Bundled example models (``carsale``, ``watch``, ``walking``, ``hammer``, ``fig13``)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

_SUFFIXES = (".tm", ".bpmn")


def path(name: str) -> Path:
    base = Path(str(resources.files(__name__)))
    for suffix in ("",) + _SUFFIXES:
        candidate = base / f"{name}{suffix}"
        if candidate.is_file():
            return candidate
    raise FileNotFoundError(f"no bundled fixture named {name!r}")


def read_text(name: str) -> str:
    return path(name).read_text(encoding="utf-8")


def load(name: str):
    """Parse a bundled ``.tm`` fixture into ``(StaticModel, DynamicDecls)``."""
    from ..dsl import SourceFile, parse

    p = path(name)
    return parse(SourceFile(p.read_text(encoding="utf-8"), p.name))
