"""On-disk skill library: DMP models plus the motion sequences that replay them.

Layout inside the library directory:

    <skill>.dmp.json     one fitted model per trajectory segment
    <skill>.skill.json   the stored motion sequence, the motions it replaced,
                         and which models it references
    library.json         index: [{name, file, created_at, version}, ...]
    archive/             prior versions, moved here before replacement

Commits are append-only: existing files are never edited in place; replacing
a skill archives the old version and bumps the version number.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .dmp import DmpModel, load_model, save_model
from .plan import MotionFunction


class LibraryError(Exception):
    pass


class DuplicateSkillError(LibraryError):
    def __init__(self, name: str):
        super().__init__(
            f"skill {name!r} already exists; pass replace=True to archive it and commit anew"
        )
        self.name = name


class UnknownSkillError(LibraryError, KeyError):
    def __init__(self, name: str):
        super().__init__(f"no skill or model named {name!r} in the library")
        self.name = name


@dataclass
class SkillRecord:
    name: str
    sequence: tuple[MotionFunction, ...]
    replaced_motions: tuple[MotionFunction, ...]
    model_names: tuple[str, ...]
    created_from: str = ""
    created_at: str = ""
    version: int = 1

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "sequence": [{"kind": m.kind, "arg": m.arg} for m in self.sequence],
            "replaced_motions": [{"kind": m.kind, "arg": m.arg} for m in self.replaced_motions],
            "models": list(self.model_names),
            "created_from": self.created_from,
            "created_at": self.created_at,
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SkillRecord":
        mf = lambda d: MotionFunction(kind=d["kind"], arg=d["arg"])
        return cls(
            name=data["name"],
            sequence=tuple(mf(d) for d in data["sequence"]),
            replaced_motions=tuple(mf(d) for d in data.get("replaced_motions", [])),
            model_names=tuple(data.get("models", [])),
            created_from=data.get("created_from", ""),
            created_at=data.get("created_at", ""),
            version=data.get("version", 1),
        )


class SkillLibrary:
    """Reads and appends to one library directory."""

    def __init__(self, directory: Path | str):
        self.directory = Path(directory)
        self._model_cache: dict[str, DmpModel] = {}

    @property
    def index_path(self) -> Path:
        return self.directory / "library.json"

    def _index(self) -> list[dict]:
        if not self.index_path.exists():
            return []
        return json.loads(self.index_path.read_text(encoding="utf-8"))

    def names(self) -> list[str]:
        return [entry["name"] for entry in self._index()]

    def has(self, name: str) -> bool:
        return name in self.names()

    def record(self, name: str) -> SkillRecord:
        for entry in self._index():
            if entry["name"] == name:
                path = self.directory / entry["file"]
                return SkillRecord.from_dict(json.loads(path.read_text(encoding="utf-8")))
        raise UnknownSkillError(name)

    def sequence(self, name: str) -> tuple[MotionFunction, ...]:
        return self.record(name).sequence

    def model(self, model_name: str) -> DmpModel:
        if model_name not in self._model_cache:
            path = self.directory / f"{model_name}.dmp.json"
            if not path.exists():
                raise UnknownSkillError(model_name)
            _, loaded = load_model(path)
            self._model_cache[model_name] = loaded
        return self._model_cache[model_name]

    def has_model(self, model_name: str) -> bool:
        return (self.directory / f"{model_name}.dmp.json").exists()

    def commit(
        self,
        name: str,
        models: dict[str, DmpModel],
        sequence: tuple[MotionFunction, ...],
        replaced_motions: tuple[MotionFunction, ...] = (),
        created_from: str = "",
        replace: bool = False,
    ) -> SkillRecord:
        """Persist a skill: its models, its sequence record, and the index entry.

        A name collision without replace=True is refused; with it, the old
        files move to archive/<name>.v<k>.* first so history is preserved.
        """
        self.directory.mkdir(parents=True, exist_ok=True)
        index = self._index()
        existing = next((e for e in index if e["name"] == name), None)
        version = 1
        if existing is not None:
            if not replace:
                raise DuplicateSkillError(name)
            version = existing.get("version", 1) + 1
            self._archive(name, existing)
            index = [e for e in index if e["name"] != name]

        created_at = datetime.now(timezone.utc).isoformat()
        for model_name, model in models.items():
            save_model(model_name, model, self.directory)
            self._model_cache.pop(model_name, None)
        record = SkillRecord(
            name=name,
            sequence=tuple(sequence),
            replaced_motions=tuple(replaced_motions),
            model_names=tuple(models.keys()),
            created_from=created_from,
            created_at=created_at,
            version=version,
        )
        skill_file = f"{name}.skill.json"
        (self.directory / skill_file).write_text(
            json.dumps(record.to_dict(), indent=2), encoding="utf-8"
        )
        index.append({
            "name": name, "file": skill_file, "created_at": created_at, "version": version,
        })
        self.index_path.write_text(json.dumps(index, indent=2), encoding="utf-8")
        return record

    def _archive(self, name: str, entry: dict) -> None:
        archive = self.directory / "archive"
        archive.mkdir(exist_ok=True)
        old_version = entry.get("version", 1)
        old_record = self.record(name)
        for model_name in old_record.model_names:
            src = self.directory / f"{model_name}.dmp.json"
            if src.exists():
                shutil.move(str(src), archive / f"{model_name}.v{old_version}.dmp.json")
                self._model_cache.pop(model_name, None)
        src = self.directory / entry["file"]
        if src.exists():
            shutil.move(str(src), archive / f"{name}.v{old_version}.skill.json")


class InMemorySkillLibrary(SkillLibrary):
    """Dictionary-backed library for tests and forkable sessions."""

    def __init__(self):
        super().__init__(directory="<memory>")
        self._records: dict[str, SkillRecord] = {}
        self._models: dict[str, DmpModel] = {}
        self._archived: list[str] = []

    def _index(self) -> list[dict]:
        return [
            {"name": r.name, "file": f"{r.name}.skill.json",
             "created_at": r.created_at, "version": r.version}
            for r in self._records.values()
        ]

    def record(self, name: str) -> SkillRecord:
        if name not in self._records:
            raise UnknownSkillError(name)
        return self._records[name]

    def model(self, model_name: str) -> DmpModel:
        if model_name not in self._models:
            raise UnknownSkillError(model_name)
        return self._models[model_name]

    def has_model(self, model_name: str) -> bool:
        return model_name in self._models

    def commit(self, name, models, sequence, replaced_motions=(),
               created_from="", replace=False) -> SkillRecord:
        version = 1
        if name in self._records:
            if not replace:
                raise DuplicateSkillError(name)
            version = self._records[name].version + 1
            self._archived.append(f"{name}.v{self._records[name].version}")
        record = SkillRecord(
            name=name,
            sequence=tuple(sequence),
            replaced_motions=tuple(replaced_motions),
            model_names=tuple(models.keys()),
            created_from=created_from,
            created_at=datetime.now(timezone.utc).isoformat(),
            version=version,
        )
        self._models.update(models)
        self._records[name] = record
        return record
