"""Run manifest written next to the outputs of every command."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Union


def library_version() -> str:
    try:
        return version("qbm.lab")
    except PackageNotFoundError:
        return "0+unknown"


def now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """Command, resolved parameters and outputs of one run.

    Numeric outputs of two runs with equal `command`, `parameters` and `seed` are
    identical; only the timestamps differ.
    """

    command: str
    parameters: dict
    seed: int | None = None
    started: str = field(default_factory=now)
    finished: str | None = None
    outputs: list[str] = field(default_factory=list)
    version: str = field(default_factory=library_version)

    def finish(self, outputs: list[Union[Path, str]]) -> RunManifest:
        self.finished = now()
        self.outputs = sorted(Path(p).as_posix() for p in outputs)
        return self

    def write(self, out_dir: Union[Path, str]) -> Path:
        fp = Path(out_dir) / "manifest.json"
        fp.parent.mkdir(parents=True, exist_ok=True)
        with open(fp, "w", encoding="utf-8") as f:
            json.dump(asdict(self), f, indent=2, default=str)
        return fp
