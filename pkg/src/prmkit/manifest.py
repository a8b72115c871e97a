"""Run manifests and canonical JSON output.

Every CLI run writes a manifest next to its artifacts: the command, the
effective config, content hashes of all inputs and outputs, and library
versions. Nothing time- or path-entropy-dependent goes in, so a rerun with
the same inputs produces a byte-identical manifest.
"""

from __future__ import annotations

import hashlib
import json
import platform
from pathlib import Path

import numpy as np

from . import __version__


def canonical_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(canonical_json(obj), encoding="utf-8")


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(
    out_dir: str | Path,
    command: str,
    config: dict,
    inputs: list[str | Path],
    outputs: list[str | Path],
) -> Path:
    out_dir = Path(out_dir)
    manifest = {
        "command": command,
        "config": config,
        "inputs": {str(p): sha256_file(p) for p in sorted(str(x) for x in inputs)},
        "outputs": {str(p): sha256_file(p) for p in sorted(str(x) for x in outputs)},
        "versions": {
            "prmkit": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
    }
    path = out_dir / f"manifest-{command}.json"
    write_json(path, manifest)
    return path


class OutputTracker:
    """Collects written artifacts; removes them if the run fails midway."""

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.paths: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.out_dir / name
        self.paths.append(p)
        return p

    def discard_partial(self) -> None:
        for p in self.paths:
            try:
                p.unlink(missing_ok=True)
            except OSError:  # pragma: no cover - best effort cleanup
                pass
