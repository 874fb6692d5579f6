"""Run manifest: which stages ran, with what inputs, producing what.

One JSON file at the workdir root. Every stage records the content digest
and record count of each file it wrote, so a finished run can be audited
and a rerun can prove it reproduced the same bytes.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

MANIFEST_NAME = "manifest.json"


def file_digest(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _count_records(path: Path) -> int | None:
    if path.suffix != ".jsonl":
        return None
    with open(path, encoding="utf-8") as fh:
        return sum(1 for line in fh if line.strip())


class RunManifest:
    def __init__(self, workdir: str | Path, seed: int, config_digest: str):
        self.workdir = Path(workdir)
        self.data = {
            "seed": seed,
            "config_digest": config_digest,
            "stages": {},
        }

    @property
    def path(self) -> Path:
        return self.workdir / MANIFEST_NAME

    @classmethod
    def load_or_create(cls, workdir: str | Path, seed: int,
                       config_digest: str) -> "RunManifest":
        manifest = cls(workdir, seed, config_digest)
        if manifest.path.exists():
            with open(manifest.path, encoding="utf-8") as fh:
                existing = json.load(fh)
            if existing.get("config_digest") != config_digest:
                # different config: stale stage records would lie
                existing["stages"] = {}
                existing["config_digest"] = config_digest
                existing["seed"] = seed
            manifest.data = existing
        return manifest

    def record_stage(self, name: str, outputs: list[str | Path],
                     extra: dict | None = None) -> None:
        entry: dict = {
            "completed_at": datetime.now(timezone.utc).isoformat(),
            "outputs": {},
        }
        for output in outputs:
            path = Path(output)
            rel = str(path.relative_to(self.workdir))
            info = {"sha256": file_digest(path)}
            count = _count_records(path)
            if count is not None:
                info["records"] = count
            entry["outputs"][rel] = info
        if extra:
            entry["extra"] = extra
        self.data["stages"][name] = entry
        self.save()

    def stage(self, name: str) -> dict | None:
        return self.data["stages"].get(name)

    def save(self) -> None:
        self.workdir.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)
            fh.write("\n")
        tmp.replace(self.path)
