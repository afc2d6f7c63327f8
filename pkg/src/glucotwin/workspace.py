"""File-backed workspace for uploaded datasets and training runs.

Every dataset and run lives in its own directory with a JSON manifest.
Manifests are written atomically (temp file, then rename) so a crashed
process never leaves a half-written index entry behind.
"""
from __future__ import annotations

import hashlib
import json
import os
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path


def _atomic_write(path: Path, data: str | bytes):
    mode = "wb" if isinstance(data, bytes) else "w"
    tmp = path.with_name(path.name + f".tmp-{uuid.uuid4().hex[:8]}")
    with open(tmp, mode) as f:
        f.write(data)
        f.flush()
        os.fsync(f.fileno())
    os.replace(tmp, path)


@dataclass
class StoredDataset:
    dataset_id: str
    kind: str
    path: Path
    manifest: dict


class Workspace:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "datasets").mkdir(parents=True, exist_ok=True)
        (self.root / "runs").mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    # -- datasets ---------------------------------------------------------
    def store_dataset(self, kind: str, items: list[tuple[str, str]]) -> StoredDataset:
        """items are (filename, text content) pairs already validated by a parser."""
        dataset_id = uuid.uuid4().hex[:12]
        d = self.root / "datasets" / dataset_id
        d.mkdir(parents=True)
        digest = hashlib.sha256()
        names = []
        for name, content in items:
            safe = Path(name).name or "upload"
            (d / safe).write_text(content)
            digest.update(content.encode())
            names.append(safe)
        manifest = {
            "dataset_id": dataset_id,
            "kind": kind,
            "files": names,
            "content_sha256": digest.hexdigest(),
        }
        _atomic_write(d / "manifest.json", json.dumps(manifest, indent=2))
        return StoredDataset(dataset_id, kind, d, manifest)

    def get_dataset(self, dataset_id: str) -> StoredDataset | None:
        d = self.root / "datasets" / dataset_id
        m = d / "manifest.json"
        if not m.exists():
            return None
        manifest = json.loads(m.read_text())
        return StoredDataset(dataset_id, manifest["kind"], d, manifest)

    def dataset_file_texts(self, ds: StoredDataset) -> list[tuple[str, str]]:
        return [(name, (ds.path / name).read_text()) for name in ds.manifest["files"]]

    def write_dataset_artifact(self, ds: StoredDataset, name: str, data: str | bytes):
        _atomic_write(ds.path / name, data)

    def read_dataset_artifact(self, ds: StoredDataset, name: str) -> bytes | None:
        p = ds.path / name
        return p.read_bytes() if p.exists() else None

    # -- runs -------------------------------------------------------------
    def new_run(self, kind: str, inputs: dict) -> tuple[str, Path]:
        with self._lock:
            run_id = uuid.uuid4().hex[:12]
            d = self.root / "runs" / run_id
            d.mkdir(parents=True)
            manifest = {"run_id": run_id, "kind": kind, "inputs": inputs, "status": "running",
                        "outputs": []}
            _atomic_write(d / "manifest.json", json.dumps(manifest, indent=2))
        return run_id, d

    def finish_run(self, run_id: str, outputs: list[str], status: str = "finished"):
        d = self.root / "runs" / run_id
        manifest = json.loads((d / "manifest.json").read_text())
        manifest["status"] = status
        manifest["outputs"] = outputs
        _atomic_write(d / "manifest.json", json.dumps(manifest, indent=2))

    def get_run(self, run_id: str) -> dict | None:
        m = self.root / "runs" / run_id / "manifest.json"
        if not m.exists():
            return None
        return json.loads(m.read_text())

    def run_artifact(self, run_id: str, name: str) -> bytes | None:
        p = self.root / "runs" / run_id / name
        return p.read_bytes() if p.exists() else None

    def write_run_artifact(self, run_id: str, name: str, data: str | bytes):
        _atomic_write(self.root / "runs" / run_id / name, data)
