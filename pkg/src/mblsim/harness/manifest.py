"""Run manifests: config snapshot, checksums, wall-clock metadata."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

MANIFEST_NAME = "manifest.txt"


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    experiment: str
    package_version: str
    created_utc: str
    elapsed_seconds: float
    workers: int
    files: dict[str, str] = field(default_factory=dict)

    def add_files(self, run_dir: Path, names) -> None:
        for name in names:
            self.files[name] = sha256_of(run_dir / name)

    def write(self, run_dir: Path) -> Path:
        lines = [
            f"experiment: {self.experiment}",
            f"package_version: {self.package_version}",
            f"created_utc: {self.created_utc}",
            f"elapsed_seconds: {self.elapsed_seconds:.3f}",
            f"workers: {self.workers}",
            "files:",
        ]
        lines += [
            f"  {name} sha256={digest}" for name, digest in sorted(self.files.items())
        ]
        path = run_dir / MANIFEST_NAME
        path.write_text("\n".join(lines) + "\n")
        return path


def load_manifest(run_dir: Path) -> RunManifest:
    path = Path(run_dir) / MANIFEST_NAME
    if not path.is_file():
        raise FileNotFoundError(f"no {MANIFEST_NAME} in {run_dir}")
    header: dict[str, str] = {}
    files: dict[str, str] = {}
    in_files = False
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        if line.strip() == "files:":
            in_files = True
            continue
        if in_files:
            name, _, digest = line.strip().partition(" sha256=")
            files[name] = digest
        else:
            key, _, value = line.partition(": ")
            header[key] = value
    return RunManifest(
        experiment=header.get("experiment", ""),
        package_version=header.get("package_version", ""),
        created_utc=header.get("created_utc", ""),
        elapsed_seconds=float(header.get("elapsed_seconds", "0")),
        workers=int(header.get("workers", "1")),
        files=files,
    )


def verify_run(run_dir: Path) -> list[tuple[str, bool]]:
    """Re-checksum every file listed in the manifest."""
    run_dir = Path(run_dir)
    manifest = load_manifest(run_dir)
    results = []
    for name, digest in sorted(manifest.files.items()):
        path = run_dir / name
        ok = path.is_file() and sha256_of(path) == digest
        results.append((name, ok))
    return results
