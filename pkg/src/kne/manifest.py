"""Run manifests: flat key=value files recording every resolved setting.

Each CLI output file gets a sibling ``<output>.manifest``.  A manifest from
a deterministic run carries everything needed to reproduce the output
byte-for-byte (``kne train --from-manifest``).
"""

from __future__ import annotations

import hashlib
import os
import tempfile

from .errors import DataError


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def atomic_write_text(path, content: str) -> None:
    """Write via a temp file + rename so readers never see a partial file."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def manifest_path(output_path) -> str:
    return os.fspath(output_path) + ".manifest"


def write_manifest(output_path, entries: dict) -> str:
    lines = []
    for key in sorted(entries):
        value = entries[key]
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key}={value}")
    path = manifest_path(output_path)
    atomic_write_text(path, "\n".join(lines) + "\n")
    return path


def read_manifest(path) -> dict[str, str]:
    entries: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise DataError(f"{path}:{lineno}: expected key=value")
                key, _, value = line.partition("=")
                entries[key] = value
    except OSError as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    return entries
