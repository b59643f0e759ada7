"""
Run manifests and the CSV / JSON files a run leaves on disk.
"""

import csv
import hashlib
import json
import math
from datetime import datetime
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field

import config as conf

MANIFEST_FILE = "manifest.json"
DATA_FILE = "data.csv"
SUMMARY_FILE = "summary.json"


class RunManifest(BaseModel):
    """Provenance of one run: enough to repeat it bit for bit."""

    command: str
    config: dict[str, Any]
    config_hash: str = Field(min_length=64, max_length=64)
    master_seed: int = Field(ge=0, lt=2**64)
    tool_version: str = conf.VERSION
    started: datetime
    finished: datetime | None = None
    outputs: list[str] = []


def jsonable(value: Any) -> Any:
    """Plain JSON types, with non-finite floats spelled as strings."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, BaseModel):
        return jsonable(value.model_dump(mode="json"))
    if hasattr(value, "item") and hasattr(value, "dtype"):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def canonical_json(value: Any) -> str:
    return json.dumps(jsonable(value), sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def config_hash(command: str, config: dict[str, Any], master_seed: int) -> str:
    """sha256 over the command, the fully resolved configuration, the seed and the tool version."""
    payload = {"command": command, "config": config, "master_seed": master_seed, "tool_version": conf.VERSION}
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def _cell(value: Any) -> Any:
    value = jsonable(value)
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def write_csv(path: str | Path, headers: list[str], rows: list[list]) -> Path:
    """Writes an RFC 4180 table: header row first, CRLF line endings, floats in shortest round-trip form."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\r\n")
        writer.writerow(headers)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def write_json(path: str | Path, data: Any) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(jsonable(data), f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    return path


def write_manifest(directory: str | Path, manifest: RunManifest) -> Path:
    path = Path(directory) / MANIFEST_FILE
    path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def load_manifest(path: str | Path) -> RunManifest:
    """
    Raises:
        FileNotFoundError: If the file does not exist.
        pydantic.ValidationError: If the file is not a manifest.
    """
    return RunManifest.model_validate_json(Path(path).read_text(encoding="utf-8"))
