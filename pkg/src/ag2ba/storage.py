"""Canonical JSON files, the build cache and run manifests."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from pathlib import Path
from typing import Any, Callable

SCHEMA_VERSION = 1
CACHE_ENV = "AG2BA_CACHE_DIR"

_SUFFIX = {"ba": ".ba.json", "operator": ".op.json", "report": ".report.json"}


class SchemaMismatch(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


def canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def envelope(kind: str, payload: dict) -> dict:
    return {"schemaVersion": SCHEMA_VERSION, "kind": kind, "payload": payload}


def save(obj: Any, path: str | os.PathLike, kind: str | None = None) -> str:
    """Write ``obj.to_json()`` (or a plain dict) inside a versioned envelope; returns the sha256 of the file."""
    kind = kind or _kind_of(obj)
    payload = obj if isinstance(obj, dict) else obj.to_json()
    text = canonical_dumps(envelope(kind, payload)) + "\n"
    atomic_write(path, text)
    return hashlib.sha256(text.encode()).hexdigest()


def _kind_of(obj: Any) -> str:
    from .ba import BAFunction
    from .operators import DifferenceOperator

    if isinstance(obj, BAFunction):
        return "ba"
    if isinstance(obj, DifferenceOperator):
        return "operator"
    return "report"


def read_envelope(path: str | os.PathLike) -> dict:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    if not isinstance(data, dict) or "schemaVersion" not in data:
        raise ParseError(str(path), "missing schemaVersion")
    if data["schemaVersion"] != SCHEMA_VERSION:
        raise SchemaMismatch(f"{path}: schema version {data['schemaVersion']}, expected {SCHEMA_VERSION}")
    for key in ("kind", "payload"):
        if key not in data:
            raise ParseError(str(path), f"missing {key}")
    return data


def load(path: str | os.PathLike, kind: str | None = None) -> Any:
    data = read_envelope(path)
    if kind is not None and data["kind"] != kind:
        raise SchemaMismatch(f"{path}: holds a {data['kind']!r}, expected {kind!r}")
    payload = data["payload"]
    try:
        if data["kind"] == "ba":
            from .ba import BAFunction

            return BAFunction.from_json(payload)
        if data["kind"] == "operator":
            from .operators import DifferenceOperator

            return DifferenceOperator.from_json(payload)
        return payload
    except (KeyError, ValueError, TypeError, IndexError) as exc:
        raise ParseError(f"{path}:payload", f"{type(exc).__name__}: {exc}") from None


# ----------------------------------------------------------------- cache


def code_version() -> str:
    """Hash of the package sources; cache entries from other versions are ignored."""
    h = hashlib.sha256()
    root = Path(__file__).parent
    for p in sorted(root.glob("*.py")):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()[:16]


def cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    return Path(env) if env else Path.home() / ".cache" / "ag2ba"


def ba_cache_path(m: int, via: str) -> Path:
    return cache_dir() / f"m{m}-{via.lower()}-{code_version()}{_SUFFIX['ba']}"


def cached_ba(m: int, via: str, build: Callable[[], Any], use_cache: bool = True) -> tuple[Any, bool]:
    """(BAFunction, cache hit)."""
    path = ba_cache_path(m, via)
    if use_cache and path.exists():
        try:
            return load(path, "ba"), True
        except (ParseError, SchemaMismatch):
            pass
    psi = build()
    if use_cache:
        save(psi, path, "ba")
    return psi, False


# ------------------------------------------------------------- manifests


class RunManifest:
    def __init__(self, command: str, parameters: dict):
        self.command = command
        self.parameters = parameters
        self.timings: dict[str, float] = {}
        self.cache_hits: list[str] = []
        self.artifacts: dict[str, str] = {}
        self._t0 = time.perf_counter()

    def timed(self, label: str, fn: Callable[[], Any]) -> Any:
        t = time.perf_counter()
        out = fn()
        self.timings[label] = round(time.perf_counter() - t, 3)
        return out

    def to_json(self, exit_code: int) -> dict:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "codeVersion": code_version(),
            "timings": {**self.timings, "total": round(time.perf_counter() - self._t0, 3)},
            "cacheHits": self.cache_hits,
            "artifactHashes": self.artifacts,
            "exitCode": exit_code,
        }

    def append(self, exit_code: int, path: str | os.PathLike | None = None) -> None:
        path = Path(path) if path else cache_dir() / "manifests.jsonl"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a") as fh:
            fh.write(canonical_dumps(self.to_json(exit_code)) + "\n")
