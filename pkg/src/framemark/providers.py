"""Embedding providers: precomputed files, HTTP endpoints, and a disk cache.

Embeddings are addressed by content: images by the SHA-256 of their bytes
("sha256:<hex>"), texts by the literal string ("text:<text>"). A cached
sweep can therefore be replayed offline and is insensitive to file paths.
"""

from __future__ import annotations

import base64
import hashlib
import json
import re
from pathlib import Path
from typing import Optional, Protocol, runtime_checkable

import numpy as np

from .io_utils import atomic_write_text, read_jsonl, require_fields
from .model_client import RetryPolicy, TransportError, post_json_with_retry


class ProviderError(Exception):
    """An embedding could not be produced (missing key, endpoint failure)."""


def image_key(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def text_key(text: str) -> str:
    return "text:" + text


def as_unit_vector(values) -> np.ndarray:
    vec = np.asarray(values, dtype=np.float64).reshape(-1)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0 or not np.isfinite(norm):
        raise ProviderError("embedding has zero or non-finite norm")
    return vec / norm


@runtime_checkable
class EmbeddingProvider(Protocol):
    provider_id: str

    def embed_image(self, data: bytes) -> np.ndarray: ...

    def embed_text(self, text: str) -> np.ndarray: ...


class FileEmbeddingProvider:
    """Precomputed embeddings from a JSON Lines file of {key, dim, values}."""

    def __init__(self, path: Path | str, provider_id: Optional[str] = None):
        path = Path(path)
        self.provider_id = provider_id or f"file:{path.name}"
        self._table: dict[str, np.ndarray] = {}
        for lineno, rec in read_jsonl(path):
            require_fields(rec, ("key", "dim", "values"), path, lineno)
            vec = np.asarray(rec["values"], dtype=np.float64)
            if vec.size != int(rec["dim"]):
                raise ProviderError(f"{path}:{lineno}: dim {rec['dim']} != len(values) {vec.size}")
            self._table[str(rec["key"])] = vec

    def _lookup(self, key: str) -> np.ndarray:
        try:
            return self._table[key]
        except KeyError:
            raise ProviderError(f"no precomputed embedding for {key!r}") from None

    def embed_image(self, data: bytes) -> np.ndarray:
        return self._lookup(image_key(data))

    def embed_text(self, text: str) -> np.ndarray:
        return self._lookup(text_key(text))


def write_embedding_file(path: Path | str, rows: dict[str, np.ndarray]) -> None:
    """Persist a {key: vector} mapping in the provider file format."""
    lines = []
    for key in sorted(rows):
        vec = np.asarray(rows[key], dtype=np.float64).reshape(-1)
        lines.append(
            json.dumps({"key": key, "dim": int(vec.size), "values": vec.tolist()}, sort_keys=True)
        )
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


class HttpEmbeddingProvider:
    """Remote encoder: POST {kind, data_b64|text} -> {dim, values}."""

    def __init__(
        self,
        url: str,
        provider_id: str,
        timeout_s: float = 60.0,
        retry: RetryPolicy = RetryPolicy(),
        headers: Optional[dict] = None,
    ):
        self.url = url
        self.provider_id = provider_id
        self.timeout_s = timeout_s
        self.retry = retry
        self.headers = headers or {}

    def _request(self, payload: dict) -> np.ndarray:
        try:
            body, _ = post_json_with_retry(
                self.url, payload, headers=self.headers, timeout_s=self.timeout_s, retry=self.retry
            )
        except TransportError as exc:
            raise ProviderError(f"embedding endpoint failed: {exc}") from exc
        if "values" not in body:
            raise ProviderError(f"embedding endpoint returned no values: {body!r}")
        return np.asarray(body["values"], dtype=np.float64)

    def embed_image(self, data: bytes) -> np.ndarray:
        return self._request(
            {"kind": "image", "data_b64": base64.b64encode(data).decode("ascii")}
        )

    def embed_text(self, text: str) -> np.ndarray:
        return self._request({"kind": "text", "text": text})


def _safe_dir_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", name) or "provider"


class CachingProvider:
    """Disk cache around any provider, keyed on (content key, provider id)."""

    def __init__(self, inner: EmbeddingProvider, cache_dir: Path | str):
        self.inner = inner
        self.provider_id = inner.provider_id
        self.cache_dir = Path(cache_dir) / _safe_dir_name(inner.provider_id)
        self.cache_dir.mkdir(parents=True, exist_ok=True)

    def _path(self, content_key: str) -> Path:
        digest = hashlib.sha256(content_key.encode("utf-8")).hexdigest()
        return self.cache_dir / digest[:2] / f"{digest}.json"

    def _get_or_compute(self, content_key: str, compute) -> np.ndarray:
        path = self._path(content_key)
        if path.is_file():
            try:
                rec = json.loads(path.read_text(encoding="utf-8"))
                return np.asarray(rec["values"], dtype=np.float64)
            except (ValueError, KeyError):
                pass  # fall through and recompute a corrupt entry
        vec = compute()
        rec = {"key": content_key, "dim": int(vec.size), "values": vec.tolist()}
        atomic_write_text(path, json.dumps(rec, sort_keys=True))
        return vec

    def embed_image(self, data: bytes) -> np.ndarray:
        return self._get_or_compute(image_key(data), lambda: self.inner.embed_image(data))

    def embed_text(self, text: str) -> np.ndarray:
        return self._get_or_compute(text_key(text), lambda: self.inner.embed_text(text))
