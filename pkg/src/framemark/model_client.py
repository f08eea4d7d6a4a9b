"""Batch inference client for chat-completions-style vision endpoints.

Each job sends the annotated frames (one base64 image part per frame, in
order) followed by the instruction text. Requests run under a bounded
thread pool, transient failures retry with exponential backoff, and every
successful response is persisted to a content-addressed cache before it is
returned, so a warm-cache replay needs no network at all.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

import requests

from .dataset_builder import QUESTION_TEMPLATE
from .io_utils import atomic_write_text

logger = logging.getLogger(__name__)

INSTRUCTION_PREFIX = "The red numbers on each frame represent the frame number."

HIGHLIGHT_TEMPLATE = (
    "Find every span of frames relevant to the query and assign each span "
    "a saliency score on a scale from 1 to 5, where 5 is the most relevant. "
    "Answer with one line per span, formatted exactly as 'From x to y, saliency s'. "
    "Query: {query}"
)

DEFAULT_MAX_PAYLOAD_BYTES = 64 * 1024 * 1024


class Task(str, Enum):
    MOMENT = "moment"
    HIGHLIGHT = "highlight"


def build_prompt(task: Task, query: str) -> str:
    """Instruction text: the fixed number-explaining prefix plus the task ask."""
    if not query:
        raise ValueError("query must be nonempty")
    if task is Task.MOMENT:
        body = QUESTION_TEMPLATE.format(query=query)
    else:
        body = HIGHLIGHT_TEMPLATE.format(query=query)
    return f"{INSTRUCTION_PREFIX}\n{body}"


@dataclass(frozen=True)
class DecodingParams:
    temperature: float = 0.0
    max_tokens: int = 256

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.max_tokens < 1:
            raise ValueError(f"max_tokens must be >= 1, got {self.max_tokens}")


@dataclass(frozen=True)
class EndpointConfig:
    url: str
    model_id: str
    auth_env: Optional[str] = None  # name of the env var holding the bearer token
    timeout_s: float = 120.0

    def headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.auth_env:
            token = os.environ.get(self.auth_env, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers


@dataclass(frozen=True)
class InferenceJob:
    id: str
    frames: tuple[Path, ...]
    task: Task
    query: str
    endpoint: EndpointConfig
    decoding: DecodingParams = DecodingParams()

    def __post_init__(self) -> None:
        if not self.frames:
            raise ValueError(f"job {self.id!r} has no frames")


@dataclass
class JobResult:
    id: str
    ok: bool
    text: Optional[str] = None
    error: Optional[str] = None
    attempts: int = 0
    from_cache: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "ok": self.ok,
            "raw_text": self.text,
            "error": self.error,
            "attempts": self.attempts,
            "from_cache": self.from_cache,
        }


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff_base_s: float = 0.5
    backoff_cap_s: float = 8.0

    def delay(self, attempt: int) -> float:
        return min(self.backoff_cap_s, self.backoff_base_s * (2 ** (attempt - 1)))


class TransportError(Exception):
    def __init__(self, message: str, attempts: int, permanent: bool = False):
        super().__init__(message)
        self.attempts = attempts
        self.permanent = permanent


def post_json_with_retry(
    url: str,
    payload: dict,
    *,
    headers: Optional[dict] = None,
    timeout_s: float = 120.0,
    retry: RetryPolicy = RetryPolicy(),
) -> tuple[dict, int]:
    """POST JSON and return (body, attempts); 429/5xx and connection drops retry."""
    attempt = 0
    while True:
        attempt += 1
        err = None
        try:
            resp = requests.post(url, json=payload, headers=headers or {}, timeout=timeout_s)
        except (requests.ConnectionError, requests.Timeout) as exc:
            err = f"connection failure: {exc}"
        else:
            if resp.status_code == 200:
                try:
                    return resp.json(), attempt
                except ValueError as exc:
                    raise TransportError(
                        f"endpoint returned invalid JSON: {exc}", attempt, permanent=True
                    ) from exc
            err = f"HTTP {resp.status_code}: {resp.text[:200]}"
            if resp.status_code != 429 and not 500 <= resp.status_code < 600:
                raise TransportError(err, attempt, permanent=True)
        if attempt >= retry.max_attempts:
            raise TransportError(f"giving up after {attempt} attempts ({err})", attempt)
        delay = retry.delay(attempt)
        logger.debug("retrying %s after %.2fs (%s)", url, delay, err)
        time.sleep(delay)


class ResponseCache:
    """Content-addressed store of raw responses, keyed on request identity."""

    def __init__(self, cache_dir: Path | str):
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.cache_dir / key[:2] / f"{key}.json"

    def get(self, key: str) -> Optional[str]:
        path = self._path(key)
        if not path.is_file():
            return None
        try:
            return json.loads(path.read_text(encoding="utf-8"))["raw_text"]
        except (ValueError, KeyError):
            logger.warning("discarding unreadable cache entry %s", path)
            return None

    def put(self, key: str, raw_text: str, model_id: str) -> None:
        entry = {
            "cache_key": key,
            "raw_text": raw_text,
            "model_id": model_id,
            "timestamp": time.time(),
        }
        atomic_write_text(self._path(key), json.dumps(entry, ensure_ascii=False))


def cache_key(frame_digests: Sequence[str], prompt: str, model_id: str, decoding: DecodingParams) -> str:
    material = json.dumps(
        {
            "frames": list(frame_digests),
            "prompt": prompt,
            "model_id": model_id,
            "temperature": decoding.temperature,
            "max_tokens": decoding.max_tokens,
        },
        sort_keys=True,
    )
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


def _mime_for(path: Path) -> str:
    return "image/jpeg" if path.suffix.lower() in (".jpg", ".jpeg") else "image/png"


def _build_payload(job: InferenceJob, prompt: str, frame_bytes: Sequence[bytes]) -> dict:
    content = []
    for path, data in zip(job.frames, frame_bytes):
        b64 = base64.b64encode(data).decode("ascii")
        content.append(
            {"type": "image_url", "image_url": {"url": f"data:{_mime_for(path)};base64,{b64}"}}
        )
    content.append({"type": "text", "text": prompt})
    return {
        "model": job.endpoint.model_id,
        "messages": [{"role": "user", "content": content}],
        "temperature": job.decoding.temperature,
        "max_tokens": job.decoding.max_tokens,
    }


def _extract_text(body: dict) -> str:
    try:
        text = body["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise TransportError(f"unexpected response shape: {exc}", attempts=1, permanent=True)
    if not isinstance(text, str):
        raise TransportError("response content is not text", attempts=1, permanent=True)
    return text


def run_job(
    job: InferenceJob,
    cache: Optional[ResponseCache] = None,
    retry: RetryPolicy = RetryPolicy(),
    max_payload_bytes: int = DEFAULT_MAX_PAYLOAD_BYTES,
) -> JobResult:
    try:
        frame_bytes = [p.read_bytes() for p in job.frames]
    except OSError as exc:
        return JobResult(job.id, ok=False, error=f"unreadable frame: {exc}")

    prompt = build_prompt(job.task, job.query)
    digests = [hashlib.sha256(b).hexdigest() for b in frame_bytes]
    key = cache_key(digests, prompt, job.endpoint.model_id, job.decoding)

    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return JobResult(job.id, ok=True, text=hit, from_cache=True)

    payload_size = sum(len(b) * 4 // 3 for b in frame_bytes) + len(prompt)
    if payload_size > max_payload_bytes:
        return JobResult(
            job.id,
            ok=False,
            error=(
                f"payload too large: ~{payload_size} bytes over {len(frame_bytes)} frames "
                f"(limit {max_payload_bytes})"
            ),
        )

    payload = _build_payload(job, prompt, frame_bytes)
    try:
        body, attempts = post_json_with_retry(
            job.endpoint.url,
            payload,
            headers=job.endpoint.headers(),
            timeout_s=job.endpoint.timeout_s,
            retry=retry,
        )
        text = _extract_text(body)
    except TransportError as exc:
        return JobResult(job.id, ok=False, error=str(exc), attempts=exc.attempts)

    if cache is not None:
        cache.put(key, text, job.endpoint.model_id)
    return JobResult(job.id, ok=True, text=text, attempts=attempts)


def run_batch(
    jobs: Sequence[InferenceJob],
    max_in_flight: int = 4,
    cache: Optional[ResponseCache] = None,
    retry: RetryPolicy = RetryPolicy(),
    max_payload_bytes: int = DEFAULT_MAX_PAYLOAD_BYTES,
) -> list[JobResult]:
    """Run jobs with at most ``max_in_flight`` concurrent requests.

    Results come back in job order regardless of completion order; failures
    become per-job error records and never abort the batch.
    """
    if max_in_flight < 1:
        raise ValueError(f"max_in_flight must be >= 1, got {max_in_flight}")
    if not jobs:
        return []
    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        futures = [
            pool.submit(run_job, job, cache, retry, max_payload_bytes) for job in jobs
        ]
        return [f.result() for f in futures]
