"""Uniform chat-completion interface with retries, caching, and auditing.

Two backends: an OpenAI-compatible HTTP backend for real runs, and a
scripted mock keyed by prompt hash so desk-scale runs and tests never
touch the network. Responses are cached content-addressed on
(prompt hash, model, temperature), which makes reruns free.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import requests

logger = logging.getLogger(__name__)

PURPOSE_GLOSSING = "glossing"
PURPOSE_INSTRUCTIONS = "instruction-generation"

# Default temperatures per request purpose; overriding requires the
# explicit config flag.
PURPOSE_TEMPERATURES = {
    PURPOSE_GLOSSING: 0.0,
    PURPOSE_INSTRUCTIONS: 0.25,
}

DEFAULT_MOCK_RESPONSE = '{"word": "?", "glosses": ["?"]}'


class GatewayError(Exception):
    pass


class ConfigViolationError(GatewayError):
    pass


class BudgetExceededError(GatewayError):
    pass


class TransportError(GatewayError):
    def __init__(self, message: str, *, retryable: bool = True):
        super().__init__(message)
        self.retryable = retryable


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ChatRequest:
    prompt: str
    purpose: str = PURPOSE_GLOSSING
    temperature: float | None = None
    max_tokens: int = 1024
    request_id: str = field(default_factory=lambda: uuid.uuid4().hex)

    def __post_init__(self):
        if self.purpose not in PURPOSE_TEMPERATURES:
            raise ConfigViolationError(f"unknown request purpose {self.purpose!r}")
        if self.temperature is not None and not 0.0 <= self.temperature <= 2.0:
            raise ConfigViolationError(f"temperature {self.temperature} outside [0, 2]")


@dataclass
class GatewayConfig:
    endpoint_url: str = ""
    model_name: str = "mock"
    api_key_env: str = "GLOSSKIT_API_KEY"
    timeout: float = 60.0
    max_retries: int = 3
    max_in_flight: int = 4
    cost_cap: int | None = None
    allow_temperature_override: bool = False
    backoff_base: float = 0.5
    cache_dir: str | Path | None = None
    audit_log: str | Path | None = None

    def __post_init__(self):
        if self.max_in_flight < 1:
            raise ConfigViolationError("max_in_flight must be at least 1")

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "GatewayConfig":
        """Endpoint/model settings from a JSON file; the API key itself
        stays in the environment (the file names the variable)."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {
            "endpointUrl": "endpoint_url",
            "modelName": "model_name",
            "apiKeyEnv": "api_key_env",
            "timeout": "timeout",
            "maxRetries": "max_retries",
            "maxInFlight": "max_in_flight",
            "costCap": "cost_cap",
            "allowTemperatureOverride": "allow_temperature_override",
            "backoffBase": "backoff_base",
            "cacheDir": "cache_dir",
            "auditLog": "audit_log",
        }
        kwargs = {}
        for key, value in data.items():
            if key not in known:
                raise ConfigViolationError(f"unknown gateway config key {key!r}")
            kwargs[known[key]] = value
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kwargs)


class MockBackend:
    """Deterministic backend: canned responses keyed by SHA-256 of the
    prompt, with a configurable default for unmatched prompts."""

    def __init__(
        self,
        scripted: Mapping[str, str] | None = None,
        default: str | None = DEFAULT_MOCK_RESPONSE,
    ):
        self.scripted = dict(scripted or {})
        self.default = default
        self.calls = 0

    def script(self, prompt: str, response: str) -> None:
        self.scripted[prompt_hash(prompt)] = response

    @classmethod
    def from_file(cls, path: str | Path) -> "MockBackend":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        scripted = dict(data.get("byHash", {}))
        for item in data.get("byPrompt", []):
            scripted[prompt_hash(item["prompt"])] = item["response"]
        return cls(scripted, data.get("default", DEFAULT_MOCK_RESPONSE))

    def send(self, request: ChatRequest, config: GatewayConfig) -> str:
        self.calls += 1
        key = prompt_hash(request.prompt)
        if key in self.scripted:
            return self.scripted[key]
        if self.default is None:
            raise TransportError(f"no scripted response for prompt {key[:12]}", retryable=False)
        return self.default


class HttpBackend:
    """OpenAI-compatible chat-completions endpoint over HTTPS."""

    RETRYABLE_STATUS = {408, 409, 429, 500, 502, 503, 504}

    def __init__(self, session: requests.Session | None = None):
        self.session = session or requests.Session()

    def send(self, request: ChatRequest, config: GatewayConfig) -> str:
        url = config.endpoint_url.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(config.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": config.model_name,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        try:
            resp = self.session.post(url, json=payload, headers=headers, timeout=config.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"request failed: {exc}", retryable=True) from exc
        if resp.status_code != 200:
            raise TransportError(
                f"HTTP {resp.status_code}: {resp.text[:200]}",
                retryable=resp.status_code in self.RETRYABLE_STATUS,
            )
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed completion payload: {exc}", retryable=False) from exc


@dataclass(frozen=True)
class AuditRecord:
    request_id: str
    prompt_hash: str
    model: str
    purpose: str
    temperature: float
    max_tokens: int
    attempts: int
    latency: float
    response_hash: str
    cached: bool


class Gateway:
    """Shareable front end enforcing temperature policy, the in-flight
    cap, retries with jittered exponential backoff, budget, and audit."""

    def __init__(self, config: GatewayConfig, backend, *, sleep=time.sleep, rng=None):
        self.config = config
        self.backend = backend
        self._sleep = sleep
        self._rng = rng or random.Random()
        self._gate = threading.BoundedSemaphore(config.max_in_flight)
        self._lock = threading.Lock()
        self._memory_cache: dict[str, str] = {}
        self.audit_records: list[AuditRecord] = []
        self.requests_spent = 0
        if config.cache_dir:
            Path(config.cache_dir).mkdir(parents=True, exist_ok=True)

    # -- temperature policy --

    def _effective_temperature(self, request: ChatRequest) -> float:
        default = PURPOSE_TEMPERATURES[request.purpose]
        if request.temperature is None or request.temperature == default:
            return default
        if not self.config.allow_temperature_override:
            raise ConfigViolationError(
                f"temperature {request.temperature} for purpose {request.purpose!r} "
                f"requires allow_temperature_override"
            )
        return request.temperature

    # -- cache --

    def _cache_key(self, request: ChatRequest, temperature: float) -> str:
        material = f"{prompt_hash(request.prompt)}|{self.config.model_name}|{temperature}"
        return hashlib.sha256(material.encode("utf-8")).hexdigest()

    def _cache_path(self, key: str) -> Path | None:
        if not self.config.cache_dir:
            return None
        return Path(self.config.cache_dir) / f"{key}.json"

    def _cache_get(self, key: str) -> str | None:
        if key in self._memory_cache:
            return self._memory_cache[key]
        path = self._cache_path(key)
        if path and path.exists():
            response = json.loads(path.read_text(encoding="utf-8"))["response"]
            self._memory_cache[key] = response
            return response
        return None

    def _cache_put(self, key: str, request: ChatRequest, temperature: float, response: str):
        self._memory_cache[key] = response
        path = self._cache_path(key)
        if path:
            path.write_text(
                json.dumps(
                    {
                        "promptHash": prompt_hash(request.prompt),
                        "model": self.config.model_name,
                        "temperature": temperature,
                        "response": response,
                    },
                    ensure_ascii=False,
                ),
                encoding="utf-8",
            )

    # -- audit --

    def _audit(self, record: AuditRecord) -> None:
        with self._lock:
            self.audit_records.append(record)
            if self.config.audit_log:
                with open(self.config.audit_log, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record.__dict__, ensure_ascii=False) + "\n")

    # -- main entry point --

    def complete(self, request: ChatRequest) -> str:
        temperature = self._effective_temperature(request)
        key = self._cache_key(request, temperature)
        started = time.monotonic()

        cached = self._cache_get(key)
        if cached is not None:
            self._audit(
                AuditRecord(
                    request_id=request.request_id,
                    prompt_hash=prompt_hash(request.prompt),
                    model=self.config.model_name,
                    purpose=request.purpose,
                    temperature=temperature,
                    max_tokens=request.max_tokens,
                    attempts=0,
                    latency=time.monotonic() - started,
                    response_hash=prompt_hash(cached),
                    cached=True,
                )
            )
            return cached

        with self._lock:
            cap = self.config.cost_cap
            if cap is not None and self.requests_spent >= cap:
                raise BudgetExceededError(
                    f"request budget exhausted ({self.requests_spent}/{cap})"
                )
            self.requests_spent += 1

        effective = ChatRequest(
            prompt=request.prompt,
            purpose=request.purpose,
            temperature=temperature,
            max_tokens=request.max_tokens,
            request_id=request.request_id,
        )

        attempts = 0
        last_error: TransportError | None = None
        with self._gate:
            while attempts <= self.config.max_retries:
                attempts += 1
                try:
                    response = self.backend.send(effective, self.config)
                    break
                except TransportError as exc:
                    last_error = exc
                    logger.warning(
                        "attempt %d/%d failed for %s: %s",
                        attempts,
                        self.config.max_retries + 1,
                        request.request_id,
                        exc,
                    )
                    if not exc.retryable or attempts > self.config.max_retries:
                        raise TransportError(
                            f"gave up after {attempts} attempts: {exc}",
                            retryable=False,
                        ) from exc
                    backoff = self.config.backoff_base * (2 ** (attempts - 1))
                    self._sleep(backoff + self._rng.uniform(0, backoff))
            else:  # pragma: no cover - loop always breaks or raises
                raise TransportError(f"gave up: {last_error}", retryable=False)

        self._cache_put(key, request, temperature, response)
        self._audit(
            AuditRecord(
                request_id=request.request_id,
                prompt_hash=prompt_hash(request.prompt),
                model=self.config.model_name,
                purpose=request.purpose,
                temperature=temperature,
                max_tokens=request.max_tokens,
                attempts=attempts,
                latency=time.monotonic() - started,
                response_hash=prompt_hash(response),
                cached=False,
            )
        )
        return response
