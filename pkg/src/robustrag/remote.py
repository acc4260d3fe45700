"""HTTP client for remote model backends (chat completion and scoring)."""

import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import httpx

log = logging.getLogger(__name__)

API_KEY_ENV = "CORM_API_KEY"
_RETRY_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}


class RemoteError(RuntimeError):
    pass


class RemoteAuthError(RemoteError):
    """Missing or rejected credentials. Never retried."""


class RemoteTransportError(RemoteError):
    """The request kept failing after all retries."""


class MalformedResponseError(RemoteError):
    pass


@dataclass(frozen=True)
class Endpoint:
    base_url: str
    model: str = ""
    api_key_env: str = API_KEY_ENV
    timeout: float = 30.0
    max_parallel: int = 4
    max_retries: int = 3
    backoff: float = 0.5

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


class RemoteClient:
    """JSON-over-HTTP client with bounded parallelism and exponential backoff.

    ``transport`` and ``sleep`` exist so tests can script responses without a
    network and without waiting out the backoff.
    """

    def __init__(self, endpoint, transport=None, sleep=time.sleep):
        self.endpoint = endpoint
        self._sleep = sleep
        self._lock = threading.Lock()
        self.retries = 0
        self._http = httpx.Client(base_url=endpoint.base_url, timeout=endpoint.timeout, transport=transport)

    def close(self):
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _headers(self):
        token = os.environ.get(self.endpoint.api_key_env)
        if not token:
            raise RemoteAuthError(f"environment variable {self.endpoint.api_key_env} is not set")
        return {"Authorization": f"Bearer {token}"}

    def post_json(self, path, body):
        headers = self._headers()
        attempt = 0
        while True:
            try:
                resp = self._http.post(path, json=body, headers=headers)
            except httpx.TransportError as exc:
                failure = f"{type(exc).__name__}: {exc}"
            else:
                if resp.status_code in (401, 403):
                    raise RemoteAuthError(f"{path}: HTTP {resp.status_code}")
                if resp.status_code not in _RETRY_STATUS:
                    if resp.status_code >= 400:
                        raise RemoteError(f"{path}: HTTP {resp.status_code}: {resp.text[:200]}")
                    try:
                        return resp.json()
                    except ValueError:
                        raise MalformedResponseError(f"{path}: response is not JSON") from None
                failure = f"HTTP {resp.status_code}"
            if attempt >= self.endpoint.max_retries:
                raise RemoteTransportError(f"{path}: {failure} after {attempt} retries")
            delay = self.endpoint.backoff * (2 ** attempt)
            log.warning("%s: %s, retrying in %.2fs", path, failure, delay)
            with self._lock:
                self.retries += 1
            attempt += 1
            self._sleep(delay)

    def complete(self, prompt):
        body = {"model": self.endpoint.model, "messages": [{"role": "user", "content": prompt}]}
        data = self.post_json("/chat/completions", body)
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise MalformedResponseError("response lacks choices[0].message.content") from None
        if not isinstance(text, str):
            raise MalformedResponseError("choices[0].message.content is not a string")
        return text.strip()

    def map(self, fn, items):
        """Apply ``fn`` with at most ``max_parallel`` calls in flight; keeps input order."""
        items = list(items)
        if len(items) <= 1 or self.endpoint.max_parallel <= 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.endpoint.max_parallel) as pool:
            return list(pool.map(fn, items))

    def complete_many(self, prompts):
        return self.map(self.complete, prompts)


def remote_complete(endpoint, prompt, transport=None):
    with RemoteClient(endpoint, transport=transport) as client:
        return client.complete(prompt)
