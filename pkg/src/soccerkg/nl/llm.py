"""Chat-completions translation backend.

The transport is injectable so tests never touch the network. The API key
is read from the environment only.
"""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Callable

from ..cypher.parser import ParseError, parse
from ..cypher.lexer import LexError

log = logging.getLogger("soccerkg.llm")

API_KEY_ENV = "SOCCERKG_LLM_API_KEY"

_FENCE = re.compile(r"```[^\n`]*\n(.*?)```", re.DOTALL)


class TransportError(RuntimeError):
    pass


class BudgetError(RuntimeError):
    pass


class ExtractionError(ValueError):
    pass


@dataclass
class LLMConfig:
    base_url: str
    model: str
    temperature: float = 0.0
    retry_cap: int = 1
    timeout_s: float = 30.0
    max_prompt_chars: int = 60_000
    max_in_flight: int = 2


# (url, headers, body) -> response body
Transport = Callable[[str, dict, bytes, float], bytes]


def urllib_transport(url: str, headers: dict, body: bytes, timeout: float) -> bytes:
    req = urllib.request.Request(url, data=body, headers=headers, method="POST")
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            return resp.read()
    except (urllib.error.URLError, OSError) as exc:
        raise TransportError(f"request to {url} failed: {exc}") from exc


def extract_query(reply: str) -> str:
    m = _FENCE.search(reply)
    if not m:
        raise ExtractionError("reply contains no fenced code block")
    text = m.group(1).strip()
    if not text:
        raise ExtractionError("fenced code block is empty")
    return text


SYSTEM = (
    "You translate questions about soccer matches into read-only Cypher queries "
    "over the graph described below. Use only the labels, relationship types and "
    "properties listed. Answer with a single fenced code block."
)


def build_prompt(question: str, schema_text: str, few_shots: list[tuple[str, str]]) -> list[dict]:
    messages = [{"role": "system", "content": SYSTEM + "\n\n" + schema_text}]
    for q, cypher in few_shots:
        messages.append({"role": "user", "content": q})
        messages.append({"role": "assistant", "content": f"```cypher\n{cypher}\n```"})
    messages.append({"role": "user", "content": question})
    return messages


class LLMBackend:
    name = "llm"
    deterministic = False

    def __init__(self, config: LLMConfig, transport: Transport | None = None, api_key: str | None = None):
        self.config = config
        self.transport = transport or urllib_transport
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self._slots = threading.BoundedSemaphore(max(1, config.max_in_flight))
        self.last_retry_count = 0

    def describe(self) -> dict:
        return {"name": self.name, "deterministic": self.deterministic, "model": self.config.model}

    def chat(self, messages: list[dict]) -> str:
        size = sum(len(m["content"]) for m in messages)
        if size > self.config.max_prompt_chars:
            raise BudgetError(f"prompt of {size} characters exceeds the cap of {self.config.max_prompt_chars}")
        body = json.dumps(
            {"model": self.config.model, "temperature": self.config.temperature, "messages": messages}
        ).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        log.debug("prompt: %s", json.dumps(messages, ensure_ascii=False))
        with self._slots:
            raw = self.transport(url, headers, body, self.config.timeout_s)
        log.debug("reply: %s", raw.decode("utf-8", "replace"))
        try:
            return json.loads(raw)["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed chat-completions response: {exc}") from exc

    def translate(self, question: str, schema_card, few_shots: list[tuple[str, str]]) -> str:
        schema_text = schema_card.render_text() if hasattr(schema_card, "render_text") else str(schema_card)
        messages = build_prompt(question, schema_text, few_shots)
        self.last_retry_count = 0
        while True:
            text = extract_query(self.chat(messages))
            try:
                parse(text)
                return text
            except (ParseError, LexError) as exc:
                if self.last_retry_count >= self.config.retry_cap:
                    raise
                self.last_retry_count += 1
                messages = messages + [
                    {"role": "assistant", "content": f"```cypher\n{text}\n```"},
                    {"role": "user", "content": f"That query does not parse: {exc}. Reply with a corrected query."},
                ]

    def answer(self, question: str, table_json: str) -> str:
        messages = [
            {"role": "system", "content": "Answer the question using only the JSON table. List every row."},
            {"role": "user", "content": f"Question: {question}\nTable: {table_json}"},
        ]
        return self.chat(messages).strip()
