"""Per-session tool-call log and Markdown transcript rendering."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Optional

from .errors import NotFoundError

MAX_ARG_CHARS = 2000
MAX_ENTRIES = 1000
TRUNCATION_MARKER = "…[truncated {n} chars]"

Clock = Callable[[], datetime]


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(frozen=True)
class LogEntry:
    timestamp: datetime
    tool: str
    args: dict
    outcome: str
    row_count: Optional[int] = None
    error: Optional[str] = None


@dataclass
class SessionLog:
    session_id: str
    entries: list[LogEntry] = field(default_factory=list)
    dropped: int = 0


def _truncate(value: Any) -> Any:
    if isinstance(value, str) and len(value) > MAX_ARG_CHARS:
        return value[:MAX_ARG_CHARS] + TRUNCATION_MARKER.format(n=len(value) - MAX_ARG_CHARS)
    if isinstance(value, dict):
        return {k: _truncate(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_truncate(v) for v in value]
    return value


class TranscriptStore:
    """Thread-safe in-memory session logs."""

    def __init__(self, clock: Clock = utc_now, max_entries: int = MAX_ENTRIES):
        self.clock = clock
        self.max_entries = max_entries
        self._sessions: dict[str, SessionLog] = {}
        self._lock = threading.Lock()

    def open_session(self, session_id: str) -> SessionLog:
        with self._lock:
            return self._sessions.setdefault(session_id, SessionLog(session_id))

    def record_tool_call(self, session_id: str, tool: str, args: Any, outcome: str,
                         row_count: Optional[int] = None, error: Optional[str] = None) -> None:
        try:
            if not isinstance(args, dict):
                args = {"value": args}
            entry = LogEntry(self.clock(), tool, _truncate(json.loads(json.dumps(args, default=str))),
                             outcome, row_count, error)
            with self._lock:
                log = self._sessions.setdefault(session_id, SessionLog(session_id))
                log.entries.append(entry)
                if len(log.entries) > self.max_entries:
                    overflow = len(log.entries) - self.max_entries
                    del log.entries[:overflow]
                    log.dropped += overflow
        except Exception:  # recording must never fail a tool call
            pass

    def snapshot(self, session_id: str) -> SessionLog:
        with self._lock:
            log = self._sessions.get(session_id)
            if log is None:
                raise NotFoundError(f"unknown session {session_id!r}")
            return SessionLog(log.session_id, list(log.entries), log.dropped)

    def create_chat_transcript(self, session_id: str, title: str, narrative: Optional[str] = None) -> str:
        return render_transcript(self.snapshot(session_id), title, narrative, self.clock())


def _fence(lang: str, body: str) -> str:
    fence = "```"
    while fence in body:
        fence += "`"
    return f"{fence}{lang}\n{body}\n{fence}"


def render_transcript(log: SessionLog, title: str, narrative: Optional[str], now: datetime) -> str:
    lines = [f"# {title.strip() or 'Analysis session'}", ""]
    lines.append(f"*Generated {now.isoformat(timespec='seconds')} · session `{log.session_id}` · "
                 f"{len(log.entries)} tool call(s)*")
    lines.append("")
    if narrative and narrative.strip():
        lines += ["## Narrative", "", narrative.strip(), ""]
    lines += ["## Tool calls", ""]
    if log.dropped:
        lines += [f"> {log.dropped} earlier tool call(s) dropped from the log.", ""]
    if not log.entries:
        lines += ["_No tool calls recorded._", ""]
    for i, e in enumerate(log.entries, start=1):
        lines += [f"### {i}. `{e.tool}`", "", f"*{e.timestamp.isoformat(timespec='seconds')}*", ""]
        args = dict(e.args)
        sparql = args.pop("sparql", None)
        if sparql is not None:
            lines += ["**SPARQL**", "", _fence("sparql", str(sparql)), ""]
        if args:
            lines += ["**Arguments**", "", _fence("json", json.dumps(args, indent=2, sort_keys=True)), ""]
        if e.error:
            lines += [f"**Error:** {e.error}", ""]
        else:
            suffix = f" ({e.row_count} rows)" if e.row_count is not None else ""
            lines += [f"**Outcome:** {e.outcome}{suffix}", ""]
    return "\n".join(lines).rstrip() + "\n"
