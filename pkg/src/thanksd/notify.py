"""Batch attributed thanks into one digest per contributor and deliver it.

Each contributor gets at most one message per window: a digest with one
segment per thanked object credited to them, carrying the verbatim code
line, the thanks count, and any personal notes, byte-identical to the
ledger originals. Delivery is either a dry-run outbox (one RFC 5322 file
per message) or SMTP; an idempotency ledger of (recipient, window) pairs
makes re-dispatch after partial failure touch only the failed recipients.
"""

from __future__ import annotations

import enum
import hashlib
import json
import os
import smtplib
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .attribution import AttributionResult
from .ledger import ObjectKey, ThankedObject

TEMPLATE_SEGMENT_DELIMITER = "----segment----"
MIME_BOUNDARY = "=-thanksd-digest-boundary"


class ConfigurationError(Exception):
    """Missing/invalid template or transport configuration, caught at startup."""


class DispatchMode(enum.Enum):
    DRY_RUN = "dry_run"
    SEND = "send"


@dataclass(frozen=True)
class ReportSegment:
    display_line: str
    thanks_count: int
    notes: tuple[str, ...]


@dataclass(frozen=True)
class HugReport:
    """Per-contributor digest of the objects they were thanked for."""

    contributor_email: str
    contributor_name: str
    segments: tuple[ReportSegment, ...]
    window: tuple[str, str]
    context_preamble: str


@dataclass
class DispatchSummary:
    written: int = 0
    sent: int = 0
    skipped: int = 0
    failed: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "written": self.written,
            "sent": self.sent,
            "skipped": self.skipped,
            "failed": self.failed,
            "failures": [{"recipient": r, "error": e} for r, e in self.failures],
        }


def build_reports(
    attributions: list[AttributionResult],
    objects: list[ThankedObject],
    window: tuple[str, str],
    context_preamble: str = "",
) -> list[HugReport]:
    """Invert object -> contributors into one report per contributor.

    A contributor thanked for k objects gets a single report with k
    segments. Contributors with no credited objects are absent. Segment
    order: thanks count descending, then display line; report order:
    contributor email, so output is deterministic.
    """
    by_key: dict[ObjectKey, ThankedObject] = {o.object_key: o for o in objects}
    credits: dict[str, dict] = {}
    for attribution in attributions:
        obj = by_key.get(attribution.object_key)
        if obj is None:
            raise ValueError(
                "attribution references unknown object: %r" % (attribution.object_key,)
            )
        for contributor in attribution.contributors:
            entry = credits.setdefault(
                contributor.email.lower(),
                {"email": contributor.email, "name": contributor.display_name, "objects": {}},
            )
            entry["objects"][obj.object_key] = obj
    reports = []
    for key in sorted(credits):
        entry = credits[key]
        segments = [
            ReportSegment(
                display_line=obj.display_line,
                thanks_count=obj.count,
                notes=tuple(obj.notes),
            )
            for obj in entry["objects"].values()
        ]
        segments.sort(key=lambda s: (-s.thanks_count, s.display_line))
        reports.append(
            HugReport(
                contributor_email=entry["email"],
                contributor_name=entry["name"],
                segments=tuple(segments),
                window=window,
                context_preamble=context_preamble,
            )
        )
    return reports


def _default_template_dir() -> str:
    return os.path.join(os.path.dirname(__file__), "templates")


class DigestTemplates:
    """Two template files (plain, HTML), each holding a document layout and
    a per-segment layout separated by a ``----segment----`` line.

    Document placeholders: ``{preamble}``, ``{segments}``. Segment
    placeholders: ``{count}``, ``{line}``, ``{notes}``.
    """

    def __init__(self, template_dir: str | None = None):
        template_dir = template_dir or _default_template_dir()
        self.plain_document, self.plain_segment = self._load(
            os.path.join(template_dir, "digest.txt")
        )
        self.html_document, self.html_segment = self._load(
            os.path.join(template_dir, "digest.html")
        )

    @staticmethod
    def _load(path: str) -> tuple[str, str]:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                content = fh.read()
        except OSError as exc:
            raise ConfigurationError("cannot read template %s: %s" % (path, exc)) from exc
        if TEMPLATE_SEGMENT_DELIMITER not in content:
            raise ConfigurationError(
                "template %s lacks the %r delimiter" % (path, TEMPLATE_SEGMENT_DELIMITER)
            )
        document, _, segment = content.partition(TEMPLATE_SEGMENT_DELIMITER + "\n")
        for placeholder in ("{preamble}", "{segments}"):
            if placeholder not in document:
                raise ConfigurationError(
                    "template %s document part lacks %s" % (path, placeholder)
                )
        for placeholder in ("{count}", "{line}"):
            if placeholder not in segment:
                raise ConfigurationError(
                    "template %s segment part lacks %s" % (path, placeholder)
                )
        return document, segment


def _html_escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def render_email(
    report: HugReport,
    templates: DigestTemplates,
    sender: str = "thanksd@localhost",
    subject: str = "You were thanked for your open source work",
) -> str:
    """Render a deterministic two-part (plain + HTML) message as RFC 5322 text.

    No Date or Message-ID headers are emitted and the MIME boundary is
    fixed, so identical inputs yield byte-identical documents.
    """
    plain_segments = []
    html_segments = []
    for segment in report.segments:
        plain_notes = "".join("> %s\n" % note for note in segment.notes)
        html_notes = "".join(
            "<blockquote>%s</blockquote>\n" % _html_escape(note) for note in segment.notes
        )
        plain_segments.append(
            templates.plain_segment.format(
                count=segment.thanks_count,
                line=segment.display_line,
                notes=plain_notes,
            )
        )
        html_segments.append(
            templates.html_segment.format(
                count=segment.thanks_count,
                line="<code>%s</code>" % _html_escape(segment.display_line),
                notes=html_notes,
            )
        )
    plain_body = templates.plain_document.format(
        preamble=report.context_preamble, segments="".join(plain_segments)
    )
    html_body = templates.html_document.format(
        preamble=_html_escape(report.context_preamble),
        segments="".join(html_segments),
    )
    headers = [
        "From: %s" % sender,
        "To: %s" % report.contributor_email,
        "Subject: %s" % subject,
        "MIME-Version: 1.0",
        'Content-Type: multipart/alternative; boundary="%s"' % MIME_BOUNDARY,
    ]
    parts = [
        "\r\n".join(headers),
        "",
        "--%s" % MIME_BOUNDARY,
        'Content-Type: text/plain; charset="utf-8"',
        "Content-Transfer-Encoding: 8bit",
        "",
        plain_body,
        "--%s" % MIME_BOUNDARY,
        'Content-Type: text/html; charset="utf-8"',
        "Content-Transfer-Encoding: 8bit",
        "",
        html_body,
        "--%s--" % MIME_BOUNDARY,
        "",
    ]
    return "\r\n".join(parts)


def outbox_filename(window_stamp: str, recipient: str) -> str:
    digest = hashlib.sha256(recipient.lower().encode("utf-8")).hexdigest()[:16]
    return "%s-%s.eml" % (window_stamp, digest)


@dataclass(frozen=True)
class MailTransport:
    host: str
    port: int = 25
    username: str | None = None
    password: str | None = None


class IdempotencyLedger:
    """Append-only record of delivered (window, recipient) pairs."""

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self._done: set[tuple[str, str]] = set()
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    record = json.loads(line)
                    if record.get("status") == "ok":
                        self._done.add((record["window"], record["recipient"].lower()))

    def is_done(self, window_stamp: str, recipient: str) -> bool:
        with self._lock:
            return (window_stamp, recipient.lower()) in self._done

    def mark_done(self, window_stamp: str, recipient: str) -> None:
        with self._lock:
            os.makedirs(os.path.dirname(os.path.abspath(self.path)), exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(
                    json.dumps(
                        {"window": window_stamp, "recipient": recipient, "status": "ok"}
                    )
                    + "\n"
                )
            self._done.add((window_stamp, recipient.lower()))


class Dispatcher:
    def __init__(
        self,
        templates: DigestTemplates,
        outbox_dir: str,
        idempotency_ledger: IdempotencyLedger,
        transport: MailTransport | None = None,
        sender: str = "thanksd@localhost",
        parallelism: int = 2,
    ):
        self.templates = templates
        self.outbox_dir = outbox_dir
        self.idempotency = idempotency_ledger
        self.transport = transport
        self.sender = sender
        self.parallelism = parallelism

    def dispatch(
        self, reports: list[HugReport], mode: DispatchMode, window_stamp: str
    ) -> DispatchSummary:
        if mode is DispatchMode.SEND and self.transport is None:
            raise ConfigurationError("Send mode requires mail transport configuration")
        if mode is DispatchMode.DRY_RUN:
            try:
                os.makedirs(self.outbox_dir, exist_ok=True)
                probe = os.path.join(self.outbox_dir, ".writable")
                with open(probe, "w"):
                    pass
                os.remove(probe)
            except OSError as exc:
                raise ConfigurationError("outbox unwritable: %s" % exc) from exc
        summary = DispatchSummary()
        summary_lock = threading.Lock()

        def one(report: HugReport) -> None:
            recipient = report.contributor_email
            if self.idempotency.is_done(window_stamp, recipient):
                with summary_lock:
                    summary.skipped += 1
                return
            rendered = render_email(report, self.templates, sender=self.sender)
            try:
                if mode is DispatchMode.DRY_RUN:
                    self._write_message(window_stamp, recipient, rendered)
                    with summary_lock:
                        summary.written += 1
                else:
                    self._send_message(recipient, rendered)
                    with summary_lock:
                        summary.sent += 1
            except Exception as exc:  # per-message failure; batch continues
                with summary_lock:
                    summary.failed += 1
                    summary.failures.append((recipient, str(exc)))
                return
            self.idempotency.mark_done(window_stamp, recipient)

        with ThreadPoolExecutor(max_workers=max(1, self.parallelism)) as pool:
            list(pool.map(one, reports))
        return summary

    def _write_message(self, window_stamp: str, recipient: str, rendered: str) -> None:
        path = os.path.join(self.outbox_dir, outbox_filename(window_stamp, recipient))
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(rendered)

    def _send_message(self, recipient: str, rendered: str) -> None:
        assert self.transport is not None
        with smtplib.SMTP(self.transport.host, self.transport.port) as smtp:
            if self.transport.username and self.transport.password:
                smtp.login(self.transport.username, self.transport.password)
            smtp.sendmail(self.sender, [recipient], rendered.encode("utf-8"))
