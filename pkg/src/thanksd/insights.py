"""Aggregate statistics and shareable artifacts over the thanks ledger.

Everything here is recomputed from raw events on every call; there is no
hidden state. Outputs are aggregated at package granularity only, never
per installation beyond opaque ids, so anonymity survives publication.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

from .ledger import ThanksEvent, usage_summary
from .registry import LANGUAGE_ECOSYSTEMS, Ecosystem

BADGE_SCHEMA_VERSION = 1


@dataclass
class PackageStats:
    ecosystem: Ecosystem
    package_name: str
    total_thanks: int = 0
    unique_objects: int = 0
    noted_thanks: int = 0
    scope_breakdown: dict = field(
        default_factory=lambda: {"package": 0, "member": 0, "call_site": 0}
    )
    window: tuple[str | None, str | None] = (None, None)

    def to_dict(self) -> dict:
        return {
            "ecosystem": self.ecosystem.value,
            "package_name": self.package_name,
            "total_thanks": self.total_thanks,
            "unique_objects": self.unique_objects,
            "noted_thanks": self.noted_thanks,
            "scope_breakdown": dict(self.scope_breakdown),
            "window": {"start": self.window[0], "end": self.window[1]},
        }


def _event_ecosystem(event: ThanksEvent) -> Ecosystem:
    return LANGUAGE_ECOSYSTEMS[event.language.value]


def _in_window(event: ThanksEvent, start: datetime | None, end: datetime | None) -> bool:
    return (start is None or event.timestamp >= start) and (
        end is None or event.timestamp < end
    )


def package_stats(
    events: list[ThanksEvent],
    ecosystem: Ecosystem,
    package_name: str,
    start: datetime | None = None,
    end: datetime | None = None,
) -> PackageStats:
    """Per-package totals and the package/member/call-site breakdown.

    An unknown package yields zeroed stats, not an error.
    """
    stats = PackageStats(
        ecosystem=ecosystem,
        package_name=package_name,
        window=(
            start.isoformat() if start else None,
            end.isoformat() if end else None,
        ),
    )
    seen_objects: set[str] = set()
    for event in events:
        if not _in_window(event, start, end):
            continue
        if _event_ecosystem(event) is not ecosystem:
            continue
        if not any(pkg == package_name for pkg, _ in event.targets):
            continue
        stats.total_thanks += 1
        if event.note is not None:
            stats.noted_thanks += 1
        stats.scope_breakdown[event.scope.value] += 1
        seen_objects.add(event.line_text.strip())
    stats.unique_objects = len(seen_objects)
    return stats


def badge_payload(
    events: list[ThanksEvent], ecosystem: Ecosystem, package_name: str
) -> dict:
    """Shields-style endpoint document: all-time thanks count for a package."""
    stats = package_stats(events, ecosystem, package_name)
    return {
        "schema_version": BADGE_SCHEMA_VERSION,
        "label": "thanks",
        "message": str(stats.total_thanks),
    }


def deployment_summary(
    events: list[ThanksEvent],
    start: datetime | None = None,
    end: datetime | None = None,
) -> dict:
    """The engagement panels: per-installation counts, import-vs-other
    split, line-position histogram, plus notes per installation."""
    windowed = [e for e in events if _in_window(e, start, end)]
    return usage_summary(windowed)


def stats_table(stats: PackageStats) -> str:
    """Human-readable text rendering of package stats."""
    rows = [
        ("ecosystem", stats.ecosystem.value),
        ("package", stats.package_name),
        ("total thanks", str(stats.total_thanks)),
        ("unique objects", str(stats.unique_objects)),
        ("with notes", str(stats.noted_thanks)),
        ("package-scope", str(stats.scope_breakdown["package"])),
        ("member-scope", str(stats.scope_breakdown["member"])),
        ("call-site", str(stats.scope_breakdown["call_site"])),
    ]
    width = max(len(label) for label, _ in rows)
    return "\n".join("%-*s  %s" % (width, label, value) for label, value in rows)
