"""Map thanked objects to repositories, files, and recent contributors.

The contributor rule: walk commits newest-first in the relevant scope
(one file for member/call-site thanks, the whole repository for package
thanks), take authors in order of first appearance, skip anonymized
noreply addresses, dedupe by lowercased email, stop at 20. Fewer than 20
unique authors means everyone is credited.
"""

from __future__ import annotations

import enum
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime

from .history import CommitRecord, HistoryProvider
from .ledger import ObjectKey, ThankedObject
from .registry import Ecosystem, PackageCoordinates, RegistryClient, ResolutionSource
from .scanner import Language

MAX_CONTRIBUTORS = 20
NOREPLY_SUFFIX = "users.noreply.github.com"

SOURCE_EXTENSIONS = {
    Ecosystem.PYPI: (".py", ".pyi", ".pyx"),
    Ecosystem.NPM: (".js", ".jsx", ".ts", ".tsx", ".mjs", ".cjs"),
}


class PathConfidence(str, enum.Enum):
    EXACT = "exact"
    HEURISTIC = "heuristic"
    REPO_FALLBACK = "repo_fallback"


@dataclass(frozen=True)
class ContributorRecord:
    display_name: str
    email: str
    latest_commit_id: str
    latest_commit_time: datetime
    rank: int

    def to_dict(self) -> dict:
        return {
            "display_name": self.display_name,
            "email": self.email,
            "latest_commit_id": self.latest_commit_id,
            "latest_commit_time": self.latest_commit_time.isoformat(),
            "rank": self.rank,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ContributorRecord":
        return cls(
            display_name=data["display_name"],
            email=data["email"],
            latest_commit_id=data["latest_commit_id"],
            latest_commit_time=datetime.fromisoformat(data["latest_commit_time"]),
            rank=data["rank"],
        )


@dataclass(frozen=True)
class AttributionResult:
    object_key: ObjectKey
    coordinates: PackageCoordinates
    resolved_path: str | None
    path_confidence: PathConfidence
    contributors: tuple[ContributorRecord, ...]
    extra_targets: tuple = ()

    def to_dict(self) -> dict:
        return {
            "language": self.object_key[0].value,
            "line_text": self.object_key[1],
            "coordinates": self.coordinates.to_dict(),
            "resolved_path": self.resolved_path,
            "path_confidence": self.path_confidence.value,
            "contributors": [c.to_dict() for c in self.contributors],
            "extra_targets": [
                {"package": pkg, "member_path": list(mp)} for pkg, mp in self.extra_targets
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AttributionResult":
        return cls(
            object_key=(Language(data["language"]), data["line_text"]),
            coordinates=PackageCoordinates.from_dict(data["coordinates"]),
            resolved_path=data["resolved_path"],
            path_confidence=PathConfidence(data["path_confidence"]),
            contributors=tuple(
                ContributorRecord.from_dict(c) for c in data["contributors"]
            ),
            extra_targets=tuple(
                (t["package"], tuple(t["member_path"])) for t in data["extra_targets"]
            ),
        )


def resolve_member_path(
    tree: list[str], member_path: tuple[str, ...], ecosystem: Ecosystem
) -> tuple[str | None, PathConfidence]:
    """Find the repo file/directory whose trailing segments spell the member.

    ``[pyplot]`` matches ``lib/matplotlib/pyplot.py`` (file) or any
    ``.../pyplot/`` directory. A unique match is Exact; among several the
    shortest path wins (Heuristic); no match degrades to repo-wide
    attribution (RepoFallback).
    """
    if not member_path:
        return None, PathConfidence.REPO_FALLBACK
    extensions = SOURCE_EXTENSIONS[ecosystem]
    candidates: list[str] = []
    directories: set[str] = set()
    for path in tree:
        segments = path.split("/")
        for depth in range(1, len(segments)):
            directories.add("/".join(segments[:depth]))
        stem = segments[-1]
        for ext in extensions:
            if stem.endswith(ext):
                stem = stem[: -len(ext)]
                break
        trailing = tuple(segments[:-1][-(len(member_path) - 1):] if len(member_path) > 1 else ()) + (stem,)
        if trailing == member_path and len(segments) >= len(member_path):
            candidates.append(path)
    for directory in directories:
        segments = tuple(directory.split("/"))
        if segments[-len(member_path):] == member_path:
            candidates.append(directory)
    candidates = sorted(set(candidates), key=lambda p: (p.count("/"), len(p), p))
    if not candidates:
        return None, PathConfidence.REPO_FALLBACK
    if len(candidates) == 1:
        return candidates[0], PathConfidence.EXACT
    return candidates[0], PathConfidence.HEURISTIC


def _touches(commit: CommitRecord, path: str) -> bool:
    prefix = path + "/"
    return any(p == path or p.startswith(prefix) for p in commit.paths)


def recent_contributors(
    commits: list[CommitRecord], resolved_path: str | None = None
) -> list[ContributorRecord]:
    """Rank authors by the recency of their latest in-scope commit.

    ``commits`` must be newest-first (as the history providers return).
    """
    records: list[ContributorRecord] = []
    seen: set[str] = set()
    for commit in commits:
        if resolved_path is not None and not _touches(commit, resolved_path):
            continue
        email = commit.author_email.strip()
        if email.lower().endswith(NOREPLY_SUFFIX):
            continue
        key = email.lower()
        if key in seen:
            continue
        seen.add(key)
        records.append(
            ContributorRecord(
                display_name=commit.author_name,
                email=email,
                latest_commit_id=commit.id,
                latest_commit_time=commit.timestamp,
                rank=len(records) + 1,
            )
        )
        if len(records) == MAX_CONTRIBUTORS:
            break
    return records


class HistorySource(enum.Enum):
    """How the resolver obtains a repository's history."""

    FIXTURE = "fixture"
    CLONE = "clone"


class AttributionResolver:
    """Composes registry resolution, path resolution, and contributor ranking.

    ``history_for`` maps resolved coordinates to a HistoryProvider (tests
    and offline runs hand in fixture bundles). Results are cached by
    (object_key, head commit id); unresolved packages land in the review
    queue instead of being dropped.
    """

    def __init__(
        self,
        registry: RegistryClient,
        history_for,
        parallelism: int = 4,
    ):
        self.registry = registry
        self.history_for = history_for
        self.parallelism = parallelism
        self._cache: dict[tuple[ObjectKey, str], AttributionResult] = {}
        self._cache_lock = threading.Lock()
        self.review_queue: list[AttributionResult] = []

    def attribute(self, obj: ThankedObject) -> AttributionResult:
        if not obj.targets:
            raise ValueError("object has no targets")
        package, member_path = obj.targets[0]
        extra = tuple(obj.targets[1:])
        language = obj.object_key[0]
        ecosystem = (
            Ecosystem.PYPI if language is Language.PYTHON else Ecosystem.NPM
        )
        coordinates = self.registry.resolve_repository(ecosystem, package)
        if coordinates.resolution_source is ResolutionSource.UNRESOLVED:
            result = AttributionResult(
                object_key=obj.object_key,
                coordinates=coordinates,
                resolved_path=None,
                path_confidence=PathConfidence.REPO_FALLBACK,
                contributors=(),
                extra_targets=extra,
            )
            with self._cache_lock:
                self.review_queue.append(result)
            return result
        history: HistoryProvider = self.history_for(coordinates)
        head = history.head_id()
        cache_key = (obj.object_key, head)
        with self._cache_lock:
            cached = self._cache.get(cache_key)
        if cached is not None:
            return cached
        resolved_path, confidence = resolve_member_path(
            history.tree(), member_path, ecosystem
        )
        contributors = recent_contributors(history.commits(), resolved_path)
        result = AttributionResult(
            object_key=obj.object_key,
            coordinates=coordinates,
            resolved_path=resolved_path,
            path_confidence=confidence,
            contributors=tuple(contributors),
            extra_targets=extra,
        )
        with self._cache_lock:
            self._cache[cache_key] = result
        return result

    def attribute_many(self, objects: list[ThankedObject]) -> list[AttributionResult]:
        if not objects:
            return []
        with ThreadPoolExecutor(max_workers=max(1, self.parallelism)) as pool:
            return list(pool.map(self.attribute, objects))
