"""Repository history providers.

Attribution only needs three views of a repository: the head commit id,
the commit log newest-first (author name, email, timestamp, touched
paths), and the file tree. Two providers supply them: a local git clone
walker and a recorded fixture bundle, so the whole pipeline runs offline.

Fixture bundle format (a directory):

- ``HEAD``          one line, the head commit id
- ``commits.jsonl`` one JSON commit record per line, fields
                    ``id``, ``author_name``, ``author_email``,
                    ``timestamp`` (ISO-8601), ``paths`` (touched paths)
- ``tree.txt``      one repo-relative file path per line
"""

from __future__ import annotations

import json
import os
import subprocess
from dataclasses import dataclass
from datetime import datetime
from typing import Protocol


class HistoryUnavailable(Exception):
    """Transient failure reading history; the caller may retry."""


@dataclass(frozen=True)
class CommitRecord:
    id: str
    author_name: str
    author_email: str
    timestamp: datetime
    paths: tuple[str, ...]


class HistoryProvider(Protocol):
    def head_id(self) -> str: ...

    def commits(self) -> list[CommitRecord]:
        """Full log, newest first."""
        ...

    def tree(self) -> list[str]:
        """Repo-relative file paths at head."""
        ...


class FixtureHistory:
    def __init__(self, bundle_dir: str):
        self.bundle_dir = bundle_dir
        if not os.path.isdir(bundle_dir):
            raise HistoryUnavailable("no fixture bundle at %s" % bundle_dir)

    def head_id(self) -> str:
        with open(os.path.join(self.bundle_dir, "HEAD"), "r", encoding="utf-8") as fh:
            return fh.read().strip()

    def commits(self) -> list[CommitRecord]:
        records = []
        path = os.path.join(self.bundle_dir, "commits.jsonl")
        with open(path, "r", encoding="utf-8") as fh:
            for index, line in enumerate(fh):
                line = line.strip()
                if not line:
                    continue
                raw = json.loads(line)
                records.append(
                    (
                        index,
                        CommitRecord(
                            id=raw["id"],
                            author_name=raw["author_name"],
                            author_email=raw["author_email"],
                            timestamp=datetime.fromisoformat(raw["timestamp"]),
                            paths=tuple(raw["paths"]),
                        ),
                    )
                )
        # Newest first; file order breaks timestamp ties.
        records.sort(key=lambda item: (item[1].timestamp, -item[0]), reverse=True)
        return [record for _, record in records]

    def tree(self) -> list[str]:
        path = os.path.join(self.bundle_dir, "tree.txt")
        with open(path, "r", encoding="utf-8") as fh:
            return [line.strip() for line in fh if line.strip()]


def write_fixture_bundle(
    bundle_dir: str, head: str, commits: list[CommitRecord], tree: list[str]
) -> None:
    os.makedirs(bundle_dir, exist_ok=True)
    with open(os.path.join(bundle_dir, "HEAD"), "w", encoding="utf-8") as fh:
        fh.write(head + "\n")
    with open(os.path.join(bundle_dir, "commits.jsonl"), "w", encoding="utf-8") as fh:
        for commit in commits:
            fh.write(
                json.dumps(
                    {
                        "id": commit.id,
                        "author_name": commit.author_name,
                        "author_email": commit.author_email,
                        "timestamp": commit.timestamp.isoformat(),
                        "paths": list(commit.paths),
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    with open(os.path.join(bundle_dir, "tree.txt"), "w", encoding="utf-8") as fh:
        for path in tree:
            fh.write(path + "\n")


class GitCloneHistory:
    """History walker over a local clone (default branch head)."""

    def __init__(self, repo_dir: str):
        self.repo_dir = repo_dir

    def _git(self, *args: str) -> str:
        try:
            result = subprocess.run(
                ["git", *args],
                cwd=self.repo_dir,
                capture_output=True,
                text=True,
                check=True,
            )
        except (OSError, subprocess.CalledProcessError) as exc:
            raise HistoryUnavailable(str(exc)) from exc
        return result.stdout

    def head_id(self) -> str:
        return self._git("rev-parse", "HEAD").strip()

    def commits(self) -> list[CommitRecord]:
        out = self._git(
            "log", "--pretty=format:%x1e%H%x1f%an%x1f%ae%x1f%aI", "--name-only"
        )
        records: list[CommitRecord] = []
        for chunk in out.split("\x1e"):
            chunk = chunk.strip("\n")
            if not chunk:
                continue
            header, _, body = chunk.partition("\n")
            commit_id, name, email, stamp = header.split("\x1f")
            paths = tuple(p for p in body.splitlines() if p.strip())
            records.append(
                CommitRecord(
                    id=commit_id,
                    author_name=name,
                    author_email=email,
                    timestamp=datetime.fromisoformat(stamp),
                    paths=paths,
                )
            )
        return records

    def tree(self) -> list[str]:
        return [p for p in self._git("ls-files").splitlines() if p.strip()]
