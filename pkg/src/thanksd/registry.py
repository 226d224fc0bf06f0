"""Resolve a package name to its source repository via registry metadata.

PyPI and npm metadata documents both carry a repository link for most
packages; only that field is consumed here. An override map file takes
precedence over the registry, and a fixture directory replaces the network
entirely for offline runs.
"""

from __future__ import annotations

import enum
import json
import os
import re
from dataclasses import dataclass

import requests

DEFAULT_PYPI_TEMPLATE = "https://pypi.org/pypi/{package}/json"
DEFAULT_NPM_TEMPLATE = "https://registry.npmjs.org/{package}"


class Ecosystem(str, enum.Enum):
    PYPI = "pypi"
    NPM = "npm"


class ResolutionSource(str, enum.Enum):
    REGISTRY_METADATA = "registry_metadata"
    OVERRIDE_MAP = "override_map"
    UNRESOLVED = "unresolved"


LANGUAGE_ECOSYSTEMS = {
    "python": Ecosystem.PYPI,
    "javascript": Ecosystem.NPM,
    "typescript": Ecosystem.NPM,
}


class RegistryUnavailable(Exception):
    """Transient registry failure; distinct from a package with no repo link."""


@dataclass(frozen=True)
class PackageCoordinates:
    ecosystem: Ecosystem
    package_name: str
    repository_url: str | None
    resolution_source: ResolutionSource

    def to_dict(self) -> dict:
        return {
            "ecosystem": self.ecosystem.value,
            "package_name": self.package_name,
            "repository_url": self.repository_url,
            "resolution_source": self.resolution_source.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PackageCoordinates":
        return cls(
            ecosystem=Ecosystem(data["ecosystem"]),
            package_name=data["package_name"],
            repository_url=data["repository_url"],
            resolution_source=ResolutionSource(data["resolution_source"]),
        )


def normalize_repository_url(url: str) -> str:
    """Canonicalize the registry's repository link into a clone URL."""
    url = url.strip()
    if url.startswith("git+"):
        url = url[4:]
    m = re.match(r"^(?:git|ssh)://([^/]+)/(.+)$", url)
    if m:
        url = "https://%s/%s" % (m.group(1), m.group(2))
    m = re.match(r"^git@([^:]+):(.+)$", url)
    if m:
        url = "https://%s/%s" % (m.group(1), m.group(2))
    if url.endswith(".git"):
        url = url[: -len(".git")]
    return url.rstrip("/")


def load_override_map(path: str) -> dict[str, str]:
    """Override map file: ``package_name repository_url`` pairs, one per line."""
    overrides: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            name, _, url = line.partition(" ")
            if name and url.strip():
                overrides[name] = url.strip()
    return overrides


def _pypi_repository_url(metadata: dict) -> str | None:
    info = metadata.get("info") or {}
    urls = info.get("project_urls") or {}
    for key in ("Source", "Source Code", "Repository", "Code", "Homepage", "GitHub"):
        for candidate_key, candidate in urls.items():
            if candidate_key.lower() == key.lower() and candidate:
                return candidate
    home = info.get("home_page")
    return home or None


def _npm_repository_url(metadata: dict) -> str | None:
    repository = metadata.get("repository")
    if isinstance(repository, dict):
        return repository.get("url") or None
    if isinstance(repository, str):
        return repository or None
    return None


class RegistryClient:
    def __init__(
        self,
        pypi_template: str = DEFAULT_PYPI_TEMPLATE,
        npm_template: str = DEFAULT_NPM_TEMPLATE,
        overrides: dict[str, str] | None = None,
        fixture_dir: str | None = None,
        session: "requests.Session | None" = None,
        timeout: float = 10.0,
    ):
        self.templates = {
            Ecosystem.PYPI: pypi_template,
            Ecosystem.NPM: npm_template,
        }
        self.overrides = dict(overrides or {})
        self.fixture_dir = fixture_dir
        self.session = session
        self.timeout = timeout

    def resolve_repository(
        self, ecosystem: Ecosystem, package_name: str
    ) -> PackageCoordinates:
        if not package_name:
            raise ValueError("package_name must be non-empty")
        if package_name in self.overrides:
            return PackageCoordinates(
                ecosystem,
                package_name,
                normalize_repository_url(self.overrides[package_name]),
                ResolutionSource.OVERRIDE_MAP,
            )
        metadata = self._fetch_metadata(ecosystem, package_name)
        if metadata is None:
            return PackageCoordinates(
                ecosystem, package_name, None, ResolutionSource.UNRESOLVED
            )
        if ecosystem is Ecosystem.PYPI:
            url = _pypi_repository_url(metadata)
        else:
            url = _npm_repository_url(metadata)
        if not url:
            return PackageCoordinates(
                ecosystem, package_name, None, ResolutionSource.UNRESOLVED
            )
        return PackageCoordinates(
            ecosystem,
            package_name,
            normalize_repository_url(url),
            ResolutionSource.REGISTRY_METADATA,
        )

    def _fetch_metadata(self, ecosystem: Ecosystem, package_name: str) -> dict | None:
        if self.fixture_dir is not None:
            path = os.path.join(
                self.fixture_dir, ecosystem.value, package_name.replace("/", "__") + ".json"
            )
            if not os.path.exists(path):
                return None
            with open(path, "r", encoding="utf-8") as fh:
                return json.load(fh)
        url = self.templates[ecosystem].format(package=package_name)
        session = self.session or requests
        try:
            response = session.get(url, timeout=self.timeout)
        except requests.RequestException as exc:
            raise RegistryUnavailable(str(exc)) from exc
        if response.status_code == 404:
            return None
        if response.status_code >= 500:
            raise RegistryUnavailable("registry returned %d" % response.status_code)
        response.raise_for_status()
        return response.json()
