import json
from datetime import datetime, timezone

import pytest

import genfixtures
from thanksd.attribution import (
    MAX_CONTRIBUTORS,
    NOREPLY_SUFFIX,
    AttributionResolver,
    PathConfidence,
    recent_contributors,
    resolve_member_path,
)
from thanksd.history import CommitRecord, FixtureHistory, write_fixture_bundle
from thanksd.ledger import ThankedObject
from thanksd.registry import (
    Ecosystem,
    RegistryClient,
    ResolutionSource,
    load_override_map,
    normalize_repository_url,
)
from thanksd.scanner import Language


def brute_force_contributors(commits, path=None):
    """Independent recomputation over the full log: sort by time (newest
    first), restrict to the path scope, drop noreply authors, keep the
    first appearance of each lowercased email, cap at 20."""
    ordered = sorted(commits, key=lambda c: c.timestamp, reverse=True)
    out = []
    seen = set()
    for commit in ordered:
        if path is not None:
            if not any(p == path or p.startswith(path + "/") for p in commit.paths):
                continue
        if commit.author_email.lower().endswith(NOREPLY_SUFFIX):
            continue
        key = commit.author_email.lower()
        if key in seen:
            continue
        seen.add(key)
        out.append((commit.author_email, commit.id))
        if len(out) == 20:
            break
    return out


class TestRecentContributors:
    def test_oracle_equivalence_100_synthetic_repos(self):
        for seed in range(100):
            commits, params = genfixtures.synthetic_history(seed)
            records = recent_contributors(commits)
            expected = brute_force_contributors(commits)
            assert [(r.email, r.latest_commit_id) for r in records] == expected
            assert len(records) <= MAX_CONTRIBUTORS
            assert [r.rank for r in records] == list(range(1, len(records) + 1))
            assert all(
                not r.email.lower().endswith(NOREPLY_SUFFIX) for r in records
            )
            if params["unique_non_noreply"] < 20:
                # Fewer than 20 unique authors: everyone is credited.
                assert len(records) == params["unique_non_noreply"]

    def test_path_scoped_oracle_equivalence(self):
        for seed in range(30):
            commits, _ = genfixtures.synthetic_history(seed)
            for path in ("src/core.py", "src/util/text.py", "docs/index.md"):
                records = recent_contributors(commits, path)
                expected = brute_force_contributors(commits, path)
                assert [(r.email, r.latest_commit_id) for r in records] == expected

    def test_fewer_than_twenty_returns_all(self):
        base = datetime(2023, 5, 1, tzinfo=timezone.utc)
        commits = [
            CommitRecord("c%d" % i, "Dev %d" % i, "dev%d@example.org" % i,
                         base.replace(day=1 + i), ("a.py",))
            for i in range(5)
        ]
        commits.reverse()
        assert len(recent_contributors(commits)) == 5

    def test_same_author_two_emails_counts_twice(self):
        base = datetime(2023, 5, 1, tzinfo=timezone.utc)
        commits = [
            CommitRecord("c2", "Dev", "dev@example.org", base.replace(day=2), ("a.py",)),
            CommitRecord("c1", "Dev", "dev@other.org", base.replace(day=1), ("a.py",)),
        ]
        assert len(recent_contributors(commits)) == 2

    def test_email_dedupe_is_case_insensitive(self):
        base = datetime(2023, 5, 1, tzinfo=timezone.utc)
        commits = [
            CommitRecord("c2", "Dev", "Dev@Example.org", base.replace(day=2), ("a.py",)),
            CommitRecord("c1", "Dev", "dev@example.org", base.replace(day=1), ("a.py",)),
        ]
        records = recent_contributors(commits)
        assert len(records) == 1
        assert records[0].latest_commit_id == "c2"

    def test_empty_history(self):
        assert recent_contributors([]) == []


class TestResolveMemberPath:
    TREE = [
        "lib/matplotlib/pyplot.py",
        "lib/matplotlib/figure.py",
        "doc/conf.py",
    ]

    def test_unique_match_is_exact(self):
        path, confidence = resolve_member_path(self.TREE, ("pyplot",), Ecosystem.PYPI)
        assert path == "lib/matplotlib/pyplot.py"
        assert confidence is PathConfidence.EXACT

    def test_empty_member_path_is_repo_fallback(self):
        assert resolve_member_path(self.TREE, (), Ecosystem.PYPI) == (
            None,
            PathConfidence.REPO_FALLBACK,
        )

    def test_ambiguity_prefers_shortest_path(self):
        tree = [
            "pkg/util.py",
            "pkg/sub/deep/util.py",
            "other/area/util.py",
        ]
        path, confidence = resolve_member_path(tree, ("util",), Ecosystem.PYPI)
        assert path == "pkg/util.py"
        assert confidence is PathConfidence.HEURISTIC

    def test_no_match_degrades_to_repo(self):
        assert resolve_member_path(self.TREE, ("imread",), Ecosystem.PYPI) == (
            None,
            PathConfidence.REPO_FALLBACK,
        )

    def test_directory_member_matches(self):
        tree = ["pkg/sparse/base.py", "pkg/dense/base.py"]
        path, confidence = resolve_member_path(tree, ("sparse",), Ecosystem.PYPI)
        assert path == "pkg/sparse"
        assert confidence is PathConfidence.EXACT

    def test_multi_segment_member(self):
        tree = ["src/lodash/fp/map.js", "src/lodash/map.js"]
        path, confidence = resolve_member_path(tree, ("fp", "map"), Ecosystem.NPM)
        assert path == "src/lodash/fp/map.js"
        assert confidence is PathConfidence.EXACT


class TestRegistry:
    def test_normalize_url_variants(self):
        assert (
            normalize_repository_url("git+https://github.com/a/b.git")
            == "https://github.com/a/b"
        )
        assert (
            normalize_repository_url("git@github.com:a/b.git")
            == "https://github.com/a/b"
        )
        assert (
            normalize_repository_url("git://github.com/a/b")
            == "https://github.com/a/b"
        )

    def test_fixture_metadata_pypi(self, tmp_path):
        fixture_dir = tmp_path / "registry"
        (fixture_dir / "pypi").mkdir(parents=True)
        (fixture_dir / "pypi" / "matplotlib.json").write_text(
            json.dumps(
                {
                    "info": {
                        "project_urls": {
                            "Source": "https://github.com/matplotlib/matplotlib"
                        }
                    }
                }
            )
        )
        client = RegistryClient(fixture_dir=str(fixture_dir))
        coords = client.resolve_repository(Ecosystem.PYPI, "matplotlib")
        assert coords.repository_url == "https://github.com/matplotlib/matplotlib"
        assert coords.resolution_source is ResolutionSource.REGISTRY_METADATA

    def test_fixture_metadata_npm(self, tmp_path):
        fixture_dir = tmp_path / "registry"
        (fixture_dir / "npm").mkdir(parents=True)
        (fixture_dir / "npm" / "quill.json").write_text(
            json.dumps({"repository": {"url": "git+https://github.com/slab/quill.git"}})
        )
        client = RegistryClient(fixture_dir=str(fixture_dir))
        coords = client.resolve_repository(Ecosystem.NPM, "quill")
        assert coords.repository_url == "https://github.com/slab/quill"

    def test_absent_package_is_unresolved(self, tmp_path):
        (tmp_path / "npm").mkdir()
        client = RegistryClient(fixture_dir=str(tmp_path))
        coords = client.resolve_repository(Ecosystem.NPM, "definitely-not-a-real-pkg-xyz")
        assert coords.resolution_source is ResolutionSource.UNRESOLVED
        assert coords.repository_url is None

    def test_override_map_beats_registry(self, tmp_path):
        override_file = tmp_path / "overrides.txt"
        override_file.write_text(
            "# comment\nmypkg https://git.example.org/mypkg\n"
        )
        overrides = load_override_map(str(override_file))
        client = RegistryClient(overrides=overrides, fixture_dir=str(tmp_path))
        coords = client.resolve_repository(Ecosystem.PYPI, "mypkg")
        assert coords.resolution_source is ResolutionSource.OVERRIDE_MAP
        assert coords.repository_url == "https://git.example.org/mypkg"


def _object(line_text, targets, language=Language.PYTHON):
    obj = ThankedObject((language, line_text), line_text)
    obj.count = 1
    obj.targets = list(targets)
    return obj


@pytest.fixture
def fixture_world(tmp_path):
    """Registry fixtures plus a history bundle for one package."""
    registry_dir = tmp_path / "registry"
    (registry_dir / "pypi").mkdir(parents=True)
    (registry_dir / "pypi" / "demolib.json").write_text(
        json.dumps(
            {"info": {"project_urls": {"Source": "https://github.com/demo/demolib"}}}
        )
    )
    commits, _ = genfixtures.synthetic_history(7)
    bundle = tmp_path / "history" / "demolib"
    write_fixture_bundle(
        str(bundle),
        head="commit-head",
        commits=commits,
        tree=genfixtures.TREE_PATHS,
    )
    client = RegistryClient(fixture_dir=str(registry_dir))
    resolver = AttributionResolver(
        client, lambda coords: FixtureHistory(str(bundle)), parallelism=2
    )
    return resolver, commits


class TestAttribute:
    def test_package_scope_is_repo_wide(self, fixture_world):
        resolver, commits = fixture_world
        result = resolver.attribute(_object("import demolib", [("demolib", ())]))
        assert result.resolved_path is None
        assert result.path_confidence is PathConfidence.REPO_FALLBACK
        assert [
            (r.email, r.latest_commit_id) for r in result.contributors
        ] == brute_force_contributors(commits)

    def test_member_scope_differs_from_repo_wide(self, tmp_path):
        registry_dir = tmp_path / "registry"
        (registry_dir / "pypi").mkdir(parents=True)
        (registry_dir / "pypi" / "demolib.json").write_text(
            json.dumps(
                {"info": {"project_urls": {"Source": "https://github.com/demo/demolib"}}}
            )
        )
        base = datetime(2023, 6, 1, tzinfo=timezone.utc)
        commits = [
            CommitRecord("c3", "C", "c@example.org", base.replace(day=3), ("src/other.py",)),
            CommitRecord("c2", "B", "b@example.org", base.replace(day=2), ("src/sparse.py",)),
            CommitRecord("c1", "A", "a@example.org", base.replace(day=1), ("src/sparse.py",)),
        ]
        bundle = tmp_path / "history" / "demolib"
        write_fixture_bundle(
            str(bundle), "head", commits, ["src/other.py", "src/sparse.py"]
        )
        resolver = AttributionResolver(
            RegistryClient(fixture_dir=str(registry_dir)),
            lambda coords: FixtureHistory(str(bundle)),
        )
        file_scoped = resolver.attribute(
            _object("from demolib import sparse", [("demolib", ("sparse",))])
        )
        repo_wide = resolver.attribute(_object("import demolib", [("demolib", ())]))
        assert file_scoped.resolved_path == "src/sparse.py"
        assert [r.email for r in file_scoped.contributors] == [
            "b@example.org",
            "a@example.org",
        ]
        assert [r.email for r in repo_wide.contributors] != [
            r.email for r in file_scoped.contributors
        ]

    def test_unresolved_goes_to_review_queue(self, fixture_world):
        resolver, _ = fixture_world
        result = resolver.attribute(_object("import ghostpkg", [("ghostpkg", ())]))
        assert result.contributors == ()
        assert result.coordinates.resolution_source is ResolutionSource.UNRESOLVED
        assert resolver.review_queue == [result]

    def test_deterministic_and_cached(self, fixture_world):
        resolver, _ = fixture_world
        obj = _object("import demolib", [("demolib", ())])
        first = resolver.attribute(obj)
        second = resolver.attribute(obj)
        assert first == second

    def test_multi_target_uses_first_and_records_rest(self, fixture_world):
        resolver, _ = fixture_world
        result = resolver.attribute(
            _object(
                "demolib.run(demolib.MODE)",
                [("demolib", ("run",)), ("demolib", ("MODE",))],
            )
        )
        assert result.extra_targets == (("demolib", ("MODE",)),)

    def test_roundtrip_serialization(self, fixture_world):
        resolver, _ = fixture_world
        result = resolver.attribute(_object("import demolib", [("demolib", ())]))
        from thanksd.attribution import AttributionResult

        assert AttributionResult.from_dict(result.to_dict()) == result
