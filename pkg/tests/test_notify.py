from collections import Counter
from datetime import datetime, timezone

import pytest
from hypothesis import given, settings, strategies as st

import genfixtures
from thanksd.attribution import (
    AttributionResult,
    ContributorRecord,
    PathConfidence,
)
from thanksd.ledger import ThankedObject, aggregate_events
from thanksd.notify import (
    ConfigurationError,
    DigestTemplates,
    Dispatcher,
    DispatchMode,
    HugReport,
    IdempotencyLedger,
    ReportSegment,
    build_reports,
    outbox_filename,
    render_email,
)
from thanksd.registry import Ecosystem, PackageCoordinates, ResolutionSource
from thanksd.scanner import Language

WINDOW = ("2024-03-01", "2024-03-22")


def contributor(email, name=None, rank=1):
    return ContributorRecord(
        display_name=name or email.split("@")[0],
        email=email,
        latest_commit_id="c-" + email,
        latest_commit_time=datetime(2024, 2, 1, tzinfo=timezone.utc),
        rank=rank,
    )


def make_object(line_text, count=1, notes=(), language=Language.PYTHON):
    obj = ThankedObject((language, line_text), line_text)
    obj.count = count
    obj.notes = list(notes)
    obj.targets = [(line_text.split()[-1], ())]
    return obj


def attribution_for(obj, contributors):
    return AttributionResult(
        object_key=obj.object_key,
        coordinates=PackageCoordinates(
            ecosystem=Ecosystem.PYPI,
            package_name=obj.targets[0][0],
            repository_url="https://example.org/repo",
            resolution_source=ResolutionSource.REGISTRY_METADATA,
        ),
        resolved_path=None,
        path_confidence=PathConfidence.REPO_FALLBACK,
        contributors=tuple(contributors),
    )


class TestBuildReports:
    def test_one_object_two_contributors(self):
        obj = make_object("import cv2", count=3, notes=["so useful"])
        reports = build_reports(
            [attribution_for(obj, [contributor("a@x.org"), contributor("b@x.org", rank=2)])],
            [obj],
            WINDOW,
        )
        assert [r.contributor_email for r in reports] == ["a@x.org", "b@x.org"]
        for report in reports:
            (segment,) = report.segments
            assert segment.display_line == "import cv2"
            assert segment.thanks_count == 3
            assert segment.notes == ("so useful",)

    def test_contributor_on_two_objects_gets_one_report(self):
        a = make_object("import cv2", count=5)
        b = make_object("import numpy", count=1)
        reports = build_reports(
            [
                attribution_for(a, [contributor("dev@x.org")]),
                attribution_for(b, [contributor("dev@x.org")]),
            ],
            [a, b],
            WINDOW,
        )
        (report,) = reports
        assert [s.display_line for s in report.segments] == [
            "import cv2",
            "import numpy",
        ]

    def test_segment_order_count_then_line(self):
        objs = [
            make_object("import zlib", count=2),
            make_object("import abc2", count=2),
            make_object("import mid", count=7),
        ]
        reports = build_reports(
            [attribution_for(o, [contributor("dev@x.org")]) for o in objs], objs, WINDOW
        )
        (report,) = reports
        assert [s.display_line for s in report.segments] == [
            "import mid",
            "import abc2",
            "import zlib",
        ]

    def test_zero_attributions(self):
        assert build_reports([], [make_object("import x")], WINDOW) == []

    def test_unknown_object_raises(self):
        obj = make_object("import cv2")
        with pytest.raises(ValueError):
            build_reports([attribution_for(obj, [contributor("a@x.org")])], [], WINDOW)

    def test_study_fixture_count_and_histogram(self):
        objects = aggregate_events(genfixtures.study_events())
        attributions = genfixtures.study_attributions(objects)
        reports = build_reports(attributions, objects, WINDOW)
        assert len(reports) == 550
        histogram = Counter(len(r.segments) for r in reports)
        assert histogram[1] == 470
        assert sum(histogram[k] for k in range(2, 9)) == 80
        assert set(histogram) <= set(range(1, 9))

    @given(st.data())
    @settings(max_examples=30, deadline=None)
    def test_each_credit_appears_in_exactly_one_segment(self, data):
        n_objects = data.draw(st.integers(min_value=1, max_value=8))
        objs = [make_object("import pkg%d" % i, count=i + 1) for i in range(n_objects)]
        emails = ["dev%d@x.org" % i for i in range(data.draw(st.integers(1, 6)))]
        attributions = []
        expected = Counter()
        for obj in objs:
            chosen = data.draw(
                st.lists(st.sampled_from(emails), unique=True, max_size=len(emails))
            )
            attributions.append(
                attribution_for(obj, [contributor(e, rank=i + 1) for i, e in enumerate(chosen)])
            )
            for email in chosen:
                expected[email] += 1
        reports = build_reports(attributions, objs, WINDOW)
        got = {r.contributor_email: len(r.segments) for r in reports}
        assert got == {e: n for e, n in expected.items() if n}


class TestRenderEmail:
    def setup_method(self):
        self.templates = DigestTemplates()

    def test_count_line_and_note_verbatim(self):
        report = HugReport(
            contributor_email="dev@x.org",
            contributor_name="Dev",
            segments=(
                ReportSegment(
                    display_line="img = cv2.imread('watch.jpg',cv2.IMREAD_GRAYSCALE)",
                    thanks_count=4,
                    notes=("Thanks! I'm super relying on this!",),
                ),
            ),
            window=WINDOW,
            context_preamble="People using your code said thanks.",
        )
        rendered = render_email(report, self.templates)
        assert "To: dev@x.org" in rendered
        assert "4" in rendered
        assert "img = cv2.imread('watch.jpg',cv2.IMREAD_GRAYSCALE)" in rendered
        assert "> Thanks! I'm super relying on this!" in rendered
        assert "People using your code said thanks." in rendered

    def test_html_part_escapes_line(self):
        report = HugReport(
            contributor_email="dev@x.org",
            contributor_name="Dev",
            segments=(ReportSegment("x = a < b", 1, ()),),
            window=WINDOW,
            context_preamble="",
        )
        rendered = render_email(report, self.templates)
        assert "<code>x = a &lt; b</code>" in rendered
        # Plain part keeps the raw line.
        assert "x = a < b" in rendered

    def test_segment_order_is_preserved_in_body(self):
        report = HugReport(
            contributor_email="dev@x.org",
            contributor_name="Dev",
            segments=(
                ReportSegment("import heavy", 5, ()),
                ReportSegment("import light", 1, ()),
            ),
            window=WINDOW,
            context_preamble="",
        )
        rendered = render_email(report, self.templates)
        assert rendered.index("import heavy") < rendered.index("import light")

    def test_no_notes_renders_cleanly(self):
        report = HugReport(
            contributor_email="dev@x.org",
            contributor_name="Dev",
            segments=(ReportSegment("import cv2", 1, ()),),
            window=WINDOW,
            context_preamble="",
        )
        rendered = render_email(report, self.templates)
        assert "\r\n> " not in rendered
        assert "blockquote" not in rendered

    def test_deterministic(self):
        report = HugReport(
            contributor_email="dev@x.org",
            contributor_name="Dev",
            segments=(ReportSegment("import cv2", 2, ("merci",)),),
            window=WINDOW,
            context_preamble="hello",
        )
        assert render_email(report, self.templates) == render_email(
            report, self.templates
        )
        assert "Date:" not in render_email(report, self.templates)
        assert "Message-ID:" not in render_email(report, self.templates)

    @given(st.text(min_size=1, max_size=200).filter(lambda s: s.strip() and "\r" not in s and "\n" not in s))
    @settings(max_examples=40, deadline=None)
    def test_note_byte_fidelity_in_plain_part(self, note):
        report = HugReport(
            contributor_email="dev@x.org",
            contributor_name="Dev",
            segments=(ReportSegment("import cv2", 1, (note,)),),
            window=WINDOW,
            context_preamble="",
        )
        assert "> %s" % note in render_email(report, self.templates)

    def test_broken_template_rejected_at_load(self, tmp_path):
        (tmp_path / "digest.txt").write_text("no placeholders here\n")
        (tmp_path / "digest.html").write_text("<p>{preamble}{segments}</p>\n----segment----\n{count}{line}\n")
        with pytest.raises(ConfigurationError):
            DigestTemplates(str(tmp_path))

    def test_missing_template_dir_rejected(self, tmp_path):
        with pytest.raises(ConfigurationError):
            DigestTemplates(str(tmp_path / "absent"))


def three_reports():
    return [
        HugReport(
            contributor_email="dev%d@x.org" % i,
            contributor_name="Dev %d" % i,
            segments=(ReportSegment("import pkg%d" % i, i + 1, ()),),
            window=WINDOW,
            context_preamble="",
        )
        for i in range(3)
    ]


class TestDispatch:
    def test_dry_run_writes_one_file_per_report(self, tmp_path):
        outbox = tmp_path / "outbox"
        dispatcher = Dispatcher(
            DigestTemplates(), str(outbox), IdempotencyLedger(str(tmp_path / "idem.ndjson"))
        )
        summary = dispatcher.dispatch(three_reports(), DispatchMode.DRY_RUN, "2024-03-01")
        assert (summary.written, summary.failed, summary.skipped) == (3, 0, 0)
        files = sorted(p.name for p in outbox.iterdir())
        assert files == sorted(
            outbox_filename("2024-03-01", "dev%d@x.org" % i) for i in range(3)
        )
        for name in files:
            assert name.startswith("2024-03-01-") and name.endswith(".eml")

    def test_redispatch_touches_only_failed_recipients(self, tmp_path, monkeypatch):
        outbox = tmp_path / "outbox"
        ledger_path = str(tmp_path / "idem.ndjson")
        dispatcher = Dispatcher(
            DigestTemplates(), str(outbox), IdempotencyLedger(ledger_path), parallelism=1
        )
        real_write = Dispatcher._write_message

        def flaky(self, window_stamp, recipient, rendered):
            if recipient == "dev1@x.org":
                raise OSError("disk full")
            real_write(self, window_stamp, recipient, rendered)

        monkeypatch.setattr(Dispatcher, "_write_message", flaky)
        first = dispatcher.dispatch(three_reports(), DispatchMode.DRY_RUN, "w1")
        assert (first.written, first.failed) == (2, 1)
        assert first.failures[0][0] == "dev1@x.org"

        monkeypatch.setattr(Dispatcher, "_write_message", real_write)
        written_before = {p.name: p.stat().st_mtime_ns for p in outbox.iterdir()}
        # Fresh dispatcher over the same idempotency ledger, as a rerun would be.
        second = Dispatcher(
            DigestTemplates(), str(outbox), IdempotencyLedger(ledger_path), parallelism=1
        ).dispatch(three_reports(), DispatchMode.DRY_RUN, "w1")
        assert (second.written, second.skipped, second.failed) == (1, 2, 0)
        after = {p.name: p.stat().st_mtime_ns for p in outbox.iterdir()}
        for name, mtime in written_before.items():
            assert after[name] == mtime
        assert len(after) == 3

    def test_same_window_rerun_skips_everyone(self, tmp_path):
        dispatcher = Dispatcher(
            DigestTemplates(),
            str(tmp_path / "outbox"),
            IdempotencyLedger(str(tmp_path / "idem.ndjson")),
        )
        dispatcher.dispatch(three_reports(), DispatchMode.DRY_RUN, "w1")
        rerun = dispatcher.dispatch(three_reports(), DispatchMode.DRY_RUN, "w1")
        assert (rerun.written, rerun.skipped) == (0, 3)
        # A different window is a fresh batch.
        next_window = dispatcher.dispatch(three_reports(), DispatchMode.DRY_RUN, "w2")
        assert next_window.written == 3

    def test_send_without_transport_is_fatal(self, tmp_path):
        dispatcher = Dispatcher(
            DigestTemplates(),
            str(tmp_path / "outbox"),
            IdempotencyLedger(str(tmp_path / "idem.ndjson")),
        )
        with pytest.raises(ConfigurationError):
            dispatcher.dispatch(three_reports(), DispatchMode.SEND, "w1")

    def test_unwritable_outbox_is_fatal(self, tmp_path):
        target = tmp_path / "not-a-dir"
        target.write_text("file in the way")
        dispatcher = Dispatcher(
            DigestTemplates(), str(target), IdempotencyLedger(str(tmp_path / "idem.ndjson"))
        )
        with pytest.raises(ConfigurationError):
            dispatcher.dispatch(three_reports(), DispatchMode.DRY_RUN, "w1")

    def test_rendered_files_are_byte_identical_across_runs(self, tmp_path):
        contents = []
        for attempt in ("one", "two"):
            outbox = tmp_path / attempt
            Dispatcher(
                DigestTemplates(),
                str(outbox),
                IdempotencyLedger(str(tmp_path / ("%s.ndjson" % attempt))),
            ).dispatch(three_reports(), DispatchMode.DRY_RUN, "w1")
            contents.append(
                {p.name: p.read_bytes() for p in outbox.iterdir()}
            )
        assert contents[0] == contents[1]


def test_outbox_filename_shape():
    name = outbox_filename("2024-03-01", "Dev@X.org")
    assert name == outbox_filename("2024-03-01", "dev@x.org")
    stamp, _, rest = name.partition("-")
    assert name.endswith(".eml")
    assert len(name) == len("2024-03-01") + 1 + 16 + len(".eml")
