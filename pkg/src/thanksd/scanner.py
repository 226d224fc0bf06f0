"""Stateless line scanner: finds every line that interfaces with an
imported package and classifies what a thanks on that line targets.

The scanner is deliberately regex-based, not an AST parser. Lines inside
string literals or comments may false-positive; that is an accepted
property of the grammar (see :mod:`thanksd.grammar`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from . import grammar


class Language(str, enum.Enum):
    PYTHON = "python"
    JAVASCRIPT = "javascript"
    TYPESCRIPT = "typescript"


EXTENSION_LANGUAGES = {
    ".py": Language.PYTHON,
    ".js": Language.JAVASCRIPT,
    ".jsx": Language.JAVASCRIPT,
    ".ts": Language.TYPESCRIPT,
    ".tsx": Language.TYPESCRIPT,
}


class Scope(str, enum.Enum):
    PACKAGE = "package"
    MEMBER = "member"
    CALL_SITE = "call_site"


@dataclass(frozen=True)
class SourceDocument:
    language: Language
    text: str
    path_hint: str | None = None

    @classmethod
    def from_path(cls, path: str, text: str) -> "SourceDocument":
        import os

        ext = os.path.splitext(path)[1].lower()
        try:
            language = EXTENSION_LANGUAGES[ext]
        except KeyError:
            raise ValueError("unsupported file extension: %r" % ext) from None
        return cls(language=language, text=text, path_hint=path)


@dataclass(frozen=True)
class ImportBinding:
    local_name: str
    package: str
    member_path: tuple[str, ...]
    line: int


@dataclass(frozen=True)
class UsageAnchor:
    line: int
    line_text: str
    scope: Scope
    targets: tuple[tuple[str, tuple[str, ...]], ...]

    def to_dict(self) -> dict:
        return {
            "line": self.line,
            "line_text": self.line_text,
            "scope": self.scope.value,
            "targets": [
                {"package": pkg, "member_path": list(mp)} for pkg, mp in self.targets
            ],
        }


def _is_identifier(name: str) -> bool:
    return bool(name) and name.replace("_", "a").isalnum() and not name[0].isdigit()


def _split_alias(item: str) -> tuple[str, str | None]:
    parts = item.split()
    if len(parts) == 3 and parts[1] == "as":
        return parts[0], parts[2]
    return item.strip(), None


def _python_bindings(line_text: str, line: int) -> list[ImportBinding]:
    stripped = line_text.strip()
    bindings: list[ImportBinding] = []
    if stripped.startswith("from "):
        head, _, tail = stripped[5:].partition(" import ")
        module = head.strip()
        if not module or module.startswith("."):
            return []  # relative import: the user's own code, never thanked
        segments = module.split(".")
        package, prefix = segments[0], tuple(segments[1:])
        for raw in tail.split(","):
            item = raw.strip().strip("()").strip()
            if not item:
                continue
            name, alias = _split_alias(item)
            if not _is_identifier(name):
                continue
            local = alias if alias and _is_identifier(alias) else name
            bindings.append(ImportBinding(local, package, prefix + (name,), line))
    elif stripped.startswith("import ") or stripped == "import":
        for raw in stripped[7:].split(","):
            item = raw.strip()
            if not item:
                continue
            name, alias = _split_alias(item)
            if name.startswith("."):
                continue
            segments = name.split(".")
            if not all(_is_identifier(s) for s in segments):
                continue
            package, members = segments[0], tuple(segments[1:])
            local = alias if alias and _is_identifier(alias) else segments[0]
            bindings.append(ImportBinding(local, package, members, line))
    return bindings


def _js_package_and_prefix(module_spec: str) -> tuple[str, tuple[str, ...]] | None:
    """Split an npm module specifier into (package, subpath segments)."""
    if module_spec.startswith(".") or module_spec.startswith("/"):
        return None  # relative/path import: not an external package
    segments = module_spec.split("/")
    if module_spec.startswith("@") and len(segments) >= 2:
        return "/".join(segments[:2]), tuple(segments[2:])
    return segments[0], tuple(segments[1:])


def _js_bindings(line_text: str, line: int) -> list[ImportBinding]:
    bindings: list[ImportBinding] = []
    m = grammar.JS_IMPORT_RE.search(line_text)
    if m:
        split = _js_package_and_prefix(m.group(1))
        if split is None:
            return []
        package, prefix = split
        clause = line_text.strip()[len("import"):].rsplit(" from ", 1)[0].strip()
        brace_start = clause.find("{")
        named_part = ""
        if brace_start != -1:
            named_part = clause[brace_start + 1 : clause.rfind("}")]
            clause = (clause[:brace_start] + clause[clause.rfind("}") + 1 :]).strip(", \t")
        for raw in clause.split(","):
            item = raw.strip()
            if not item:
                continue
            if item.startswith("*"):
                _, alias = _split_alias(item)
                if alias and _is_identifier(alias):
                    bindings.append(ImportBinding(alias, package, prefix, line))
            elif _is_identifier(item.split()[0]):
                bindings.append(ImportBinding(item.split()[0], package, prefix, line))
        for raw in named_part.split(","):
            item = raw.strip()
            if not item:
                continue
            name, alias = _split_alias(item)
            if not _is_identifier(name):
                continue
            local = alias if alias and _is_identifier(alias) else name
            bindings.append(ImportBinding(local, package, prefix + (name,), line))
        if not bindings:
            # Side-effect-free clause we could not parse; credit the package.
            bindings.append(ImportBinding(package, package, prefix, line))
        return bindings
    m = grammar.JS_REQUIRE_RE.search(line_text)
    if m:
        split = _js_package_and_prefix(m.group(3))
        if split is None:
            return []
        package, prefix = split
        braced = "{" in line_text[: m.start(2)]
        for raw in m.group(2).split(","):
            name = raw.strip()
            if not _is_identifier(name):
                continue
            member = prefix + (name,) if braced else prefix
            bindings.append(ImportBinding(name, package, member, line))
        return bindings
    return []


def _is_import_line(language: Language, line_text: str) -> bool:
    if language is Language.PYTHON:
        return grammar.PYTHON_IMPORT_RE.search(line_text) is not None
    return (
        grammar.JS_IMPORT_RE.search(line_text) is not None
        or grammar.JS_REQUIRE_RE.search(line_text) is not None
    )


def extract_imports(doc: SourceDocument) -> list[ImportBinding]:
    """Return every import binding introduced by the document, in file order.

    Relative and path-based imports are skipped: they name the user's own
    code, not an external package. Unmatchable text never raises.
    """
    bindings: list[ImportBinding] = []
    for line, text in enumerate(doc.text.splitlines(), start=1):
        if not _is_import_line(doc.language, text):
            continue
        if doc.language is Language.PYTHON:
            bindings.extend(_python_bindings(text, line))
        else:
            bindings.extend(_js_bindings(text, line))
    return bindings


def classify_scope(is_import_line: bool, member_paths: list[tuple[str, ...]]) -> Scope:
    """Import of a whole package -> PACKAGE, of a named member -> MEMBER,
    any matched non-import line -> CALL_SITE."""
    if not is_import_line:
        return Scope.CALL_SITE
    if any(not mp for mp in member_paths):
        return Scope.PACKAGE
    return Scope.MEMBER


def scan(doc: SourceDocument, deny: frozenset[str] | set[str] = frozenset()) -> list[UsageAnchor]:
    """Return one anchor per line that interfaces with an imported package.

    Import lines anchor the imported package or member; other lines anchor
    call-site usage of names bound by imports at or above them. ``deny``
    suppresses anchors for the listed package names (e.g. the standard
    library, for deployments that want that).
    """
    bindings = extract_imports(doc)
    by_line: dict[int, list[ImportBinding]] = {}
    for b in bindings:
        by_line.setdefault(b.line, []).append(b)

    anchors: list[UsageAnchor] = []
    in_scope: list[ImportBinding] = []
    call_re = attr_re = None
    for line, text in enumerate(doc.text.splitlines(), start=1):
        if line in by_line:
            in_scope.extend(by_line[line])
            call_re = attr_re = None  # name set changed; rebuild lazily
        if _is_import_line(doc.language, text):
            targets = _dedup(
                (b.package, b.member_path)
                for b in by_line.get(line, ())
                if b.package not in deny
            )
            if targets:
                scope = classify_scope(True, [mp for _, mp in targets])
                anchors.append(UsageAnchor(line, text, scope, targets))
            continue
        if not in_scope:
            continue
        if call_re is None:
            names = _dedup_names(b.local_name for b in in_scope)
            call_re = grammar.usage_call_pattern(names)
            attr_re = grammar.usage_attribute_pattern(names)
        if not (call_re.search(text) or attr_re.search(text)):
            continue
        targets = _usage_targets(text, in_scope, deny)
        if targets:
            anchors.append(UsageAnchor(line, text, Scope.CALL_SITE, targets))
    return anchors


def _usage_targets(
    text: str, bindings: list[ImportBinding], deny: frozenset[str] | set[str]
) -> tuple[tuple[str, tuple[str, ...]], ...]:
    import re

    found: list[tuple[int, tuple[str, tuple[str, ...]]]] = []
    for b in bindings:
        if b.package in deny:
            continue
        name = re.escape(b.local_name)
        for m in re.finditer(r"\b%s\.(\w+)" % name, text):
            found.append((m.start(), (b.package, b.member_path + (m.group(1),))))
        for m in re.finditer(r"\b%s\(" % name, text):
            found.append((m.start(), (b.package, b.member_path)))
    found.sort(key=lambda item: item[0])
    return _dedup(target for _, target in found)


def _dedup(items) -> tuple[tuple[str, tuple[str, ...]], ...]:
    seen = set()
    out = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return tuple(out)


def _dedup_names(names) -> list[str]:
    seen = set()
    out = []
    for n in names:
        if n not in seen:
            seen.add(n)
            out.append(n)
    return out
