"""Normative line grammar for detecting package-interfacing lines.

The four pattern families below are the single source of truth for what
counts as an import line or a usage line. They are written here verbatim
in their original (JavaScript-flavored) form and compiled into Python
equivalents next to them. Any behavioral deviation from the verbatim
patterns is a bug.

Family 1 - Python imports::

    ^(\\s*(?:from\\s+[\\w\\.]+)?\\s*import\\s+[\\w\\*\\, ]+(?:\\s+as\\s+[\\w]+)?)\\b/gm

Family 2 - JavaScript/TypeScript ``import ... from``::

    /^import\\s+.*\\s+from\\s+['"](.*)['"]/gm

Family 3 - JavaScript/TypeScript ``require``::

    /(const|let)\\s+\\{?\\s*([\\w,\\s]+)\\s*\\}?\\s*=\\s*require\\s*\\(\\s*['"]([^'"]+)['"]\\s*\\)[^;]*;/g

Family 4 - usage lines, templated over the bound names. Given the list of
imported names, two patterns are constructed (one for ``name.function()``
and bare ``name()`` calls, one for ``name.attribute`` access)::

    new RegExp(`\\\\b(?:${names.map(name => `(?:(?:${name})\\\\.\\\\w+|${name})`).join('|')})\\\\(`)
    new RegExp(`\\\\b(?:${names.map(name => `(?:(?:${name})\\\\.\\\\w+)`).join('|')})`)

The ``/gm`` flags translate to per-line application: every pattern here is
tested against each physical line of the file.
"""

from __future__ import annotations

import re
from typing import Iterable

# Verbatim pattern sources (sans JS literal delimiters and flags).
PYTHON_IMPORT_SOURCE = r"^(\s*(?:from\s+[\w\.]+)?\s*import\s+[\w\*\, ]+(?:\s+as\s+[\w]+)?)\b"
JS_IMPORT_SOURCE = r"^import\s+.*\s+from\s+['\"](.*)['\"]"
JS_REQUIRE_SOURCE = r"(const|let)\s+\{?\s*([\w,\s]+)\s*\}?\s*=\s*require\s*\(\s*['\"]([^'\"]+)['\"]\s*\)[^;]*;"

PYTHON_IMPORT_RE = re.compile(PYTHON_IMPORT_SOURCE)
JS_IMPORT_RE = re.compile(JS_IMPORT_SOURCE)
JS_REQUIRE_RE = re.compile(JS_REQUIRE_SOURCE)


def usage_call_pattern(names: Iterable[str]) -> "re.Pattern[str] | None":
    """Compile the name.function() / name() detector for the given names."""
    names = list(names)
    if not names:
        return None
    alternatives = "|".join(
        "(?:(?:%s)\\.\\w+|%s)" % (re.escape(n), re.escape(n)) for n in names
    )
    return re.compile("\\b(?:%s)\\(" % alternatives)


def usage_attribute_pattern(names: Iterable[str]) -> "re.Pattern[str] | None":
    """Compile the name.attribute detector for the given names."""
    names = list(names)
    if not names:
        return None
    alternatives = "|".join("(?:(?:%s)\\.\\w+)" % re.escape(n) for n in names)
    return re.compile("\\b(?:%s)" % alternatives)
