"""Deterministic text, author-string, and DOI normalization.

Titles, abstracts and author names arrive with LaTeX markup, diacritics,
and inconsistent punctuation; every comparison in the matcher runs on the
normalized forms produced here. The pipeline is fixed and ordered so that
exact-equality keys (the naive title+authors match) are reproducible:

1. NFKD decomposition, combining marks dropped
2. math segments ``$...$`` reduced to their content with ``\\commands`` removed
3. ``\\command{arg}`` reduced to ``arg``, bare ``\\command`` removed
4. structural markers ``{ } ^ _ ~`` deleted
5. punctuation mapped to spaces, except hyphens joining word characters
6. lowercased, whitespace collapsed

All functions here are total and idempotent.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from functools import lru_cache


class DoiError(ValueError):
    """Raised when a string cannot be canonicalized into a DOI."""


@dataclass(frozen=True)
class NormalizedText:
    value: str

    @property
    def token_count(self) -> int:
        return len(self.value.split())

    def tokens(self) -> list[str]:
        return self.value.split()


@dataclass(frozen=True)
class AuthorName:
    family: str
    given: str
    raw: str


_MATH_RE = re.compile(r"\$\$?(.*?)\$\$?", re.DOTALL)
_CMD_ARG_RE = re.compile(r"\\([a-zA-Z]+|[^a-zA-Z\s])\s*\{([^{}]*)\}")
_CMD_RE = re.compile(r"\\([a-zA-Z]+|[^a-zA-Z\s])")
_DROPPED = set("{}^_~")


def _strip_latex(text: str) -> str:
    text = _MATH_RE.sub(lambda m: _CMD_RE.sub("", m.group(1)), text)
    # peel nested \cmd{...} from the inside out
    while True:
        text, n = _CMD_ARG_RE.subn(r"\2", text)
        if n == 0:
            break
    return _CMD_RE.sub("", text)


def _is_word_char(ch: str) -> bool:
    return ch.isalpha() or ch.isdigit()


@lru_cache(maxsize=65536)
def normalize_text(raw: str) -> NormalizedText:
    """Canonical lowercase form of a title, abstract, or name fragment."""
    text = unicodedata.normalize("NFKD", raw)
    text = "".join(ch for ch in text if not unicodedata.combining(ch))
    text = _strip_latex(text)
    out: list[str] = []
    for ch in text:
        if ch in _DROPPED:
            continue
        if _is_word_char(ch):
            out.append(ch)
        elif unicodedata.category(ch) == "Pd" or ch == "-":
            out.append("-")
        else:
            out.append(" ")
    text = "".join(out)
    text = re.sub(r"-{2,}", "-", text)
    # hyphens survive only between word characters
    text = re.sub(r"(?<![^\s])-|-(?![^\s])", " ", text)
    text = text.lower()
    text = " ".join(text.split())
    return NormalizedText(text)


_AND_RE = re.compile(r"\s+and\s+")


def _parse_given_family(part: str, raw: str) -> AuthorName:
    tokens = part.split()
    if len(tokens) == 1:
        return AuthorName(family=tokens[0], given="", raw=raw)
    return AuthorName(family=tokens[-1], given=" ".join(tokens[:-1]), raw=raw)


def split_authors(raw: str) -> list[AuthorName]:
    """Split an author byline into individual names.

    Separators are ";", " and ", and commas. A single comma reads as
    "Family, Given" unless both sides are multi-token (then it separates
    two natural-order names, the common arXiv byline). Longer comma lists
    are read as alternating "Family, Given" pairs when the part count is
    even and every given slot is a single token; otherwise commas separate
    whole names in "Given Family" order. A string that yields no parseable
    name comes back as a single family-only entry so no mention is lost.
    """
    if not raw.strip():
        return []
    names: list[AuthorName] = []
    for chunk in raw.split(";"):
        for piece in _AND_RE.split(chunk):
            piece = piece.strip()
            if not piece:
                continue
            parts = [p.strip() for p in piece.split(",")]
            parts = [p for p in parts if p]
            if not parts:
                continue
            if len(parts) == 1:
                names.append(_parse_given_family(parts[0], parts[0]))
            elif len(parts) == 2 and (len(parts[0].split()) == 1
                                      or len(parts[1].split()) == 1):
                names.append(AuthorName(family=parts[0], given=parts[1],
                                        raw=f"{parts[0]}, {parts[1]}"))
            elif len(parts) % 2 == 0 and all(
                len(parts[i].split()) == 1 for i in range(1, len(parts), 2)
            ):
                for i in range(0, len(parts), 2):
                    names.append(AuthorName(family=parts[i], given=parts[i + 1],
                                            raw=f"{parts[i]}, {parts[i + 1]}"))
            else:
                for p in parts:
                    names.append(_parse_given_family(p, p))
    good = [n for n in names if normalize_text(n.family).value]
    if not good:
        return [AuthorName(family=raw.strip(), given="", raw=raw.strip())]
    return good


def author_key(name: AuthorName) -> tuple[str, str]:
    """Normalized (family, given) pair used for identity comparisons."""
    return (normalize_text(name.family).value, normalize_text(name.given).value)


_DOI_PREFIXES = (
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "doi.org/",
    "doi:",
)
_DOI_RE = re.compile(r"^10\.[^/\s]+/\S+$")


def normalize_doi(raw: str) -> str:
    """Canonical lowercase DOI, or DoiError for anything that is not one."""
    doi = raw.strip()
    stripped = True
    while stripped:
        stripped = False
        lowered = doi.lower()
        for prefix in _DOI_PREFIXES:
            if lowered.startswith(prefix):
                doi = doi[len(prefix):].strip()
                stripped = True
                break
    doi = doi.strip().lower()
    if not _DOI_RE.match(doi):
        raise DoiError(f"not a DOI: {raw!r}")
    return doi
