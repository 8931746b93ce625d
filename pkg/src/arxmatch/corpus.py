"""Record types and the JSONL-backed corpus store.

The store keeps three collections (preprint records, published records,
match decisions) plus the merge assignments, persisted as one JSON Lines
file each inside a store directory. The DOI index is derived state,
rebuilt deterministically on load. Mutations require exclusive access;
between write phases the store may be read from many threads.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .normalize import AuthorName, DoiError, normalize_doi, split_authors

ARXIV_ID_RE = re.compile(r"^\d{4}\.\d{4,5}$|^[a-z-]+(\.[A-Z]{2})?/\d{7}$")
MSC_RE = re.compile(r"^\d{2}[A-Z-][0-9X-]{2}$")

DOCUMENT_TYPES = ("journal_article", "collection_article", "book")

OUTCOME_DOI = "doi_match"
OUTCOME_CLASSIFIER = "classifier_match"
OUTCOME_UNMATCHED = "unmatched"
OUTCOMES = (OUTCOME_DOI, OUTCOME_CLASSIFIER, OUTCOME_UNMATCHED)


class RecordError(ValueError):
    """A record violates its schema or an invariant."""


class IntegrityError(RuntimeError):
    """An operation would leave the store referencing missing records."""


def validate_arxiv_id(value: str) -> str:
    if not isinstance(value, str) or not ARXIV_ID_RE.match(value):
        raise RecordError(f"invalid arXiv identifier: {value!r}")
    return value


@dataclass(frozen=True)
class PreprintRecord:
    id: str
    version: int
    title: str
    authors: tuple[AuthorName, ...]
    abstract: str
    categories: tuple[str, ...]
    msc: tuple[str, ...]
    doi: str | None
    withdrawn: bool = False

    @property
    def primary_category(self) -> str:
        return self.categories[0]


@dataclass(frozen=True)
class PublishedRecord:
    accession: str
    title: str
    authors: tuple[AuthorName, ...]
    abstract: str | None
    doi: str | None
    source: str
    document_type: str
    msc: tuple[str, ...]


@dataclass(frozen=True)
class MatchDecision:
    preprint: str
    outcome: str
    matched_accession: str | None
    vector: tuple[float, float, float] | None
    decided_at: str

    def __post_init__(self):
        if self.outcome not in OUTCOMES:
            raise RecordError(f"unknown outcome: {self.outcome!r}")
        matched = self.outcome != OUTCOME_UNMATCHED
        if matched != (self.matched_accession is not None):
            raise RecordError("matched_accession must be present iff matched")
        if (self.vector is not None) != (self.outcome == OUTCOME_CLASSIFIER):
            raise RecordError("vector must be present iff classifier_match")


@dataclass
class IngestReport:
    added: int = 0
    replaced: int = 0
    rejected: int = 0
    errors: list[tuple[int, str]] = field(default_factory=list)

    def reject(self, line_no: int, reason: str) -> None:
        self.rejected += 1
        self.errors.append((line_no, reason))

    def as_dict(self) -> dict:
        return {
            "added": self.added,
            "replaced": self.replaced,
            "rejected": self.rejected,
            "errors": [{"line": n, "reason": r} for n, r in self.errors],
        }


def _parse_authors(items, where: str) -> tuple[AuthorName, ...]:
    if not isinstance(items, list) or not items:
        raise RecordError(f"{where}: authors must be a non-empty list")
    names: list[AuthorName] = []
    for entry in items:
        if not isinstance(entry, str) or not entry.strip():
            raise RecordError(f"{where}: author entries must be non-empty strings")
        names.extend(split_authors(entry))
    if not names:
        raise RecordError(f"{where}: no parseable author names")
    return tuple(names)


def _parse_msc(items, where: str) -> tuple[str, ...]:
    if items is None:
        return ()
    if not isinstance(items, list):
        raise RecordError(f"{where}: msc must be a list")
    for code in items:
        if not isinstance(code, str) or not MSC_RE.match(code):
            raise RecordError(f"{where}: invalid MSC code {code!r}")
    return tuple(items)


def _parse_doi(value) -> str | None:
    if value is None:
        return None
    if not isinstance(value, str):
        return None
    try:
        return normalize_doi(value)
    except DoiError:
        return None  # unusable DOI is treated as absent


def preprint_from_json(obj: dict) -> PreprintRecord:
    if not isinstance(obj, dict):
        raise RecordError("record must be a JSON object")
    try:
        pid = validate_arxiv_id(obj["id"])
        version = obj["version"]
        title = obj["title"]
        abstract = obj["abstract"]
        categories = obj["categories"]
        withdrawn = obj["withdrawn"]
        authors = _parse_authors(obj["authors"], pid)
    except KeyError as exc:
        raise RecordError(f"missing field {exc.args[0]!r}") from exc
    if not isinstance(version, int) or version < 1:
        raise RecordError(f"{pid}: version must be a positive integer")
    if not isinstance(title, str) or not title.strip():
        raise RecordError(f"{pid}: title must be non-empty")
    if not isinstance(abstract, str):
        raise RecordError(f"{pid}: abstract must be a string")
    if not isinstance(categories, list) or not categories or not all(
        isinstance(c, str) and c for c in categories
    ):
        raise RecordError(f"{pid}: categories must be a non-empty list of codes")
    if not isinstance(withdrawn, bool):
        raise RecordError(f"{pid}: withdrawn must be a boolean")
    return PreprintRecord(
        id=pid,
        version=version,
        title=title,
        authors=authors,
        abstract=abstract,
        categories=tuple(categories),
        msc=_parse_msc(obj.get("msc"), pid),
        doi=_parse_doi(obj.get("doi")),
        withdrawn=withdrawn,
    )


def published_from_json(obj: dict) -> PublishedRecord:
    if not isinstance(obj, dict):
        raise RecordError("record must be a JSON object")
    try:
        accession = obj["accession"]
        title = obj["title"]
        abstract = obj["abstract"]
        source = obj["source"]
        document_type = obj["document_type"]
        authors = _parse_authors(obj["authors"], str(obj.get("accession")))
    except KeyError as exc:
        raise RecordError(f"missing field {exc.args[0]!r}") from exc
    if not isinstance(accession, str) or not accession.strip():
        raise RecordError("accession must be a non-empty string")
    if not isinstance(title, str) or not title.strip():
        raise RecordError(f"{accession}: title must be non-empty")
    if abstract is not None and not isinstance(abstract, str):
        raise RecordError(f"{accession}: abstract must be a string or null")
    if not isinstance(source, str):
        raise RecordError(f"{accession}: source must be a string")
    if document_type not in DOCUMENT_TYPES:
        raise RecordError(f"{accession}: unknown document_type {document_type!r}")
    return PublishedRecord(
        accession=accession,
        title=title,
        authors=authors,
        abstract=abstract,
        doi=_parse_doi(obj.get("doi")),
        source=source,
        document_type=document_type,
        msc=_parse_msc(obj.get("msc"), accession),
    )


def _authors_to_json(authors: tuple[AuthorName, ...]) -> list[str]:
    return [n.raw for n in authors]


def preprint_to_json(rec: PreprintRecord) -> dict:
    return {
        "id": rec.id,
        "version": rec.version,
        "title": rec.title,
        "authors": _authors_to_json(rec.authors),
        "abstract": rec.abstract,
        "categories": list(rec.categories),
        "msc": list(rec.msc),
        "doi": rec.doi,
        "withdrawn": rec.withdrawn,
    }


def published_to_json(rec: PublishedRecord) -> dict:
    return {
        "accession": rec.accession,
        "title": rec.title,
        "authors": _authors_to_json(rec.authors),
        "abstract": rec.abstract,
        "doi": rec.doi,
        "source": rec.source,
        "document_type": rec.document_type,
        "msc": list(rec.msc),
    }


def decision_to_json(d: MatchDecision) -> dict:
    return {
        "preprint": d.preprint,
        "outcome": d.outcome,
        "matched_accession": d.matched_accession,
        "vector": list(d.vector) if d.vector is not None else None,
        "decided_at": d.decided_at,
    }


def decision_from_json(obj: dict) -> MatchDecision:
    vector = obj.get("vector")
    return MatchDecision(
        preprint=obj["preprint"],
        outcome=obj["outcome"],
        matched_accession=obj.get("matched_accession"),
        vector=tuple(vector) if vector is not None else None,
        decided_at=obj["decided_at"],
    )


def _dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


class CorpusStore:
    """In-memory corpus with JSONL persistence and a derived DOI index."""

    PREPRINTS_FILE = "preprints.jsonl"
    PUBLISHED_FILE = "published.jsonl"
    DECISIONS_FILE = "decisions.jsonl"
    MERGES_FILE = "merges.jsonl"

    def __init__(self) -> None:
        self.preprints: dict[str, PreprintRecord] = {}
        self.published: dict[str, PublishedRecord] = {}
        self.decisions: dict[str, MatchDecision] = {}
        self.merges: dict[str, str] = {}
        self.doi_index: dict[str, set[str]] = {}
        self.mutations = 0

    # -- mutation bookkeeping ------------------------------------------------

    def _touch(self) -> None:
        self.mutations += 1

    # -- ingest ----------------------------------------------------------------

    def ingest_preprints(self, path: str | Path) -> IngestReport:
        report = IngestReport()
        for line_no, obj in self._read_jsonl(path, report):
            try:
                rec = preprint_from_json(obj)
            except RecordError as exc:
                report.reject(line_no, str(exc))
                continue
            old = self.preprints.get(rec.id)
            if old is None:
                self.preprints[rec.id] = rec
                report.added += 1
            elif rec.version > old.version:
                self.preprints[rec.id] = rec
                report.replaced += 1
            else:
                report.reject(line_no, f"{rec.id}: version {rec.version} is not newer")
        self._touch()
        return report

    def ingest_published(self, path: str | Path) -> IngestReport:
        report = IngestReport()
        for line_no, obj in self._read_jsonl(path, report):
            try:
                rec = published_from_json(obj)
            except RecordError as exc:
                report.reject(line_no, str(exc))
                continue
            if rec.accession in self.published:
                report.reject(line_no, f"duplicate accession {rec.accession}")
                continue
            self.published[rec.accession] = rec
            if rec.doi is not None:
                self.doi_index.setdefault(rec.doi, set()).add(rec.accession)
            report.added += 1
        self._touch()
        return report

    @staticmethod
    def _read_jsonl(path, report: IngestReport):
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    yield line_no, json.loads(line)
                except json.JSONDecodeError as exc:
                    report.reject(line_no, f"malformed JSON: {exc.msg}")

    # -- decisions and merges ---------------------------------------------------

    def record_decision(self, decision: MatchDecision) -> None:
        if decision.preprint not in self.preprints:
            raise IntegrityError(f"decision for unknown preprint {decision.preprint}")
        self.decisions[decision.preprint] = decision
        self._touch()

    def merge_on_publication(self, decision: MatchDecision) -> dict:
        """Make the published record canonical for a matched preprint.

        Returns the merged entry view: the published record with the arXiv
        identifier attached as a link. Idempotent; the store is untouched
        on error.
        """
        if decision.outcome == OUTCOME_UNMATCHED:
            raise ValueError("cannot merge an unmatched decision")
        pid = decision.preprint
        accession = decision.matched_accession
        if pid not in self.preprints:
            raise IntegrityError(f"unknown preprint {pid}")
        if accession not in self.published:
            raise IntegrityError(f"unknown accession {accession}")
        if self.merges.get(pid) not in (None, accession):
            raise IntegrityError(
                f"{pid} already merged into {self.merges[pid]}, not {accession}"
            )
        if self.merges.get(pid) != accession:
            self.merges[pid] = accession
            self._touch()
        view = published_to_json(self.published[accession])
        view["arxiv_link"] = pid
        return view

    def is_merged(self, pid: str) -> bool:
        return pid in self.merges

    def unmerged_preprints(self) -> list[str]:
        return [pid for pid in sorted(self.preprints) if pid not in self.merges]

    def unpublished_preprints(self) -> list[str]:
        """Preprints with no matched decision — the 'arXiv preprint' listing."""
        out = []
        for pid in sorted(self.preprints):
            d = self.decisions.get(pid)
            if d is None or d.outcome == OUTCOME_UNMATCHED:
                out.append(pid)
        return out

    def mark_withdrawn(self, pid: str) -> PreprintRecord:
        rec = self.preprints.get(pid)
        if rec is None:
            raise IntegrityError(f"unknown preprint {pid}")
        if not rec.withdrawn:
            rec = replace(rec, withdrawn=True)
            self.preprints[pid] = rec
            self._touch()
        return rec

    # -- derived state ----------------------------------------------------------

    def rebuild_doi_index(self) -> None:
        index: dict[str, set[str]] = {}
        for rec in self.published.values():
            if rec.doi is not None:
                index.setdefault(rec.doi, set()).add(rec.accession)
        self.doi_index = index

    def published_fingerprint(self) -> str:
        h = hashlib.sha256()
        for accession in sorted(self.published):
            h.update(_dumps(published_to_json(self.published[accession])).encode())
            h.update(b"\n")
        return h.hexdigest()

    # -- persistence --------------------------------------------------------------

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self._write_jsonl(
            directory / self.PREPRINTS_FILE,
            (preprint_to_json(self.preprints[k]) for k in sorted(self.preprints)),
        )
        self._write_jsonl(
            directory / self.PUBLISHED_FILE,
            (published_to_json(self.published[k]) for k in sorted(self.published)),
        )
        self._write_jsonl(
            directory / self.DECISIONS_FILE,
            (decision_to_json(self.decisions[k]) for k in sorted(self.decisions)),
        )
        self._write_jsonl(
            directory / self.MERGES_FILE,
            ({"preprint": k, "accession": self.merges[k]} for k in sorted(self.merges)),
        )

    @staticmethod
    def _write_jsonl(path: Path, objects) -> None:
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            for obj in objects:
                fh.write(_dumps(obj))
                fh.write("\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, directory: str | Path) -> "CorpusStore":
        directory = Path(directory)
        store = cls()
        report = IngestReport()
        path = directory / cls.PREPRINTS_FILE
        if path.exists():
            for _line_no, obj in cls._read_jsonl(path, report):
                rec = preprint_from_json(obj)
                store.preprints[rec.id] = rec
        path = directory / cls.PUBLISHED_FILE
        if path.exists():
            for _line_no, obj in cls._read_jsonl(path, report):
                rec = published_from_json(obj)
                store.published[rec.accession] = rec
        path = directory / cls.DECISIONS_FILE
        if path.exists():
            for _line_no, obj in cls._read_jsonl(path, report):
                d = decision_from_json(obj)
                store.decisions[d.preprint] = d
        path = directory / cls.MERGES_FILE
        if path.exists():
            for _line_no, obj in cls._read_jsonl(path, report):
                store.merges[obj["preprint"]] = obj["accession"]
        if report.errors:
            raise RecordError(f"corrupt store at {directory}: {report.errors[:3]}")
        store.rebuild_doi_index()
        return store
