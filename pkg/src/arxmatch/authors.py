"""Deterministic author-profile assignment.

A stand-in for a full disambiguation system: exact normalized-name match
joins an existing profile, ambiguity between same-named profiles is
resolved through shared coauthors, and anything else creates a new
profile with a readable slug id. Merged preprints hand their document key
over to the published record; authors dropped from the published version
keep the preprint key with a flag. The module boundary is narrow enough
that a stronger disambiguator can replace it wholesale.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import OUTCOME_UNMATCHED, CorpusStore, IntegrityError, MatchDecision
from .normalize import AuthorName, author_key

KIND_PREPRINT = "preprint"
KIND_PUBLISHED = "published"

DocKey = tuple[str, str]  # (kind, key)
NameKey = tuple[str, str]  # normalized (family, given)


@dataclass
class DocEntry:
    withdrawn: bool = False
    on_published_version: bool = True


@dataclass
class AuthorProfile:
    profile_id: str
    canonical_name: AuthorName
    documents: dict[DocKey, DocEntry] = field(default_factory=dict)

    @property
    def preprint_only(self) -> bool:
        return all(kind == KIND_PREPRINT for kind, _ in self.documents)

    def display_name(self) -> str:
        if self.canonical_name.given:
            return f"{self.canonical_name.family}, {self.canonical_name.given}"
        return self.canonical_name.family


def _slug(key: NameKey) -> str:
    family, given = key
    parts = [re.sub(r"\s+", "-", part) for part in (family, given) if part]
    return ".".join(parts) or "unknown"


class ProfileTable:
    """All profiles plus the document->authors registry behind coauthor checks."""

    def __init__(self) -> None:
        self.profiles: dict[str, AuthorProfile] = {}
        self._by_name: dict[NameKey, list[str]] = {}
        self._doc_names: dict[DocKey, set[NameKey]] = {}
        self._assigned: dict[tuple[DocKey, NameKey], str] = {}

    # -- profile creation ------------------------------------------------------

    def new_profile(self, name: AuthorName) -> AuthorProfile:
        key = author_key(name)
        base = _slug(key)
        pid = base
        ordinal = 0
        while pid in self.profiles:
            ordinal += 1
            pid = f"{base}.{ordinal}"
        profile = AuthorProfile(profile_id=pid, canonical_name=name)
        self.profiles[pid] = profile
        self._by_name.setdefault(key, []).append(pid)
        return profile

    # -- assignment --------------------------------------------------------------

    def register_document(self, kind: str, key: str, authors) -> DocKey:
        doc = (kind, key)
        self._doc_names[doc] = {author_key(n) for n in authors}
        return doc

    def assign_author(self, name: AuthorName, doc: DocKey,
                      withdrawn: bool = False) -> str:
        """Assign one author mention of a registered document to a profile.

        Exact normalized-name match wins; among several same-named
        profiles the one sharing a coauthor on any of its documents is
        preferred (then the smallest profile id). Idempotent per
        (name, document).
        """
        key = author_key(name)
        prior = self._assigned.get((doc, key))
        if prior is not None:
            return prior
        candidates = sorted(self._by_name.get(key, []))
        if not candidates:
            profile = self.new_profile(name)
        elif len(candidates) == 1:
            profile = self.profiles[candidates[0]]
        else:
            coauthors = self._doc_names.get(doc, set()) - {key}
            profile = self.profiles[candidates[0]]
            for pid in candidates:
                cand = self.profiles[pid]
                if any(coauthors & (self._doc_names.get(d, set()) - {key})
                       for d in cand.documents):
                    profile = cand
                    break
        profile.documents.setdefault(doc, DocEntry(withdrawn=withdrawn))
        self._assigned[(doc, key)] = profile.profile_id
        return profile.profile_id

    def assign_record(self, kind: str, key: str, authors,
                      withdrawn: bool = False) -> list[str]:
        doc = self.register_document(kind, key, authors)
        return [self.assign_author(n, doc, withdrawn=withdrawn) for n in authors]

    # -- merge and withdrawal -------------------------------------------------------

    def update_on_merge(self, decision: MatchDecision, store: CorpusStore) -> None:
        """Swap the preprint key for the published key on involved profiles.

        Authors missing from the published version keep the preprint key,
        flagged as not on the published version. Idempotent; raises
        IntegrityError when no profile knows the preprint at all.
        """
        if decision.outcome == OUTCOME_UNMATCHED:
            raise ValueError("cannot apply an unmatched decision")
        pre_doc = (KIND_PREPRINT, decision.preprint)
        pub = store.published[decision.matched_accession]
        pub_doc = self.register_document(KIND_PUBLISHED, pub.accession, pub.authors)
        pub_names = self._doc_names[pub_doc]
        holders = [p for p in self.profiles.values() if pre_doc in p.documents]
        if not holders:
            already = any(pub_doc in p.documents for p in self.profiles.values())
            if already:
                return  # merge previously applied
            raise IntegrityError(
                f"no profile holds preprint {decision.preprint}")
        for profile in sorted(holders, key=lambda p: p.profile_id):
            key = author_key(profile.canonical_name)
            if key in pub_names:
                profile.documents.pop(pre_doc)
                profile.documents.setdefault(
                    pub_doc, DocEntry(withdrawn=False,
                                      on_published_version=True))
                self._assigned[(pub_doc, key)] = profile.profile_id
            else:
                profile.documents[pre_doc].on_published_version = False

    def mark_withdrawn(self, pid: str, store: CorpusStore) -> None:
        store.mark_withdrawn(pid)  # raises on unknown id, store untouched
        doc = (KIND_PREPRINT, pid)
        for profile in self.profiles.values():
            if doc in profile.documents:
                profile.documents[doc].withdrawn = True

    # -- consistency and export ---------------------------------------------------------

    def check_invariants(self) -> None:
        for profile in self.profiles.values():
            assert profile.documents, f"orphan profile {profile.profile_id}"
            assert profile.preprint_only == all(
                kind == KIND_PREPRINT for kind, _ in profile.documents)

    def export_jsonl(self, path: str | Path) -> None:
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            for pid in sorted(self.profiles):
                profile = self.profiles[pid]
                docs = [
                    {
                        "kind": kind,
                        "key": key,
                        "withdrawn": entry.withdrawn,
                        "on_published_version": entry.on_published_version,
                    }
                    for (kind, key), entry in sorted(profile.documents.items())
                ]
                fh.write(json.dumps(
                    {
                        "profile_id": pid,
                        "canonical_name": profile.display_name(),
                        "documents": docs,
                    },
                    sort_keys=True, ensure_ascii=False, separators=(",", ":"),
                ))
                fh.write("\n")
        os.replace(tmp, path)


def build_profiles(store: CorpusStore) -> ProfileTable:
    """Assign every stored preprint's authors, in sorted id order."""
    table = ProfileTable()
    for pid in sorted(store.preprints):
        rec = store.preprints[pid]
        table.assign_record(KIND_PREPRINT, pid, rec.authors,
                            withdrawn=rec.withdrawn)
    return table
