"""Corporate owners of third-party domains and their reach across pages."""
from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from decimal import Decimal
from importlib import resources
from pathlib import Path
from typing import Iterable

import yaml

from .errors import DuplicateDomain, SchemaError
from .percent import percent

UNATTRIBUTED = "unattributed"

REVENUE_MODELS = {
    "advertising": "Advertising",
    "data broker": "Data Broker",
    "databroker": "Data Broker",
    "retail & hosting": "Retail & Hosting",
    "retailandhosting": "Retail & Hosting",
    "software & services": "Software & Services",
    "softwareandservices": "Software & Services",
}


def canonical_revenue_model(label: str) -> str:
    """Map spellings onto the fixed vocabulary; unknown labels pass through as Other."""
    return REVENUE_MODELS.get(str(label).strip().lower(), str(label).strip())


@dataclass(frozen=True)
class OwnerRecord:
    id: str
    display_name: str
    revenue_model: str
    domains: frozenset[str]

    @property
    def is_other_revenue(self) -> bool:
        return self.revenue_model not in REVENUE_MODELS.values()


@dataclass(frozen=True)
class OwnershipDb:
    records: tuple[OwnerRecord, ...]
    version: str
    built_at: datetime | None = None
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for rec in self.records:
            for domain in rec.domains:
                self._index[domain] = rec

    def owner(self, owner_id: str) -> OwnerRecord | None:
        return next((r for r in self.records if r.id == owner_id), None)

    def lookup(self, domain) -> OwnerRecord | None:
        return self._index.get(str(domain).lower().strip("."))

    def __len__(self):
        return len(self.records)


def load_owner_db(document: str | bytes) -> OwnershipDb:
    """Parse an ownership file (YAML: ``version``, ``built_at``, ``owners`` list).

    Each owner block needs ``id``, ``display_name``, ``revenue_model`` and a
    non-empty ``domains`` list. Without an explicit version the content
    digest is used.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        data = yaml.safe_load(document) or {}
    except yaml.YAMLError as exc:
        raise SchemaError(f"ownership file is not valid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise SchemaError("ownership file must be a mapping")
    version = str(data.get("version") or "sha256:" + hashlib.sha256(document.encode("utf-8")).hexdigest())
    built_at = data.get("built_at")
    if built_at is not None and not isinstance(built_at, datetime):
        try:
            built_at = datetime.fromisoformat(str(built_at))
        except ValueError:
            raise SchemaError(f"bad built_at {built_at!r}") from None

    records, seen_ids, claimed = [], set(), {}
    for block in data.get("owners") or ():
        if not isinstance(block, dict):
            raise SchemaError("owner block must be a mapping")
        missing = [k for k in ("id", "display_name", "revenue_model", "domains") if not block.get(k)]
        if missing:
            raise SchemaError(f"owner block {block.get('id')!r} missing {', '.join(missing)}")
        owner_id = str(block["id"])
        if owner_id in seen_ids:
            raise SchemaError(f"duplicate owner id {owner_id!r}")
        seen_ids.add(owner_id)
        domains = set()
        for raw in block["domains"]:
            domain = str(raw).strip().lower().strip(".")
            if domain in claimed and claimed[domain] != owner_id:
                raise DuplicateDomain(domain, claimed[domain], owner_id)
            claimed[domain] = owner_id
            domains.add(domain)
        records.append(OwnerRecord(owner_id, str(block["display_name"]),
                                   canonical_revenue_model(block["revenue_model"]), frozenset(domains)))
    return OwnershipDb(tuple(records), version, built_at)


def load_owner_db_file(path: str | Path | None = None) -> OwnershipDb:
    if path is None:
        text = resources.files("webcensus.data").joinpath("owners.yaml").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return load_owner_db(text)


def resolve_owner(domain, db: OwnershipDb) -> str:
    """Owner id for an exact registrable-domain match, else ``UNATTRIBUTED``."""
    rec = db.lookup(domain)
    return rec.id if rec is not None else UNATTRIBUTED


@dataclass(frozen=True)
class OwnerShare:
    owner_id: str
    display_name: str
    revenue_model: str
    pages: int
    percent: Decimal


def owners_on_page(third_party_domains: Iterable[str], db: OwnershipDb) -> tuple[set[str], bool]:
    """Distinct owners among a page's third-party domains, and whether any domain is unattributed."""
    owners, unattributed = set(), False
    for domain in third_party_domains:
        owner = resolve_owner(domain, db)
        if owner == UNATTRIBUTED:
            unattributed = True
        else:
            owners.add(owner)
    return owners, unattributed


def ranked_shares(owner_pages: Counter, loaded: int, db: OwnershipDb) -> list[OwnerShare]:
    shares = []
    for owner_id, pages in owner_pages.items():
        rec = db.owner(owner_id)
        name, model = (rec.display_name, rec.revenue_model) if rec else (owner_id, "")
        shares.append(OwnerShare(owner_id, name, model, pages, percent(pages, loaded)))
    shares.sort(key=lambda s: (-s.pages, s.owner_id))
    return shares


def rank_owner_prevalence(records, db: OwnershipDb) -> list[OwnerShare]:
    """Owners by share of loaded pages with at least one of their domains.

    A page counts once per owner however many requests it makes. Shares
    are independent, so their sum may exceed 100.
    """
    loaded = [r for r in records if r.loaded]
    if not loaded:
        return []
    counts: Counter = Counter()
    for rec in loaded:
        owners, _ = owners_on_page(rec.third_party_domains, db)
        counts.update(owners)
    return ranked_shares(counts, len(loaded), db)


def unattributed_share(records, db: OwnershipDb) -> tuple[int, Decimal]:
    loaded = [r for r in records if r.loaded]
    if not loaded:
        return 0, Decimal("0.00")
    pages = sum(1 for r in loaded if owners_on_page(r.third_party_domains, db)[1])
    return pages, percent(pages, len(loaded))
