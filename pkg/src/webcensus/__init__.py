"""Census of third-party requests, cookies, owners and Referer leakage on web pages."""
from .census import CensusAccumulator, CensusRecord, CensusSummary, build_record, merge, summarize
from .classify import (ElementRecord, PageFlags, PartyClass, classify_cookie, classify_element,
                       classify_party, derive_page_flags)
from .leakage import Lexicon, assess_sample, detect_sensitive, https_share, load_lexicon, normalize_uri_text
from .ownership import OwnershipDb, load_owner_db, load_owner_db_file, rank_owner_prevalence, resolve_owner
from .uri import (ParsedUri, PublicSuffixRuleset, RegistrableDomain, extract_extension, load_ruleset,
                  normalize_page_uri, parse_uri, registrable_domain, strip_arguments, tld_category)

__version__ = "0.1.0"
