from .har import ingest_har, iter_har_paths, read_har_file, to_har
from .models import (CapturedCookie, CapturedRequest, CookieSource, LoadStatus,
                     PageLoadResult, parse_set_cookie)
from .pagelist import (DEFAULT_BINARY_EXTENSIONS, PageList, PageListEntry, SearchResult,
                       build_page_list, read_page_list, read_result_set, write_page_list)

__all__ = [
    "CapturedCookie", "CapturedRequest", "CookieSource", "LoadStatus", "PageLoadResult",
    "parse_set_cookie", "ingest_har", "iter_har_paths", "read_har_file", "to_har",
    "DEFAULT_BINARY_EXTENSIONS", "PageList", "PageListEntry", "SearchResult", "build_page_list",
    "read_page_list", "read_result_set", "write_page_list",
]
