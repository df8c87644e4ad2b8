"""
Statement normalization: the rule set that turns tweet-style text into
work-register tokens.
"""
import functools
import html
import logging
import re
from types import MappingProxyType
from typing import List, Mapping, Optional, Tuple

logger = logging.getLogger(__name__)

# Scheme or www. prefixed URLs, and bare domains followed by a path (t.co/abc)
URL_PATTERN = re.compile(
    r"(?:https?://|www\.)\S*|(?<![\w.@/-])[a-z0-9-]+(?:\.[a-z0-9-]+)*\.[a-z]{2,}/\S*",
    re.UNICODE,
)
MENTION_PATTERN = re.compile(r"(?<!\w)@+\w*", re.UNICODE)
HASHTAG_PATTERN = re.compile(r"^(?P<prefix>[^\w#]*)#+(?P<tag>\w+)(?P<suffix>.*)$", re.UNICODE)
WORD_CHAR_PATTERN = re.compile(r"\w", re.UNICODE)

# Punctuation kept as standalone tokens when it sits at a token edge
TERMINAL_MARKS = frozenset(".!?,")
# Wrapping characters dropped from token edges
EDGE_WRAPPERS = frozenset("\"“”«»()[]{}")
# Distinct raw statements remembered by each TextNormalizer
NORMALIZE_CACHE_SIZE = 4096


class TextNormalizer:
    """
    Applies the normalization pipeline with a fixed slang table.

    Steps, in order: lowercase; drop URLs and user mentions; strip the marker
    from sentence-internal hashtags and drop sentence-final ones; replace
    slang; split on whitespace with terminal punctuation split off.
    """

    def __init__(self, slang_map: Optional[Mapping[str, str]] = None, cache_size: int = NORMALIZE_CACHE_SIZE):
        self.slang_map = MappingProxyType(dict(slang_map or {}))
        # Bound per instance; released together with the normalizer
        self._cached = functools.lru_cache(maxsize=cache_size)(self._normalize)

    def normalize(self, raw: Optional[str]) -> Tuple[str, ...]:
        """
        Normalize one statement, memoized per normalizer.

        Args:
            raw: Raw statement text

        Returns:
            Tuple of tokens, possibly empty
        """
        return self._cached(raw)

    def cache_info(self) -> "functools._CacheInfo":
        return self._cached.cache_info()

    def _normalize(self, raw: Optional[str]) -> Tuple[str, ...]:
        if not raw:
            return ()

        text = html.unescape(raw).replace("\xa0", " ").replace("’", "'")
        text = text.lower()
        text = URL_PATTERN.sub(" ", text)
        text = MENTION_PATTERN.sub(" ", text)

        words = self._resolve_hashtags(text.split())
        words = [self._replace_slang(word) for word in words]

        tokens: List[str] = []
        for word in " ".join(words).split():
            tokens.extend(split_terminal_marks(word))
        return tuple(tokens)

    def __call__(self, raw: Optional[str]) -> List[str]:
        return list(self.normalize(raw))

    @staticmethod
    def _resolve_hashtags(words: List[str]) -> List[str]:
        is_content = [
            HASHTAG_PATTERN.match(w) is None and WORD_CHAR_PATTERN.search(w) is not None
            for w in words
        ]
        resolved = []
        for idx, word in enumerate(words):
            match = HASHTAG_PATTERN.match(word)
            if match:
                if not any(is_content[idx + 1:]):
                    continue
                word = match.group("prefix") + match.group("tag") + match.group("suffix")
            word = word.replace("#", "")
            if word:
                resolved.append(word)
        return resolved

    def _replace_slang(self, word: str) -> str:
        if not self.slang_map:
            return word
        start, end = 0, len(word)
        while start < end and (word[start] in TERMINAL_MARKS or word[start] in EDGE_WRAPPERS):
            start += 1
        while end > start and (word[end - 1] in TERMINAL_MARKS or word[end - 1] in EDGE_WRAPPERS):
            end -= 1
        core = word[start:end]
        replacement = self.slang_map.get(core)
        if replacement is None:
            return word
        return f"{word[:start]} {replacement} {word[end:]}"


def split_terminal_marks(word: str) -> List[str]:
    """Split edge punctuation off one whitespace-free word."""
    leading: List[str] = []
    trailing: List[str] = []
    start, end = 0, len(word)
    while start < end and (word[start] in TERMINAL_MARKS or word[start] in EDGE_WRAPPERS):
        if word[start] in TERMINAL_MARKS:
            leading.append(word[start])
        start += 1
    while end > start and (word[end - 1] in TERMINAL_MARKS or word[end - 1] in EDGE_WRAPPERS):
        if word[end - 1] in TERMINAL_MARKS:
            trailing.append(word[end - 1])
        end -= 1
    core = [word[start:end]] if start < end else []
    return leading + core + trailing[::-1]


def normalize_statement(raw: Optional[str], slang_map: Optional[Mapping[str, str]] = None) -> List[str]:
    """
    Normalize raw statement text into tokens.

    Args:
        raw: Raw text; any string is accepted
        slang_map: Slang token -> replacement table

    Returns:
        List of tokens (empty for empty or fully-removed input)
    """
    return shared_normalizer(tuple(sorted((slang_map or {}).items())))(raw)


@functools.lru_cache(maxsize=16)
def shared_normalizer(slang_items: Tuple[Tuple[str, str], ...] = ()) -> TextNormalizer:
    """One TextNormalizer per distinct slang table, reused across calls."""
    return TextNormalizer(dict(slang_items))
