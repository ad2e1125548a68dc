"""Turning documents into token streams of words and punctuation marks.

A token is either a word, an ordinary punctuation mark or a sentence
terminator. Marks listed as *excluded* in the inventory act as separators
but never reach the stream.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol

from .corpus import Language, TextDocument
from .errors import ConfigError, EmptyStreamError, SegmentationError

#: Surface of the synthetic token emitted when a line break closes a sentence.
NEWLINE_TERMINATOR = "<eol>"


class TokenKind(str, enum.Enum):
    WORD = "word"
    PUNCTUATION = "punctuation"
    TERMINATOR = "terminator"


@dataclass(frozen=True)
class Token:
    surface: str
    kind: TokenKind

    @property
    def is_word(self):
        return self.kind is TokenKind.WORD


def _as_mark(value) -> str:
    """Config values may be literal strings, code point ints or ``U+XXXX``."""
    if isinstance(value, int):
        return chr(value)
    if isinstance(value, list):
        return "".join(_as_mark(v) for v in value)
    value = str(value)
    if value.upper().startswith("U+"):
        return "".join(chr(int(part[2:], 16)) for part in value.upper().split())
    return value


@dataclass(frozen=True)
class PunctuationInventory:
    """Which marks terminate sentences, which are kept, which are dropped.

    ``aliases`` rewrites multi-character spellings (``--``, ``...``) to a
    canonical mark before classification. ``joiners`` are marks that stay
    inside a word when they occur between two word characters.
    """

    terminators: frozenset
    other_marks: frozenset
    excluded: frozenset = frozenset()
    newline_terminates: bool = False
    aliases: tuple = ()
    joiners: frozenset = frozenset({"'", "’", "."})

    def __post_init__(self):
        terms = set(self.terminators)
        if self.newline_terminates:
            terms.add(NEWLINE_TERMINATOR)
        object.__setattr__(self, "terminators", frozenset(terms))
        object.__setattr__(self, "other_marks", frozenset(self.other_marks))
        object.__setattr__(self, "excluded", frozenset(self.excluded))
        object.__setattr__(self, "aliases", tuple(sorted(dict(self.aliases).items())))
        object.__setattr__(self, "joiners", frozenset(self.joiners))
        for a, b, name in ((self.terminators, self.other_marks, "terminators/marks"),
                           (self.terminators, self.excluded, "terminators/excluded"),
                           (self.other_marks, self.excluded, "marks/excluded")):
            overlap = a & b
            if overlap:
                raise ConfigError(f"{name} overlap: {sorted(overlap)}")
        for mark in self.terminators | self.other_marks | self.excluded:
            if not mark or any(ch.isspace() for ch in mark):
                raise ConfigError(f"invalid mark {mark!r}")
        alias_map = dict(self.aliases)
        spellings = set(alias_map) | self.terminators | self.other_marks | self.excluded
        spellings.discard(NEWLINE_TERMINATOR)
        # longest spelling first so "..." wins over "."
        object.__setattr__(self, "_spellings", tuple(sorted(spellings, key=lambda m: (-len(m), m))))
        object.__setattr__(self, "_alias_map", alias_map)
        object.__setattr__(self, "_mark_chars", frozenset("".join(spellings)))

    @property
    def kept(self):
        return self.terminators | self.other_marks

    def canonical(self, mark):
        return self._alias_map.get(mark, mark)

    def classify(self, surface):
        """Kind of a canonical surface, or None when it is excluded."""
        if surface in self.excluded:
            return None
        if surface in self.terminators:
            return TokenKind.TERMINATOR
        if surface in self.other_marks:
            return TokenKind.PUNCTUATION
        return TokenKind.WORD

    def with_overrides(self, terminators=None, marks=None, excluded=None):
        return PunctuationInventory(
            terminators=self.terminators - {NEWLINE_TERMINATOR} if terminators is None else terminators,
            other_marks=self.other_marks if marks is None else marks,
            excluded=self.excluded if excluded is None else excluded,
            newline_terminates=self.newline_terminates,
            aliases=self.aliases,
            joiners=self.joiners,
        )

    @classmethod
    def western(cls):
        return cls(
            terminators={".", "!", "?", "…", ";"},
            other_marks={",", ":", '"', "'", "(", ")", "—", "`", "“", "”", "‘", "’"},
            excluded={"[", "]", "{", "}", "*", "_", "|"},
            newline_terminates=False,
            aliases={"--": "—", "...": "…"},
        )

    @classmethod
    def chinese(cls):
        return cls(
            terminators={"。", "！", "？", "…", "；"},
            other_marks={"，", "、", "：", "“", "”", "‘", "’", "《", "》", "（", "）", "·"},
            excluded={"【", "】", "〖", "〗", "「", "」", "『", "』", "〈", "〉",
                      "-", "‐", "‑", "‒", "–", "—", "―"},
            newline_terminates=True,
            aliases={"……": "…", "...": "…"},
            joiners=frozenset(),
        )

    @classmethod
    def for_language(cls, language):
        return cls.chinese() if Language.parse(language) is Language.CHINESE else cls.western()

    @classmethod
    def from_config(cls, path, base=None):
        """Load a JSON config: keys ``terminators``, ``marks``, ``excluded``
        (lists of code points), optional ``newline_terminates`` and ``aliases``."""
        try:
            cfg = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read inventory config {path}: {exc}") from exc
        base = base or cls.western()

        def marks(key, default):
            if key not in cfg:
                return default
            return {_as_mark(v) for v in cfg[key]}

        return cls(
            terminators=marks("terminators", base.terminators - {NEWLINE_TERMINATOR}),
            other_marks=marks("marks", base.other_marks),
            excluded=marks("excluded", base.excluded),
            newline_terminates=bool(cfg.get("newline_terminates", base.newline_terminates)),
            aliases={_as_mark(k): _as_mark(v) for k, v in cfg.get("aliases", dict(base.aliases)).items()},
            joiners={_as_mark(v) for v in cfg["joiners"]} if "joiners" in cfg else base.joiners,
        )


@dataclass(frozen=True)
class TokenStream:
    """Immutable token sequence; positions wrap around (the text is a cycle)."""

    tokens: tuple
    text_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    @property
    def total_len(self):
        return len(self.tokens)

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    def at(self, i):
        """Cyclic access: position ``i mod total_len``."""
        return self.tokens[i % len(self.tokens)]

    def surfaces(self):
        return [t.surface for t in self.tokens]

    def words(self):
        return [t.surface for t in self.tokens if t.kind is TokenKind.WORD]


class Segmenter(Protocol):
    def segment(self, raw: str) -> list: ...


class WhitespaceSegmenter:
    """For text already segmented offline: tokens are whitespace separated."""

    def segment(self, raw):
        return raw.split()


class CallableSegmenter:
    """Adapts any ``str -> iterable of str`` function, e.g. ``jieba.lcut``."""

    def __init__(self, func: Callable[[str], Iterable[str]]):
        self.func = func

    def segment(self, raw):
        return [piece for piece in self.func(raw)]


def _is_cjk(ch):
    cp = ord(ch)
    return (0x3400 <= cp <= 0x4DBF or 0x4E00 <= cp <= 0x9FFF or 0xF900 <= cp <= 0xFAFF
            or 0x20000 <= cp <= 0x2FA1F)


class DictionarySegmenter:
    """Greedy longest-match segmentation against a word list.

    CJK characters not covered by the dictionary become single-character
    words; runs of other letters and digits stay together; every remaining
    non-space character is its own piece.
    """

    def __init__(self, words: Iterable[str]):
        self.words = frozenset(w for w in words if w)
        self.max_len = max((len(w) for w in self.words), default=1)

    @classmethod
    def from_file(cls, path):
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(line.split()[0] for line in lines if line.strip())

    def segment(self, raw):
        out = []
        i, n = 0, len(raw)
        while i < n:
            ch = raw[i]
            if ch.isspace():
                i += 1
                continue
            for size in range(min(self.max_len, n - i), 1, -1):
                if raw[i:i + size] in self.words:
                    out.append(raw[i:i + size])
                    i += size
                    break
            else:
                if ch.isalnum() and not _is_cjk(ch):
                    j = i + 1
                    while j < n and raw[j].isalnum() and not _is_cjk(raw[j]):
                        j += 1
                    out.append(raw[i:j])
                    i = j
                else:
                    out.append(ch)
                    i += 1
        return out


def _check_reconstruction(line, pieces):
    joined = "".join("".join(p.split()) for p in pieces)
    if joined != "".join(line.split()):
        raise SegmentationError(
            f"segmenter output does not reproduce its input: {line[:40]!r}")


def _split_piece(piece, inv):
    """Split one whitespace-free piece into (surface, is_mark) parts."""
    if piece.isalnum():
        return [(piece, False)]
    spellings = inv._spellings
    head = []
    i, j = 0, len(piece)
    while i < j:
        for m in spellings:
            if piece.startswith(m, i) and i + len(m) <= j:
                head.append((m, True))
                i += len(m)
                break
        else:
            break
    tail = []
    while j > i:
        for m in spellings:
            if piece.endswith(m, i, j):
                tail.append((m, True))
                j -= len(m)
                break
        else:
            break
    out = head
    if i < j:
        core = piece[i:j]
        if not inv._mark_chars.intersection(core):
            out.append((core, False))
        else:
            # interior marks split the word unless they are joiners
            start = p = i
            while p < j:
                for m in spellings:
                    if piece.startswith(m, p) and p + len(m) <= j and not (
                            m in inv.joiners and p > i and p + len(m) < j
                            and piece[p - 1].isalnum() and piece[p + len(m)].isalnum()):
                        if p > start:
                            out.append((piece[start:p], False))
                        out.append((m, True))
                        p += len(m)
                        start = p
                        break
                else:
                    p += 1
            if start < j:
                out.append((piece[start:j], False))
    out.extend(reversed(tail))
    return out


def tokenize(doc: TextDocument, inventory: PunctuationInventory | None = None,
             segmenter: Segmenter | None = None) -> TokenStream:
    """Tokenize a document line by line.

    English and other alphabetic texts are split on whitespace unless a
    segmenter is given. Chinese needs either ``doc.pre_segmented`` or a
    segmenter. English words are lowercased.
    """
    inventory = inventory or PunctuationInventory.for_language(doc.language)
    if segmenter is None:
        if doc.language is Language.CHINESE and not doc.pre_segmented:
            raise SegmentationError(
                f"{doc.id}: Chinese text needs a segmenter or pre-segmented input")
        segmenter = WhitespaceSegmenter()
    lower = doc.language is Language.ENGLISH

    tokens = []
    open_sentence = False
    for line in doc.raw.split("\n"):
        try:
            pieces = list(segmenter.segment(line))
        except SegmentationError:
            raise
        except Exception as exc:
            raise SegmentationError(f"{doc.id}: segmenter failed: {exc}") from exc
        if not isinstance(segmenter, WhitespaceSegmenter):
            _check_reconstruction(line, pieces)
        for piece in pieces:
            for part in piece.split():
                for surface, is_mark in _split_piece(part, inventory):
                    if is_mark:
                        surface = inventory.canonical(surface)
                        kind = inventory.classify(surface)
                        if kind is None:
                            continue
                        if kind is TokenKind.WORD:
                            kind = TokenKind.PUNCTUATION
                    else:
                        kind = TokenKind.WORD
                        if lower:
                            surface = surface.lower()
                    tokens.append(Token(surface, kind))
                    if kind is TokenKind.WORD:
                        open_sentence = True
                    elif kind is TokenKind.TERMINATOR:
                        open_sentence = False
        if inventory.newline_terminates and open_sentence:
            tokens.append(Token(NEWLINE_TERMINATOR, TokenKind.TERMINATOR))
            open_sentence = False
    return TokenStream(tokens, doc.id)


def strip_punctuation(stream: TokenStream) -> TokenStream:
    """Keep only words; words around a removed mark become neighbours."""
    words = [t for t in stream.tokens if t.kind is TokenKind.WORD]
    if not words:
        raise EmptyStreamError(f"{stream.text_id or 'stream'} has no words")
    if len(words) == len(stream.tokens):
        return stream
    return TokenStream(words, stream.text_id)


def punctuation_census(stream: TokenStream) -> dict:
    """Count marks (punctuation and terminators) by surface, most common first."""
    counts = Counter(t.surface for t in stream.tokens if t.kind is not TokenKind.WORD)
    return dict(counts.most_common())


#: Fullwidth CJK marks and their Western counterparts, for cross-language tables.
MARK_EQUIVALENTS = {"，": ",", "。": ".", "！": "!", "？": "?", "；": ";", "：": ":", "…": "…"}


def census_ratio(count_a, count_b, ndigits=2):
    """Ratio of two mark counts, e.g. original versus translation."""
    if count_b == 0:
        return float("inf") if count_a else float("nan")
    return round(count_a / count_b, ndigits)


def census_ratios(census_a, census_b, equivalents=MARK_EQUIVALENTS, ndigits=2):
    """Per-mark ratios between two censuses after mapping equivalent marks."""
    def canon(census):
        out = Counter()
        for mark, count in census.items():
            out[equivalents.get(mark, mark)] += count
        return out

    a, b = canon(census_a), canon(census_b)
    return {mark: census_ratio(a[mark], b[mark], ndigits) for mark in a if mark in b}
