"""Loading raw texts and corpus manifests.

Documents are read fully into memory, decoded as UTF-8, stripped of a
leading byte-order mark, given ``\\n`` line endings and put into NFC.
"""

from __future__ import annotations

import enum
import json
import unicodedata
from dataclasses import dataclass
from pathlib import Path

from .errors import CorpusIOError, DuplicateIdError, EncodingError, ManifestParseError


class Language(str, enum.Enum):
    CHINESE = "Chinese"
    ENGLISH = "English"
    OTHER = "Other"

    @classmethod
    def parse(cls, value) -> "Language":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"zh": cls.CHINESE, "cn": cls.CHINESE, "chinese": cls.CHINESE,
                   "en": cls.ENGLISH, "english": cls.ENGLISH, "other": cls.OTHER}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown language {value!r}") from None


@dataclass(frozen=True)
class TextDocument:
    id: str
    language: Language
    raw: str
    source_path: str
    collection: str | None = None
    pre_segmented: bool = False


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    path: Path
    language: Language
    collection: str | None = None
    pre_segmented: bool = False

    def load(self) -> TextDocument:
        return load_document(self.path, self.language, self.pre_segmented,
                             doc_id=self.id, collection=self.collection)


@dataclass(frozen=True)
class Manifest:
    entries: tuple[ManifestEntry, ...]
    source_path: str | None = None

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def documents(self):
        for entry in self.entries:
            yield entry.load()


def normalize_text(text: str) -> str:
    """BOM strip, newline normalization, control-character removal, NFC."""
    if text.startswith("\ufeff"):
        text = text[1:]
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    # C0/C1 controls other than tab and newline (e.g. a DOS EOF byte) carry no text
    if any(unicodedata.category(ch) == "Cc" and ch not in "\n\t" for ch in text):
        text = "".join(ch for ch in text
                       if ch in "\n\t" or unicodedata.category(ch) != "Cc")
    return unicodedata.normalize("NFC", text)


def load_document(path, language=Language.ENGLISH, pre_segmented=False, *,
                  doc_id=None, collection=None) -> TextDocument:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CorpusIOError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"{path} is not valid UTF-8 (byte {exc.start})") from exc
    raw = normalize_text(text)
    if not raw.strip():
        raise EncodingError(f"{path} contains no text after normalization")
    return TextDocument(
        id=doc_id if doc_id is not None else path.stem,
        language=Language.parse(language),
        raw=raw,
        source_path=str(path),
        collection=collection,
        pre_segmented=bool(pre_segmented),
    )


def load_manifest(path) -> Manifest:
    """Read a JSON-lines manifest; relative paths resolve against its directory.

    Blank lines and lines starting with ``#`` are skipped.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CorpusIOError(f"cannot read manifest {path}: {exc.strerror or exc}") from exc

    entries = []
    seen = set()
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestParseError(f"{path}:{lineno}: {exc.msg}") from exc
        if not isinstance(obj, dict) or "id" not in obj or "path" not in obj:
            raise ManifestParseError(f"{path}:{lineno}: entry needs 'id' and 'path'")
        entry_id = str(obj["id"])
        if entry_id in seen:
            raise DuplicateIdError(f"{path}:{lineno}: duplicate id {entry_id!r}")
        seen.add(entry_id)
        try:
            language = Language.parse(obj.get("language", "English"))
        except ValueError as exc:
            raise ManifestParseError(f"{path}:{lineno}: {exc}") from exc
        doc_path = Path(obj["path"])
        if not doc_path.is_absolute():
            doc_path = path.parent / doc_path
        if not doc_path.is_file():
            raise CorpusIOError(f"manifest entry {entry_id!r}: missing file {doc_path}")
        entries.append(ManifestEntry(
            id=entry_id,
            path=doc_path,
            language=language,
            collection=obj.get("collection"),
            pre_segmented=bool(obj.get("pre_segmented", False)),
        ))
    return Manifest(tuple(entries), str(path))
