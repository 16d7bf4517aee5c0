"""Contract text preprocessing: clause-aware sentence splitting and tokenization.

Contract sections frequently contain clause lists — an introductory clause
ending in a colon followed by enumerated sub-clauses such as ``(a)`` or
``(ii)`` — whose items must be classified independently.  The splitter here
cuts those lists apart, while plain prose is split at terminal punctuation
with guards for abbreviations and decimal numbers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

__all__ = [
    "ClassLabel",
    "LABELS",
    "TokenRecord",
    "Sentence",
    "Section",
    "AlignmentError",
    "MAX_SENTENCE_TOKENS",
    "MAX_SECTION_SENTENCES",
    "SHAPES",
    "POS_TAGS",
    "split_sentences",
    "tokenize",
    "compute_shape",
    "tag_pos",
    "make_token",
    "assemble_section",
]

MAX_SENTENCE_TOKENS = 150
MAX_SECTION_SENTENCES = 15


class ClassLabel(Enum):
    NONE = "None"
    OBLIGATION = "Obligation"
    PROHIBITION = "Prohibition"
    OBLIGATION_LIST_INTRO = "ObligationListIntro"
    OBLIGATION_LIST_ITEM = "ObligationListItem"
    PROHIBITION_LIST_ITEM = "ProhibitionListItem"


#: Fixed class order; row/column order of every report and probability vector.
LABELS: tuple[ClassLabel, ...] = tuple(ClassLabel)

_LABEL_INDEX = {label: i for i, label in enumerate(LABELS)}


def label_index(label: ClassLabel) -> int:
    return _LABEL_INDEX[label]


class AlignmentError(ValueError):
    """Gold labels do not line up with the sentences a section splits into."""


# ---------------------------------------------------------------------------
# token shapes

SHAPES: tuple[str, ...] = (
    "ALL_CAPS",
    "INIT_CAP",
    "ALL_LOWER",
    "ALL_DIGITS",
    "MIXED_ALNUM",
    "PUNCT",
    "LIST_MARKER",
    "OTHER",
)

_LIST_MARKER_RE = re.compile(r"^\(?[a-z0-9ivx]{1,4}[\).]$")


def compute_shape(surface: str) -> str:
    """Coarse orthographic category of a token; deterministic and total."""
    if not surface:
        raise ValueError("token surface must be non-empty")
    if _LIST_MARKER_RE.match(surface):
        return "LIST_MARKER"
    if not any(c.isalnum() for c in surface):
        return "PUNCT"
    if surface.isdigit():
        return "ALL_DIGITS"
    if surface.isalpha():
        if surface.isupper():
            return "ALL_CAPS"
        if surface.islower():
            return "ALL_LOWER"
        if surface[0].isupper() and surface[1:].islower():
            return "INIT_CAP"
        return "OTHER"
    return "MIXED_ALNUM"


# ---------------------------------------------------------------------------
# records


@dataclass
class TokenRecord:
    surface: str
    pos: str
    shape: str


def make_token(surface: str, pos: str) -> TokenRecord:
    return TokenRecord(surface=surface, pos=pos, shape=compute_shape(surface))


@dataclass
class Sentence:
    tokens: list[TokenRecord]
    text: str
    char_span: tuple[int, int]
    gold_label: ClassLabel | None = None
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.tokens)

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]


@dataclass
class Section:
    doc_id: str
    section_id: str
    sentences: list[Sentence] = field(default_factory=list)

    @property
    def key(self) -> tuple[str, str]:
        return (self.doc_id, self.section_id)

    def text(self) -> str:
        return " ".join(s.text for s in self.sentences)


# ---------------------------------------------------------------------------
# sentence splitting

# terminal punctuation ends a sentence only when followed by whitespace and
# an uppercase letter, digit or opening bracket/quote (or end of text)
_ABBREVIATIONS = {
    "no", "nos", "art", "arts", "sec", "secs", "cl", "cls", "para",
    "e.g", "i.e", "etc", "cf", "mr", "mrs", "ms", "dr", "st",
    "inc", "ltd", "co", "corp", "v", "vs",
}

# a clause-item marker: "(a)", "(iv)", "(12)", "a)", "ii)", "3." and similar
_MARKER_RE = re.compile(
    r"\((?:[a-z]{1,2}|[ivxlc]{1,4}|\d{1,2}|[A-Z])\)"
    r"|(?:[a-z]|[ivxlc]{1,4}|\d{1,2})[.)]"
)


def _is_sentence_boundary(text: str, i: int) -> bool:
    """True when the terminal character at position i ends a sentence."""
    ch = text[i]
    if ch in "!?":
        pass
    elif ch == ".":
        # decimal numbers: digit.digit
        if 0 < i < len(text) - 1 and text[i - 1].isdigit() and text[i + 1].isdigit():
            return False
        # abbreviation or single-initial guard
        j = i - 1
        while j >= 0 and (text[j].isalnum() or text[j] == "."):
            j -= 1
        word = text[j + 1:i].lower()
        if word in _ABBREVIATIONS:
            return False
        if len(word) == 1 and word.isalpha() and text[i - 1].isupper():
            return False
    else:
        return False
    # require whitespace then an upper-case/digit/opening char, or end of text
    k = i + 1
    if k >= len(text):
        return True
    if not text[k].isspace():
        return False
    while k < len(text) and text[k].isspace():
        k += 1
    if k >= len(text):
        return True
    return text[k].isupper() or text[k].isdigit() or text[k] in "(\"'“‘"


def _marker_starts(text: str, start: int, end: int) -> list[int]:
    """Positions in [start, end) where a clause item begins.

    A marker opens an item when, looking back over whitespace and an
    optional "and"/"or", the previous character is the intro colon or the
    semicolon closing the previous item.
    """
    starts = []
    for m in _MARKER_RE.finditer(text, start, end):
        p = m.start()
        j = p - 1
        while j >= 0 and text[j].isspace():
            j -= 1
        if j >= 0 and text[j].isalpha():
            w = j
            while w >= 0 and text[w].isalpha():
                w -= 1
            if text[w + 1:j + 1].lower() in ("and", "or"):
                j = w
                while j >= 0 and text[j].isspace():
                    j -= 1
        if j < 0:
            continue
        if text[j] in ":;":
            starts.append(p)
    return starts


def _split_clause_list(text: str, start: int, end: int) -> list[tuple[int, int]]:
    """Split one physical sentence into intro + items, or return it whole."""
    colon = -1
    for m in re.finditer(r":", text[start:end]):
        pos = start + m.start()
        k = pos + 1
        while k < end and text[k].isspace():
            k += 1
        mk = _MARKER_RE.match(text, k, end)
        if mk is not None:
            colon = pos
            break
    if colon < 0:
        return [(start, end)]
    item_starts = _marker_starts(text, colon + 1, end)
    if not item_starts:
        return [(start, end)]
    spans = [(start, colon + 1)]
    for i, p in enumerate(item_starts):
        q = item_starts[i + 1] if i + 1 < len(item_starts) else end
        spans.append((p, q))
    return spans


def _trim(text: str, start: int, end: int) -> tuple[int, int]:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return start, end


def split_sentences(section_text: str) -> list[tuple[str, tuple[int, int]]]:
    """Split section text into (segment, char-span) pairs.

    Segments are substrings of the input; consecutive spans are separated
    by whitespace only, so joining the segments with the skipped
    whitespace reconstructs the input exactly.  Whitespace-only input
    yields an empty list.
    """
    text = section_text
    if not text.strip():
        return []
    boundaries = []
    for i, ch in enumerate(text):
        if ch in ".!?" and _is_sentence_boundary(text, i):
            boundaries.append(i + 1)
    if not boundaries or boundaries[-1] < len(text):
        boundaries.append(len(text))
    segments: list[tuple[str, tuple[int, int]]] = []
    start = 0
    for b in boundaries:
        s, e = _trim(text, start, b)
        if s < e:
            for cs, ce in _split_clause_list(text, s, e):
                cs, ce = _trim(text, cs, ce)
                if cs < ce:
                    segments.append((text[cs:ce], (cs, ce)))
        start = b
    return segments


# ---------------------------------------------------------------------------
# tokenization

_DETACH = ".,:;()"


def tokenize(sentence_text: str) -> list[str]:
    """Whitespace split with punctuation detached from token edges.

    List markers like "(a)" stay single tokens, and periods inside
    decimal numbers ("13.3") are preserved.
    """
    tokens: list[str] = []
    for chunk in sentence_text.split():
        if _LIST_MARKER_RE.match(chunk):
            tokens.append(chunk)
            continue
        head: list[str] = []
        tail: list[str] = []
        while chunk and chunk[0] in _DETACH:
            head.append(chunk[0])
            chunk = chunk[1:]
        while chunk and chunk[-1] in _DETACH:
            if (chunk[-1] == "." and len(chunk) >= 3
                    and chunk[-2].isdigit() and "." in chunk[:-1]):
                break  # sentence-final decimals keep their inner period only
            tail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(head)
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(tail))
    return tokens


# ---------------------------------------------------------------------------
# part-of-speech tagging

_PUNCT_TAGS = {".": ".", ",": ",", ":": ":", ";": ":", "(": "-LRB-", ")": "-RRB-"}

_LEXICON = {
    # modals and negations carry most of the deontic signal
    "shall": "MD", "will": "MD", "must": "MD", "may": "MD", "can": "MD",
    "should": "MD", "would": "MD", "might": "MD", "cannot": "MD",
    "not": "RB", "never": "RB", "n't": "RB",
    "no": "DT", "neither": "DT",
    "the": "DT", "a": "DT", "an": "DT", "this": "DT", "that": "DT",
    "these": "DT", "those": "DT", "each": "DT", "any": "DT", "all": "DT",
    "either": "DT", "such": "DT", "its": "PRP$", "their": "PRP$",
    "his": "PRP$", "her": "PRP$", "our": "PRP$", "your": "PRP$",
    "it": "PRP", "they": "PRP", "he": "PRP", "she": "PRP", "we": "PRP",
    "and": "CC", "or": "CC", "nor": "CC", "but": "CC",
    "to": "TO",
    "of": "IN", "in": "IN", "on": "IN", "by": "IN", "with": "IN",
    "for": "IN", "from": "IN", "under": "IN", "within": "IN",
    "without": "IN", "at": "IN", "into": "IN", "upon": "IN",
    "during": "IN", "against": "IN", "between": "IN", "after": "IN",
    "before": "IN", "over": "IN", "through": "IN", "per": "IN",
    "pursuant": "IN", "notwithstanding": "IN", "except": "IN",
    "unless": "IN", "if": "IN", "as": "IN", "than": "IN",
    "is": "VBZ", "has": "VBZ", "does": "VBZ", "agrees": "VBZ",
    "remains": "VBZ", "are": "VBP", "have": "VBP", "do": "VBP",
    "agree": "VBP", "was": "VBD", "were": "VBD", "had": "VBD",
    "did": "VBD", "be": "VB", "been": "VBN", "being": "VBG",
    "hereby": "RB", "herein": "RB", "thereof": "RB", "hereunder": "RB",
    "thereto": "RB", "only": "RB", "otherwise": "RB", "directly": "RB",
    "entitled": "VBN", "obliged": "VBN", "required": "VBN",
    "permitted": "VBN", "prohibited": "VBN",
}

#: Closed set of tags the heuristic tagger can emit; unknown-word embedding
#: tables must cover all of them.
POS_TAGS: tuple[str, ...] = (
    "NN", "NNS", "NNP", "JJ", "RB", "MD", "DT", "IN", "TO", "CC",
    "PRP", "PRP$", "CD", "LS",
    "VB", "VBZ", "VBP", "VBD", "VBN", "VBG",
    ".", ",", ":", "-LRB-", "-RRB-", "SYM",
)

_NUMBER_RE = re.compile(r"^\d+(?:[.,]\d+)*$")


def _tag_one(surface: str) -> str:
    if surface in _PUNCT_TAGS:
        return _PUNCT_TAGS[surface]
    shape = compute_shape(surface)
    if shape == "PUNCT":
        return "SYM"
    if shape == "LIST_MARKER":
        return "LS"
    if shape == "ALL_DIGITS" or _NUMBER_RE.match(surface):
        return "CD"
    low = surface.lower()
    if low in _LEXICON:
        return _LEXICON[low]
    if low.endswith("ing"):
        return "VBG"
    if low.endswith("ed"):
        return "VBN"
    if low.endswith("ly"):
        return "RB"
    if low.endswith(("ous", "ful", "able", "ible", "ive", "ant", "idential")):
        return "JJ"
    if shape in ("INIT_CAP", "ALL_CAPS"):
        return "NNP"
    if low.endswith("s") and not low.endswith(("ss", "us", "is")):
        return "NNS"
    return "NN"


def tag_pos(tokens: list[str], existing: list[str] | None = None) -> list[str]:
    """One POS tag per token; pre-tagged input passes through unchanged."""
    if not tokens:
        raise ValueError("tag_pos requires a non-empty token list")
    if existing is not None:
        if len(existing) != len(tokens):
            raise AlignmentError(
                f"{len(existing)} tags supplied for {len(tokens)} tokens")
        return list(existing)
    return [_tag_one(t) for t in tokens]


# ---------------------------------------------------------------------------
# section assembly


def assemble_section(
    doc_id: str,
    section_id: str,
    raw_text: str,
    gold_labels: list[ClassLabel] | None = None,
    max_tokens: int = MAX_SENTENCE_TOKENS,
    max_sentences: int = MAX_SECTION_SENTENCES,
) -> list[Section]:
    """Build fully tokenized, tagged and shaped sections from raw text.

    Returns one section, or several consecutive chunks when the text
    splits into more than `max_sentences` sentences.  If gold labels are
    given there must be exactly one per split sentence.
    """
    pieces = split_sentences(raw_text)
    if gold_labels is not None and len(gold_labels) != len(pieces):
        raise AlignmentError(
            f"section {doc_id}/{section_id}: {len(gold_labels)} labels "
            f"for {len(pieces)} sentences")
    sentences = []
    for i, (seg, span) in enumerate(pieces):
        surfaces = tokenize(seg)
        truncated = len(surfaces) > max_tokens
        if truncated:
            surfaces = surfaces[:max_tokens]
        tags = tag_pos(surfaces)
        sentences.append(Sentence(
            tokens=[make_token(s, p) for s, p in zip(surfaces, tags)],
            text=seg,
            char_span=span,
            gold_label=gold_labels[i] if gold_labels is not None else None,
            truncated=truncated,
        ))
    sections = []
    for chunk_no, lo in enumerate(range(0, len(sentences), max_sentences)):
        chunk = sentences[lo:lo + max_sentences]
        sid = section_id if len(sentences) <= max_sentences else f"{section_id}#{chunk_no + 1}"
        sections.append(Section(doc_id=doc_id, section_id=sid, sentences=chunk))
    return sections
