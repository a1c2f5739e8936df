"""Corpus ingestion, normalization, tokenization and above-mean labeling.

One classification document per author: all posts are normalized,
concatenated and tokenized. Each document then receives ten independent
binary labels, one per facet, positive iff the author's facet score lies
strictly above the mean over all labeled authors (ties label negative).
"""

from __future__ import annotations

import importlib.resources
import json
import logging
import re
from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import ConfigError, ValidationError
from .inventory import FACET_NAMES, N_ITEMS, FacetScores, InventoryResponse

log = logging.getLogger(__name__)

# Placeholder tokens like $LAUGH$ survive tokenization as single tokens.
_TOKEN_RE = re.compile(r"\$[A-Z][A-Z0-9_]*\$|\w+", re.UNICODE)


@dataclass(frozen=True)
class AuthorRecord:
    """One corpus author: identifier, raw posts and inventory responses."""

    author_id: str
    posts: tuple[str, ...]
    inventory: InventoryResponse

    def __post_init__(self):
        object.__setattr__(self, "posts", tuple(self.posts))
        if not isinstance(self.author_id, str) or not self.author_id:
            raise ValidationError(f"author_id must be a non-empty string, got {self.author_id!r}")


@dataclass(frozen=True)
class NormRule:
    pattern: str
    token: str
    regex: re.Pattern = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        try:
            # Case-insensitive by contract; rules match the raw text.
            compiled = re.compile(self.pattern, re.IGNORECASE | re.UNICODE)
        except re.error as e:
            raise ConfigError(f"invalid pattern {self.pattern!r}: {e}") from e
        if tokenize(self.token) != [self.token]:
            raise ConfigError(
                f"replacement {self.token!r} would not survive tokenization as a single token"
            )
        object.__setattr__(self, "regex", compiled)


@dataclass(frozen=True)
class NormalizationTable:
    """Ordered substitution rules applied before tokenization."""

    rules: tuple[NormRule, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))


@dataclass(frozen=True)
class LabeledDocument:
    author_id: str
    tokens: tuple[str, ...]
    labels: dict[str, int]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValidationError(f"author {self.author_id}: document has no tokens")
        if set(self.labels) != set(FACET_NAMES):
            raise ValidationError(f"author {self.author_id}: labels must cover the 10 facets")


@dataclass(frozen=True)
class LabeledCorpus:
    """Labeled documents plus the per-facet thresholds used for labeling.

    ``degenerate`` lists facets whose labels came out single-class; they are
    excluded from training and evaluation downstream.
    """

    documents: tuple[LabeledDocument, ...]
    label_thresholds: dict[str, float]
    degenerate: tuple[str, ...] = ()

    @property
    def active_facets(self) -> tuple[str, ...]:
        return tuple(f for f in FACET_NAMES if f not in self.degenerate)

    def labels(self, facet: str) -> np.ndarray:
        """Binary label vector for one facet, in document order."""
        if facet not in FACET_NAMES:
            raise ValidationError(f"unknown facet {facet!r}")
        return np.array([doc.labels[facet] for doc in self.documents], dtype=np.int64)


def normalize(text: str, table: NormalizationTable) -> str:
    """Apply substitution rules: leftmost-longest, single pass, in rule order.

    At each position the earliest match across all rules wins; ties go to
    the longer match, then to the earlier rule. Replacements are inserted
    verbatim and never rescanned.
    """
    if not table.rules or not text:
        return text
    parts = []
    pos = 0
    n = len(text)
    while pos < n:
        best = None
        best_rule = None
        for ridx, rule in enumerate(table.rules):
            m = rule.regex.search(text, pos)
            if m is None or m.end() == m.start():
                continue
            cand = (m.start(), -(m.end() - m.start()), ridx)
            if best is None or cand < best:
                best = cand
                best_rule = (m.start(), m.end(), rule.token)
        if best_rule is None:
            parts.append(text[pos:])
            break
        start, end, token = best_rule
        parts.append(text[pos:start])
        parts.append(token)
        pos = end
    return "".join(parts)


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens; $NAME$ placeholders kept intact."""
    out = []
    for tok in _TOKEN_RE.findall(text):
        out.append(tok if tok.startswith("$") else tok.lower())
    return out


def build_documents(
    records, table: NormalizationTable
) -> list[tuple[str, tuple[str, ...]]]:
    """One (author_id, tokens) document per author.

    Posts are normalized, joined with single spaces in order, then tokenized.
    Authors with no surviving tokens are excluded with a warning.
    """
    docs = []
    for rec in records:
        joined = " ".join(normalize(post, table) for post in rec.posts)
        tokens = tokenize(joined)
        if not tokens:
            log.warning("author %s: no tokens after normalization, excluded", rec.author_id)
            continue
        docs.append((rec.author_id, tuple(tokens)))
    return docs


def assign_labels(docs, scores: dict[str, FacetScores]) -> LabeledCorpus:
    """Label every document per facet by the strict above-mean rule.

    The threshold for facet f is the arithmetic mean of f-scores over the
    documents' authors. Facets whose labels come out single-class are
    flagged degenerate.
    """
    missing = [aid for aid, _ in docs if aid not in scores]
    if missing:
        raise ValidationError("missing facet scores for authors: " + ", ".join(missing))
    if not docs:
        raise ValidationError("no documents to label")

    thresholds = {}
    for facet in FACET_NAMES:
        vals = np.array([scores[aid].facets[facet] for aid, _ in docs], dtype=np.float64)
        thresholds[facet] = float(np.mean(vals))

    documents = []
    for aid, tokens in docs:
        labels = {
            facet: int(scores[aid].facets[facet] > thresholds[facet]) for facet in FACET_NAMES
        }
        documents.append(LabeledDocument(author_id=aid, tokens=tokens, labels=labels))

    degenerate = []
    for facet in FACET_NAMES:
        positives = sum(doc.labels[facet] for doc in documents)
        if positives == 0 or positives == len(documents):
            degenerate.append(facet)
            log.warning("facet %s: single-class labels, excluded from evaluation", facet)

    return LabeledCorpus(
        documents=tuple(documents),
        label_thresholds=thresholds,
        degenerate=tuple(degenerate),
    )


def _field(obj, name, where):
    if name not in obj:
        raise ValidationError(f"{where}: missing field {name!r}")
    return obj[name]


def load_corpus(path) -> list[AuthorRecord]:
    """Read line-delimited author records (JSON object per line, UTF-8).

    Required fields: author_id (string), posts (array of strings),
    bfi44 (array of 44 integers). Blank lines are skipped. Malformed lines
    raise with their line number; duplicate author ids are a hard error.
    """
    records = []
    seen = set()
    try:
        fh = open(path, encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read corpus: {e}") from e
    with fh:
        for ln, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{ln}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValidationError(f"{where}: invalid JSON: {e.msg}") from e
            if not isinstance(obj, dict):
                raise ValidationError(f"{where}: expected a JSON object")
            aid = _field(obj, "author_id", where)
            if not isinstance(aid, str) or not aid:
                raise ValidationError(f"{where}: author_id must be a non-empty string")
            if aid in seen:
                raise ValidationError(f"{where}: duplicate author_id {aid!r}")
            seen.add(aid)
            posts = _field(obj, "posts", where)
            if not isinstance(posts, list) or not all(isinstance(p, str) for p in posts):
                raise ValidationError(f"{where}: posts must be an array of strings")
            bfi = _field(obj, "bfi44", where)
            if not isinstance(bfi, list) or len(bfi) != N_ITEMS:
                raise ValidationError(f"{where}: bfi44 must be an array of {N_ITEMS} integers")
            try:
                inv = InventoryResponse(items=tuple(bfi))
            except ValidationError as e:
                raise ValidationError(f"{where}: {e}") from e
            records.append(AuthorRecord(author_id=aid, posts=tuple(posts), inventory=inv))
    return records


def _table_from_mapping(data, origin: str) -> NormalizationTable:
    if not isinstance(data, dict) or "rules" not in data:
        raise ConfigError(f"{origin}: expected a mapping with a 'rules' list")
    raw = data["rules"]
    if not isinstance(raw, list):
        raise ConfigError(f"{origin}: 'rules' must be a list")
    rules = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict) or "pattern" not in entry or "token" not in entry:
            raise ConfigError(f"{origin}: rule {i}: expected fields 'pattern' and 'token'")
        try:
            rules.append(NormRule(pattern=str(entry["pattern"]), token=str(entry["token"])))
        except ConfigError as e:
            raise ConfigError(f"{origin}: rule {i}: {e}") from e
    return NormalizationTable(rules=tuple(rules))


def load_normalization_table(path) -> NormalizationTable:
    """Load an ordered substitution table (YAML: rules of pattern/token)."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read normalization table: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: invalid YAML: {e}") from e
    return _table_from_mapping(data, str(path))


def default_normalization_table() -> NormalizationTable:
    """The table shipped with the package (laugh variants to $LAUGH$)."""
    text = importlib.resources.files("facetrec").joinpath("data/normalization.yaml").read_text("utf-8")
    return _table_from_mapping(yaml.safe_load(text), "builtin normalization table")
