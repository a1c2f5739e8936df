"""BFI-44 inventory scoring against a configurable key.

A scoring key maps five personality domains and ten fixed facets onto the 44
inventory items. Reverse-keyed items are reflected about the scale midpoint
before averaging. Facet names and the sibling structure (which facet pairs
share a domain) are fixed; item assignments, scale bounds and domain names
are configuration and come from the key file.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError, ValidationError

N_ITEMS = 44

FACET_NAMES = (
    "Assertiveness",
    "Activity",
    "Altruism",
    "Compliance",
    "Order",
    "SelfDiscipline",
    "Anxiety",
    "Depression",
    "Aesthetics",
    "Ideas",
)

# Facet pairs that must share a parent domain.
FACET_SIBLINGS = (
    ("Assertiveness", "Activity"),
    ("Altruism", "Compliance"),
    ("Order", "SelfDiscipline"),
    ("Anxiety", "Depression"),
    ("Aesthetics", "Ideas"),
)

# (item_index, reversed); item_index is 0-based internally.
Item = tuple[int, bool]


def _validate_entry(owner: str, entry: tuple[Item, ...]) -> None:
    if not entry:
        raise ConfigError(f"{owner}: empty item list")
    seen = set()
    for idx, rev in entry:
        if not isinstance(idx, int) or isinstance(idx, bool):
            raise ConfigError(f"{owner}: item index {idx!r} is not an integer")
        if not 0 <= idx < N_ITEMS:
            raise ConfigError(f"{owner}: item {idx + 1} out of range 1..{N_ITEMS}")
        if idx in seen:
            raise ConfigError(f"{owner}: item {idx + 1} listed twice")
        seen.add(idx)
        if not isinstance(rev, bool):
            raise ConfigError(f"{owner}: reversed flag for item {idx + 1} is not a boolean")


@dataclass(frozen=True)
class ScoringKey:
    """Validated mapping of domains and facets to inventory items.

    ``domains`` has exactly five named entries; ``facets`` covers the ten
    fixed facet names, two per domain, each facet's items a subset of its
    parent domain's. ``facet_domains`` (derived) names each facet's parent.
    """

    scale_min: int
    scale_max: int
    domains: dict[str, tuple[Item, ...]]
    facets: dict[str, tuple[Item, ...]]
    facet_domains: dict[str, str] = field(init=False, repr=False)

    def __post_init__(self):
        for name, val in (("scale_min", self.scale_min), ("scale_max", self.scale_max)):
            if not isinstance(val, int) or isinstance(val, bool):
                raise ConfigError(f"{name} must be an integer, got {val!r}")
        if self.scale_min >= self.scale_max:
            raise ConfigError(
                f"scale_min must be below scale_max, got {self.scale_min}..{self.scale_max}"
            )
        if len(self.domains) != 5:
            raise ConfigError(f"expected exactly 5 domains, got {len(self.domains)}")
        for dom in self.domains:
            if not isinstance(dom, str) or not dom:
                raise ConfigError(f"domain name {dom!r} is not a non-empty string")
        if set(self.facets) != set(FACET_NAMES):
            missing = sorted(set(FACET_NAMES) - set(self.facets))
            extra = sorted(set(self.facets) - set(FACET_NAMES))
            parts = []
            if missing:
                parts.append("missing facets: " + ", ".join(missing))
            if extra:
                parts.append("unknown facets: " + ", ".join(extra))
            raise ConfigError("; ".join(parts))
        for dom, entry in self.domains.items():
            _validate_entry(f"domain {dom}", entry)
        for fac, entry in self.facets.items():
            _validate_entry(f"facet {fac}", entry)

        # Resolve each facet's parent domain by item-set containment; the
        # reversed flags must match as well.
        candidates: dict[str, set[str]] = {}
        for fac in FACET_NAMES:
            fset = set(self.facets[fac])
            cands = {dom for dom, entry in self.domains.items() if fset <= set(entry)}
            if not cands:
                raise ConfigError(f"facet {fac}: items are not a subset of any domain")
            candidates[fac] = cands
        parents: dict[str, str] = {}
        for a, b in FACET_SIBLINGS:
            common = candidates[a] & candidates[b]
            if not common:
                raise ConfigError(f"facets {a} and {b} must share a parent domain")
            if len(common) > 1:
                raise ConfigError(
                    f"facets {a} and {b}: parent domain ambiguous ({', '.join(sorted(common))})"
                )
            dom = next(iter(common))
            parents[a] = dom
            parents[b] = dom
        if len(set(parents.values())) != 5:
            raise ConfigError("facet pairs must map onto 5 distinct domains")
        object.__setattr__(self, "facet_domains", parents)


@dataclass(frozen=True)
class InventoryResponse:
    """One author's 44 Likert responses, in item order."""

    items: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if len(self.items) != N_ITEMS:
            raise ValidationError(
                f"inventory must have exactly {N_ITEMS} items, got {len(self.items)}"
            )
        for pos, val in enumerate(self.items, start=1):
            if not isinstance(val, int) or isinstance(val, bool):
                raise ValidationError(f"item {pos}: response {val!r} is not an integer")


@dataclass(frozen=True)
class FacetScores:
    """Mean-scored domains and facets for one inventory."""

    domains: dict[str, float]
    facets: dict[str, float]


def _check_in_scale(response: int, key: ScoringKey, item: int | None = None) -> None:
    if not isinstance(response, int) or isinstance(response, bool):
        where = f"item {item}: " if item is not None else ""
        raise ValidationError(f"{where}response {response!r} is not an integer")
    if not key.scale_min <= response <= key.scale_max:
        where = f"item {item}: " if item is not None else ""
        raise ValidationError(
            f"{where}response {response} outside scale {key.scale_min}..{key.scale_max}"
        )


def reverse_item(response: int, key: ScoringKey, item: int | None = None) -> int:
    """Reflect a response about the scale midpoint.

    ``item`` is an optional 1-based item number used only in error messages.
    """
    _check_in_scale(response, key, item)
    return key.scale_min + key.scale_max - response


def score_inventory(resp: InventoryResponse, key: ScoringKey) -> FacetScores:
    """Mean of reverse-corrected member items, per domain and per facet."""
    vals = resp.items
    for pos, val in enumerate(vals, start=1):
        _check_in_scale(val, key, pos)

    def mean_of(entry: tuple[Item, ...]) -> float:
        total = 0.0
        for idx, rev in entry:
            v = vals[idx]
            total += (key.scale_min + key.scale_max - v) if rev else v
        return total / len(entry)

    return FacetScores(
        domains={dom: mean_of(entry) for dom, entry in key.domains.items()},
        facets={fac: mean_of(key.facets[fac]) for fac in FACET_NAMES},
    )


def _parse_signed_items(owner: str, raw) -> tuple[Item, ...]:
    # File format: signed 1-based indices, negative sign = reversed item.
    if not isinstance(raw, list):
        raise ConfigError(f"{owner}: expected a list of signed item numbers")
    items = []
    for v in raw:
        if not isinstance(v, int) or isinstance(v, bool):
            raise ConfigError(f"{owner}: item number {v!r} is not an integer")
        if v == 0:
            raise ConfigError(f"{owner}: item number 0 is invalid (numbering is 1-based)")
        items.append((abs(v) - 1, v < 0))
    return tuple(items)


def _key_from_mapping(data, origin: str) -> ScoringKey:
    if not isinstance(data, dict):
        raise ConfigError(f"{origin}: expected a mapping at top level")
    for field_name in ("scale_min", "scale_max", "domains", "facets"):
        if field_name not in data:
            raise ConfigError(f"{origin}: missing field {field_name!r}")
    domains_raw = data["domains"]
    facets_raw = data["facets"]
    if not isinstance(domains_raw, dict):
        raise ConfigError(f"{origin}: domains must be a mapping")
    if not isinstance(facets_raw, dict):
        raise ConfigError(f"{origin}: facets must be a mapping")
    domains = {
        str(dom): _parse_signed_items(f"domain {dom}", entry)
        for dom, entry in domains_raw.items()
    }
    facets = {
        str(fac): _parse_signed_items(f"facet {fac}", entry)
        for fac, entry in facets_raw.items()
    }
    return ScoringKey(
        scale_min=data["scale_min"],
        scale_max=data["scale_max"],
        domains=domains,
        facets=facets,
    )


def load_scoring_key(path) -> ScoringKey:
    """Load and validate a scoring key file (YAML, signed 1-based items)."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read scoring key: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: invalid YAML: {e}") from e
    try:
        return _key_from_mapping(data, str(path))
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}") from e


def default_scoring_key() -> ScoringKey:
    """The key shipped with the package (1-5 scale, editable copy in data/)."""
    text = importlib.resources.files("facetrec").joinpath("data/scoring_key.yaml").read_text("utf-8")
    return _key_from_mapping(yaml.safe_load(text), "builtin scoring key")
