"""Direction-aware interval rules mapping metric values onto 1-4 labels.

The shipped rule file (rules/default.yaml) is the normative encoding of the
bin table; ``load_rules`` accepts any file in the same format.  Intervals
are lower-closed/upper-open, with a finite terminal upper bound included in
its bin.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from importlib import resources
from typing import Mapping

import yaml

from videval.errors import MalformedRule, OutOfDomain, RuleMismatch, SchemaError
from videval.model import Direction, MetricValue, RatingLabel

#: One (lower, upper, label) interval; upper may be +inf.
Bin = tuple[float, float, int]


@dataclass(frozen=True)
class BinRule:
    """Interval-to-label mapping for one metric.

    Bins are kept sorted by lower bound, pairwise disjoint, and jointly
    covering [bins[0].lower, bins[-1].upper]; exactly one bin per label.
    ``clamp_below`` maps values under the domain minimum to the lowest bin's
    label (with a warning) instead of raising OutOfDomain.
    """

    metric_name: str
    direction: Direction
    bins: tuple[Bin, ...]
    clamp_below: bool = False

    def __post_init__(self):
        bins = self.bins
        if len(bins) != len(RatingLabel):
            raise MalformedRule(f"{self.metric_name}: expected {len(RatingLabel)} bins, got {len(bins)}")
        labels = sorted(label for _, _, label in bins)
        if labels != [l.value for l in RatingLabel]:
            raise MalformedRule(f"{self.metric_name}: labels must be exactly 1..4, got {labels}")
        for lo, hi, label in bins:
            if math.isnan(lo) or math.isnan(hi) or math.isinf(lo):
                raise MalformedRule(f"{self.metric_name}: bad bounds [{lo}, {hi}] for label {label}")
            if not lo < hi:
                raise MalformedRule(f"{self.metric_name}: empty interval [{lo}, {hi}] for label {label}")
        ordered = sorted(bins, key=lambda b: b[0])
        if tuple(ordered) != bins:
            raise MalformedRule(f"{self.metric_name}: bins must be listed in increasing value order")
        for (lo1, hi1, lab1), (lo2, _, lab2) in zip(bins, bins[1:]):
            if hi1 < lo2:
                raise MalformedRule(f"{self.metric_name}: gap between labels {lab1} and {lab2} at {hi1}..{lo2}")
            if hi1 > lo2:
                raise MalformedRule(f"{self.metric_name}: overlap between labels {lab1} and {lab2} at {lo2}..{hi1}")
        if any(math.isinf(hi) for _, hi, _ in bins[:-1]):
            raise MalformedRule(f"{self.metric_name}: only the top interval may be unbounded")

    @property
    def domain_min(self) -> float:
        return self.bins[0][0]

    @property
    def domain_max(self) -> float:
        return self.bins[-1][1]


def discretize(value: MetricValue, rule: BinRule) -> RatingLabel:
    """Label whose interval contains the raw value.

    The terminal upper endpoint, when finite, belongs to the top interval;
    every interior boundary belongs to the bin it opens.
    """
    if value.metric_name != rule.metric_name:
        raise RuleMismatch(f"value is {value.metric_name!r} but rule is {rule.metric_name!r}")
    if value.direction != rule.direction:
        raise RuleMismatch(
            f"{value.metric_name!r}: value direction {value.direction.value} != rule direction {rule.direction.value}"
        )
    v = value.raw
    if v < rule.domain_min:
        if rule.clamp_below:
            label = RatingLabel(rule.bins[0][2])
            warnings.warn(
                f"{rule.metric_name}: value {v} below domain minimum {rule.domain_min}; "
                f"clamped to label {label.value}",
                stacklevel=2,
            )
            return label
        raise OutOfDomain(f"{rule.metric_name}: value {v} below domain minimum {rule.domain_min}")
    for i, (lo, hi, label) in enumerate(rule.bins):
        terminal = i == len(rule.bins) - 1
        if terminal:
            if lo <= v <= hi:  # hi may be +inf
                return RatingLabel(label)
        elif lo <= v < hi:
            return RatingLabel(label)
    raise OutOfDomain(f"{rule.metric_name}: value {v} above domain maximum {rule.domain_max}")


def _bound(x) -> float:
    if isinstance(x, str):
        text = x.strip().lower().lstrip("+")
        if text in ("inf", ".inf", "infinity"):
            return math.inf
        raise MalformedRule(f"bad bound {x!r}")
    if isinstance(x, (int, float)):
        return float(x)
    raise MalformedRule(f"bad bound {x!r}")


def _parse_rule(obj) -> BinRule:
    if not isinstance(obj, Mapping):
        raise MalformedRule(f"rule entry must be a mapping, got {type(obj).__name__}")
    unknown = set(obj) - {"metric", "direction", "bins", "clamp_below"}
    if unknown:
        raise MalformedRule(f"rule has unknown keys {sorted(unknown)}")
    try:
        metric = str(obj["metric"])
        direction = Direction(obj["direction"])
        raw_bins = obj["bins"]
    except KeyError as exc:
        raise MalformedRule(f"rule missing key {exc}") from exc
    except ValueError as exc:
        raise MalformedRule(f"rule {obj.get('metric')!r}: {exc}") from exc
    if not isinstance(raw_bins, list):
        raise MalformedRule(f"{metric}: bins must be a list")
    bins = []
    for entry in raw_bins:
        if not isinstance(entry, list) or len(entry) != 3:
            raise MalformedRule(f"{metric}: each bin must be [lower, upper, label], got {entry!r}")
        lo, hi, label = entry
        if not isinstance(label, int):
            raise MalformedRule(f"{metric}: bin label must be an integer, got {label!r}")
        bins.append((_bound(lo), _bound(hi), label))
    bins.sort(key=lambda b: b[0])
    return BinRule(metric, direction, tuple(bins), clamp_below=bool(obj.get("clamp_below", False)))


def parse_rules(text: str) -> dict[str, BinRule]:
    """Parse a rule document; see rules/default.yaml for the format."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise MalformedRule(f"rule file is not valid YAML: {exc}") from exc
    if not isinstance(doc, Mapping) or "rules" not in doc:
        raise MalformedRule("rule file must be a mapping with a top-level 'rules' list")
    entries = doc["rules"]
    if not isinstance(entries, list) or not entries:
        raise MalformedRule("'rules' must be a non-empty list")
    rules: dict[str, BinRule] = {}
    for entry in entries:
        rule = _parse_rule(entry)
        if rule.metric_name in rules:
            raise MalformedRule(f"duplicate rule for metric {rule.metric_name!r}")
        rules[rule.metric_name] = rule
    return rules


def load_rules(path: str) -> dict[str, BinRule]:
    """Load and validate a rule file, keyed by metric name."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SchemaError(f"cannot read rule file {path!r}: {exc}") from exc
    return parse_rules(text)


def default_rules() -> dict[str, BinRule]:
    """The shipped rule set."""
    text = resources.files("videval").joinpath("rules/default.yaml").read_text("utf-8")
    return parse_rules(text)
