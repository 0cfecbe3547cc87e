"""Fuzzy trust engine: one link's attribute profile in, one trust value out.

The model is input-independent: every quantitative attribute is normalized by
its per-source maximum and folded into a single aggregate e in [0, 1], and the
qualitative attributes pick fuzzy rules that map e to an output trust class.
There are three input classes (POSITIVE, NEUTRAL, NEGATIVE) and five output
classes on the trust axis (SMALLEST .. LARGEST), all triangular or half
triangular. Each rule truncates its output class at the input grade; the
trust value is the centroid of the stacked truncations, with the two outer
classes carrying double density so that every class holds the same mass.

All the integrals have closed forms (the memberships are piecewise linear),
so evaluation is a handful of polynomial terms per rule.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Mapping, Tuple

from .errors import (
    DomainError,
    EmptyAssignmentError,
    MissingAttributeError,
    UnknownRuleError,
    WeightSumError,
    ZeroNormalizerError,
)

if TYPE_CHECKING:
    from .graph import FriendLink, SocialGraph


class ValueClass(enum.Enum):
    """Qualitative judgement of one attribute of a friendship link."""

    POSITIVE = "POSITIVE"
    NEUTRAL = "NEUTRAL"
    NEGATIVE = "NEGATIVE"


class Rule(enum.Enum):
    """The five rule families, named by the output class they fire.

    Each member carries the code used in rule-set files, the input class it
    listens to and the output class index (1 = LARGEST .. 5 = SMALLEST).
    """

    LARGEST = ("1i", ValueClass.POSITIVE, 1)
    LARGE = ("1ii", ValueClass.POSITIVE, 2)
    MEDIUM = ("2", ValueClass.NEUTRAL, 3)
    SMALL = ("3i", ValueClass.NEGATIVE, 4)
    SMALLEST = ("3ii", ValueClass.NEGATIVE, 5)

    def __init__(self, code, input_class, output_class):
        self.code = code
        self.input_class = input_class
        self.output_class = output_class

    @classmethod
    def from_code(cls, code: str) -> "Rule":
        for rule in cls:
            if rule.code == code:
                return rule
        raise UnknownRuleError("unknown rule code %r" % (code,))


def _check_unit_interval(e: float):
    if not 0.0 <= e <= 1.0:
        raise DomainError("aggregate must be in [0, 1], got %r" % (e,))


#: Density of each output class. The two half triangles at the ends are twice
#: as dense as the three interior triangles, which balances the mass held by
#: every class (density * area == 1/4 for all five).
DENSITY = {1: 2.0, 2: 1.0, 3: 1.0, 4: 1.0, 5: 2.0}

#: Output memberships as line segments (lo, hi, slope, intercept);
#: mu(tv) = slope * tv + intercept on [lo, hi] and 0 elsewhere.
_OUTPUT_SEGMENTS = {
    1: ((0.75, 1.00, 4.0, -3.0),),
    2: ((0.50, 0.75, 4.0, -2.0), (0.75, 1.00, -4.0, 4.0)),
    3: ((0.25, 0.50, 4.0, -1.0), (0.50, 0.75, -4.0, 3.0)),
    4: ((0.00, 0.25, 4.0, 0.0), (0.25, 0.50, -4.0, 2.0)),
    5: ((0.00, 0.25, -4.0, 1.0),),
}


def output_membership(output_class: int, tv: float) -> float:
    """Membership grade of trust value tv in one of the five output classes."""
    if output_class not in _OUTPUT_SEGMENTS:
        raise DomainError("output class must be 1..5, got %r" % (output_class,))
    for lo, hi, slope, intercept in _OUTPUT_SEGMENTS[output_class]:
        if lo <= tv <= hi:
            return slope * tv + intercept
    return 0.0


def input_grade(value_class: ValueClass, e: float) -> float:
    """Membership grade of aggregate e in an input class.

    POSITIVE rises with e, NEGATIVE falls with e, NEUTRAL peaks at 0.5.
    """
    _check_unit_interval(e)
    if value_class is ValueClass.POSITIVE:
        return e
    if value_class is ValueClass.NEGATIVE:
        return 1.0 - e
    return e if e <= 0.5 else 1.0 - e


def truncated_moment_and_mass(rule: Rule, e: float) -> Tuple[float, float]:
    """Moment and mass of a rule's output class truncated at the input grade.

    Returns (MP, M) where, with c(tv) = density * min(grade, mu_out(tv)),
    MP = integral of tv * c(tv) and M = integral of c(tv) over [0, 1].
    Closed forms, one polynomial pair per rule family.
    """
    _check_unit_interval(e)
    if rule is Rule.LARGEST:
        return -(e**3 + 9.0 * e**2 - 21.0 * e) / 48.0, -(e**2 - 2.0 * e) / 4.0
    if rule is Rule.LARGE:
        return -3.0 * (e**2 - 2.0 * e) / 16.0, -(e**2 - 2.0 * e) / 4.0
    if rule is Rule.MEDIUM:
        if e <= 0.5:
            return -(e**2 - 2.0 * e) / 8.0, -(e**2 - 2.0 * e) / 4.0
        return -(e**2 - 1.0) / 8.0, -(e**2 - 1.0) / 4.0
    if rule is Rule.SMALL:
        return -(e**2 - 1.0) / 16.0, -(e**2 - 1.0) / 4.0
    if rule is Rule.SMALLEST:
        return -(e**3 - 1.0) / 48.0, -(e**2 - 1.0) / 4.0
    raise UnknownRuleError("not a rule: %r" % (rule,))


def _moment_and_mass_rate(rule: Rule, e: float) -> Tuple[float, float]:
    # Derivatives d(MP)/de and d(M)/de of the closed forms above; used for
    # the one-sided limit when every matched rule has zero mass (e at 0 or 1).
    if rule is Rule.LARGEST:
        return (21.0 - 18.0 * e - 3.0 * e**2) / 48.0, (1.0 - e) / 2.0
    if rule is Rule.LARGE:
        return 3.0 * (1.0 - e) / 8.0, (1.0 - e) / 2.0
    if rule is Rule.MEDIUM:
        if e <= 0.5:
            return (1.0 - e) / 4.0, (1.0 - e) / 2.0
        return -e / 4.0, -e / 2.0
    if rule is Rule.SMALL:
        return -e / 8.0, -e / 2.0
    return -(e**2) / 16.0, -e / 2.0


def rule_trust_value(rule: Rule, e: float) -> float:
    """Trust value a single rule defuzzifies to on its own.

    LARGE, MEDIUM and SMALL are constant (3/4, 1/2, 1/4); LARGEST and
    SMALLEST drift with e because their half triangles are asymmetric.
    """
    return defuzzify([rule], e)


def defuzzify(rules: Iterable[Rule], e: float) -> float:
    """Centroid of the stacked truncated output classes of several rules.

    The ratio sum(MP) / sum(M) hits 0/0 exactly when e is 0 or 1 and no
    matched rule has positive grade there; the value is then the one-sided
    limit, the ratio of the summed derivatives.
    """
    rules = list(rules)
    if not rules:
        raise EmptyAssignmentError("no rules matched; nothing to defuzzify")
    moment = 0.0
    mass = 0.0
    for rule in rules:
        mp, m = truncated_moment_and_mass(rule, e)
        moment += mp
        mass += m
    if mass == 0.0:
        moment = 0.0
        for rule in rules:
            dmp, dm = _moment_and_mass_rate(rule, e)
            moment += dmp
            mass += dm
    return moment / mass


@dataclass(frozen=True)
class FuzzyRuleSet:
    """Which rules each qualitative attribute fires, plus aggregate weights.

    qualitative maps an attribute name to its (positive, negative) rule pair;
    a NEUTRAL judgement always fires MEDIUM. weights are the quantitative
    attribute weights of the aggregate and must sum to one.
    """

    qualitative: Mapping[str, Tuple[Rule, Rule]]
    weights: Mapping[str, float]

    def __post_init__(self):
        if not self.weights:
            raise WeightSumError("rule set defines no quantitative attributes")
        total = sum(self.weights[name] for name in sorted(self.weights))
        if abs(total - 1.0) > 1e-9:
            raise WeightSumError(
                "quantitative weights sum to %.12g, expected 1" % total
            )
        if total != 1.0:
            # Renormalize exactly so downstream aggregates stay in [0, 1].
            object.__setattr__(
                self,
                "weights",
                {name: w / total for name, w in self.weights.items()},
            )
        for name, (pos, neg) in self.qualitative.items():
            if pos.input_class is not ValueClass.POSITIVE:
                raise UnknownRuleError(
                    "%s: %s is not a positive rule" % (name, pos.code)
                )
            if neg.input_class is not ValueClass.NEGATIVE:
                raise UnknownRuleError(
                    "%s: %s is not a negative rule" % (name, neg.code)
                )

    def rule_for(self, attribute: str, value_class: ValueClass) -> Rule:
        if value_class is ValueClass.NEUTRAL:
            return Rule.MEDIUM
        try:
            positive, negative = self.qualitative[attribute]
        except KeyError:
            raise MissingAttributeError(
                "rule set has no rules for attribute %r" % (attribute,)
            ) from None
        return positive if value_class is ValueClass.POSITIVE else negative


def aggregate(
    raw: Mapping[str, float],
    normalizers: Mapping[str, float],
    weights: Mapping[str, float],
) -> float:
    """Weighted sum of normalized quantitative attributes, in [0, 1].

    raw holds the link's values, normalizers the per-attribute maxima they
    are divided by. Every weighted attribute must be present in both.
    """
    e = 0.0
    for name in sorted(weights):
        if name not in raw:
            raise MissingAttributeError("missing quantitative attribute %r" % name)
        if name not in normalizers:
            raise MissingAttributeError("no normalizer for attribute %r" % name)
        top = normalizers[name]
        if top <= 0.0:
            raise ZeroNormalizerError(
                "normalizer for %r is %r; cannot scale" % (name, top)
            )
        value = raw[name]
        if value < 0.0 or value > top:
            raise DomainError(
                "attribute %r = %r outside [0, %r]" % (name, value, top)
            )
        e += weights[name] * (value / top)
    # Guard against float drift just past the ends.
    return min(1.0, max(0.0, e))


def trust_value(
    e: float,
    assignments: Mapping[str, ValueClass],
    rules: FuzzyRuleSet,
) -> float:
    """Trust value of one link given its aggregate and qualitative profile."""
    if not assignments:
        raise EmptyAssignmentError("link has no qualitative assignments")
    matched = [
        rules.rule_for(name, assignments[name]) for name in sorted(assignments)
    ]
    return defuzzify(matched, e)


def link_trust(
    link: "FriendLink",
    normalizers: Mapping[str, float],
    rules: FuzzyRuleSet,
) -> float:
    """Trust value of a single link, given its source's normalizers."""
    try:
        e = aggregate(link.profile.quantitative, normalizers, rules.weights)
        return trust_value(e, link.profile.qualitative, rules)
    except MissingAttributeError as exc:
        raise MissingAttributeError(
            "link %d->%d network %d: %s"
            % (link.source, link.target, link.network, exc)
        ) from None


def compute_trust_values(graph: "SocialGraph", rules: FuzzyRuleSet) -> None:
    """Fill in trust_value on every link of the graph, in place.

    Normalizers are the per-attribute maxima over the source's out-links on
    the same network, so an entity's links are scored relative to its own
    strongest interaction there.
    """
    for source in graph.entity_ids():
        for network in graph.networks_from(source):
            links = graph.links_from(source, network)
            normalizers: dict[str, float] = {}
            for link in links:
                for name, value in link.profile.quantitative.items():
                    if value > normalizers.get(name, 0.0):
                        normalizers[name] = value
            for link in links:
                link.trust_value = link_trust(link, normalizers, rules)
