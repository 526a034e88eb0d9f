"""Downlink transceiver synthesis: relay broadcast coding toward four users.

After canonicalization the four effective downlink noises obey
``sbar1 >= sbar2``, ``sbar3 >= sbar4`` and ``sbar4 >= sbar2``; what remains
free is how the two pairs interleave, and that shape -- one of three
orderings -- decides the whole broadcast construction:

* case I   (``sbar3 >= sbar4 >= sbar1 >= sbar2``): two superposed codewords,
  one per pair, peeled in quality order (scheme "4.1");
* case II  (``sbar3 >= sbar1 >= sbar4 >= sbar2``): either four codewords with
  both leaders' private message parts split out (scheme "4.2"), or the
  two-codeword layout decoded in the swapped order (scheme "4.3");
* case III (``sbar1 >= sbar3 >= sbar4 >= sbar2``): three codewords with the
  pair-A leader's private part split out (scheme "4.4").

Each case's deliverable region is a polytope with a short list of maximal
vertices (labels ``D1.1`` .. ``D3.5``).  Every vertex has a closed-form relay
power recipe, branching on how the power budget compares with the effective
noises; some branches pin only the *sum* of the two weakest layers and leave
the split to an interval rule (`pr4_interval`).  `message_plan` spells out
which user messages ride which relay codeword and how each user unwraps them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Sequence, Tuple

from .bounds import _require_ordering, downlink_polytope
from .model import (
    CLAMP_TOL,
    GAP_TOL,
    HALF_BIT,
    TIGHT_TOL,
    CapacityTerms,
    GapCertificate,
    InternalConsistencyError,
    RateTuple,
    SystemParams,
    ValidationError,
    capacity_terms,
    slack_of,
)
from .polytope import contains


class CaseLabel(Enum):
    """Which of the three effective-noise orderings the channel falls in."""

    I = "I"
    II = "II"
    III = "III"


SCHEME_IDS = ("4.1", "4.2", "4.3", "4.4")

#: broadcast schemes whose rate map is valid under each case's ordering
CASE_SCHEMES: Dict[CaseLabel, Tuple[str, ...]] = {
    CaseLabel.I: ("4.1",),
    CaseLabel.II: ("4.2", "4.3"),
    CaseLabel.III: ("4.4",),
}

DOWNLINK_LABELS = (
    "D1.1", "D1.2", "D1.3",
    "D2.1", "D2.2", "D2.3", "D2.4", "D2.5",
    "D3.1", "D3.2", "D3.3", "D3.4", "D3.5",
)

_LABEL_CASE = {
    label: {"1": CaseLabel.I, "2": CaseLabel.II, "3": CaseLabel.III}[label[1]]
    for label in DOWNLINK_LABELS
}

#: every recipe branch `alloc_for_vertex` can take, keyed by vertex label
SUBCASE_TAGS: Dict[str, Tuple[str, ...]] = {
    "D1.1": ("always",),
    "D1.2": ("PR>=sbar4", "PR<sbar4"),
    "D1.3": ("PR>=sbar3", "PR<sbar3"),
    "D2.1": ("PR>=sbar1", "PR<sbar1"),
    "D2.2": ("PR>=sbar4", "PR<sbar4"),
    "D2.3": ("PR>=sbar1", "sbar4<=PR<sbar1", "PR<sbar4"),
    "D2.4": (
        "PR<sbar4",
        "sbar4<=PR<sbar3,sbar4>=2sbar2",
        "sbar4<=PR<sbar3,sbar4<2sbar2",
        "PR>=sbar3,sbar3>=2sbar1",
        "PR>=sbar3,sbar3<2sbar1",
    ),
    "D2.5": (
        "sbar3>=3sbar1,PR>=sbar3",
        "sbar3>=3sbar1,thr<PR<sbar3",
        "sbar3>=3sbar1,PR<=thr",
        "2sbar1<=sbar3<3sbar1,PR>=thr",
        "2sbar1<=sbar3<3sbar1,sbar3<PR<thr",
        "2sbar1<=sbar3<3sbar1,PR<=sbar3",
        "sbar3<2sbar1,PR>=sbar4",
        "sbar3<2sbar1,PR<sbar4",
    ),
    "D3.1": ("PR>=sbar1", "PR<sbar1"),
    "D3.2": ("PR>=sbar4", "PR<sbar4"),
    "D3.3": ("PR>=sbar3", "PR<sbar3"),
    "D3.4": ("PR>=sbar1", "PR<sbar1"),
    "D3.5": ("PR>=sbar1", "PR<sbar1"),
}


def case_of_label(label: str) -> CaseLabel:
    """Map a vertex label like "D2.3" to the case family it belongs to."""
    try:
        return _LABEL_CASE[label]
    except KeyError:
        raise ValidationError(
            f"unknown downlink vertex label {label!r}; expected one of {DOWNLINK_LABELS}"
        ) from None


def _geq(a: float, b: float) -> bool:
    # a >= b, with a relative-ish tolerance and without inf - inf traps
    if a >= b:
        return True
    slack = TIGHT_TOL * (max(1.0, abs(b)) if math.isfinite(b) else 1.0)
    return b - a <= slack


def _as_sbar4(sigma_bar2) -> Tuple[float, float, float, float]:
    try:
        vals = tuple(float(v) for v in sigma_bar2)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"sigma_bar2 must be a sequence of 4 reals: {exc}") from exc
    if len(vals) != 4:
        raise ValidationError(f"sigma_bar2 must have exactly 4 entries, got {len(vals)}")
    for k, v in enumerate(vals):
        if math.isnan(v) or v <= 0.0:
            raise ValidationError(f"sigma_bar2[{k + 1}] must be > 0 (inf allowed), got {v}")
    return vals  # type: ignore[return-value]


def classify_case(sigma_bar2: Sequence[float]) -> CaseLabel:
    """Pick the broadcast construction family from the effective noises.

    Requires the canonical partial order (``sbar1 >= sbar2``,
    ``sbar3 >= sbar4``, ``sbar4 >= sbar2``); ties between the remaining free
    comparisons resolve toward the lower-numbered case.
    """
    s1, s2, s3, s4 = _as_sbar4(sigma_bar2)
    for name_hi, hi, name_lo, lo in (
        ("sigma_bar2[1]", s1, "sigma_bar2[2]", s2),
        ("sigma_bar2[3]", s3, "sigma_bar2[4]", s4),
        ("sigma_bar2[4]", s4, "sigma_bar2[2]", s2),
    ):
        if not _geq(hi, lo):
            raise ValidationError(
                f"effective noises are not canonical: need {name_hi} >= {name_lo}, "
                f"got {hi} < {lo} (canonicalize first)"
            )
    if s4 >= s1:
        return CaseLabel.I
    if s3 >= s1:
        return CaseLabel.II
    return CaseLabel.III


# ---------------------------------------------------------------------------
# scheme rate maps
# ---------------------------------------------------------------------------


def _layer(p: float, interference: float, sbar2: float) -> float:
    """Rate of one broadcast layer: 0.5*log2(1 + p / (interference + sbar2)).

    ``sbar2`` may be +inf (a user the relay cannot reach), in which case the
    layer contributes zero rate.
    """
    return 0.5 * math.log2(1.0 + p / (interference + sbar2))


def _check_powers(**named: float) -> None:
    for name, value in named.items():
        if math.isnan(value) or math.isinf(value) or value < 0.0:
            raise ValidationError(f"{name} must be a finite nonnegative power, got {value}")


def rates_case1(pR1: float, pR2: float, sigma_bar2: Sequence[float]) -> RateTuple:
    """Two-codeword rates under the case-I ordering: the pair-B codeword
    (power pR1) is decoded first everywhere, the pair-A codeword (pR2) rides
    underneath."""
    _check_powers(pR1=pR1, pR2=pR2)
    s1, s2, s3, s4 = _as_sbar4(sigma_bar2)
    return RateTuple(
        (
            _layer(pR2, 0.0, s2),
            _layer(pR2, 0.0, s1),
            _layer(pR1, pR2, s4),
            _layer(pR1, pR2, s3),
        )
    )


def rates_case2_s1(
    pR1: float, pR2: float, pR3: float, pR4: float, sigma_bar2: Sequence[float]
) -> RateTuple:
    """Four-codeword rates under the case-II ordering (scheme "4.2").

    Layer 1 carries the pair-B common part, layer 2 the pair-A common part,
    layers 3 and 4 the split-out private remainders of users 3 and 1.  User
    4's rate is limited by the worse of its own channel and user 2's (the
    common part must survive both), hence the min.
    """
    _check_powers(pR1=pR1, pR2=pR2, pR3=pR3, pR4=pR4)
    s1, s2, s3, s4 = _as_sbar4(sigma_bar2)
    r1 = _layer(pR4, 0.0, s2) + _layer(pR2, pR3 + pR4, s4)
    r2 = _layer(pR2, pR3 + pR4, s1)
    r3 = _layer(pR1, pR2 + pR3 + pR4, s1) + _layer(pR3, pR4, s4)
    r4 = min(_layer(pR1, pR2 + pR4, s3), _layer(pR1, pR2 + pR3 + pR4, s1))
    return RateTuple((r1, r2, r3, r4))


def rates_case2_s2(pR1: float, pR2: float, sigma_bar2: Sequence[float]) -> RateTuple:
    """Two-codeword rates under the case-II ordering (scheme "4.3"): user 1
    decodes its layer directly through the pair-B codeword's interference."""
    _check_powers(pR1=pR1, pR2=pR2)
    s1, s2, s3, s4 = _as_sbar4(sigma_bar2)
    return RateTuple(
        (
            _layer(pR2, 0.0, s2),
            _layer(pR2, pR1, s1),
            _layer(pR1, pR2, s4),
            _layer(pR1, pR2, s3),
        )
    )


def rates_case3(
    pR1: float, pR2: float, pR3: float, sigma_bar2: Sequence[float]
) -> RateTuple:
    """Three-codeword rates under the case-III ordering (scheme "4.4").

    Layer 1 carries the pair-A common part, layer 2 the pair-B common part,
    layer 3 user 1's split-out private remainder.  User 2's rate is capped by
    the worse of its own channel and the pair-B users' (who must strip layer
    1 before reaching their own), hence the min.
    """
    _check_powers(pR1=pR1, pR2=pR2, pR3=pR3)
    s1, s2, s3, s4 = _as_sbar4(sigma_bar2)
    r1 = _layer(pR3, 0.0, s2) + _layer(pR1, pR2 + pR3, s3)
    r2 = min(_layer(pR1, pR2, s1), _layer(pR1, pR2 + pR3, s3))
    r3 = _layer(pR2, pR3, s4)
    r4 = _layer(pR2, pR3, s3)
    return RateTuple((r1, r2, r3, r4))


@dataclass(frozen=True)
class DownlinkPowerAlloc:
    """Relay power split across (up to) four broadcast layers.

    ``scheme_id`` names the rate map the split is meant for; layers a scheme
    does not use must be exactly zero (schemes "4.1"/"4.3" use layers 1-2,
    scheme "4.4" uses layers 1-3).
    """

    pR1: float
    pR2: float
    pR3: float
    pR4: float
    scheme_id: str

    def __init__(self, pR1: float, pR2: float, pR3: float, pR4: float, scheme_id: str):
        if scheme_id not in SCHEME_IDS:
            raise ValidationError(f"scheme_id must be one of {SCHEME_IDS}, got {scheme_id!r}")
        vals = []
        for name, v in (("pR1", pR1), ("pR2", pR2), ("pR3", pR3), ("pR4", pR4)):
            v = float(v)
            if math.isnan(v) or math.isinf(v) or v < -CLAMP_TOL:
                raise ValidationError(f"{name} must be a finite nonnegative power, got {v}")
            vals.append(v if v > 0.0 else 0.0)
        if scheme_id in ("4.1", "4.3") and (vals[2] != 0.0 or vals[3] != 0.0):
            raise ValidationError(
                f"scheme {scheme_id} uses two layers; pR3/pR4 must be 0, "
                f"got {vals[2]}, {vals[3]}"
            )
        if scheme_id == "4.4" and vals[3] != 0.0:
            raise ValidationError(f"scheme 4.4 uses three layers; pR4 must be 0, got {vals[3]}")
        object.__setattr__(self, "pR1", vals[0])
        object.__setattr__(self, "pR2", vals[1])
        object.__setattr__(self, "pR3", vals[2])
        object.__setattr__(self, "pR4", vals[3])
        object.__setattr__(self, "scheme_id", scheme_id)

    @property
    def total(self) -> float:
        return self.pR1 + self.pR2 + self.pR3 + self.pR4


def scheme_rates(alloc: DownlinkPowerAlloc, sigma_bar2: Sequence[float]) -> RateTuple:
    """Evaluate the rate map named by ``alloc.scheme_id`` at ``alloc``."""
    if alloc.scheme_id == "4.1":
        return rates_case1(alloc.pR1, alloc.pR2, sigma_bar2)
    if alloc.scheme_id == "4.2":
        return rates_case2_s1(alloc.pR1, alloc.pR2, alloc.pR3, alloc.pR4, sigma_bar2)
    if alloc.scheme_id == "4.3":
        return rates_case2_s2(alloc.pR1, alloc.pR2, sigma_bar2)
    return rates_case3(alloc.pR1, alloc.pR2, alloc.pR3, sigma_bar2)


# ---------------------------------------------------------------------------
# maximal vertices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DownlinkVertex:
    label: str
    rates: RateTuple


def _vertex_component(x: float, label: str) -> float:
    if abs(x) < CLAMP_TOL:
        return 0.0
    if x <= -TIGHT_TOL:
        raise InternalConsistencyError(
            f"vertex {label} has component {x} < 0; effective noise ordering violated"
        )
    return x


def downlink_vertices(case: CaseLabel, terms: CapacityTerms) -> List[DownlinkVertex]:
    """The maximal vertices of one case's deliverable region, in label order.

    Components that are exact zeros up to float dust are clamped; a component
    below -TIGHT_TOL means the terms do not actually satisfy the case's noise
    ordering and raises.
    """
    case = CaseLabel(getattr(case, "value", case))
    d1, d2, d3, d4 = terms.D
    if case is CaseLabel.I:
        table = (
            ("D1.1", (d2, d1, 0.0, 0.0)),
            ("D1.2", (d2 - d4, d1 - d4, d4, d3)),
            ("D1.3", (d2 - d3, d1 - d3, d3, d3)),
        )
    elif case is CaseLabel.II:
        table = (
            ("D2.1", (d2, d1, 0.0, 0.0)),
            ("D2.2", (d2 - d4, 0.0, d4, d3)),
            ("D2.3", (d2 - d4 + d1, d1, d4 - d1, 0.0)),
            ("D2.4", (d2 - d3, d1 - d3, d3, d3)),
            ("D2.5", (d2 - d4 + d1 - d3, d1 - d3, d4 - d1 + d3, d3)),
        )
    else:
        table = (
            ("D3.1", (d2, d1, 0.0, 0.0)),
            ("D3.2", (d2 - d4, 0.0, d4, d3)),
            ("D3.3", (d2 - d3, 0.0, d3, d3)),
            ("D3.4", (d2 - d4 + d1, d1, d4 - d1, d3 - d1)),
            ("D3.5", (d2 - d3 + d1, d1, d3 - d1, d3 - d1)),
        )
    return [
        DownlinkVertex(label, RateTuple(tuple(_vertex_component(x, label) for x in raw)))
        for label, raw in table
    ]


# ---------------------------------------------------------------------------
# per-vertex power recipes
# ---------------------------------------------------------------------------


def pr4_interval(
    pmin: float, pmax: float, psum: float, extra_caps: Sequence[float] = ()
) -> float:
    """Pick the fourth-layer power out of its feasibility window.

    The window is ``[max(pmin, 0), min(pmax, psum, *extra_caps)]``; the
    recipes that call this are proven to leave it nonempty, so an empty
    window (beyond 1e-9 slack) is an internal transcription bug, not a user
    error.  Returns the midpoint — the point of maximal margin against the
    float-level shrinkage the closed forms can exhibit.
    """
    lo = max(pmin, 0.0)
    hi = min((pmax, psum, *extra_caps))
    if lo > hi + 1e-9:
        raise InternalConsistencyError(
            f"empty fourth-layer power window: lo={lo}, hi={hi} "
            f"(pmin={pmin}, pmax={pmax}, psum={psum}, extra_caps={tuple(extra_caps)})"
        )
    mid = 0.5 * (lo + hi)
    return min(max(mid, 0.0), max(psum, 0.0))


def _nonneg(x: float, what: str, scale: float) -> float:
    """Clamp float dust on a mathematically nonnegative quantity."""
    if x >= 0.0:
        return x
    if x >= -TIGHT_TOL * max(1.0, scale):
        return 0.0
    raise InternalConsistencyError(f"{what} = {x} < 0; recipe preconditions violated")


def _threshold(s1: float, s3: float) -> float:
    """The budget level t with sum-layer feasibility flips: s1*s3/(s3-2*s1),
    taken as +inf when the denominator vanishes (or s1 is already infinite)."""
    if math.isinf(s1):
        return math.inf
    d = 1.0 - 2.0 * s1 / s3
    return math.inf if d <= 0.0 else s1 / d


def alloc_for_vertex(
    case: CaseLabel, label: str, params: SystemParams
) -> Tuple[DownlinkPowerAlloc, str]:
    """Closed-form relay power split targeting one maximal vertex.

    Returns the allocation together with a tag naming the recipe branch that
    fired (branch predicates compare the power budget PR with the effective
    noises).  ``params`` must be canonical and its noise ordering must match
    ``case``; the vertex ``label`` must belong to ``case``.
    """
    case = CaseLabel(getattr(case, "value", case))
    if case_of_label(label) is not case:
        raise ValidationError(f"vertex {label} does not belong to case {case.value}")
    terms = capacity_terms(params)
    _require_ordering(case.value, terms.sigma_bar2)
    s1, s2, s3, s4 = terms.sigma_bar2
    PR = params.PR

    if case is CaseLabel.I:
        alloc, tag = _alloc_case1(label, PR, s1, s2, s3, s4)
    elif case is CaseLabel.II:
        alloc, tag = _alloc_case2(label, PR, s1, s2, s3, s4)
    else:
        alloc, tag = _alloc_case3(label, PR, s1, s2, s3, s4)

    if alloc.total > PR * (1.0 + 1e-12) + 1e-9:
        raise InternalConsistencyError(
            f"recipe for {label} ({tag}) overspends the budget: "
            f"total={alloc.total} > PR={PR}"
        )
    return alloc, tag


def _alloc_case1(label, PR, s1, s2, s3, s4):
    if label == "D1.1":
        return DownlinkPowerAlloc(0.0, PR, 0.0, 0.0, "4.1"), "always"
    if label == "D1.2":
        if PR >= s4:
            return DownlinkPowerAlloc(PR - s4, s4, 0.0, 0.0, "4.1"), "PR>=sbar4"
        return DownlinkPowerAlloc(0.0, PR, 0.0, 0.0, "4.1"), "PR<sbar4"
    if label == "D1.3":
        if PR >= s3:
            return DownlinkPowerAlloc(PR - s3, s3, 0.0, 0.0, "4.1"), "PR>=sbar3"
        return DownlinkPowerAlloc(0.0, PR, 0.0, 0.0, "4.1"), "PR<sbar3"
    raise InternalConsistencyError(f"unhandled case-I label {label}")


def _alloc_case2(label, PR, s1, s2, s3, s4):
    if label == "D2.1":
        if PR >= s1:
            return DownlinkPowerAlloc(0.0, PR - s1, 0.0, s1, "4.2"), "PR>=sbar1"
        return DownlinkPowerAlloc(0.0, 0.0, 0.0, PR, "4.2"), "PR<sbar1"

    if label == "D2.2":
        if PR >= s4:
            return DownlinkPowerAlloc(PR - s4, s4, 0.0, 0.0, "4.3"), "PR>=sbar4"
        return DownlinkPowerAlloc(0.0, PR, 0.0, 0.0, "4.3"), "PR<sbar4"

    if label == "D2.3":
        if PR >= s1:
            psum = s1
            F = (s4 / (PR + s4)) * ((PR + s1) / s1)
            pmin = F * (s1 + s4) * (PR + s2) / (2.0 * (PR + s4)) - s2
            pmax = F * (s1 + s4) * 2.0 - s4
            p4 = pr4_interval(pmin, pmax, psum)
            p3 = _nonneg(psum - p4, "pR3", PR)
            return DownlinkPowerAlloc(0.0, PR - s1, p3, p4, "4.2"), "PR>=sbar1"
        if PR >= s4:
            return DownlinkPowerAlloc(0.0, 0.0, PR - s4, s4, "4.2"), "sbar4<=PR<sbar1"
        return DownlinkPowerAlloc(0.0, 0.0, 0.0, PR, "4.2"), "PR<sbar4"

    if label == "D2.4":
        if PR < s4:
            return DownlinkPowerAlloc(0.0, 0.0, 0.0, PR, "4.2"), "PR<sbar4"
        if PR < s3:
            if s4 >= 2.0 * s2:
                p4 = s4 - 2.0 * s2
                return (
                    DownlinkPowerAlloc(0.0, PR - p4, 0.0, p4, "4.2"),
                    "sbar4<=PR<sbar3,sbar4>=2sbar2",
                )
            return (
                DownlinkPowerAlloc(0.0, PR, 0.0, 0.0, "4.2"),
                "sbar4<=PR<sbar3,sbar4<2sbar2",
            )
        if s3 >= 2.0 * s1:
            p4 = s1 * (s3 + 2.0 * s1 - s4) / (s3 + s1)
            psum = s1 * (s3 + 2.0 * s1) / s3
            p3 = _nonneg(psum - p4, "pR3", PR)
            p2 = _nonneg(s3 - psum, "pR2", PR)
            return DownlinkPowerAlloc(PR - s3, p2, p3, p4, "4.2"), "PR>=sbar3,sbar3>=2sbar1"
        return (
            DownlinkPowerAlloc(PR - s3, 0.0, 0.5 * s3, 0.5 * s3, "4.2"),
            "PR>=sbar3,sbar3<2sbar1",
        )

    if label == "D2.5":
        return _alloc_d25(PR, s1, s2, s3, s4)

    raise InternalConsistencyError(f"unhandled case-II label {label}")


def _alloc_d25(PR, s1, s2, s3, s4):
    """The eight-branch recipe for the case-II vertex that keeps all four
    pair-sum rows tight at once."""
    thr = _threshold(s1, s3)

    if s3 >= 3.0 * s1:
        if PR >= s3:
            # top-power branch: peel layer 1 at full strength, split the
            # remaining budget s3 across layers 2..4
            shrink = (s1 / (PR + s1)) * ((PR + s3) / s3)
            psum = shrink * 2.0 * (s3 + s1) - s1
            p2 = _nonneg(s3 - psum, "pR2", PR)
            K = (s4 / (PR + s4)) * ((PR + s1) / s1) * (s3 / (PR + s3))
            pmin = K * (psum + s4) * (PR + s2) / (2.0 * (s3 + s4)) - s2
            pmax = K * (psum + s4) * 2.0 * (PR + s1) / (s3 + s1) - s4
            p4 = pr4_interval(pmin, pmax, psum)
            p3 = _nonneg(psum - p4, "pR3", PR)
            return DownlinkPowerAlloc(PR - s3, p2, p3, p4, "4.2"), "sbar3>=3sbar1,PR>=sbar3"
        if PR > thr:
            psum = s1 * (2.0 * PR / s3 + 1.0)
            p2 = _nonneg(PR - psum, "pR2", PR)
            q3 = 1.0 if math.isinf(s3) else s3 / (PR + s3)
            G = (2.0 * PR * s1 / s3 + s1 + s4) * (s4 / (PR + s4)) * ((PR + s1) / s1) * q3
            pmin = G * (PR + s2) / (2.0 * (PR + s4)) - s2
            pmax = G * 2.0 - s4
            p4 = pr4_interval(pmin, pmax, psum)
            p3 = _nonneg(psum - p4, "pR3", PR)
            return DownlinkPowerAlloc(0.0, p2, p3, p4, "4.2"), "sbar3>=3sbar1,thr<PR<sbar3"
        psum = PR
        u1 = 1.0 if math.isinf(s1) else (PR + s1) / s1
        q3 = 1.0 if math.isinf(s3) else s3 / (PR + s3)
        H = s4 * u1 * q3
        pmin = H * (PR + s2) / (2.0 * (PR + s4)) - s2
        pmax = H * 2.0 - s4
        p4 = pr4_interval(pmin, pmax, psum)
        p3 = _nonneg(psum - p4, "pR3", PR)
        return DownlinkPowerAlloc(0.0, 0.0, p3, p4, "4.2"), "sbar3>=3sbar1,PR<=thr"

    if s3 >= 2.0 * s1:
        if PR >= thr:
            # same window shape as the top-power branch above, with this
            # branch's layer sum
            shrink = (s1 / (PR + s1)) * ((PR + s3) / s3)
            psum = shrink * 2.0 * (s3 + s1) - s1
            p2 = _nonneg(s3 - psum, "pR2", PR)
            K = (s4 / (PR + s4)) * ((PR + s1) / s1) * (s3 / (PR + s3))
            pmin = K * (psum + s4) * (PR + s2) / (2.0 * (s3 + s4)) - s2
            pmax = K * (psum + s4) * 2.0 * (PR + s1) / (s3 + s1) - s4
            p4 = pr4_interval(pmin, pmax, psum)
            p3 = _nonneg(psum - p4, "pR3", PR)
            return (
                DownlinkPowerAlloc(PR - s3, p2, p3, p4, "4.2"),
                "2sbar1<=sbar3<3sbar1,PR>=thr",
            )
        if PR > s3:
            psum = 2.0 * s3 * (PR + s1) / (PR + s3) - s1
            p1 = _nonneg(PR - psum, "pR1", PR)
            K = (s4 / (PR + s4)) * ((PR + s1) / s1) * (s3 / (PR + s3))
            pmin = K * (PR + s2) / 2.0 - s2
            pmax = K * ((2.0 + (s4 - s1) / s3) * PR + s1 + s4) - s4
            cap = (PR + 2.0 * s1 - s3) * s3 / (PR + s3)
            _d25_quadratic_check(PR, s1, s2, s3, s4)
            p4 = pr4_interval(pmin, pmax, psum, extra_caps=(cap,))
            p3 = _nonneg(psum - p4, "pR3", PR)
            return (
                DownlinkPowerAlloc(p1, 0.0, p3, p4, "4.2"),
                "2sbar1<=sbar3<3sbar1,sbar3<PR<thr",
            )
        # same window shape as the low-power branch of the previous group
        psum = PR
        H = s4 * ((PR + s1) / s1) * (s3 / (PR + s3))
        pmin = H * (PR + s2) / (2.0 * (PR + s4)) - s2
        pmax = H * 2.0 - s4
        p4 = pr4_interval(pmin, pmax, psum)
        p3 = _nonneg(psum - p4, "pR3", PR)
        return DownlinkPowerAlloc(0.0, 0.0, p3, p4, "4.2"), "2sbar1<=sbar3<3sbar1,PR<=sbar3"

    if PR >= s4:
        return DownlinkPowerAlloc(PR - s4, s4, 0.0, 0.0, "4.3"), "sbar3<2sbar1,PR>=sbar4"
    return DownlinkPowerAlloc(0.0, PR, 0.0, 0.0, "4.3"), "sbar3<2sbar1,PR<sbar4"


def _d25_quadratic_check(PR, s1, s2, s3, s4):
    """Sanity: the quadratic controlling the mid-power window's feasibility
    must be nonnegative at the operating budget."""
    a = 2.0 * s1 - s4
    b = 4.0 * s1 * s1 - 2.0 * s1 * s3 + s1 * s4 - s2 * s4
    c = 4.0 * s1 * s1 * s4 - 2.0 * s1 * s3 * s4 - s1 * s2 * s4
    f = (a * PR + b) * PR + c
    scale = max(1.0, abs(a) * PR * PR, abs(b) * PR, abs(c))
    if f < -TIGHT_TOL * scale:
        raise InternalConsistencyError(
            f"feasibility quadratic negative at PR={PR}: f={f} (a={a}, b={b}, c={c})"
        )


def _alloc_case3(label, PR, s1, s2, s3, s4):
    if label == "D3.1":
        if PR >= s1:
            return DownlinkPowerAlloc(PR - s1, 0.0, s1, 0.0, "4.4"), "PR>=sbar1"
        return DownlinkPowerAlloc(0.0, 0.0, PR, 0.0, "4.4"), "PR<sbar1"
    if label == "D3.2":
        if PR >= s4:
            return DownlinkPowerAlloc(0.0, PR - s4, s4, 0.0, "4.4"), "PR>=sbar4"
        return DownlinkPowerAlloc(0.0, 0.0, PR, 0.0, "4.4"), "PR<sbar4"
    if label == "D3.3":
        if PR >= s3:
            return DownlinkPowerAlloc(0.0, PR - s3, s3, 0.0, "4.4"), "PR>=sbar3"
        return DownlinkPowerAlloc(0.0, 0.0, PR, 0.0, "4.4"), "PR<sbar3"
    if label == "D3.4":
        if PR >= s1:
            p2 = _nonneg(s1 - s4, "pR2", PR)
            return DownlinkPowerAlloc(PR - s1, p2, s4, 0.0, "4.4"), "PR>=sbar1"
        p3 = _nonneg(PR * (s4 - s2) / (PR + s4), "pR3", PR)
        p2 = _nonneg(PR - p3, "pR2", PR)
        return DownlinkPowerAlloc(0.0, p2, p3, 0.0, "4.4"), "PR<sbar1"
    if label == "D3.5":
        if PR >= s1:
            p2 = _nonneg(s1 - s3, "pR2", PR)
            return DownlinkPowerAlloc(PR - s1, p2, s3, 0.0, "4.4"), "PR>=sbar1"
        p3 = _nonneg(PR * (s3 - s2) / (PR + s3), "pR3", PR)
        p2 = _nonneg(PR - p3, "pR2", PR)
        return DownlinkPowerAlloc(0.0, p2, p3, 0.0, "4.4"), "PR<sbar1"
    raise InternalConsistencyError(f"unhandled case-III label {label}")


# ---------------------------------------------------------------------------
# message plans
# ---------------------------------------------------------------------------

DECODE_PLAIN = "decode-treating-rest-as-noise"
DECODE_SELF = "decode-with-self-message"
SKIP_KNOWN = "known-codeword-skip"
SIC_REMOVE = "SIC-remove"

_ACTIONS = (DECODE_PLAIN, DECODE_SELF, SKIP_KNOWN, SIC_REMOVE)

#: source messages the relay redistributes: the two lattice combinations and
#: the two leaders' private remainders.  Splittable ones may be carried as
#: "<name>.0" / "<name>.1" halves.
_SOURCES = ("mA", "mB", "m11", "m31")
_SPLITTABLE = ("m11", "m31")

#: source messages user k+1 must end up able to read (own-pair combination
#: plus, for trailing users, the partner leader's private remainder)
_REQUIRED = (("mA",), ("mA", "m11"), ("mB",), ("mB", "m31"))

#: private remainders owned by user k+1 (usable as known side information)
_OWNED = (("m11",), (), ("m31",), ())


@dataclass(frozen=True)
class RelayCodeword:
    """One broadcast layer: its rate symbol and the messages packed into it."""

    name: str
    rate_symbol: str
    messages: Tuple[str, ...]


@dataclass(frozen=True)
class DecodeStep:
    action: str
    codeword: str


@dataclass(frozen=True)
class MessagePlan:
    """Declarative relay reassembly plan: what rides where, who peels what.

    ``scripts[k]`` is user k+1's ordered decode script.  Construction checks
    that the codewords carry every source message exactly once (split halves
    jointly covering their parent) and that every user's script reaches the
    messages it needs to reconstruct its partner's data.
    """

    case: CaseLabel
    scheme_id: str
    codewords: Tuple[RelayCodeword, ...]
    scripts: Tuple[Tuple[DecodeStep, ...], ...]
    rate_relations: Tuple[str, ...]

    def __post_init__(self) -> None:
        _validate_plan(self)


def _parent_of(message: str) -> str:
    return message.split(".")[0]


def _covers(available: set, parent: str) -> bool:
    return parent in available or {f"{parent}.0", f"{parent}.1"} <= available


def _validate_plan(plan: MessagePlan) -> None:
    names = [cw.name for cw in plan.codewords]
    if len(set(names)) != len(names):
        raise ValidationError(f"duplicate codeword names in plan: {names}")
    by_name = {cw.name: cw for cw in plan.codewords}

    # every source message rides exactly one codeword; split halves of a
    # splittable source must both appear (and exclude the unsplit parent)
    carried: List[str] = [m for cw in plan.codewords for m in cw.messages]
    if len(set(carried)) != len(carried):
        raise ValidationError(f"message packed into two codewords: {sorted(carried)}")
    carried_set = set(carried)
    for src in _SOURCES:
        parts = {f"{src}.0", f"{src}.1"} & carried_set
        whole = src in carried_set
        if src in _SPLITTABLE:
            ok = (whole and not parts) or (not whole and len(parts) == 2)
        else:
            ok = whole and not parts
        if not ok:
            raise ValidationError(f"source {src} is not covered exactly once: {sorted(carried)}")
    for m in carried_set:
        if _parent_of(m) not in _SOURCES:
            raise ValidationError(f"unknown message {m!r} in plan")

    if len(plan.scripts) != 4:
        raise ValidationError("plan must carry exactly four user scripts")
    for user_idx, script in enumerate(plan.scripts):
        decoded: set = set()
        opened: set = set()
        removed: set = set()
        for step in script:
            if step.action not in _ACTIONS:
                raise ValidationError(f"unknown step action {step.action!r}")
            if step.codeword not in by_name:
                raise ValidationError(f"script references unknown codeword {step.codeword!r}")
            if step.action == SIC_REMOVE:
                if step.codeword not in opened or step.codeword in removed:
                    raise ValidationError(
                        f"user {user_idx + 1} removes {step.codeword} without decoding it"
                    )
                removed.add(step.codeword)
            elif step.action == SKIP_KNOWN:
                msgs = by_name[step.codeword].messages
                own = _OWNED[user_idx]
                if not all(_parent_of(m) in own for m in msgs):
                    raise ValidationError(
                        f"user {user_idx + 1} cannot pre-cancel {step.codeword}: "
                        f"it carries messages the user does not own"
                    )
            else:
                opened.add(step.codeword)
                decoded |= set(by_name[step.codeword].messages)
        for parent in _REQUIRED[user_idx]:
            if not _covers(decoded, parent):
                raise ValidationError(
                    f"user {user_idx + 1}'s script never reaches {parent}; "
                    f"decoded only {sorted(decoded)}"
                )


def _steps(*pairs: Tuple[str, str]) -> Tuple[DecodeStep, ...]:
    return tuple(DecodeStep(action=a, codeword=c) for a, c in pairs)


def message_plan(case: CaseLabel, scheme_id: str) -> MessagePlan:
    """The relay's reassembly plan for one (case, scheme) combination.

    Valid combinations are case I with scheme "4.1", case II with "4.2" or
    "4.3", and case III with "4.4".
    """
    case = CaseLabel(getattr(case, "value", case))
    if scheme_id not in CASE_SCHEMES[case]:
        raise ValidationError(
            f"scheme {scheme_id!r} is not valid for case {case.value}; "
            f"expected one of {CASE_SCHEMES[case]}"
        )

    if scheme_id == "4.1":
        # two layers; everybody peels the pair-B layer first, pair-A users
        # then open the pair-A layer with their own message as side info,
        # pair-B users open the pair-B layer directly the same way
        return MessagePlan(
            case=case,
            scheme_id="4.1",
            codewords=(
                RelayCodeword("xR1", "RR1", ("mB", "m31")),
                RelayCodeword("xR2", "RR2", ("mA", "m11")),
            ),
            scripts=(
                _steps((DECODE_PLAIN, "xR1"), (SIC_REMOVE, "xR1"), (DECODE_SELF, "xR2")),
                _steps((DECODE_PLAIN, "xR1"), (SIC_REMOVE, "xR1"), (DECODE_SELF, "xR2")),
                _steps((DECODE_SELF, "xR1"),),
                _steps((DECODE_SELF, "xR1"),),
            ),
            rate_relations=("RR1 = R3", "RR2 = R1"),
        )

    if scheme_id == "4.2":
        # four layers; the leaders' private remainders are split so the
        # strongest users can take part of them at the bottom of the stack
        return MessagePlan(
            case=case,
            scheme_id="4.2",
            codewords=(
                RelayCodeword("xR1", "RR1", ("mB", "m31.0")),
                RelayCodeword("xR2", "RR2", ("mA", "m11.0")),
                RelayCodeword("xR3", "RR3", ("m31.1",)),
                RelayCodeword("xR4", "RR4", ("m11.1",)),
            ),
            scripts=(
                _steps((DECODE_PLAIN, "xR1"), (SIC_REMOVE, "xR1"), (DECODE_SELF, "xR2")),
                _steps(
                    (DECODE_PLAIN, "xR1"), (SIC_REMOVE, "xR1"),
                    (DECODE_PLAIN, "xR2"), (SIC_REMOVE, "xR2"),
                    (DECODE_PLAIN, "xR3"), (SIC_REMOVE, "xR3"),
                    (DECODE_PLAIN, "xR4"),
                ),
                _steps((SKIP_KNOWN, "xR3"), (DECODE_SELF, "xR1")),
                _steps(
                    (DECODE_PLAIN, "xR1"), (SIC_REMOVE, "xR1"),
                    (DECODE_PLAIN, "xR2"), (SIC_REMOVE, "xR2"),
                    (DECODE_PLAIN, "xR3"),
                ),
            ),
            rate_relations=(
                "R1 = RR2 + RR4",
                "R2 <= RR2",
                "R3 = RR1 + RR3",
                "R4 <= RR1",
            ),
        )

    if scheme_id == "4.3":
        # the two-layer layout again, but user 1 reads its layer through the
        # pair-B layer's interference instead of peeling it first
        return MessagePlan(
            case=case,
            scheme_id="4.3",
            codewords=(
                RelayCodeword("xR1", "RR1", ("mB", "m31")),
                RelayCodeword("xR2", "RR2", ("mA", "m11")),
            ),
            scripts=(
                _steps((DECODE_SELF, "xR2"),),
                _steps((DECODE_PLAIN, "xR1"), (SIC_REMOVE, "xR1"), (DECODE_SELF, "xR2")),
                _steps((DECODE_SELF, "xR1"),),
                _steps((DECODE_SELF, "xR1"),),
            ),
            rate_relations=("RR1 = R3", "RR2 = R1"),
        )

    # scheme "4.4": three layers; only pair A's leader has a split remainder
    return MessagePlan(
        case=case,
        scheme_id="4.4",
        codewords=(
            RelayCodeword("xR1", "RR1", ("mA", "m11.0")),
            RelayCodeword("xR2", "RR2", ("mB", "m31")),
            RelayCodeword("xR3", "RR3", ("m11.1",)),
        ),
        scripts=(
            _steps((SKIP_KNOWN, "xR3"), (DECODE_SELF, "xR1")),
            _steps(
                (DECODE_PLAIN, "xR1"), (SIC_REMOVE, "xR1"),
                (DECODE_PLAIN, "xR2"), (SIC_REMOVE, "xR2"),
                (DECODE_PLAIN, "xR3"),
            ),
            _steps((DECODE_PLAIN, "xR1"), (SIC_REMOVE, "xR1"), (DECODE_SELF, "xR2")),
            _steps((DECODE_PLAIN, "xR1"), (SIC_REMOVE, "xR1"), (DECODE_SELF, "xR2")),
        ),
        rate_relations=(
            "R1 = RR1 + RR3",
            "R2 <= RR1",
            "R3 = RR2",
            "R4 <= RR2",
        ),
    )


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------


def downlink_certificate(params: SystemParams) -> List[GapCertificate]:
    """Certify the half-bit gap at every downlink vertex of a canonical channel.

    Classifies the channel, runs each vertex's power recipe through its
    scheme's rate map, and passes a vertex when every slack component is at
    most half a bit (within GAP_TOL) and the achieved tuple sits inside the
    case's deliverable region.
    """
    terms = capacity_terms(params)
    case = classify_case(terms.sigma_bar2)
    region = downlink_polytope(case, terms)

    certs: List[GapCertificate] = []
    for vertex in downlink_vertices(case, terms):
        alloc, tag = alloc_for_vertex(case, vertex.label, params)
        achieved = scheme_rates(alloc, terms.sigma_bar2)
        slack = slack_of(vertex.rates, achieved)
        ok = max(slack) <= HALF_BIT + GAP_TOL and contains(region, achieved)
        certs.append(
            GapCertificate(
                link="downlink",
                vertex_label=vertex.label,
                target=vertex.rates,
                achieved=achieved,
                slack=slack,
                passed=ok,
                subcase=tag,
            )
        )
    return certs
