"""Uplink transceiver synthesis: rate splitting, lattice pairs, SIC at the relay.

Inside each pair the leading user splits its message in two: a *paired* part
sent at the trailing partner's rate and a *private* remainder.  The paired
parts ride nested-lattice codewords scaled so both pair members arrive at the
relay with equal power, letting the relay decode the modulo sum of the pair;
the private remainders are ordinary Gaussian codewords.  The relay peels the
four resulting signal groups off in a fixed order per target vertex:

* ``G1`` — leading user 1's private codeword (power p11),
* ``G3`` — leading user 3's private codeword (power p31),
* ``LA`` — pair A's lattice pair (two codewords of power p10 each),
* ``LB`` — pair B's lattice pair (two codewords of power p30 each).

An undecoded lattice pair contributes twice its per-codeword power as
interference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Sequence, Tuple

from .bounds import uplink_polytope
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

UPLINK_LABELS = ("U1", "U2", "U3", "U4", "U5", "U6")


class Step(str, Enum):
    """One decoding stage at the relay."""

    G1 = "G1"
    G3 = "G3"
    LA = "LA"
    LB = "LB"


def gaussian_rate(p: float, interference: float, sigma2: float) -> float:
    """Decoding rate of a Gaussian codeword of power p under given interference."""
    if p < 0 or interference < 0:
        raise ValidationError(f"powers must be >= 0, got p={p}, interference={interference}")
    if not sigma2 > 0:
        raise ValidationError(f"sigma2 must be > 0, got {sigma2}")
    return 0.5 * math.log2(1.0 + p / (interference + sigma2))


def lattice_rate(p: float, interference: float, sigma2: float) -> float:
    """Decoding rate of one lattice-pair codeword: 1/2 [log2(1/2 + SNR)]+.

    The modulo-sum decoder loses the "1+" inside the log; the positive-part
    clip keeps the rate meaningful at low SNR.
    """
    if p < 0 or interference < 0:
        raise ValidationError(f"powers must be >= 0, got p={p}, interference={interference}")
    if not sigma2 > 0:
        raise ValidationError(f"sigma2 must be > 0, got {sigma2}")
    return 0.5 * max(0.0, math.log2(0.5 + p / (interference + sigma2)))


@dataclass(frozen=True)
class UplinkPowerAlloc:
    """Received powers at the relay for the four uplink signal groups."""

    p10: float
    p11: float
    p30: float
    p31: float

    def __post_init__(self) -> None:
        for name in ("p10", "p11", "p30", "p31"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ValidationError(f"{name} must be finite and >= 0, got {v}")


def uplink_power_alloc(params: SystemParams) -> UplinkPowerAlloc:
    """The fixed power split driving every uplink vertex.

    Requires the canonical ordering h1^2 P1 >= h2^2 P2 and h3^2 P3 >= h4^2 P4.
    Each lattice pair runs at half the trailing user's received power; the
    leading users put the rest into their private codewords:

        p10 = h2^2 P2 / 2      p11 = h1^2 P1 - h2^2 P2
        p30 = h4^2 P4 / 2      p31 = h3^2 P3 - h4^2 P4
    """
    q = [params.h[i] ** 2 * params.P[i] for i in range(4)]
    if q[0] < q[1] - TIGHT_TOL:
        raise ValidationError(
            f"uplink ordering violated: h1^2*P1={q[0]} < h2^2*P2={q[1]} (canonicalize first)"
        )
    if q[2] < q[3] - TIGHT_TOL:
        raise ValidationError(
            f"uplink ordering violated: h3^2*P3={q[2]} < h4^2*P4={q[3]} (canonicalize first)"
        )
    return UplinkPowerAlloc(
        p10=0.5 * q[1],
        p11=max(0.0, q[0] - q[1]),
        p30=0.5 * q[3],
        p31=max(0.0, q[2] - q[3]),
    )


_ORDERS: Dict[str, Tuple[Step, Step, Step, Step]] = {
    "U1": (Step.G1, Step.LA, Step.G3, Step.LB),
    "U2": (Step.G3, Step.LB, Step.G1, Step.LA),
    "U3": (Step.G1, Step.G3, Step.LA, Step.LB),
    "U4": (Step.G3, Step.G1, Step.LA, Step.LB),
    "U5": (Step.G1, Step.G3, Step.LB, Step.LA),
    "U6": (Step.G3, Step.G1, Step.LB, Step.LA),
}


def decoding_order(label: str) -> Tuple[Step, Step, Step, Step]:
    """SIC order used at the relay for one uplink vertex label."""
    try:
        return _ORDERS[label]
    except KeyError:
        raise ValidationError(f"unknown uplink vertex label {label!r}") from None


@dataclass(frozen=True)
class UplinkSplitRates:
    """Rates of the four uplink constituents after one SIC pass."""

    r10: float
    r11: float
    r30: float
    r31: float

    def user_rates(self) -> RateTuple:
        """Compose per-user exchange rates: leaders get paired + private."""
        return RateTuple((self.r10 + self.r11, self.r10, self.r30 + self.r31, self.r30))


def uplink_achievable(
    alloc: UplinkPowerAlloc, order: Sequence[Step], sigmaR2: float
) -> UplinkSplitRates:
    """Evaluate the SIC chain for one decoding order.

    Decoded groups are subtracted; groups not yet decoded interfere with the
    current stage.  A pending lattice pair interferes with twice its
    per-codeword power.
    """
    steps = tuple(order)
    if sorted(s.value for s in steps) != sorted(s.value for s in Step):
        raise ValidationError(f"order must be a permutation of G1/G3/LA/LB, got {steps}")
    if not sigmaR2 > 0:
        raise ValidationError(f"sigmaR2 must be > 0, got {sigmaR2}")

    weight = {
        Step.G1: alloc.p11,
        Step.G3: alloc.p31,
        Step.LA: 2.0 * alloc.p10,
        Step.LB: 2.0 * alloc.p30,
    }
    rates = {}
    for k, step in enumerate(steps):
        pending = steps[k + 1 :]
        interference = sum(weight[s] for s in pending)
        if step is Step.G1:
            rates["r11"] = gaussian_rate(alloc.p11, interference, sigmaR2)
        elif step is Step.G3:
            rates["r31"] = gaussian_rate(alloc.p31, interference, sigmaR2)
        elif step is Step.LA:
            rates["r10"] = lattice_rate(alloc.p10, interference, sigmaR2)
        else:
            rates["r30"] = lattice_rate(alloc.p30, interference, sigmaR2)
    return UplinkSplitRates(**rates)


@dataclass(frozen=True)
class UplinkVertex:
    """One corner of the uplink region with its rate-split decomposition.

    ``split`` is (R10', R11', R30', R31'): the paired and private rate
    targets whose composition reproduces ``rates``.
    """

    label: str
    rates: RateTuple
    split: Tuple[float, float, float, float]


def _guarded(values: Sequence[float], what: str) -> Tuple[float, ...]:
    out = []
    for k, v in enumerate(values):
        if v < 0.0:
            if v <= -CLAMP_TOL:
                raise InternalConsistencyError(
                    f"{what}[{k}] = {v} is negative beyond the dust threshold"
                )
            v = 0.0
        out.append(v)
    return tuple(out)


def uplink_vertices(terms: CapacityTerms) -> List[UplinkVertex]:
    """The six corners of the uplink region targeted by the synthesis.

    Requires canonically ordered terms (C1 >= C2, C3 >= C4).  Each vertex
    comes with the rate split the relay's SIC schedule is designed around.
    """
    C = terms.C
    Cp = terms.Cpair
    if C[0] < C[1] - TIGHT_TOL or C[2] < C[3] - TIGHT_TOL:
        raise ValidationError(
            f"uplink terms not canonically ordered: C={C} (canonicalize first)"
        )
    c1, c2, c3, c4 = C
    c13, c14, c23, c24 = Cp[(1, 3)], Cp[(1, 4)], Cp[(2, 3)], Cp[(2, 4)]

    table = {
        # label: (rates, split (R10', R11', R30', R31'))
        "U1": ((c13 - c3, c23 - c3, c3, c4), (c23 - c3, c13 - c23, c4, c3 - c4)),
        "U2": ((c1, c2, c13 - c1, c14 - c1), (c2, c1 - c2, c14 - c1, c13 - c14)),
        "U3": (
            (c13 - c23 + c24 - c4, c24 - c4, c23 - c24 + c4, c4),
            (c24 - c4, c13 - c23, c4, c23 - c24),
        ),
        "U4": (
            (c14 - c4, c24 - c4, c13 - c14 + c4, c4),
            (c24 - c4, c14 - c24, c4, c13 - c14),
        ),
        "U5": (
            (c13 - c23 + c2, c2, c23 - c2, c24 - c2),
            (c2, c13 - c23, c24 - c2, c23 - c24),
        ),
        "U6": (
            (c2 + c14 - c24, c2, c13 - c14 + c24 - c2, c24 - c2),
            (c2, c14 - c24, c24 - c2, c13 - c14),
        ),
    }

    out: List[UplinkVertex] = []
    for label in UPLINK_LABELS:
        raw_rates, raw_split = table[label]
        rates = _guarded(raw_rates, f"{label}.rates")
        split = _guarded(raw_split, f"{label}.split")
        composed = (split[0] + split[1], split[0], split[2] + split[3], split[2])
        for a, b in zip(composed, rates):
            if abs(a - b) > 1e-9:
                raise InternalConsistencyError(
                    f"{label}: split composition {composed} != rates {rates}"
                )
        out.append(UplinkVertex(label=label, rates=RateTuple(rates), split=split))
    return out


def uplink_certificate(params: SystemParams) -> List[GapCertificate]:
    """Certify the half-bit gap at every uplink vertex of a canonical channel.

    For each vertex the relay runs its designated SIC order on the fixed
    power allocation; the certificate passes when every slack component is
    at most half a bit (within GAP_TOL) and the achieved tuple sits inside
    the uplink region.
    """
    terms = capacity_terms(params)
    alloc = uplink_power_alloc(params)
    region = uplink_polytope(terms)

    certs: List[GapCertificate] = []
    for vertex in uplink_vertices(terms):
        split = uplink_achievable(alloc, decoding_order(vertex.label), params.sigmaR2)
        achieved = split.user_rates()
        slack = slack_of(vertex.rates, achieved)
        ok = max(slack) <= HALF_BIT + GAP_TOL and contains(region, achieved)
        certs.append(
            GapCertificate(
                link="uplink",
                vertex_label=vertex.label,
                target=vertex.rates,
                achieved=achieved,
                slack=slack,
                passed=ok,
            )
        )
    return certs
