"""Exponent bookkeeping for the global-existence and blow-up criteria.

Everything here is plain floating-point arithmetic on the five numbers
(gamma1, gamma2, p, q, N).  Reports carry every intermediate term so the
classification can be audited by hand.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .errors import DivergedIteration, EmptyDeltaWindow, InvalidDelta, InvalidParams

BOUNDARY_TOL = 1e-12
MAX_BOOTSTRAP = 10_000


@dataclass(frozen=True)
class ParamPoint:
    gamma1: float
    gamma2: float
    p: float
    q: float
    N: int

    def __post_init__(self):
        vals = (self.gamma1, self.gamma2, self.p, self.q)
        if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in vals):
            raise InvalidParams(f"parameters must be finite reals: {vals}")
        if not (1 < self.gamma1 < 2 and 1 < self.gamma2 < 2):
            raise InvalidParams(f"orders must lie in (1, 2), got {self.gamma1}, {self.gamma2}")
        if not (self.p >= 1 and self.q >= 1 and self.p * self.q > 1):
            raise InvalidParams(f"need p, q >= 1 and pq > 1, got p={self.p}, q={self.q}")
        if int(self.N) != self.N or self.N < 1:
            raise InvalidParams(f"N must be a positive integer, got {self.N}")

    def swapped(self):
        """Exchange the roles of the two equations."""
        return ParamPoint(self.gamma2, self.gamma1, self.q, self.p, self.N)

    def normalized(self):
        """(point with gamma1 <= gamma2 and p <= q if a role swap achieves it, swapped?)."""
        if self.gamma1 <= self.gamma2 and self.p <= self.q:
            return self, False
        s = self.swapped()
        if s.gamma1 <= s.gamma2 and s.p <= s.q:
            return s, True
        return self, False

    @property
    def ordered(self):
        return self.gamma1 <= self.gamma2 and self.p <= self.q


@dataclass(frozen=True)
class Inequality:
    name: str
    lhs: float
    rhs: float
    relation: str       # one of "<", "<=", ">", ">="

    @property
    def margin(self):
        """Positive when satisfied, in the units of the two sides."""
        return self.rhs - self.lhs if self.relation in ("<", "<=") else self.lhs - self.rhs

    @property
    def satisfied(self):
        m = self.margin
        return m > 0 if self.relation in ("<", ">") else m >= 0

    def to_dict(self):
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "relation": self.relation, "satisfied": self.satisfied}


# -- the two criteria -------------------------------------------------------------

def gelt_terms(pt: ParamPoint):
    g1, g2, p, q = pt.gamma1, pt.gamma2, pt.p, pt.q
    d = p * q - 1
    return (1 / g1 + (q + 1) / d, 1 / g1 + (p * g2 + g1) / (g1 * d))


def neg_blocks(pt: ParamPoint):
    g1, g2, p, q = pt.gamma1, pt.gamma2, pt.p, pt.q
    d = p * q - 1
    block1 = (1 / g1 + (g1 + p * g2) / (g1 * d),
              1 / g1 + (1 + p) / d,
              1 / g1 + (g2 + q * g1) / (g1 * d),
              (1 - g2) / g1 + q * (p + 1) / d)
    block2 = (1 / g2 + (g1 + g2 * p) / (g2 * d),
              (1 - g1) / g2 + p * (q + 1) / d,
              1 / g2 + (g2 + g1 * q) / (g2 * d),
              1 / g2 + (1 + q) / d)
    return block1, block2


# -- derived exponents ----------------------------------------------------------

@dataclass
class DerivedExponents:
    delta: float
    window: tuple
    r1: float
    r2: float
    s1: float
    s2: float
    sigma1: float
    sigma2: float
    identities: dict = field(default_factory=dict)      # name -> residual
    inequalities: list = field(default_factory=list)
    bootstrap: "Bootstrap | None" = None

    def to_dict(self):
        d = {k: getattr(self, k) for k in ("delta", "r1", "r2", "s1", "s2", "sigma1", "sigma2")}
        d["window"] = list(self.window)
        d["identities"] = dict(self.identities)
        d["inequalities"] = [i.to_dict() for i in self.inequalities]
        if self.bootstrap is not None:
            d["bootstrap"] = asdict(self.bootstrap)
        return d


def delta_window(pt: ParamPoint):
    """Open interval of admissible delta for an ordered point."""
    p, q = pt.p, pt.q
    d = p * q - 1
    lo = 1 - d / (q * (p + 1) * pt.gamma2)
    hi = min(1.0, pt.N * d / (2 * q * (p + 1)))
    return lo, hi


def derive_exponents(point: ParamPoint, delta="auto") -> DerivedExponents:
    pt, _ = point.normalized()
    lo, hi = delta_window(pt)
    if lo >= hi:
        raise EmptyDeltaWindow(f"delta window ({lo:.6g}, {hi:.6g}) is empty")
    if delta == "auto" or delta is None:
        delta = 0.5 * (lo + hi)
    else:
        delta = float(delta)
        if not lo < delta < hi:
            raise InvalidDelta(f"delta = {delta} outside ({lo:.6g}, {hi:.6g})")

    g1, g2, p, q, N = pt.gamma1, pt.gamma2, pt.p, pt.q, pt.N
    d = p * q - 1
    s1 = N * d / (2 * delta * (p + 1))
    s2 = N * d / (2 * delta * (q + 1))
    r1 = N * g1 * d / (2 * (g1 * (1 + delta * p) + g2 * p * (1 - delta)))
    r2 = N * g2 * d / (2 * (g2 * (1 + delta * q) + g1 * q * (1 - delta)))
    sigma1 = (1 - delta) * (g1 + g2 * p) / d
    sigma2 = (1 - delta) * (g2 + g1 * q) / d
    ex = DerivedExponents(delta, (lo, hi), r1, r2, s1, s2, sigma1, sigma2)
    ex.identities = exponent_identities(pt, ex)
    ex.inequalities = window_inequalities(pt, ex)
    return ex


def exponent_identities(pt: ParamPoint, ex: DerivedExponents):
    """Residuals of the relations the derived exponents must satisfy exactly."""
    g1, g2, p, q, N = pt.gamma1, pt.gamma2, pt.p, pt.q, pt.N
    d = p * q - 1
    s1, s2, dl = ex.s1, ex.s2, ex.delta
    a = (N / 2) * g1 * (p / s2 - 1 / s1)
    b = (N / 2) * g2 * (q / s1 - 1 / s2)
    return {
        "first_balance": ex.sigma1 + g1 - a - p * ex.sigma2,
        "second_balance": ex.sigma1 + g1 - a + (g2 - b - q * ex.sigma1) * p,
        "delta_from_u": (N / 2) * (p / s2 - 1 / s1) - dl,
        "delta_from_v": (N / 2) * (q / s1 - 1 / s2) - dl,
        "r1_split": 1 / ex.r1 - (2 / (N * g1) * (1 - dl) * (g1 + g2 * p) / d + 2 * dl / N * (p + 1) / d),
        "r2_split": 1 / ex.r2 - (2 / (N * g2) * (1 - dl) * (g2 + g1 * q) / d + 2 * dl / N * (q + 1) / d),
    }


def window_inequalities(pt: ParamPoint, ex: DerivedExponents):
    g1, g2, p, q, N = pt.gamma1, pt.gamma2, pt.p, pt.q, pt.N
    s1, s2, r1, r2 = ex.s1, ex.s2, ex.r1, ex.r2
    return [
        Inequality("s1 > q", s1, q, ">"),
        Inequality("s2 > p", s2, p, ">"),
        Inequality("p s1 > s2", p * s1, s2, ">"),
        Inequality("q s2 > s1", q * s2, s1, ">"),
        Inequality("s1 > r1", s1, r1, ">"),
        Inequality("r1 > 1", r1, 1.0, ">"),
        Inequality("s2 > r2", s2, r2, ">"),
        Inequality("r2 > 1", r2, 1.0, ">"),
        Inequality("q N g1 (1/r1 - 1/s1) / 2 < 1", (N / 2) * g1 * (1 / r1 - 1 / s1) * q, 1.0, "<"),
        Inequality("p N g2 (1/r2 - 1/s2) / 2 < 1", (N / 2) * g2 * (1 / r2 - 1 / s2) * p, 1.0, "<"),
        Inequality("p sigma2 < 1", p * ex.sigma2, 1.0, "<"),
        Inequality("q sigma1 < 1", q * ex.sigma1, 1.0, "<"),
    ]


# -- bootstrap of integrability indices ---------------------------------------------

@dataclass
class Bootstrap:
    eta: float
    inv_s_prime: list       # 1 / s_i'   for i = 1 .. i0
    inv_s_dprime: list      # 1 / s_i''
    i0: int

    @property
    def s_prime(self):
        return [1 / x if x else math.inf for x in self.inv_s_prime]

    @property
    def s_dprime(self):
        return [1 / x if x else math.inf for x in self.inv_s_dprime]


def bootstrap_indices(point: ParamPoint, exps: DerivedExponents, eta=None) -> Bootstrap:
    """Iterate 1/s_i' = p/s_{i-1}'' - 2/N + eta, 1/s_i'' = q/s_{i-1}' - 2/N + eta.

    Starts from s_1' = s1, s_1'' = s2 and stops at the first i with
    p/s_i'' < 2/N or q/s_i' < 2/N.  ``eta`` defaults to (1 - delta)/N.
    """
    pt, _ = point.normalized()
    p, q, N = pt.p, pt.q, pt.N
    limit = 2 * (1 - exps.delta) / N
    if eta is None:
        eta = 0.5 * limit
    if not 0 < eta < limit:
        raise InvalidParams(f"eta must lie in (0, {limit:.6g}), got {eta}")
    a, b = 1 / exps.s1, 1 / exps.s2
    inv1, inv2 = [a], [b]
    for i in range(1, MAX_BOOTSTRAP + 1):
        if p * b < 2 / N or q * a < 2 / N:
            return Bootstrap(eta, inv1, inv2, i)
        a, b = p * b - 2 / N + eta, q * a - 2 / N + eta
        inv1.append(a)
        inv2.append(b)
    raise DivergedIteration(f"no stopping index within {MAX_BOOTSTRAP} iterations")


# -- blow-up proof exponents ---------------------------------------------------------

def blowup_proof_exponents(point: ParamPoint):
    """Time exponents (delta1, delta2) of the test-function estimates.

    Returned for both space scalings lambda = gamma1/2 and lambda = gamma2/2.
    Each space/time term contributes the larger of its two power laws; for
    lambda = gamma1/2 this is the familiar two-way maximum in delta1.
    """
    pt = point
    if not (pt.p > 1 and pt.q > 1):
        raise InvalidParams("blow-up exponents need p > 1 and q > 1")
    g1, g2, p, q, N = pt.gamma1, pt.gamma2, pt.p, pt.q, pt.N
    pp, qq = p / (p - 1), q / (q - 1)
    scale = p * q / (p * q - 1)
    out = {}
    for label, lam in (("gamma1/2", g1 / 2), ("gamma2/2", g2 / 2)):
        a = max(-qq * g1 + 1 + N * lam, -2 * lam * qq + 1 + N * lam) / qq
        b = max(-pp * g2 + 1 + N * lam, -2 * lam * pp + 1 + N * lam) / pp
        out[label] = ((a + b / q) * scale + g1 - 2, (b + a / p) * scale + g2 - 2)
    return out


# -- classification -------------------------------------------------------------------

CLASSES = ("GlobalSmallData", "BlowUp", "Indeterminate", "BothConditionsFail")


@dataclass
class RegimeReport:
    point: ParamPoint
    normalized: ParamPoint
    swapped: bool
    classification: str
    ledger: list
    flags: dict
    derived: DerivedExponents | None = None
    blowup_exponents: dict | None = None

    def to_dict(self):
        return {
            "point": asdict(self.point),
            "normalized": asdict(self.normalized),
            "swapped": self.swapped,
            "classification": self.classification,
            "ledger": [i.to_dict() for i in self.ledger],
            "flags": dict(self.flags),
            "derived": self.derived.to_dict() if self.derived else None,
            "blowup_exponents": {k: list(v) for k, v in self.blowup_exponents.items()}
            if self.blowup_exponents else None,
        }


def classify(point: ParamPoint, delta="auto") -> RegimeReport:
    pt, swapped = point.normalized()
    half = pt.N / 2
    ledger = []

    gelt_applies = pt.N >= 2 and pt.ordered
    t1, t2 = gelt_terms(pt)
    ledger.append(Inequality("global: N/2 >= 1/g1 + (q+1)/(pq-1)", half, t1, ">="))
    ledger.append(Inequality("global: N/2 >= 1/g1 + (p g2+g1)/(g1(pq-1))", half, t2, ">="))
    gelt = gelt_applies and all(i.satisfied for i in ledger)

    neg_applies = point.p > 1 and point.q > 1
    b1, b2 = neg_blocks(point)
    blocks = []
    for k, blk in enumerate((b1, b2), 1):
        entries = [Inequality(f"blow-up block {k}: N/2 < entry {j}", half, v, "<") for j, v in enumerate(blk, 1)]
        ledger.extend(entries)
        blocks.append(all(e.satisfied for e in entries))
    neg = neg_applies and any(blocks)

    near = any(abs(i.margin) <= BOUNDARY_TOL for i in ledger)
    flags = {
        "global_hypotheses": gelt_applies,
        "blowup_hypotheses": neg_applies,
        "blowup_block1": blocks[0],
        "blowup_block2": blocks[1],
        "inconsistent": gelt and neg,
        "near_boundary": near,
    }
    if gelt and neg:
        cls = "Indeterminate"
    elif gelt:
        cls = "GlobalSmallData"
    elif neg:
        cls = "BlowUp"
    elif gelt_applies and neg_applies:
        cls = "Indeterminate"
    else:
        cls = "BothConditionsFail"

    derived = None
    if gelt:
        try:
            derived = derive_exponents(pt, delta)
            flags.update(decay_flags(pt, derived))
        except (EmptyDeltaWindow, InvalidDelta) as exc:
            flags["delta_error"] = str(exc)
    blow = blowup_proof_exponents(point) if neg_applies else None
    return RegimeReport(point, pt, swapped, cls, ledger, flags, derived, blow)


def decay_flags(pt: ParamPoint, ex: DerivedExponents):
    """Which of the three sufficient conditions for sup-norm decay hold."""
    N, p, q, g1, g2 = pt.N, pt.p, pt.q, pt.gamma1, pt.gamma2
    a = p * N / (2 * ex.s2)
    b = q * N / (2 * ex.s1)
    root = math.sqrt((p + 1) * q * g1 / ((q + 1) * p))
    return {
        "sup_decay_case1": a < 1 and b < 1,
        "sup_decay_case2": N > 2 and a < 1 and b >= 1,
        "sup_decay_case3": N > 2 and b >= 1 and a >= 1 and q >= p > 1 and root < g1 <= g2 < 2,
    }
