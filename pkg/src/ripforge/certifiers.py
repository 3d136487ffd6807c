"""RIP certifiers: functions that may decline but never certify a non-RIP matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ripforge.ripcore import RipParams, as_design, max_incoherence, rip_margin_exact

DECLINE_BUDGET = 1.0 / 3.0


class RegimeError(ValueError):
    """The certifier's soundness guarantee does not cover these dimensions."""

    def __init__(self, message: str, required_n: int):
        super().__init__(message)
        self.required_n = required_n


@dataclass(frozen=True)
class CertifierOutcome:
    certified: bool
    statistic: float
    threshold: float

    @classmethod
    def decide(cls, statistic: float, threshold: float) -> "CertifierOutcome":
        return cls(bool(statistic <= threshold), float(statistic), float(threshold))

    def to_dict(self) -> dict:
        return {"certified": self.certified, "statistic": self.statistic, "threshold": self.threshold}


def certify_opnorm_exact(X, params: RipParams) -> CertifierOutcome:
    X = as_design(X)
    params.check(X.shape[1])
    return CertifierOutcome.decide(rip_margin_exact(X, params.k), params.theta)


def incoherence_threshold(n: int, p: int, sigma: float) -> float:
    return 14.0 * sigma**2 * math.sqrt(math.log(p) / n)


def incoherence_required_n(p: int, k: int, theta: float, sigma: float) -> int:
    """Smallest n with ``n >= 196 sigma^4 k^2 log(p) / theta^2``."""
    bound = 196.0 * sigma**4 * k**2 * math.log(p) / theta**2
    n = math.ceil(bound)
    # guard against ceil landing one short through rounding
    while k * incoherence_threshold(n, p, sigma) > theta:
        n += 1
    return max(n, 1)


def certify_incoherence_paper(X, params: RipParams, sigma: float = 1.0) -> CertifierOutcome:
    """Certify when ``||X^T X - I||_inf <= 14 sigma^2 sqrt(log p / n)``.

    Only defined where ``n >= 196 sigma^4 k^2 log(p) / theta^2``; there the
    threshold times k is at most theta, so certification implies RIP.
    """
    X = as_design(X)
    n, p = X.shape
    params.check(p)
    if sigma < 1:
        raise ValueError("sigma must be >= 1")
    need = 196.0 * sigma**4 * params.k**2 * math.log(p) / params.theta**2
    if n < need:
        required = incoherence_required_n(p, params.k, params.theta, sigma)
        raise RegimeError(
            f"incoherence-paper certifier needs n >= 196 sigma^4 k^2 log(p)/theta^2 = {need:.2f} "
            f"(n >= {required}), got n={n}",
            required,
        )
    return CertifierOutcome.decide(max_incoherence(X), incoherence_threshold(n, p, sigma))


def certify_incoherence_sound(X, params: RipParams) -> CertifierOutcome:
    """Gershgorin certifier: ``k * ||X^T X - I||_inf <= theta`` implies RIP."""
    X = as_design(X)
    params.check(X.shape[1])
    return CertifierOutcome.decide(params.k * max_incoherence(X), params.theta)


def decline_always(X, params: RipParams) -> CertifierOutcome:
    return CertifierOutcome(False, math.inf, params.theta)


CERTIFIERS = {
    "opnorm-exact": certify_opnorm_exact,
    "incoherence-paper": certify_incoherence_paper,
    "incoherence-sound": certify_incoherence_sound,
}


def get_certifier(name: str, sigma: float = 1.0):
    """Return ``f(X, params) -> CertifierOutcome`` for a selector string."""
    if name == "incoherence-paper":
        return lambda X, params: certify_incoherence_paper(X, params, sigma)
    if name == "decline":
        return decline_always
    try:
        return CERTIFIERS[name]
    except KeyError:
        raise ValueError(f"unknown certifier {name!r}; choose from {sorted(CERTIFIERS)}") from None
