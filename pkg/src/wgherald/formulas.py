"""Closed-form probabilities, infidelity fits, and the protocol comparison.

Each function evaluates one closed form exactly as written, in units of the
first guided-mode rate (gamma_g = 1).  Where two inconsistent forms exist for
the fixed-ratio large-N plateau, both are exposed and the simulator is the
arbiter (see limit_fixed_ratio).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from . import bandgap as _bandgap

INFIDELITY_FIT_PREFACTOR = 0.061


def p_double_mirrors(N: float, m: float, p1d: float) -> float:
    """Heralding probability of the tunable-ratio fast-pulse step:
    exp[-(sqrt(2) pi / (8 sqrt(2N))) (3 + 2 sqrt(m) + 8 / P_1d)]."""
    coeff = math.sqrt(2) * math.pi / (8 * math.sqrt(2 * N))
    return math.exp(-coeff * (3 + 2 * math.sqrt(m) + 8 / p1d))


def p_fixed_ratio(N: float, m: float, p1d: float) -> float:
    """Full fixed-ratio (gamma_s = gamma_g) heralding probability:
    (4m/(m+1)^2) exp[-(2 pi / sqrt(2N(m+1))) ((3m^2+m+1)/(2(m+1)^2) + 1/P_1d)]."""
    pref = 4 * m / (m + 1) ** 2
    coeff = 2 * math.pi / math.sqrt(2 * N * (m + 1))
    return pref * math.exp(-coeff * ((3 * m**2 + m + 1) / (2 * (m + 1) ** 2) + 1 / p1d))


def limit_fixed_ratio(m: float) -> dict[str, float]:
    """Candidate large-N plateaus of the fixed-ratio probability.

    Two inconsistent closed forms circulate for this constant, 4m/(m+1)^2 and
    4m/(m+2)^2.  Both are exposed so numerical evolution can arbitrate; the
    dynamics matches the (m+1)^2 form (see the acceptance suite).
    """
    return {"m_plus_1": 4 * m / (m + 1) ** 2, "m_plus_2": 4 * m / (m + 2) ** 2}


def p_continuous_drive(N: float, m: float, p1d: float) -> float:
    """Heralding probability with continuous driving:
    exp[-(sqrt(6) pi / sqrt(2N)) ((10 + 9 sqrt(m))/64 + 29/(64 P_1d))]."""
    coeff = math.sqrt(6) * math.pi / math.sqrt(2 * N)
    return math.exp(-coeff * ((10 + 9 * math.sqrt(m)) / 64 + 29 / (64 * p1d)))


def p_fresh_level(N: float, p1d: float) -> float:
    """Heralding probability when prior quanta sit in spectator levels:
    exp[-(sqrt(2) pi / (8 sqrt(2N))) (5 + 8 / P_1d)]; no sqrt(m) enhancement."""
    coeff = math.sqrt(2) * math.pi / (8 * math.sqrt(2 * N))
    return math.exp(-coeff * (5 + 8 / p1d))


def p_bandgap(N: int, m: int, xi: float, p1d: float) -> float:
    """Ideal-limit bandgap heralding probability (delegates to the model)."""
    gamma_star = 0.0 if math.isinf(p1d) else 1.0 / p1d
    p = _bandgap.BandgapParams(N=N, xi=xi, m=m, gamma_star=gamma_star)
    return _bandgap.ideal_step_probability(p)


def infidelity_fit(n_total: float, m: float) -> float:
    """Fitted accumulated infidelity 0.061 m(m-1) / N^2.

    N here is the total number of target atoms (both mirrors together): the
    simulated law converges to 0.061 with that convention, while per-mirror
    counting would need the prefactor 0.061/4.
    """
    return INFIDELITY_FIT_PREFACTOR * m * (m - 1) / n_total**2


def accumulation_infidelity_prediction(n_per_mirror: float, m: float) -> float:
    """infidelity_fit evaluated for a double-mirrors run with N atoms per mirror."""
    return infidelity_fit(2 * n_per_mirror, m)


def repetitions(p_list: Iterable[float]) -> float:
    """Expected number of protocol repetitions, prod_k 1/p_k."""
    r = 1.0
    for p in p_list:
        if not 0 < p <= 1:
            raise ValueError("step probabilities must lie in (0, 1]")
        r /= p
    return r


def r_m_asymptotic(N: float, m: float) -> float:
    """Large-m repetition scaling exp(m sqrt(m/N))."""
    return math.exp(m * math.sqrt(m / N))


def effective_rates_M_scheme(
    gamma_1d: Iterable[float],
    gamma_star: float,
    omega: Iterable[float],
    delta: Iterable[float],
) -> tuple[list[float], float]:
    """Drive-diluted rates after adiabatic elimination of the far levels.

    Each guided rate becomes Gamma |Omega/(2 Delta)|^2 and the free-space rate
    the matching sum over channels.
    """
    gamma_1d = list(gamma_1d)
    omega = list(omega)
    delta = list(delta)
    if not (len(gamma_1d) == len(omega) == len(delta)):
        raise ValueError("need one (Omega, Delta) pair per guided rate")
    weights = [abs(o / (2 * d)) ** 2 for o, d in zip(omega, delta)]
    eff = [g * w for g, w in zip(gamma_1d, weights)]
    eff_star = gamma_star * sum(weights)
    return eff, eff_star


def repumping_error_bound(N: float, p1d: float) -> float:
    """Upper bound on the storage-salvage repumping error: 1/(P_1d N^{3/2})."""
    return 1.0 / (p1d * N**1.5)


def single_mode_infidelity_terms(
    N: float, pulse_area_error: float, gamma_c_star: float, gamma_g: float = 1.0
) -> float:
    """Extra per-step infidelity of the one-guided-mode variant:
    N (delta pulse area)^2 + gamma_c* / (sqrt(N) gamma_g)."""
    return N * pulse_area_error**2 + gamma_c_star / (math.sqrt(N) * gamma_g)


# ---------------------------------------------------------------------------
# Protocol comparison table
# ---------------------------------------------------------------------------

PROTOCOLS = ("Deterministic", "ProbabilisticI", "ProbabilisticII",
             "DoubleMirrors", "DipoleDipole")

# Requirement gates: the tabulated conditions are asymptotic, so they become
# boolean thresholds (adjustable by callers of table1_compare).
DEFAULT_THRESHOLDS = {
    "p1d_large": 10.0,   # P_1d >> 1
    "xi_over_n": 5.0,    # xi >> N
    "n_large": 10.0,     # N >> 1
    "x_small": 0.1,      # x = Omega T sqrt(N) << 1
}


@dataclass(frozen=True)
class ComparisonEntry:
    """One protocol row: order-of-magnitude error and success scalings.

    Constants are deliberately dropped in the sources, so error_scaling and
    p_m rank protocols rather than predict absolute numbers.
    """

    protocol: str
    error_scaling: float
    p_m: float
    requirement: str
    requirement_satisfied: bool
    inputs: dict


def table1_compare(
    m: int,
    N: int,
    p1d: float,
    xi: float,
    eta: float = 1.0,
    x: float = 0.1,
    thresholds: dict | None = None,
) -> list[ComparisonEntry]:
    """Evaluate all five protocol rows at the given operating point.

    eta is the external-photodetector efficiency (first probabilistic scheme
    only) and x = Omega T sqrt(N) its drive parameter.
    """
    th = dict(DEFAULT_THRESHOLDS)
    if thresholds:
        th.update(thresholds)
    if not 0 <= eta <= 1:
        raise ValueError("eta must be in [0, 1]")
    n_m = N - m + 1
    inputs = {"m": m, "N": N, "p1d": p1d, "xi": xi, "eta": eta, "x": x}
    rows = [
        ComparisonEntry(
            "Deterministic", m / math.sqrt(p1d), 1.0,
            "P1d >> 1", p1d > th["p1d_large"], inputs),
        ComparisonEntry(
            "ProbabilisticI", m * (1 - eta) * x**2, (eta * x**2) ** m,
            "x = Omega T sqrt(N) << 1", x < th["x_small"], inputs),
        ComparisonEntry(
            "ProbabilisticII", 0.0, math.exp(-m / math.sqrt(p1d)),
            "P1d >> 1", p1d > th["p1d_large"], inputs),
        ComparisonEntry(
            "DoubleMirrors", m**2 / N**2,
            math.exp(-m * math.sqrt(m / N) * (1 + 1 / p1d)),
            "N >> 1", N > th["n_large"], inputs),
        ComparisonEntry(
            "DipoleDipole", xi**-2.0,
            math.exp(-xi / (math.sqrt(n_m) * p1d)),
            "xi >> N", xi > th["xi_over_n"] * N, inputs),
    ]
    return rows
