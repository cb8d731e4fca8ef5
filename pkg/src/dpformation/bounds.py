"""Steady-state-error bounds, the exact covariance oracle, and privacy
threshold calculators.

The central quantity is the steady-state network-average squared deviation
e_ss of the noisy consensus dynamics. Three routes to it live here:

* an exact oracle (stationary solution of the projected Lyapunov recursion),
* the Kemeny-constant sandwich lower/upper bounds, and
* the closed-form upper bound in terms of gamma, lambda2, N, and the privacy
  noise coefficient kappa, plus its inversion into minimum-epsilon design
  thresholds for standard topologies.

The numeric threshold (monotone root-finding on the bound) is authoritative;
the literal published threshold expressions are evaluated alongside for
comparison because they contain apparent typos.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import graphs, privacy
from .graphs import PerronMatrix, WeightedGraph


def exact_ess_oracle(p: PerronMatrix, z_diag) -> float:
    """Exact steady-state error by iterating the deviation covariance.

    With Q the projector removing the network mean, the deviation e = Q xbar
    has covariance S(k+1) = (QPQ) S(k) (QPQ) + Q Z Q. The spectral radius of
    QPQ is 1 - gamma*lambda2 < 1, so the iteration converges; the result is
    trace(S_inf) / N.
    """
    n = p.n
    z_diag = np.broadcast_to(np.asarray(z_diag, dtype=float), (n,))
    q = np.eye(n) - np.full((n, n), 1.0 / n)
    qpq = q @ p.matrix @ q
    qzq = q @ np.diag(z_diag) @ q
    s = np.zeros((n, n))
    prev_trace = 0.0
    for _ in range(10**6):
        s = qpq @ s @ qpq + qzq
        tr = float(np.trace(s))
        if abs(tr - prev_trace) <= 1e-13 * max(tr, 1e-300):
            return tr / n
        if not math.isfinite(tr):
            break
        prev_trace = tr
    raise graphs.NumericalError(
        "covariance iteration did not converge; step-size conditions "
        "are likely violated"
    )


def lemma7_sandwich(p: PerronMatrix, z_diag) -> tuple:
    """Kemeny sandwich on e_ss for i.i.d. diagonal noise.

    Returns (min_i s_i^2 pi_i, max_i s_i^2 pi_i) scaled by the Kemeny
    constant of the two-step chain P^2.
    """
    z_diag = np.broadcast_to(np.asarray(z_diag, dtype=float), (p.n,))
    pi = graphs.stationary_distribution(p)
    k2 = graphs.kemeny_constant(p.matrix @ p.matrix)
    weighted = z_diag * pi
    return float(weighted.min() * k2), float(weighted.max() * k2)


def kemeny_spectral_bounds(p: PerronMatrix, lam2_l: float) -> tuple:
    """Bounds on the Kemeny constant of P^2: ((N-1)/2, upper].

    The upper bound uses lambda2(P)^2 = (1 - gamma*lambda2(L))^2.
    """
    n = p.n
    upper = (n - 1) / (1.0 - (1.0 - p.gamma * lam2_l) ** 2)
    return (n - 1) / 2.0, upper


def corollary1_bound(epsilon: float, lambda2: float, *, n_agents: int,
                     gamma: float, b: float, delta: float | None = None,
                     k_delta: float | None = None) -> float:
    """Homogeneous upper bound on e_ss as a function of free parameters.

    gamma * kappa^2 * b^2 * (N-1)^2 / (N * lambda2 * (2 - gamma*lambda2)).
    Pass either delta or a precomputed k_delta = q_inverse(delta).
    """
    if not 0.0 < lambda2 < 2.0 / gamma:
        raise ValueError("lambda2 must lie in (0, 2/gamma)")
    if k_delta is None:
        if delta is None:
            raise ValueError("provide delta or k_delta")
        k_delta = privacy.q_inverse(delta)
    kap = (k_delta + math.sqrt(k_delta**2 + 2.0 * epsilon)) / (2.0 * epsilon)
    return (gamma * kap**2 * b**2 * (n_agents - 1) ** 2
            / (n_agents * lambda2 * (2.0 - gamma * lambda2)))


def theorem1_bound(g: WeightedGraph, gamma: float, params) -> float:
    """Heterogeneous upper bound on e_ss.

    gamma * (N-1)^2 * max_i kappa_i^2 b_i^2 / (N lambda2 (2 - gamma lambda2)).
    params is one PrivacyParams (homogeneous) or a sequence of N of them.
    Validates the step-size conditions by building the transition matrix.
    """
    graphs.build_perron(g, gamma)
    if isinstance(params, privacy.PrivacyParams):
        params = [params]
    worst = max(p.kappa**2 * p.b**2 for p in params)
    lam2 = graphs.algebraic_connectivity(g)
    n = g.n
    return (gamma * (n - 1) ** 2 * worst
            / (n * lam2 * (2.0 - gamma * lam2)))


def epsilon_threshold_numeric(lambda2: float, *, gamma: float, delta: float,
                              b: float, n_agents: int, e_r: float) -> float:
    """Smallest epsilon whose homogeneous bound certifies e_ss <= e_r.

    The bound is strictly decreasing in epsilon, so the threshold is the
    unique root of bound(eps) = e_r, found by bracketed search on log eps.
    Returns 0 when even the most private epsilon searched already meets e_r.
    """
    if e_r <= 0:
        raise ValueError("e_r must be positive")
    k_delta = privacy.q_inverse(delta)

    def gap(log_eps):
        return corollary1_bound(math.exp(log_eps), lambda2,
                                n_agents=n_agents, gamma=gamma, b=b,
                                k_delta=k_delta) - e_r

    lo, hi = math.log(1e-8), math.log(1e8)
    if gap(lo) <= 0:
        return 0.0
    if gap(hi) > 0:
        raise ValueError("no epsilon in the searched range meets e_r")
    return math.exp(brentq(gap, lo, hi, xtol=1e-13, rtol=8.9e-16))


def epsilon_threshold_closed_form(kind: str, n: int, *, gamma: float,
                                  delta: float, b: float, w: float,
                                  e_r: float,
                                  lambda2: float | None = None) -> float:
    """Literal evaluation of the published per-topology threshold formulas.

    kind is one of impossibility, complete, cycle, line, star. The
    impossibility form needs lambda2 explicitly; the others use the
    closed-form spectrum of the named uniform-weight topology. These
    expressions are reported for comparison only; see
    epsilon_threshold_numeric for the authoritative value.
    """
    k = privacy.q_inverse(delta)
    if kind == "impossibility":
        if lambda2 is None:
            raise ValueError("impossibility form requires lambda2")
        z1 = gamma * (n - 1) ** 2 / (2.0 - gamma * lambda2)
        return (2.0 * b * z1 / (n * e_r * lambda2)) * (
            b + e_r * k * lambda2 * n / math.sqrt(e_r * z1 * lambda2 * n))
    if kind == "complete":
        return (2.0 * b * gamma * (n - 1) ** 2
                / (n**2 * e_r * w * (2.0 - gamma * w * n))) * (
            b + e_r * k * w * n * math.sqrt(2.0 - gamma * w * n)
            / ((n - 1) * math.sqrt(e_r * gamma * w)))
    if kind == "cycle":
        c = 1.0 - math.cos(2.0 * math.pi / n)
        z2 = (n - 1) ** 2 * gamma / (1.0 - gamma * w * c)
        return (b * z2 / (n * e_r * 2.0 * w * c)
                + k / math.sqrt(z2 * e_r * w * c * n))
    if kind == "line":
        c = 1.0 - math.cos(math.pi / n)
        z3 = (n - 1) ** 2 * gamma / (1.0 - gamma * w * c)
        return (b * z3 / (n * e_r * 2.0 * w * c)
                + k / math.sqrt(z3 * e_r * w * c * n))
    if kind == "star":
        return (2.0 * b * gamma * (n - 1) ** 2
                / (n * e_r * w * (2.0 - gamma * w))) * (
            b + e_r * k * w * n * math.sqrt(2.0 - gamma * w)
            / ((n - 1) * math.sqrt(e_r * gamma * w * n)))
    raise ValueError(f"unknown threshold kind {kind!r}")


TABLE1_KINDS = ("complete", "cycle", "line", "star")
TABLE1_SIZES = (10, 100, 1000, 10000)
TABLE1_PARAMS = dict(delta=0.01, b=5.0, w=1.0, gamma=1e-4, e_r=100.0)


@dataclass(frozen=True)
class ThresholdCell:
    kind: str
    n: int
    numeric: float
    closed_form: float

    @property
    def relative_deviation(self) -> float:
        return abs(self.closed_form - self.numeric) / self.numeric


def reproduce_table1(**overrides) -> list:
    """Minimum-epsilon thresholds for the four standard topologies at
    N in {10, 100, 1000, 10000}, with the published closed forms alongside.
    """
    prm = {**TABLE1_PARAMS, **overrides}
    cells = []
    for kind in TABLE1_KINDS:
        for n in TABLE1_SIZES:
            lam2 = graphs.topology_lambda2(kind, n, prm["w"])
            numeric = epsilon_threshold_numeric(
                lam2, gamma=prm["gamma"], delta=prm["delta"], b=prm["b"],
                n_agents=n, e_r=prm["e_r"])
            closed = epsilon_threshold_closed_form(
                kind, n, gamma=prm["gamma"], delta=prm["delta"], b=prm["b"],
                w=prm["w"], e_r=prm["e_r"])
            cells.append(ThresholdCell(kind, n, numeric, closed))
    return cells


def bound_surface(eps_values, lam2_values, *, n_agents: int, delta: float,
                  b: float, gamma: float) -> np.ndarray:
    """Grid of homogeneous bounds, shape (len(eps), len(lam2)).

    lambda2 is treated as a free parameter; values at or beyond 2/gamma are
    rejected because the bound's denominator changes sign there.
    """
    eps_values = np.asarray(eps_values, dtype=float)
    lam2_values = np.asarray(lam2_values, dtype=float)
    if np.any(lam2_values <= 0) or np.any(lam2_values >= 2.0 / gamma):
        raise ValueError("lambda2 values must lie in (0, 2/gamma)")
    k_delta = privacy.q_inverse(delta)
    out = np.empty((len(eps_values), len(lam2_values)))
    for a, eps in enumerate(eps_values):
        for c, lam2 in enumerate(lam2_values):
            out[a, c] = corollary1_bound(eps, lam2, n_agents=n_agents,
                                         gamma=gamma, b=b, k_delta=k_delta)
    return out


@dataclass(frozen=True)
class BoundReport:
    """Everything we can say about e_ss for one configuration."""

    lemma7_lower: float
    lemma7_upper: float
    theorem1_upper: float
    corollary1_upper: float | None
    exact_ess: float
    gamma_valid: bool


def bound_report(g: WeightedGraph, gamma: float, params) -> BoundReport:
    """Exact oracle value plus all bounds for a graph and privacy setup.

    params is one PrivacyParams (homogeneous, enables the simplified bound)
    or a sequence of N of them.
    """
    p = graphs.build_perron(g, gamma)
    homogeneous = isinstance(params, privacy.PrivacyParams)
    plist = [params] * g.n if homogeneous else list(params)
    sigmas = np.array([privacy.noise_scale(q) for q in plist])

    from .dynamics import noise_covariance_diag
    z_diag = noise_covariance_diag(p, sigmas)
    lo, hi = lemma7_sandwich(p, z_diag)
    t1 = theorem1_bound(g, gamma, plist)
    c1 = None
    if homogeneous:
        c1 = corollary1_bound(params.epsilon,
                              graphs.algebraic_connectivity(g),
                              n_agents=g.n, gamma=gamma, b=params.b,
                              delta=params.delta)
    return BoundReport(lo, hi, t1, c1, exact_ess_oracle(p, z_diag), True)
