"""Private formation-control dynamics and Monte Carlo steady-state-error
estimation.

The n-dimensional controller decomposes into n independent scalar runs, so
everything here works on scalar (per-dimension) state vectors. The shifted
state xbar = x - q evolves as xbar(k+1) = P xbar(k) + z(k), where
z_i(k) = gamma * sum_j w_ij * v_j(k) collects the neighbors' privacy noise.
The deviation from the moving consensus target is e(k) = xbar - mean(xbar).
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graphs import PerronMatrix, WeightedGraph


class NonMixingWarning(UserWarning):
    """Tail of the error series still trends: horizon likely too short."""


@dataclass(frozen=True)
class FormationSpec:
    """Anchor points of a translationally invariant formation.

    anchors is an (N, n) matrix; row i is agent i's position in one
    representative of the formation. Offsets between agents are differences
    of anchor rows, so antisymmetry holds by construction.
    """

    anchors: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.anchors, dtype=float))
        object.__setattr__(self, "anchors", a)

    @property
    def agent_count(self) -> int:
        return self.anchors.shape[0]

    @property
    def dimensions(self) -> int:
        return self.anchors.shape[1]

    def offset(self, i: int, j: int) -> np.ndarray:
        """Desired relative state p_j - p_i."""
        return self.anchors[j] - self.anchors[i]

    def component(self, l: int) -> np.ndarray:
        """Anchor vector q for dimension l (one entry per agent)."""
        return self.anchors[:, l].copy()


def noise_gain(p: PerronMatrix) -> np.ndarray:
    """gamma * A(G), the matrix mapping per-agent noise draws to the state
    perturbation z. Equals P with its diagonal removed."""
    return p.matrix - np.diag(np.diag(p.matrix))


def noise_covariance_diag(p: PerronMatrix, sigmas) -> np.ndarray:
    """Diagonal of Cov[z]: s_i^2 = gamma^2 * sum_j w_ij^2 sigma_j^2."""
    sigmas = np.broadcast_to(np.asarray(sigmas, dtype=float), (p.n,))
    return noise_gain(p) ** 2 @ sigmas**2


def noiseless_step(xbar: np.ndarray, p: PerronMatrix) -> np.ndarray:
    """One consensus step xbar(k+1) = P xbar(k)."""
    return p.matrix @ xbar


def private_step_network(xbar: np.ndarray, p: PerronMatrix,
                         v: np.ndarray) -> np.ndarray:
    """Network-level private step P xbar + z with z = gamma * A v."""
    return p.matrix @ xbar + noise_gain(p) @ v


def private_step_node(xbar: np.ndarray, g: WeightedGraph, gamma: float,
                      v: np.ndarray) -> np.ndarray:
    """Node-level private step, written as each agent computes it.

    Agent i mixes its neighbors' noised shifted states against its own
    un-noised state. Used to cross-check the network-level form.
    """
    out = np.array(xbar, dtype=float)
    a = g.adjacency_matrix()
    for i in range(g.n):
        acc = 0.0
        for j in range(g.n):
            if a[i, j] > 0:
                acc += a[i, j] * ((xbar[j] + v[j]) - xbar[i])
        out[i] += gamma * acc
    return out


def private_step(xbar: np.ndarray, p: PerronMatrix, sigmas,
                 rng: np.random.Generator) -> np.ndarray:
    """Private step with fresh per-agent Gaussian noise of scale sigmas."""
    sigmas = np.broadcast_to(np.asarray(sigmas, dtype=float), (p.n,))
    v = rng.standard_normal(p.n) * sigmas
    return private_step_network(xbar, p, v)


def beta(x: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Noiseless consensus target from state x: mean(x)*1 + q - mean(q)*1."""
    x = np.asarray(x, dtype=float)
    q = np.asarray(q, dtype=float)
    if x.shape != q.shape:
        raise ValueError("x and q must have the same length")
    return np.mean(x) + q - np.mean(q)


def error_series(xbar_traj: np.ndarray) -> tuple:
    """Per-step deviation e(k) and squared-error network average.

    xbar_traj has one row per time step. e(k) = x(k) - beta(k), which in
    shifted coordinates is xbar minus its network mean. The aggregate is
    the average of e_i^2 over agents (one value per step).
    """
    xbar_traj = np.atleast_2d(np.asarray(xbar_traj, dtype=float))
    e = xbar_traj - xbar_traj.mean(axis=1, keepdims=True)
    return e, np.mean(e**2, axis=1)


def trial_rng(master_seed, trial: int) -> np.random.Generator:
    """Independent generator for one trial, derived from the master seed."""
    if isinstance(master_seed, (int, np.integer)):
        key = (int(master_seed), trial)
    else:
        key = tuple(int(s) for s in master_seed) + (trial,)
    # length prefix: SeedSequence entropy ignores trailing zero words, so
    # (5, 0) and (5, 0, 0) would otherwise collide
    return np.random.default_rng(np.random.SeedSequence((len(key),) + key))


@dataclass(frozen=True)
class TrialEnsemble:
    """Trial-averaged error series of a Monte Carlo run."""

    e_agg_mean: np.ndarray      # (horizon+1,) averaged across trials
    e_agg_sem: np.ndarray       # standard error of the mean, per step
    e_agg_trials: np.ndarray    # (horizon+1, trials) per-trial series
    first_trajectory: np.ndarray  # (horizon+1, N) xbar of trial 0


def run_trials(p: PerronMatrix, sigmas, horizon: int, trials: int,
               master_seed, xbar0=None, jobs: int = 1,
               noise_model: str = "protocol") -> TrialEnsemble:
    """Simulate independent seeded trials of the private dynamics.

    Trial t draws its noise from a generator keyed by (master_seed, t), so
    results are independent of how trials are chunked across workers.

    noise_model selects how the state perturbation z is produced:

    * "protocol": the node-level law exactly. Each agent j draws one noise
      value v_j(k) and every neighbor of j mixes it in, so z = gamma*A v
      and the z_i of agents sharing a neighbor are correlated.
    * "network": the analytical model, z_i drawn independently with
      variance s_i^2 = gamma^2 * sum_j w_ij^2 sigma_j^2. This is the
      process the covariance oracle and the Kemeny sandwich describe; the
      marginal variances match the protocol but cross-correlations are
      dropped.
    """
    if noise_model not in ("protocol", "network"):
        raise ValueError(f"unknown noise_model {noise_model!r}")
    n = p.n
    sigmas = np.broadcast_to(np.asarray(sigmas, dtype=float), (n,))
    x0 = np.zeros(n) if xbar0 is None else np.asarray(xbar0, dtype=float)
    gain = noise_gain(p)
    z_scale = np.sqrt(noise_covariance_diag(p, sigmas))

    def run_chunk(t_lo, t_hi):
        count = t_hi - t_lo
        v = np.empty((horizon, count, n))
        for t in range(t_lo, t_hi):
            v[:, t - t_lo, :] = trial_rng(master_seed, t).standard_normal(
                (horizon, n))
        if noise_model == "protocol":
            z = (v * sigmas) @ gain  # gain is symmetric
        else:
            z = v * z_scale
        x = np.tile(x0, (count, 1))
        e_agg = np.empty((horizon + 1, count))
        traj = np.empty((horizon + 1, n)) if t_lo == 0 else None
        dev = x - x.mean(axis=1, keepdims=True)
        e_agg[0] = np.mean(dev**2, axis=1)
        if traj is not None:
            traj[0] = x[0]
        for k in range(horizon):
            x = x @ p.matrix + z[k]  # P is symmetric
            dev = x - x.mean(axis=1, keepdims=True)
            e_agg[k + 1] = np.mean(dev**2, axis=1)
            if traj is not None:
                traj[k + 1] = x[0]
        return e_agg, traj

    if jobs <= 1 or trials == 1:
        chunks = [(0, trials)]
    else:
        step = -(-trials // jobs)
        chunks = [(lo, min(lo + step, trials))
                  for lo in range(0, trials, step)]
    if len(chunks) == 1:
        results = [run_chunk(*chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            results = list(pool.map(lambda c: run_chunk(*c), chunks))

    e_agg = np.concatenate([r[0] for r in results], axis=1)
    first_traj = results[0][1]
    sem = e_agg.std(axis=1, ddof=1) / math.sqrt(trials) if trials > 1 \
        else np.zeros(horizon + 1)
    return TrialEnsemble(e_agg.mean(axis=1), sem, e_agg, first_traj)


def default_horizon(p: PerronMatrix) -> int:
    """Several mixing times: 50 / (gamma * lambda2(L))."""
    evals = np.sort(np.linalg.eigvalsh(p.matrix))[::-1]
    gap = 1.0 - evals[1]  # gamma * lambda2(L)
    if gap <= 0:
        raise ValueError("chain does not mix: spectral gap is zero")
    return max(int(math.ceil(50.0 / gap)), 20)


@dataclass(frozen=True)
class EssEstimate:
    value: float
    half_width: float
    horizon: int
    trials: int
    mixing_ok: bool


def estimate_ess(p: PerronMatrix, sigmas, trials: int = 1000,
                 horizon: int | None = None, tail_fraction: float = 0.25,
                 master_seed=0, xbar0=None, jobs: int = 1,
                 noise_model: str = "network") -> EssEstimate:
    """Monte Carlo estimate of the steady-state error.

    Defaults to the "network" noise model (independent z with the
    analytical variances), the process whose steady state the exact
    covariance oracle and the Kemeny sandwich characterize.

    Averages the squared-error series across trials pointwise and takes the
    maximum of the averaged series over the final tail_fraction of steps as
    a conservative stand-in for the limit superior. The half-width is a 95%
    normal interval from the trial variance at the selected step.

    Emits NonMixingWarning when the tail still trends (least-squares slope
    over 100 steps exceeding 1% of the tail mean).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError("tail_fraction must be in (0, 1]")
    if horizon is None:
        horizon = default_horizon(p)
    ens = run_trials(p, sigmas, horizon, trials, master_seed, xbar0, jobs,
                     noise_model=noise_model)
    tail_start = horizon + 1 - max(int((horizon + 1) * tail_fraction), 1)
    tail = ens.e_agg_mean[tail_start:]
    k_star = tail_start + int(np.argmax(tail))

    mixing_ok = True
    tail_mean = float(tail.mean())
    if len(tail) >= 3 and tail_mean > 0:
        slope = np.polyfit(np.arange(len(tail)), tail, 1)[0]
        if abs(slope) * 100.0 > 0.01 * tail_mean:
            mixing_ok = False
            warnings.warn(
                f"tail still trends: slope per 100 steps is "
                f"{abs(slope) * 100.0 / tail_mean:.2%} of the tail mean",
                NonMixingWarning, stacklevel=2,
            )
    if trials > 1:
        hw = 1.96 * float(np.std(ens.e_agg_trials[k_star], ddof=1)) \
            / math.sqrt(trials)
    else:
        hw = float("inf") if float(tail.max()) > 0 else 0.0
    return EssEstimate(float(tail.max()), hw, horizon, trials, mixing_ok)
