"""Closed-form and Monte Carlo conditional channel moments.

With the path parameters fixed and the phases i.i.d. uniform, the channel has
zero mean and second moment ``sum_l p_l v_l v_l^H`` where ``v_l`` is the
Kronecker steering vector of path ``l``.  Every term is a Kronecker product of
Toeplitz matrices, so the result is multilevel Toeplitz.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import (ChannelConfig, PathArrays, PathParams, PathPrior, path_vectors,
                      resample_phases, sample_path_arrays, synthesize_batch)
from .rng import as_streams
from .structure import structure_nmse


@dataclass
class MomentReport:
    """Monte Carlo moments for one fixed parameter set."""

    mean: np.ndarray
    cov: np.ndarray
    cov_closed: np.ndarray
    mean_norm: float
    cov_rel_err: float
    cov_nmse: float
    structure_nmse_mc: float
    structure_nmse_closed: float
    n: int
    mean_bound: float = float("nan")

    def summary(self) -> dict:
        """JSON-ready scalar fields."""
        return {
            "n": self.n,
            "mean_norm": self.mean_norm,
            "mean_bound": self.mean_bound,
            "cov_rel_err": self.cov_rel_err,
            "cov_nmse": self.cov_nmse,
            "structure_nmse_mc": self.structure_nmse_mc,
            "structure_nmse_closed": self.structure_nmse_closed,
        }


def _as_arrays(xi) -> PathArrays:
    if isinstance(xi, PathArrays):
        if xi.shape[0] != 1:
            raise ValueError("expected a single parameter set")
        return xi
    return PathArrays.from_paths(list(xi))


def closed_form_moments(cfg: ChannelConfig, xi: Sequence[PathParams] | PathArrays):
    """Conditional mean (zero) and second moment given the path parameters.

    Phases in ``xi`` are ignored.
    """
    arrays = _as_arrays(xi)
    v = path_vectors(cfg, arrays)[0]  # (l, M)
    p = arrays.p[0]
    cov = (v.T * p) @ v.conj()
    cov = 0.5 * (cov + cov.conj().T)
    return np.zeros(cfg.size, dtype=complex), cov


def sample_moments(h: np.ndarray):
    """Sample mean and non-centered sample second moment of rows of ``h``."""
    n = h.shape[0]
    mean = h.mean(axis=0)
    cov = h.T @ h.conj() / n
    return mean, 0.5 * (cov + cov.conj().T)


def mc_conditional_moments(cfg: ChannelConfig, xi, n: int, rng=None,
                           beta: str = "uniform") -> MomentReport:
    """Resample the phases ``n`` times with ``xi`` frozen and compare moments.

    ``beta="spike"`` fixes all phases at zero instead (negative control).
    """
    if n < 2:
        raise ValueError("need at least two Monte Carlo samples")
    arrays = _as_arrays(xi)
    streams = as_streams(rng)
    batch = resample_phases(arrays, n, streams["beta"], beta)
    h = synthesize_batch(cfg, batch)
    return _report(cfg, arrays, h)


def _report(cfg, arrays, h) -> MomentReport:
    mean, cov = sample_moments(h)
    _, closed = closed_form_moments(cfg, arrays)
    closed_norm = np.linalg.norm(closed)
    err = np.linalg.norm(cov - closed) / closed_norm
    n = h.shape[0]
    # 3 sigma per coordinate: E|h_m|^2 = C_mm
    bound = 3.0 * math.sqrt(float(np.trace(closed).real) / n)
    return MomentReport(
        mean=mean, cov=cov, cov_closed=closed,
        mean_norm=float(np.linalg.norm(mean)),
        cov_rel_err=float(err), cov_nmse=float(err**2),
        structure_nmse_mc=structure_nmse(cov, cfg.dims),
        structure_nmse_closed=structure_nmse(closed, cfg.dims),
        n=n, mean_bound=bound,
    )


@dataclass
class TheoremCheck:
    passed: bool
    tol: float
    reports: list[MomentReport] = field(default_factory=list)
    xi: list[PathArrays] = field(default_factory=list)
    beta: str = "uniform"

    @property
    def max_mean_norm(self) -> float:
        return max(r.mean_norm for r in self.reports)

    @property
    def min_mean_norm(self) -> float:
        return min(r.mean_norm for r in self.reports)

    @property
    def max_cov_rel_err(self) -> float:
        return max(r.cov_rel_err for r in self.reports)

    def to_json(self, seed: int | None = None) -> str:
        doc = {
            "passed": self.passed,
            "tol": self.tol,
            "beta": self.beta,
            "seed": seed,
            "n_xi": len(self.reports),
            "max_mean_norm": self.max_mean_norm,
            "max_cov_rel_err": self.max_cov_rel_err,
            "max_structure_nmse_closed": max(r.structure_nmse_closed for r in self.reports),
            "draws": [r.summary() for r in self.reports],
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def verify_theorem1(cfg: ChannelConfig, prior: PathPrior, n_paths: int, n_xi: int,
                    n_beta: int, rng=None, tol: float = 0.05,
                    beta: str = "uniform") -> TheoremCheck:
    """Check zero mean and closed-form second moment for ``n_xi`` parameter draws.

    Passes iff every Monte Carlo mean norm and every relative Frobenius error
    of the sample second moment is at most ``tol``.
    """
    if not tol > 0:
        raise ValueError("tolerance unsatisfiable: tol must be positive")
    if n_xi < 1:
        raise ValueError("n_xi must be >= 1")
    streams = as_streams(rng)
    reports, draws = [], []
    for i in range(n_xi):
        task = streams.child(i)
        xi = sample_path_arrays(prior, n_paths, 1, task)
        reports.append(mc_conditional_moments(cfg, xi, n_beta, task, beta=beta))
        draws.append(xi)
    passed = all(r.mean_norm <= tol and r.cov_rel_err <= tol for r in reports)
    return TheoremCheck(passed=passed, tol=tol, reports=reports, xi=draws, beta=beta)


def structure_convergence(cfg: ChannelConfig, xi, ns: Sequence[int], rng=None):
    """Structure nMSE and Frobenius error of MC second moments for growing ``n``.

    Uses one phase stream so smaller sample sets are prefixes of larger ones.
    Returns a list of ``(n, structure_nmse, frobenius_error)`` tuples; with
    ``n = 1`` the sample second moment is a rank-one outer product.
    """
    arrays = _as_arrays(xi)
    streams = as_streams(rng)
    n_max = max(ns)
    h = synthesize_batch(cfg, resample_phases(arrays, n_max, streams["beta"]))
    _, closed = closed_form_moments(cfg, arrays)
    out = []
    for n in ns:
        _, cov = sample_moments(h[:n])
        out.append((int(n), structure_nmse(cov, cfg.dims), float(np.linalg.norm(cov - closed))))
    return out

