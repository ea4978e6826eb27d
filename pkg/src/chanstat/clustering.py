"""Zero-mean structured Gaussian mixtures, k-means baseline, mutual information.

Every mixture component is a circularly-symmetric complex Gaussian with zero
mean and a Hermitian multilevel Toeplitz covariance.  The exact constrained
M-step has no closed form, so each M-step projects the weighted scatter onto
the structured set and floors its spectrum (generalized EM).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from .channel import VelocityScenario, sample_velocity_dataset
from .rng import as_streams
from .structure import _as_dims, multilevel_toeplitz_project

logger = logging.getLogger(__name__)


_DEAD = 1e-8


class DegenerateComponentError(RuntimeError):
    """A mixture component lost all responsibility twice in one fit."""


@dataclass
class GmmModel:
    """Fitted zero-mean mixture.

    Attributes
    ----------
    weights : ndarray, shape (K,)
    covs : ndarray, shape (K, M, M)
        Hermitian positive definite, multilevel Toeplitz for ``dims``.
    dims : tuple of int
    floor : float
        Relative eigenvalue floor used during fitting.
    """

    weights: np.ndarray
    covs: np.ndarray
    dims: tuple[int, ...]
    floor: float = 1e-6
    log_likelihood: float = float("nan")

    @property
    def n_components(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.covs.shape[-1]

    def log_density(self, data) -> np.ndarray:
        """Per-component log densities, shape (N, K)."""
        data = _as_data(data, self.dim)
        return _log_densities(data, np.linalg.cholesky(self.covs))

    def log_joint(self, data) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.weights)[None, :] + self.log_density(data)

    def responsibilities(self, data) -> np.ndarray:
        lj = self.log_joint(data)
        return np.exp(lj - logsumexp(lj, axis=1, keepdims=True))

    def score(self, data) -> float:
        """Total log-likelihood of ``data``."""
        return float(np.sum(logsumexp(self.log_joint(data), axis=1)))


def _as_data(data, m: int | None = None) -> np.ndarray:
    data = np.asarray(data)
    if data.ndim == 1:
        data = data[None, :]
    if data.ndim != 2:
        raise ValueError("data must be a 2-d array of channel vectors")
    if m is not None and data.shape[1] != m:
        raise ValueError(f"data dimension {data.shape[1]} does not match model dimension {m}")
    return data.astype(complex, copy=False)


def _log_densities(x: np.ndarray, chol: np.ndarray) -> np.ndarray:
    n, m = x.shape
    out = np.empty((n, chol.shape[0]))
    for k, lk in enumerate(chol):
        z = solve_triangular(lk, x.T, lower=True, check_finite=False)
        quad = np.sum(np.abs(z) ** 2, axis=0)
        logdet = 2.0 * np.sum(np.log(np.diag(lk).real))
        out[:, k] = -m * np.log(np.pi) - logdet - quad
    return out


def structured_covariance(scatter: np.ndarray, dims, floor: float, rounds: int = 50) -> np.ndarray:
    """Hermitian multilevel Toeplitz covariance close to ``scatter``.

    Projects the scatter, then alternates eigenvalue flooring at
    ``floor * trace / M`` with re-projection until the floor holds (at most
    ``rounds`` times).  A final identity shift, which is itself multilevel
    Toeplitz, covers any remaining shortfall.
    """
    m = scatter.shape[-1]
    c = multilevel_toeplitz_project(scatter, dims, hermitian=True)
    for _ in range(rounds):
        lam, u = np.linalg.eigh(c)
        lam_floor = floor * max(lam.sum(), np.finfo(float).tiny) / m
        if lam[0] >= lam_floor:
            return c
        c = multilevel_toeplitz_project((u * np.maximum(lam, lam_floor)) @ u.conj().T,
                                        dims, hermitian=True)
    # shift s with low + s = floor * (trace + m s) / m, so the floor holds exactly
    low = np.linalg.eigvalsh(c)[0]
    target = floor * np.trace(c).real / m
    if low < target:
        c = c + (target - low) / (1.0 - floor) * np.eye(m)
    return c


def _m_step(x, resp, dims, floor):
    nk = resp.sum(axis=0)
    covs = np.empty((resp.shape[1], x.shape[1], x.shape[1]), dtype=complex)
    for k in range(resp.shape[1]):
        scatter = (x.T * resp[:, k]) @ x.conj() / nk[k]
        covs[k] = structured_covariance(scatter, dims, floor)
    return nk / nk.sum(), covs


def _initial_responsibilities(x, k, dims, floor, gen):
    """Responsibilities under components seeded from ``k`` random samples."""
    n = x.shape[0]
    seeds = gen.choice(n, size=k, replace=False)
    covs = np.stack([structured_covariance(np.outer(x[i], x[i].conj()), dims, max(floor, 1e-3))
                     for i in seeds])
    lj = _log_densities(x, np.linalg.cholesky(covs))
    return np.exp(lj - logsumexp(lj, axis=1, keepdims=True))


def _fit_once(x, k, dims, max_iter, rel_tol, floor, gen, on_collapse):
    n = x.shape[0]
    resp = _initial_responsibilities(x, k, dims, floor, gen)
    reseeded = np.zeros(k, dtype=bool)
    trace = []
    weights, covs, lj = None, None, None
    for it in range(max_iter):
        nk = resp.sum(axis=0)
        dead = np.flatnonzero(nk < _DEAD * n)
        if dead.size:
            again = dead[reseeded[dead]]
            if again.size and on_collapse == "error":
                raise DegenerateComponentError(f"component {again[0]} collapsed twice")
            if again.size:
                logger.debug("dropping components %s", again.tolist())
                keep = np.setdiff1d(np.arange(resp.shape[1]), again)
                resp, reseeded = resp[:, keep], reseeded[keep]
                lj = lj[:, keep] if lj is not None else None
                resp /= resp.sum(axis=1, keepdims=True)
                nk = resp.sum(axis=0)
                dead = np.flatnonzero(nk < _DEAD * n)
            # re-seed from the samples the current model explains worst
            fit = logsumexp(lj, axis=1) if lj is not None else gen.random(n)
            size = max(n // resp.shape[1], 1)
            for j in dead:
                logger.debug("re-seeding empty component %d", j)
                reseeded[j] = True
                worst = np.argsort(fit, kind="stable")[:size]
                resp[worst] = 0.0
                resp[worst, j] = 1.0
                fit[worst] = np.inf
        weights, covs = _m_step(x, resp, dims, floor)
        with np.errstate(divide="ignore"):
            lj = np.log(weights)[None, :] + _log_densities(x, np.linalg.cholesky(covs))
        norm = logsumexp(lj, axis=1, keepdims=True)
        resp = np.exp(lj - norm)
        trace.append(float(norm.sum()))
        if it > 0 and abs(trace[-1] - trace[-2]) <= rel_tol * abs(trace[-1]):
            break
    return weights, covs, trace


def fit_gmm(data, k: int, dims, max_iter: int = 200, rel_tol: float = 1e-6,
            floor: float = 1e-6, seed=0, restarts: int = 3, on_collapse: str = "error"):
    """Fit a zero-mean multilevel-Toeplitz Gaussian mixture by EM.

    Each restart seeds the ``k`` components from randomly chosen samples; the
    restart with the highest final log-likelihood wins.  A component that loses
    all responsibility is re-seeded once from the worst-explained samples; if
    it collapses again, ``on_collapse="error"`` raises
    :class:`DegenerateComponentError` and ``on_collapse="prune"`` drops it.

    Returns
    -------
    model : GmmModel
    trace : list of float
        Log-likelihood after every iteration of the winning restart.
    """
    dims = _as_dims(dims)
    x = _as_data(data)
    if int(np.prod(dims)) != x.shape[1]:
        raise ValueError(f"domain sizes {dims} do not match data dimension {x.shape[1]}")
    if k < 1 or k > x.shape[0]:
        raise ValueError(f"need 1 <= k <= number of samples, got k={k}, n={x.shape[0]}")
    if restarts < 1 or max_iter < 1:
        raise ValueError("restarts and max_iter must be >= 1")
    if on_collapse not in ("error", "prune"):
        raise ValueError(f"on_collapse must be 'error' or 'prune', got {on_collapse!r}")
    gen = as_streams(seed)["init"]
    best = None
    for r in range(restarts):
        weights, covs, trace = _fit_once(x, k, dims, max_iter, rel_tol, floor, gen, on_collapse)
        logger.debug("restart %d: %d iterations, %d components, log-likelihood %.6g",
                     r, len(trace), len(weights), trace[-1])
        if best is None or trace[-1] > best[2][-1]:
            best = (weights, covs, trace)
    weights, covs, trace = best
    model = GmmModel(weights=weights, covs=covs, dims=dims, floor=floor, log_likelihood=trace[-1])
    return model, trace


def gmm_assign(model: GmmModel, data) -> np.ndarray:
    """Index of the component with the largest posterior for every sample."""
    return np.argmax(model.log_joint(data), axis=1)


def _stack(x: np.ndarray) -> np.ndarray:
    return np.concatenate([x.real, x.imag], axis=1)


def _fit_kmeans(x, k, restarts, max_iter, seed):
    from sklearn.cluster import KMeans

    if k < 1 or k > x.shape[0]:
        raise ValueError(f"need 1 <= k <= number of samples, got k={k}, n={x.shape[0]}")
    state = int(as_streams(seed)["init"].integers(0, 2**31 - 1))
    km = KMeans(n_clusters=k, init="k-means++", n_init=restarts, max_iter=max_iter,
                random_state=state)
    return km.fit(_stack(x))


def kmeans(data, k: int, restarts: int = 10, max_iter: int = 300, seed=0) -> np.ndarray:
    """k-means++ labels of complex vectors stacked as ``[re, im]``.

    The best of ``restarts`` runs by within-cluster sum of squares is kept.
    """
    return _fit_kmeans(_as_data(data), k, restarts, max_iter, seed).labels_.copy()


def _contingency(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("labelings must be 1-d and of equal length")
    if a.size == 0:
        raise ValueError("labelings are empty")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1))
    np.add.at(table, (ia, ib), 1.0)
    return table


def mutual_information(a, b) -> float:
    """Plug-in mutual information of two labelings, in bits."""
    nxy = _contingency(a, b)
    n = nxy.sum()
    expected = nxy.sum(axis=1, keepdims=True) @ nxy.sum(axis=0, keepdims=True)
    nz = nxy > 0
    mi = np.sum(nxy[nz] * np.log2(nxy[nz] * n / expected[nz])) / n
    return float(max(mi, 0.0))


def entropy(a) -> float:
    """Plug-in entropy of a labeling, in bits."""
    _, counts = np.unique(np.asarray(a), return_counts=True)
    if counts.size == 0:
        raise ValueError("labeling is empty")
    p = counts / counts.sum()
    return float(-np.sum(p * np.log2(p)))


@dataclass
class VelocityRow:
    k: int
    mi_gmm_bits: float
    mi_kmeans_bits: float
    entropy_bits: float


@dataclass
class ClusterOptions:
    """Settings of the velocity clustering experiment.

    The eigenvalue floor is far above the generic default: noiseless
    trajectories are numerically low rank and tiny eigenvalues would dominate
    the densities.
    """

    max_iter: int = 100
    rel_tol: float = 1e-6
    floor: float = 3e-3
    restarts: int = 3
    kmeans_restarts: int = 10
    on_collapse: str = "prune"
    seed: int = 0


def run_velocity_experiment(sc: VelocityScenario, n_train: int, n_test: int, k_grid,
                            opts: ClusterOptions | None = None) -> list[VelocityRow]:
    """Cluster held-out trajectories and score both clusterings against the regions.

    Both the mixture and k-means are fitted on ``n_train`` trajectories and
    applied to ``n_test`` fresh ones.
    """
    opts = opts or ClusterOptions()
    if n_train < 1 or n_test < 1:
        raise ValueError("n_train and n_test must be positive")
    streams = as_streams(opts.seed)
    h_train, _, _ = sample_velocity_dataset(sc, n_train, streams.child(0))
    h_test, labels, _ = sample_velocity_dataset(sc, n_test, streams.child(1))
    dims = (sc.cfg.m_sn,)
    h_v = entropy(labels)
    rows = []
    for j, k in enumerate(k_grid):
        k = int(k)
        model, _ = fit_gmm(h_train, k, dims, max_iter=opts.max_iter, rel_tol=opts.rel_tol,
                           floor=opts.floor, seed=streams.child(100 + j), restarts=opts.restarts,
                           on_collapse=opts.on_collapse)
        c_g = gmm_assign(model, h_test)
        c_k = _kmeans_train_test(h_train, h_test, k, opts.kmeans_restarts, streams.child(200 + j))
        rows.append(VelocityRow(k, mutual_information(labels, c_g),
                                mutual_information(labels, c_k), h_v))
        logger.info("k=%d (%d live)  I(Cv,Cg)=%.3f  I(Cv,Ck)=%.3f  Hv=%.3f", k, model.n_components,
                    rows[-1].mi_gmm_bits, rows[-1].mi_kmeans_bits, h_v)
    return rows


def _kmeans_train_test(train, test, k, restarts, seed):
    return _fit_kmeans(train, k, restarts, 300, seed).predict(_stack(test))


def velocity_table_csv(rows: list[VelocityRow], seed: int) -> str:
    """CSV with columns k, mi_gmm_bits, mi_kmeans_bits, entropy_bits, seed."""
    lines = ["k,mi_gmm_bits,mi_kmeans_bits,entropy_bits,seed"]
    for r in rows:
        lines.append(f"{r.k},{r.mi_gmm_bits:.12g},{r.mi_kmeans_bits:.12g},{r.entropy_bits:.12g},{seed}")
    return "\n".join(lines) + "\n"
