"""LMMSE channel estimators for different side-information sets and the SNR sweep.

Four estimators see different information about a test channel ``h``:

* ``zero``: nothing, outputs 0;
* ``sensing``: the path parameters only.  With uniform phases the conditional
  mean given the parameters is zero, so this equals the Wiener filter with the
  genie covariance applied to an all-zero observation;
* ``pilot``: a noisy observation ``y = h + n``, filtered with the population
  second moment estimated from training channels;
* ``joint``: the observation and the parameters, filtered with the genie
  covariance ``sum_l p_l a_l a_l^H`` of that very channel.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelConfig, PathPrior, path_vectors, sample_path_arrays, synthesize_batch
from .moments import sample_moments
from .rng import as_streams

ESTIMATORS = ("zero", "sensing", "pilot", "joint")
CSV_COLUMNS = ("snr_db", "nmse_zero", "nmse_sensing", "nmse_pilot", "nmse_joint", "n_test", "seed")


def _check_psd(c: np.ndarray):
    c = np.asarray(c)
    tr = np.trace(c, axis1=-2, axis2=-1).real
    low = np.linalg.eigvalsh(0.5 * (c + np.conj(np.swapaxes(c, -1, -2))))[..., 0]
    if np.any(low < -1e-8 * np.abs(tr)):
        raise ValueError("covariance is not positive semidefinite")


def lmmse_estimate(y, c, sigma2: float) -> np.ndarray:
    """Wiener filter ``C (C + sigma2 I)^{-1} y``.

    ``y`` is one observation (M,) or a batch (n, M).  ``c`` is one covariance
    (M, M) shared by the batch or one covariance per observation (n, M, M).
    """
    if not sigma2 > 0:
        raise ValueError("noise variance must be positive")
    y = np.asarray(y, dtype=complex)
    c = np.asarray(c, dtype=complex)
    _check_psd(c)
    m = c.shape[-1]
    a = c + sigma2 * np.eye(m)
    if c.ndim == 2:
        w = np.linalg.solve(a.T, c.T).T  # C A^{-1}
        return y @ w.T
    if y.ndim != 2 or y.shape[0] != c.shape[0]:
        raise ValueError("need one observation per covariance")
    x = np.linalg.solve(a, y[..., None])
    return (c @ x)[..., 0]


def genie_covariances(cfg: ChannelConfig, paths) -> np.ndarray:
    """Per-sample second moments ``sum_l p_l v_l v_l^H``, shape (n, M, M)."""
    v = path_vectors(cfg, paths)
    return np.einsum("nlm,nl,nlk->nmk", v, paths.p, v.conj())


def _ratio_se(num: np.ndarray, den: np.ndarray) -> float:
    """Delta-method standard error of ``sum(num) / sum(den)``."""
    n = num.size
    r = num.sum() / den.sum()
    return float(np.std(num - r * den, ddof=1) / np.sqrt(n) / den.mean()) if n > 1 else float("nan")


@dataclass
class EstimationReport:
    """nMSE of every estimator on every SNR grid point.

    ``se`` holds delta-method standard errors; ``diff_se`` those of the paired
    differences pilot-joint and zero-pilot.
    """

    snr_db: list[float]
    nmse: dict[str, list[float]]
    se: dict[str, list[float]]
    diff_se: dict[str, list[float]]
    n_test: int
    n_train: int
    seed: int
    extra: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for i, snr in enumerate(self.snr_db):
            writer.writerow([_fmt(snr)] + [_fmt(self.nmse[e][i]) for e in ESTIMATORS]
                            + [self.n_test, self.seed])
        return buf.getvalue()


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def population_covariance(cfg: ChannelConfig, prior: PathPrior, n_paths: int, n_train: int, rng=None):
    """Sample second moment of ``n_train`` channels drawn from ``prior``."""
    h = synthesize_batch(cfg, sample_path_arrays(prior, n_paths, n_train, rng))
    return sample_moments(h)[1]


def run_estimation_experiment(cfg: ChannelConfig, prior: PathPrior, snr_grid_db, n_test: int,
                              rng=None, n_paths: int = 3, n_train: int = 100_000) -> EstimationReport:
    """Compare the four estimators over an SNR grid.

    SNR is ``E||h||^2 / (M sigma^2)``; with powers normalized to sum to one
    this gives ``sigma^2 = 10^(-snr/10)``.
    """
    snr_grid_db = [float(s) for s in snr_grid_db]
    if n_test < 1 or n_train < 1:
        raise ValueError("n_test and n_train must be >= 1")
    if not snr_grid_db:
        raise ValueError("SNR grid is empty")
    streams = as_streams(rng)
    c_pop = population_covariance(cfg, prior, n_paths, n_train, streams.child(0))
    test = sample_path_arrays(prior, n_paths, n_test, streams.child(1))
    h = synthesize_batch(cfg, test)
    c_genie = genie_covariances(cfg, test)
    m = cfg.size
    power = np.sum(np.abs(h) ** 2, axis=1)
    # signal power per entry; equals 1 for normalized path powers
    signal = float(np.mean(np.sum(test.p, axis=1)))
    nmse = {e: [] for e in ESTIMATORS}
    se = {e: [] for e in ESTIMATORS}
    diff_se = {"pilot-joint": [], "zero-pilot": []}
    for i, snr in enumerate(snr_grid_db):
        sigma2 = signal * 10.0 ** (-snr / 10.0)
        gen = streams.child(10 + i)["noise"]
        noise = np.sqrt(sigma2 / 2) * (gen.standard_normal((n_test, m)) + 1j * gen.standard_normal((n_test, m)))
        y = h + noise
        est = {
            "zero": np.zeros_like(h),
            "sensing": lmmse_estimate(np.zeros_like(y), c_genie, sigma2),
            "pilot": lmmse_estimate(y, c_pop, sigma2),
            "joint": lmmse_estimate(y, c_genie, sigma2),
        }
        err = {e: np.sum(np.abs(est[e] - h) ** 2, axis=1) for e in ESTIMATORS}
        for e in ESTIMATORS:
            nmse[e].append(float(err[e].sum() / power.sum()))
            se[e].append(_ratio_se(err[e], power))
        diff_se["pilot-joint"].append(_ratio_se(err["pilot"] - err["joint"], power))
        diff_se["zero-pilot"].append(_ratio_se(err["zero"] - err["pilot"], power))
    return EstimationReport(snr_db=snr_grid_db, nmse=nmse, se=se, diff_se=diff_se,
                            n_test=n_test, n_train=n_train, seed=streams.seed)
