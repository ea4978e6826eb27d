"""Multi-domain channel synthesis and parameter sampling.

A channel with ``L`` paths is

    h = sum_l sqrt(p_l) exp(-j beta_l) a_f(tau_l) (x) a_t(nu_l) (x) a_R(thr_l) (x) a_T(tht_l)

with the Kronecker factors in frequency, time, receive, transmit order.  In the
vectorized channel the transmit index varies fastest, i.e. entry
``((i_f * m_sn + i_s) * m_r + i_r) * m_t + i_x`` holds ``H[i_f, i_s, i_r, i_x]``
(C order of the tensor).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .rng import as_streams

SPEED_OF_LIGHT = 2.99792458e8

#: Largest channel dimension accepted by the synthesizer.
MAX_DIM = 1 << 14

DOMAINS = ("frequency", "time", "rx", "tx")


class PriorError(ValueError):
    """Raised for parameter priors that cannot be sampled."""


@dataclass(frozen=True)
class ChannelConfig:
    """Sampling grid of the channel in every domain."""

    m_sc: int = 1
    m_sn: int = 1
    m_r: int = 1
    m_t: int = 1
    delta_f: float = 15e3
    delta_t: float = 5e-4
    f_c: float = 2.1e9

    def __post_init__(self):
        for name in ("m_sc", "m_sn", "m_r", "m_t"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        for name in ("delta_f", "delta_t", "f_c"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return (self.m_sc, self.m_sn, self.m_r, self.m_t)

    @property
    def size(self) -> int:
        """Total dimension ``M`` of the vectorized channel."""
        return self.m_sc * self.m_sn * self.m_r * self.m_t

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f_c

    def domain_size(self, domain: str) -> int:
        return self.dims[_domain_index(domain)]


@dataclass(frozen=True)
class PathParams:
    """Parameters of one propagation path.

    ``p, tau, nu, theta_r, theta_t`` form the path's share of the channel
    parameters; ``beta`` is the path phase.
    """

    p: float = 1.0
    beta: float = 0.0
    tau: float = 0.0
    nu: float = 0.0
    theta_r: float = 0.0
    theta_t: float = 0.0

    def __post_init__(self):
        for name in ("p", "beta", "tau", "nu", "theta_r", "theta_t"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"path parameter {name} is not finite")
        if self.p < 0:
            raise ValueError(f"path power must be nonnegative, got {self.p}")
        if not 0.0 <= self.beta < 2 * math.pi:
            raise ValueError(f"beta must lie in [0, 2pi), got {self.beta}")
        if self.tau < 0:
            raise ValueError(f"delay must be nonnegative, got {self.tau}")
        for name in ("theta_r", "theta_t"):
            if abs(getattr(self, name)) > math.pi / 2:
                raise ValueError(f"{name} must lie in [-pi/2, pi/2]")


@dataclass
class PathArrays:
    """Batch of ``n`` path sets with ``l`` paths each; every field has shape (n, l)."""

    p: np.ndarray
    beta: np.ndarray
    tau: np.ndarray
    nu: np.ndarray
    theta_r: np.ndarray
    theta_t: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.p.shape

    def __getitem__(self, idx) -> "PathArrays":
        return PathArrays(**{k: np.atleast_2d(v[idx]) for k, v in self._fields().items()})

    def _fields(self) -> dict[str, np.ndarray]:
        return {"p": self.p, "beta": self.beta, "tau": self.tau, "nu": self.nu,
                "theta_r": self.theta_r, "theta_t": self.theta_t}

    def to_paths(self, row: int = 0) -> list[PathParams]:
        f = self._fields()
        return [PathParams(**{k: float(v[row, i]) for k, v in f.items()})
                for i in range(self.shape[1])]

    @classmethod
    def from_paths(cls, paths: Sequence[PathParams]) -> "PathArrays":
        if len(paths) == 0:
            raise ValueError("path list is empty")
        cols = {k: np.array([[getattr(pp, k) for pp in paths]], dtype=float)
                for k in ("p", "beta", "tau", "nu", "theta_r", "theta_t")}
        return cls(**cols)


def _domain_index(domain: str) -> int:
    try:
        return DOMAINS.index(domain)
    except ValueError:
        raise ValueError(f"unknown domain {domain!r}; expected one of {DOMAINS}") from None


def _phase_step(domain: str, param, cfg: ChannelConfig):
    """Phase increment per grid step for ``domain`` (broadcasts over ``param``)."""
    if domain == "frequency":
        return 2 * np.pi * cfg.delta_f * param
    if domain == "time":
        return 2 * np.pi * cfg.delta_t * param
    return np.pi * np.sin(param)


def steering_vector(domain: str, param: float, m: int, cfg: ChannelConfig | None = None) -> np.ndarray:
    """Steering vector ``[1, e^{-j w}, ..., e^{-j (m-1) w}]`` of one domain.

    Parameters
    ----------
    domain : {"frequency", "time", "rx", "tx"}
        ``param`` is the delay in s, the Doppler shift in Hz, or the angle in
        rad (half-wavelength array), respectively.
    param : float
    m : int
        Number of grid points.
    cfg : ChannelConfig, optional
        Supplies ``delta_f`` / ``delta_t``; only needed for frequency and time.
    """
    _domain_index(domain)
    if int(m) != m or m < 1:
        raise ValueError(f"steering vector length must be >= 1, got {m}")
    param = float(param)
    if not math.isfinite(param):
        raise ValueError("steering parameter is not finite")
    if domain == "frequency" and param < 0:
        raise ValueError("delay must be nonnegative")
    if domain in ("rx", "tx") and abs(param) > math.pi / 2:
        raise ValueError("angle must lie in [-pi/2, pi/2]")
    if cfg is None:
        if domain in ("frequency", "time"):
            raise ValueError(f"{domain} steering vector needs a ChannelConfig")
        cfg = ChannelConfig()
    k = np.arange(int(m))
    return np.exp(-1j * k * _phase_step(domain, param, cfg))


def path_vectors(cfg: ChannelConfig, paths: PathArrays) -> np.ndarray:
    """Kronecker steering vectors of every path, shape (n, l, M)."""
    if cfg.size > MAX_DIM:
        raise ValueError(f"channel dimension {cfg.size} exceeds the cap {MAX_DIM}")
    n, l = paths.shape
    out = np.ones((n, l, 1), dtype=complex)
    for domain, param, m in zip(DOMAINS, (paths.tau, paths.nu, paths.theta_r, paths.theta_t), cfg.dims):
        if m == 1:
            continue
        a = np.exp(-1j * np.arange(m) * _phase_step(domain, param, cfg)[..., None])
        out = (out[..., :, None] * a[..., None, :]).reshape(n, l, -1)
    return out


def _check_arrays(paths: PathArrays):
    for name, v in paths._fields().items():
        if not np.all(np.isfinite(v)):
            raise ValueError(f"path parameter {name} is not finite")
    if np.any(paths.p < 0):
        raise ValueError("path powers must be nonnegative")


def synthesize_batch(cfg: ChannelConfig, paths: PathArrays, chunk: int = 4096) -> np.ndarray:
    """Channels of a batch of path sets, shape (n, M)."""
    _check_arrays(paths)
    n = paths.shape[0]
    out = np.empty((n, cfg.size), dtype=complex)
    gains = np.sqrt(paths.p) * np.exp(-1j * paths.beta)
    for s in range(0, n, chunk):
        sl = slice(s, s + chunk)
        v = path_vectors(cfg, paths[sl])
        out[sl] = np.einsum("nl,nlm->nm", gains[sl], v)
    return out


def synthesize_channel(cfg: ChannelConfig, paths: Sequence[PathParams]) -> np.ndarray:
    """Vectorized channel (length ``cfg.size``) of one list of paths."""
    if len(paths) == 0:
        raise ValueError("path list is empty")
    return synthesize_batch(cfg, PathArrays.from_paths(paths))[0]


# --------------------------------------------------------------------------
# priors

_MARGINALS = {"constant": 1, "uniform": 2, "normal": 2, "exponential": 1}
_POWERS = {"normalized_uniform_amplitude": 0, "equal": 0, "single": 0,
           "uniform": 2, "exponential": 1}


@dataclass(frozen=True)
class Marginal:
    """Distribution of one scalar path parameter.

    ``constant(c)``, ``uniform(low, high)``, ``normal(mean, std)`` or
    ``exponential(scale)``.
    """

    dist: str = "constant"
    params: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        if self.dist not in _MARGINALS:
            raise PriorError(f"unknown distribution {self.dist!r}")
        params = tuple(float(x) for x in self.params)
        object.__setattr__(self, "params", params)
        if len(params) != _MARGINALS[self.dist]:
            raise PriorError(f"{self.dist} takes {_MARGINALS[self.dist]} parameter(s), got {len(params)}")
        if not all(math.isfinite(x) for x in params):
            raise PriorError("distribution parameters must be finite")
        if self.dist == "uniform" and not params[0] < params[1]:
            raise PriorError(f"uniform needs low < high, got {params}")
        if self.dist == "normal" and params[1] <= 0:
            raise PriorError("normal needs a positive standard deviation")
        if self.dist == "exponential" and params[0] <= 0:
            raise PriorError("exponential needs a positive scale")

    def support(self) -> tuple[float, float]:
        if self.dist == "constant":
            return self.params[0], self.params[0]
        if self.dist == "uniform":
            return self.params
        if self.dist == "exponential":
            return 0.0, math.inf
        return -math.inf, math.inf

    def sample(self, gen: np.random.Generator, shape) -> np.ndarray:
        if self.dist == "constant":
            return np.full(shape, self.params[0])
        if self.dist == "uniform":
            return gen.uniform(self.params[0], self.params[1], size=shape)
        if self.dist == "normal":
            return gen.normal(self.params[0], self.params[1], size=shape)
        return gen.exponential(self.params[0], size=shape)


@dataclass(frozen=True)
class PowerPrior:
    """Joint distribution of the path powers of one path set.

    ``normalized_uniform_amplitude``: amplitudes ``sqrt(p)`` uniform on [0, 1],
    then powers scaled to sum to one.  ``equal``: ``p = 1/L``.  ``single``: all
    power on the first path.  ``uniform(low, high)`` / ``exponential(scale)``:
    i.i.d. powers, optionally normalized.
    """

    dist: str = "normalized_uniform_amplitude"
    params: tuple[float, ...] = ()
    normalize: bool = True

    def __post_init__(self):
        if self.dist not in _POWERS:
            raise PriorError(f"unknown power distribution {self.dist!r}")
        params = tuple(float(x) for x in self.params)
        object.__setattr__(self, "params", params)
        if len(params) != _POWERS[self.dist]:
            raise PriorError(f"{self.dist} takes {_POWERS[self.dist]} parameter(s), got {len(params)}")
        if self.dist == "uniform" and not 0 <= params[0] < params[1]:
            raise PriorError("uniform powers need 0 <= low < high")
        if self.dist == "exponential" and params[0] <= 0:
            raise PriorError("exponential needs a positive scale")

    def sample(self, gen: np.random.Generator, shape) -> np.ndarray:
        n, l = shape
        if self.dist == "equal":
            return np.full(shape, 1.0 / l)
        if self.dist == "single":
            p = np.zeros(shape)
            p[:, 0] = 1.0
            return p
        if self.dist == "normalized_uniform_amplitude":
            amp = gen.uniform(0.0, 1.0, size=shape)
            p = amp**2
            return p / p.sum(axis=1, keepdims=True)
        if self.dist == "uniform":
            p = gen.uniform(self.params[0], self.params[1], size=shape)
        else:
            p = gen.exponential(self.params[0], size=shape)
        if self.normalize:
            p = p / p.sum(axis=1, keepdims=True)
        return p


@dataclass(frozen=True)
class PathPrior:
    """Declarative prior over the non-phase path parameters.

    The default is the receive-domain estimation setup: normalized uniform
    amplitudes and arrival angles uniform on [-pi/2, pi/2].
    """

    power: PowerPrior = field(default_factory=PowerPrior)
    delay: Marginal = field(default_factory=Marginal)
    doppler: Marginal = field(default_factory=Marginal)
    theta_r: Marginal = field(default_factory=lambda: Marginal("uniform", (-math.pi / 2, math.pi / 2)))
    theta_t: Marginal = field(default_factory=Marginal)

    def __post_init__(self):
        lo, _ = self.delay.support()
        if lo < 0:
            raise PriorError("delay prior must be supported on [0, inf)")
        for name in ("theta_r", "theta_t"):
            lo, hi = getattr(self, name).support()
            if lo < -math.pi / 2 - 1e-12 or hi > math.pi / 2 + 1e-12:
                raise PriorError(f"{name} prior must be supported on [-pi/2, pi/2]")

    @classmethod
    def from_mapping(cls, spec: Mapping) -> "PathPrior":
        """Build a prior from ``{"power": ..., "theta_r": ...}``.

        Each value is a ``(dist, *params)`` sequence or a ``{"dist": ,
        "params": }`` mapping; unknown keys are rejected.
        """
        allowed = {"power", "delay", "doppler", "theta_r", "theta_t"}
        unknown = set(spec) - allowed
        if unknown:
            raise PriorError(f"unknown prior keys: {sorted(unknown)}")
        kwargs = {}
        for key, value in spec.items():
            kind = PowerPrior if key == "power" else Marginal
            if isinstance(value, (kind, )):
                kwargs[key] = value
            elif isinstance(value, Mapping):
                kwargs[key] = kind(**value)
            elif isinstance(value, str):
                kwargs[key] = kind(value, ())
            else:
                kwargs[key] = kind(value[0], tuple(value[1:]))
        return cls(**kwargs)


def sample_path_arrays(prior: PathPrior, l: int, n: int, rng=None,
                       beta: str = "uniform") -> PathArrays:
    """Draw ``n`` independent path sets of ``l`` paths.

    Phases come from the ``beta`` stream only, so they are independent of all
    other parameters.  ``beta="spike"`` sets every phase to zero (a deliberate
    violation of the uniform-phase assumption, used as a negative control).
    """
    if int(l) != l or l < 1:
        raise ValueError(f"number of paths must be >= 1, got {l}")
    if int(n) != n or n < 1:
        raise ValueError(f"number of path sets must be >= 1, got {n}")
    streams = as_streams(rng)
    shape = (int(n), int(l))
    p = prior.power.sample(streams["power"], shape)
    tau = prior.delay.sample(streams["delay"], shape)
    nu = prior.doppler.sample(streams["doppler"], shape)
    theta_r = prior.theta_r.sample(streams["angle"], shape)
    theta_t = prior.theta_t.sample(streams["angle"], shape)
    if beta == "uniform":
        b = streams["beta"].uniform(0.0, 2 * np.pi, size=shape)
    elif beta == "spike":
        b = np.zeros(shape)
    else:
        raise ValueError(f"unknown phase model {beta!r}")
    return PathArrays(p=p, beta=b, tau=tau, nu=nu, theta_r=theta_r, theta_t=theta_t)


def sample_paths(prior: PathPrior, l: int, rng=None) -> list[PathParams]:
    """Draw one list of ``l`` paths from ``prior``."""
    return sample_path_arrays(prior, l, 1, rng).to_paths(0)


def resample_phases(paths: PathArrays, n: int, gen: np.random.Generator,
                    beta: str = "uniform") -> PathArrays:
    """Repeat a single path set ``n`` times with fresh i.i.d. phases."""
    if paths.shape[0] != 1:
        raise ValueError("expected a single path set")
    rep = {k: np.repeat(v, n, axis=0) for k, v in paths._fields().items()}
    if beta == "uniform":
        rep["beta"] = gen.uniform(0.0, 2 * np.pi, size=rep["p"].shape)
    elif beta == "spike":
        rep["beta"] = np.zeros(rep["p"].shape)
    else:
        raise ValueError(f"unknown phase model {beta!r}")
    return PathArrays(**rep)


# --------------------------------------------------------------------------
# velocity-labelled time-domain scenario


def doppler_shift(v, f_c, alpha):
    """Doppler shift ``v f_c / c cos(alpha)`` in Hz."""
    return np.asarray(v) * f_c / SPEED_OF_LIGHT * np.cos(alpha)


@dataclass(frozen=True)
class VelocityScenario:
    """Users moving at a speed drawn from one of several disjoint regions.

    The default grid matches a snapshot every 0.5 ms, 16 snapshots, at a
    2.1 GHz carrier; only the time domain is sampled.
    """

    bounds: tuple[tuple[float, float], ...] = ((0.0, 5.0), (10.0, 15.0), (20.0, 25.0), (30.0, 35.0))
    masses: tuple[float, ...] = (0.25, 0.25, 0.25, 0.25)
    n_paths: int = 50
    cfg: ChannelConfig = field(default_factory=lambda: ChannelConfig(m_sn=16, delta_t=5e-4, f_c=2.1e9))
    power: PowerPrior = field(default_factory=lambda: PowerPrior("equal"))

    def __post_init__(self):
        bounds = tuple((float(a), float(b)) for a, b in self.bounds)
        masses = tuple(float(m) for m in self.masses)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "masses", masses)
        if len(bounds) != len(masses) or not bounds:
            raise ValueError("bounds and masses must have the same nonzero length")
        for lo, hi in bounds:
            if not 0 <= lo <= hi:
                raise ValueError(f"invalid velocity interval ({lo}, {hi})")
        for (_, hi), (lo, _) in zip(bounds, bounds[1:]):
            if not hi < lo:
                raise ValueError("velocity intervals must be ordered and disjoint")
        if any(m < 0 for m in masses) or abs(sum(masses) - 1.0) > 1e-12:
            raise ValueError("region masses must be nonnegative and sum to 1")
        if self.cfg.m_sc != 1 or self.cfg.m_r != 1 or self.cfg.m_t != 1:
            raise ValueError("velocity scenario samples the time domain only")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")

    @property
    def n_regions(self) -> int:
        return len(self.bounds)


def sample_velocity_dataset(sc: VelocityScenario, n: int, rng=None):
    """Draw ``n`` trajectories.

    Returns
    -------
    h : ndarray, shape (n, m_sn)
    labels : ndarray of int, shape (n,)
        Region index, starting at 1.
    speed : ndarray, shape (n,)
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    streams = as_streams(rng)
    region = streams["region"].choice(sc.n_regions, size=n, p=np.asarray(sc.masses))
    bounds = np.asarray(sc.bounds)
    u = streams["velocity"].uniform(0.0, 1.0, size=n)
    speed = bounds[region, 0] + u * (bounds[region, 1] - bounds[region, 0])
    shape = (n, sc.n_paths)
    alpha = streams["doppler"].uniform(0.0, 2 * np.pi, size=shape)
    zeros = np.zeros(shape)
    paths = PathArrays(
        p=sc.power.sample(streams["power"], shape),
        beta=streams["beta"].uniform(0.0, 2 * np.pi, size=shape),
        tau=zeros, nu=doppler_shift(speed[:, None], sc.cfg.f_c, alpha),
        theta_r=zeros, theta_t=zeros,
    )
    return synthesize_batch(sc.cfg, paths), region + 1, speed


def sample_velocity_trajectory(sc: VelocityScenario, rng=None):
    """One trajectory and its region label (1-based)."""
    h, labels, _ = sample_velocity_dataset(sc, 1, rng)
    return h[0], int(labels[0])
