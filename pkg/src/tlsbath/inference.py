"""Extraction of TLS bath parameters from a pump sweep, with bootstrap errors.

A sweep is a set of measurements, one per (intracavity pump photon number
``n``, pump detuning), of the resonance frequency and internal loss rate.
Frequencies in a :class:`SweepDataset` are in Hz and relative to a reference
frequency ``reference_hz``: the pump sits at ``reference_hz + detuning_hz``
and ``shift_hz`` is the observed resonance minus ``reference_hz``. The model
for a point is::

    shift   = (omega_c - omega_ref + d_omega_c(n, delta)) / 2 pi
    gamma_i = (gamma_c(n, delta) + gamma_inf) / 2 pi

with ``delta = (omega_p - omega_c) / gamma2`` and ``gamma1 = 2 gamma2``.
The five free parameters are ``p0, g, gamma2, gamma_inf, omega_c``.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from tlsbath.lm import levenberg_marquardt
from tlsbath.model import damping_bracket
from tlsbath.table import P0_TABLE_TO_INTERNAL

__all__ = [
    "ParamFitError",
    "SweepPoint",
    "SweepDataset",
    "TLSFitParams",
    "FitResult",
    "SweepObjective",
    "PARAM_NAMES",
    "predict",
    "initial_guess",
    "fit",
    "bootstrap",
    "derived_quantities",
    "synthetic_dataset",
]

PARAM_NAMES = ("p0", "g", "gamma2", "gamma_inf", "omega_c")
DERIVED_NAMES = ("gamma_c0", "n_tls", "gamma1")
TWO_PI = 2 * np.pi
# omega_c is fitted as an offset from the reference in units of 2 pi kHz
OMEGA_UNIT = TWO_PI * 1e3


class ParamFitError(RuntimeError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


@dataclass(frozen=True)
class SweepPoint:
    n_photons: float
    detuning: float  # Hz, pump minus reference
    measured_shift: float  # Hz, resonance minus reference
    measured_gamma_i: float  # Hz
    sigma_shift: float = None
    sigma_gamma: float = None

    def __post_init__(self):
        if self.n_photons < 0:
            raise ValueError("n_photons must be >= 0")


class SweepDataset:
    """Columnar view of a list of :class:`SweepPoint` plus the reference frequency."""

    def __init__(self, points, reference_hz):
        points = list(points)
        self.points = points
        self.reference_hz = float(reference_hz)
        self.n = np.array([p.n_photons for p in points], dtype=float)
        self.detuning_hz = np.array([p.detuning for p in points], dtype=float)
        self.shift_hz = np.array([p.measured_shift for p in points], dtype=float)
        self.gamma_hz = np.array([p.measured_gamma_i for p in points], dtype=float)
        ss = [p.sigma_shift for p in points]
        sg = [p.sigma_gamma for p in points]
        self.sigma_shift_hz = np.array(ss, dtype=float) if points and None not in ss else None
        self.sigma_gamma_hz = np.array(sg, dtype=float) if points and None not in sg else None

    def __len__(self):
        return len(self.points)

    def subset(self, idx):
        return SweepDataset([self.points[i] for i in idx], self.reference_hz)

    def __add__(self, other):
        if other.reference_hz != self.reference_hz:
            raise ValueError("datasets have different reference frequencies")
        return SweepDataset(self.points + other.points, self.reference_hz)

    @property
    def omega_ref(self):
        return TWO_PI * self.reference_hz

    @property
    def omega_p(self):
        return TWO_PI * (self.reference_hz + self.detuning_hz)


@dataclass(frozen=True)
class TLSFitParams:
    """Bath fit parameters in internal (angular) units; ``gamma1 = 2 gamma2``."""

    p0: float
    g: float
    gamma2: float
    gamma_inf: float
    omega_c: float

    def __post_init__(self):
        for name in ("p0", "g", "gamma2", "gamma_inf", "omega_c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def gamma1(self):
        return 2.0 * self.gamma2

    @classmethod
    def from_table(cls, p0_table, g_khz, gamma1_khz, gamma_inf_khz, f_c_ghz):
        """Build from table-style values (P0 in table units, rates per 2 pi)."""
        return cls(
            p0=p0_table * P0_TABLE_TO_INTERNAL,
            g=TWO_PI * g_khz * 1e3,
            gamma2=0.5 * TWO_PI * gamma1_khz * 1e3,
            gamma_inf=TWO_PI * gamma_inf_khz * 1e3,
            omega_c=TWO_PI * f_c_ghz * 1e9,
        )

    def as_array(self):
        return np.array([getattr(self, k) for k in PARAM_NAMES])

    @classmethod
    def from_array(cls, values):
        return cls(*map(float, values))


def derived_quantities(params):
    """``(gamma_c0 / 2pi in Hz, n_tls)`` with ``gamma_c0 = p0 g^2``."""
    gamma_c0 = params.p0 * params.g**2
    n_tls = params.p0 * params.gamma2 / TWO_PI
    return gamma_c0 / TWO_PI, n_tls


def _model(n, omega_p, omega_ref, p0, g, gamma2, gamma_inf, omega_c, sigma_z_th, with_jac=False):
    """Shift and internal loss in Hz and, optionally, their log-parameter derivatives.

    Derivatives are taken with respect to (ln p0, ln g, ln gamma2, ln gamma_inf,
    omega_c in rad/s).
    """
    amp = -p0 * g**2 * sigma_z_th
    coop = 2.0 * n * g**2 / gamma2**2
    delta = (omega_p - omega_c) / gamma2
    u = np.sqrt(1.0 + coop)
    ratio = coop / u
    b = 1.0 + u
    den = delta**2 + b**2
    fs = ratio * delta / den
    fd = 1.0 - ratio * b / den
    shift = (omega_c - omega_ref + 0.5 * amp * fs) / TWO_PI
    gamma = (amp * fd + gamma_inf) / TWO_PI
    if not with_jac:
        return shift, gamma

    dratio = (2.0 + coop) / (2.0 * u**3)
    db = 0.5 / u
    dfs_dc = delta * (dratio * den - ratio * 2.0 * b * db) / den**2
    dfs_dd = ratio * (b**2 - delta**2) / den**2
    dfd_dc = -((dratio * b + ratio * db) * den - ratio * b * 2.0 * b * db) / den**2
    dfd_dd = 2.0 * ratio * b * delta / den**2

    # d(coop)/d(ln g) = 2C, d/d(ln gamma2) = -2C; d(delta)/d(ln gamma2) = -delta
    js = np.empty((n.size, 5))
    jg = np.empty((n.size, 5))
    js[:, 0] = 0.5 * amp * fs
    jg[:, 0] = amp * fd
    js[:, 1] = amp * fs + 0.5 * amp * dfs_dc * 2.0 * coop
    jg[:, 1] = 2.0 * amp * fd + amp * dfd_dc * 2.0 * coop
    js[:, 2] = 0.5 * amp * (dfs_dc * -2.0 * coop + dfs_dd * -delta)
    jg[:, 2] = amp * (dfd_dc * -2.0 * coop + dfd_dd * -delta)
    js[:, 3] = 0.0
    jg[:, 3] = gamma_inf
    js[:, 4] = 1.0 + 0.5 * amp * dfs_dd * (-1.0 / gamma2)
    jg[:, 4] = amp * dfd_dd * (-1.0 / gamma2)
    return shift, gamma, js / TWO_PI, jg / TWO_PI


def predict(dataset, params, sigma_z_th, reference_hz=None):
    """Model (shift, gamma_i) in Hz at the dataset's pump conditions.

    ``dataset`` may be a :class:`SweepDataset` or anything exposing ``n``,
    ``detuning_hz`` and ``reference_hz``. With ``reference_hz`` given it
    overrides the dataset reference for the shift origin, so passing
    ``params.omega_c / 2pi`` yields the pure bath shift.
    """
    ref = dataset.reference_hz if reference_hz is None else float(reference_hz)
    omega_p = TWO_PI * (dataset.reference_hz + np.asarray(dataset.detuning_hz, dtype=float))
    n = np.asarray(dataset.n, dtype=float)
    return _model(n, omega_p, TWO_PI * ref, params.p0, params.g, params.gamma2,
                  params.gamma_inf, params.omega_c, sigma_z_th)


def _robust_scale(x):
    x = np.asarray(x, dtype=float)
    mad = 1.4826 * np.median(np.abs(x - np.median(x)))
    if mad > 0:
        return mad
    sd = np.std(x)
    return sd if sd > 0 else 1.0


class SweepObjective:
    """Weighted residuals of a sweep for a given parameterization.

    ``parameterization="log"`` uses ``(ln p0, ln g, ln gamma2, ln gamma_inf,
    (omega_c - omega_ref) / 2pi kHz)``. ``"linear"`` uses the four rates
    divided by fixed reference values, with the same omega_c coordinate;
    positivity is then a feasibility constraint rather than built in.
    """

    def __init__(self, dataset, sigma_z_th, scales=None, parameterization="log", linear_ref=None):
        if parameterization not in ("log", "linear"):
            raise ValueError("parameterization must be 'log' or 'linear'")
        self.dataset = dataset
        self.sigma_z_th = float(sigma_z_th)
        self.parameterization = parameterization
        if scales is None:
            scales = channel_scales(dataset)
        self.scale_shift, self.scale_gamma = scales
        self.linear_ref = None if linear_ref is None else np.asarray(linear_ref, dtype=float)
        self._n = dataset.n
        self._omega_p = dataset.omega_p
        self._omega_ref = dataset.omega_ref

    def to_theta(self, params):
        x = params.as_array()
        off = (x[4] - self._omega_ref) / OMEGA_UNIT
        if self.parameterization == "log":
            return np.r_[np.log(x[:4]), off]
        if self.linear_ref is None:
            self.linear_ref = x[:4].copy()
        return np.r_[x[:4] / self.linear_ref, off]

    def to_params(self, theta):
        theta = np.asarray(theta, dtype=float)
        rates = np.exp(theta[:4]) if self.parameterization == "log" else theta[:4] * self.linear_ref
        return TLSFitParams(*rates, self._omega_ref + theta[4] * OMEGA_UNIT)

    def feasible(self, theta):
        if self.parameterization == "log":
            # keeps g^2 / gamma2^2 and p0 g^4 inside double range
            return bool(np.all(np.abs(theta[:4]) < 150))
        return bool(np.all(theta[:4] > 0))

    def _rates(self, theta):
        if self.parameterization == "log":
            return np.exp(theta[:4])
        return theta[:4] * self.linear_ref

    def _eval(self, theta, with_jac):
        p0, g, gamma2, gamma_inf = self._rates(theta)
        omega_c = self._omega_ref + theta[4] * OMEGA_UNIT
        with np.errstate(over="ignore", invalid="ignore"):
            return _model(self._n, self._omega_p, self._omega_ref, p0, g, gamma2, gamma_inf,
                          omega_c, self.sigma_z_th, with_jac)

    def _weights(self):
        d = self.dataset
        ws = 1.0 / d.sigma_shift_hz if d.sigma_shift_hz is not None else 1.0 / self.scale_shift
        wg = 1.0 / d.sigma_gamma_hz if d.sigma_gamma_hz is not None else 1.0 / self.scale_gamma
        return ws, wg

    def residual(self, theta):
        shift, gamma = self._eval(theta, False)
        ws, wg = self._weights()
        return np.concatenate([(shift - self.dataset.shift_hz) * ws, (gamma - self.dataset.gamma_hz) * wg])

    def jacobian(self, theta):
        _, _, js, jg = self._eval(theta, True)
        ws, wg = self._weights()
        n = len(self.dataset)
        jac = np.vstack([js * np.broadcast_to(ws, n)[:, None], jg * np.broadcast_to(wg, n)[:, None]])
        if self.parameterization == "linear":
            # d/d(x / x_ref) = x_ref * d/dx = (x_ref / x) * d/d(ln x)
            jac[:, :4] *= self.linear_ref / self._rates(theta)
        jac[:, 4] *= OMEGA_UNIT
        return jac

    def cost(self, theta):
        r = self.residual(theta)
        return 0.5 * float(r @ r)

    def gradient(self, theta):
        return self.jacobian(theta).T @ self.residual(theta)


def channel_scales(dataset):
    """Robust (MAD) spread of each observable, used when no sigmas are given."""
    return _robust_scale(dataset.shift_hz), _robust_scale(dataset.gamma_hz)


def initial_guess(dataset, sigma_z_th, n_tls=4.0):
    """Heuristic starting point.

    ``gamma_inf`` from the lowest measured loss, ``gamma_c0`` from the
    low-power excess loss, ``gamma2`` from the photon number at which the
    excess loss has halved (``C = 3`` there at zero detuning), and ``g`` from
    an assumed number ``n_tls`` of TLS per linewidth.
    """
    order = np.argsort(dataset.n)
    n_sorted = dataset.n[order]
    gam = TWO_PI * dataset.gamma_hz[order]
    k = max(1, len(order) // 10)
    gamma_inf = max(0.9 * gam.min(), 1e-3 * gam.max(), 1.0)
    low = float(np.median(gam[:k]))
    excess = max(low - gamma_inf, 1e-3 * low)
    gamma_c0 = excess / max(abs(sigma_z_th), 1e-6)

    ns = np.unique(n_sorted)
    mean_excess = np.array([np.mean(gam[n_sorted == v]) for v in ns]) - gamma_inf
    below = np.nonzero(mean_excess <= 0.5 * excess)[0]
    if below.size and ns[below[0]] > 0:
        n_half = ns[below[0]]
    else:
        # weak saturation only: extrapolate the (initially linear) drop
        drop = 1.0 - mean_excess[-1] / excess
        top = max(ns.max(), 1e-12)
        n_half = top * min(0.5 / drop, 1e3) if drop > 1e-3 else 1e3 * top
    gamma2 = n_half * gamma_c0 / (3.0 * 4.0 * np.pi) * (4.0 / n_tls)
    p0 = TWO_PI * n_tls / gamma2
    g = np.sqrt(gamma_c0 / p0)

    shifts = dataset.shift_hz[order][:k]
    omega_c = dataset.omega_ref + TWO_PI * float(np.median(shifts))
    return TLSFitParams(p0, g, gamma2, gamma_inf, omega_c)


@dataclass
class PointFit:
    params: TLSFitParams
    cost: float
    residual_norm: float
    iterations: int
    degenerate: bool
    message: str
    scales: tuple
    condition: float
    trace: list = field(default_factory=list)


def _flag_degenerate(dataset, params, jac):
    signs = np.sign(dataset.omega_p - params.omega_c)
    one_sided = not (np.any(signs > 0) and np.any(signs < 0))
    coop = 2.0 * dataset.n * params.g**2 / params.gamma2**2
    low_power = bool(np.max(coop) < 0.1)
    s = np.linalg.svd(jac, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else np.inf
    return one_sided or low_power or cond > 1e8, cond


def fit(dataset, init=None, sigma_z_th=-0.5, *, scales=None, parameterization="log",
        n_tls_starts=(4.0, 1.0, 16.0), max_iter=500, xtol=1e-9, ftol=1e-12, warn=True):
    """Weighted least-squares fit of the five bath parameters.

    Without ``init`` several heuristic starts (one per entry of
    ``n_tls_starts``) are tried and the lowest-cost solution kept.
    Raises :class:`ParamFitError` if no start converges. The returned
    :class:`PointFit` carries ``degenerate=True`` when some parameter
    combination is poorly determined: pump on one side of the resonance
    only, cooperativity below 0.1 everywhere (then only ``p0 g^4``,
    ``gamma2`` and ``p0 g^2 + gamma_inf`` are pinned), or an
    ill-conditioned Jacobian.
    """
    if len(dataset) < 6:
        raise ParamFitError("need at least 6 sweep points for 5 parameters")
    if scales is None:
        scales = channel_scales(dataset)
    starts = [init] if init is not None else [initial_guess(dataset, sigma_z_th, k) for k in n_tls_starts]

    best = None
    trace = []
    for start in starts:
        obj = SweepObjective(dataset, sigma_z_th, scales, parameterization)
        theta0 = obj.to_theta(start)
        try:
            res = levenberg_marquardt(obj.residual, theta0, obj.jacobian, feasible=obj.feasible,
                                      xtol=xtol, ftol=ftol, max_iter=max_iter)
        except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
            trace.append(f"start {start}: {exc}")
            continue
        trace.append(f"start {start}: cost={res.cost:.6g} ({res.message}, {res.iterations} it)")
        if res.converged and (best is None or res.cost < best[1].cost):
            best = (obj, res)
    if best is None:
        raise ParamFitError("bath parameter fit did not converge", trace)

    obj, res = best
    params = obj.to_params(res.x)
    degenerate, cond = _flag_degenerate(dataset, params, res.jacobian)
    if degenerate and warn:
        warnings.warn("sweep only weakly constrains the bath parameters individually", stacklevel=2)
    return PointFit(params, res.cost, res.residual_norm, res.iterations, degenerate, res.message,
                    tuple(scales), cond, trace)


@dataclass
class FitResult:
    """Point estimate plus bootstrap statistics.

    ``mean``, ``std``, ``ci_low`` and ``ci_high`` map each name in
    ``PARAM_NAMES`` and ``DERIVED_NAMES`` to a float. ``samples`` holds one
    row per successful resample in ``PARAM_NAMES`` order.
    """

    point_estimate: TLSFitParams
    samples: np.ndarray
    mean: dict
    std: dict
    ci_low: dict
    ci_high: dict
    residual_norm: float
    seed: int
    n_resamples: int
    n_failed: int
    ci_method: str = "normal"
    unreliable: bool = False
    degenerate: bool = False

    @property
    def gamma_c0(self):
        return self.point_estimate.p0 * self.point_estimate.g**2

    @property
    def n_tls(self):
        return self.point_estimate.p0 * self.point_estimate.gamma2 / TWO_PI

    def contains(self, name, value):
        return self.ci_low[name] <= value <= self.ci_high[name]

    def summary(self):
        """Deterministic plain-dict summary (used for reports and comparisons)."""
        out = {"seed": self.seed, "n_resamples": self.n_resamples, "n_failed": self.n_failed}
        for name in PARAM_NAMES:
            out[f"{name}"] = getattr(self.point_estimate, name)
        for name in PARAM_NAMES + DERIVED_NAMES:
            for key in ("mean", "std", "ci_low", "ci_high"):
                out[f"{name}_{key}"] = getattr(self, key).get(name, np.nan)
        return out


def _with_derived(samples):
    p0, g, gamma2 = samples[:, 0], samples[:, 1], samples[:, 2]
    return np.column_stack([samples, p0 * g**2, p0 * gamma2 / TWO_PI, 2.0 * gamma2])


def _refit(dataset, idx, init, sigma_z_th, scales):
    sub = dataset.subset(idx)
    try:
        pf = fit(sub, init=init, sigma_z_th=sigma_z_th, scales=scales, warn=False)
    except ParamFitError:
        return None
    return pf.params.as_array()


def bootstrap(dataset, n_resamples=1000, seed=0, sigma_z_th=-0.5, *, init=None, ci_method="normal",
              point=None, workers=1):
    """Fit the full sweep, then refit ``n_resamples`` resampled copies.

    Each resample draws ``len(dataset)`` points with replacement. Refits
    start from the full-data estimate and reuse the full-data channel
    scales. Intervals are ``mean +- 1.96 std`` (``ci_method="normal"``) or
    the 2.5/97.5 percentiles (``"percentile"``). Results depend only on
    ``(dataset, seed)``: indices are drawn up front and reduced in order.
    """
    if ci_method not in ("normal", "percentile"):
        raise ValueError("ci_method must be 'normal' or 'percentile'")
    if point is None:
        point = fit(dataset, init=init, sigma_z_th=sigma_z_th)
    rng = np.random.default_rng(seed)
    n = len(dataset)
    indices = rng.integers(0, n, size=(n_resamples, n))

    args = [(dataset, idx, point.params, sigma_z_th, point.scales) for idx in indices]
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_refit, *zip(*args), chunksize=16)) if args else []
    else:
        out = [_refit(*a) for a in args]

    good = [x for x in out if x is not None]
    n_failed = len(out) - len(good)
    samples = np.array(good).reshape(-1, len(PARAM_NAMES))
    names = PARAM_NAMES + DERIVED_NAMES
    mean, std, lo, hi = {}, {}, {}, {}
    if len(good):
        full = _with_derived(samples)
        for j, name in enumerate(names):
            col = full[:, j]
            mean[name] = float(np.mean(col))
            std[name] = float(np.std(col, ddof=1)) if col.size > 1 else 0.0
            if ci_method == "normal":
                lo[name] = mean[name] - 1.96 * std[name]
                hi[name] = mean[name] + 1.96 * std[name]
            else:
                lo[name], hi[name] = (float(v) for v in np.percentile(col, [2.5, 97.5]))
    unreliable = n_resamples > 0 and n_failed > 0.2 * n_resamples
    if unreliable:
        warnings.warn(f"{n_failed} of {n_resamples} bootstrap refits failed", stacklevel=2)
    return FitResult(point.params, samples, mean, std, lo, hi, point.residual_norm, seed,
                     n_resamples, n_failed, ci_method, unreliable, point.degenerate)


def synthetic_dataset(params, sigma_z_th, n_photons, detunings_hz, reference_hz=None,
                      noise=0.0, rng=None, with_sigma=False):
    """Noisy model data on a (photon number x detuning) grid.

    ``noise`` is the standard deviation of additive Gaussian noise as a
    fraction of each channel's RMS value (the shift channel measured from
    the true resonance, so that the offset does not inflate it).
    """
    if reference_hz is None:
        reference_hz = params.omega_c / TWO_PI
    nn, dd = np.meshgrid(np.asarray(n_photons, dtype=float), np.asarray(detunings_hz, dtype=float))
    probe = SweepDataset([SweepPoint(a, b, 0.0, 0.0) for a, b in zip(nn.ravel(), dd.ravel())], reference_hz)
    shift, gamma = predict(probe, params, sigma_z_th)
    s_s = s_g = None
    if noise:
        rng = np.random.default_rng(rng)
        offset = params.omega_c / TWO_PI - reference_hz
        s_s = noise * np.sqrt(np.mean((shift - offset) ** 2))
        s_g = noise * np.sqrt(np.mean(gamma**2))
        shift = shift + rng.normal(0.0, s_s, shift.size)
        gamma = gamma + rng.normal(0.0, s_g, gamma.size)
    pts = [
        SweepPoint(a, b, s, g, s_s if with_sigma else None, s_g if with_sigma else None)
        for a, b, s, g in zip(nn.ravel(), dd.ravel(), shift, gamma)
    ]
    return SweepDataset(pts, reference_hz)
