"""Latent competing-risks lognormal model for length of stay.

Each resident carries one latent time per discharge disposition,
T_mu ~ Lognormal(eta_mu, sigma_mu); the observed stay is the minimum of the
latent times and the realized disposition is the argmin. Stays still in
progress when observation ends are right-censored. The model is expressed
through cause-specific hazards

    d_mu(t) = phi(z_mu) / (t * sigma_mu * Phi(-z_mu)),
    z_mu(t) = (ln t - eta_mu) / sigma_mu,

whose cumulative sum has the closed form S(t) = prod_mu Phi(-z_mu(t)) for the
probability of still being in the facility at day t. The cumulative incidence
of disposition mu is the integral of d_mu * S and is evaluated here by
adaptive Simpson quadrature on the log-time axis. The marginal latent CDF
Phi(z_mu(t)) is a different quantity (it ignores the competing risks) and is
exposed separately.

Parameters are estimated by censored maximum likelihood. The log-likelihood
separates by disposition: residents discharged to mu contribute the lognormal
density ln f_mu(t_i), every other resident (censored or discharged elsewhere)
contributes the survival term ln Phi(-z_mu(t_i)). Each disposition component
is maximized by Newton-Raphson on (eta_mu, sigma_mu) with analytic score and
Hessian, ridge damping when the Hessian is singular or not an ascent map, and
step halving to keep sigma positive and the objective monotone.

Normal tail quantities are evaluated in the log domain through scipy's
erfc-based log_ndtr, so hazards and likelihood terms stay finite far beyond
|z| = 8 and none of these functions returns NaN for valid inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import log_ndtr, ndtr

from .errors import DataError

__all__ = [
    "DispositionId",
    "LognormalDispositionParams",
    "LosObservation",
    "LosDataset",
    "FittedLosModel",
    "KmCurve",
    "DEFAULT_DISPOSITIONS",
    "disposition_hazard",
    "total_hazard",
    "overall_survival",
    "cumulative_incidence",
    "marginal_latent_cdf",
    "log_likelihood",
    "score",
    "hessian",
    "fit",
    "model_from_params",
    "kaplan_meier",
]

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Initial sigma is clamped to this floor (log-moment init on near-degenerate data).
SIGMA_INIT_FLOOR = 0.05
# Step halving keeps sigma strictly above this during Newton iterations.
SIGMA_FLOOR = 1e-4
# |z| beyond this contributes negligible mass to incidence integrals.
_Z_CUTOFF = 13.0


@dataclass(frozen=True)
class DispositionId:
    """Discharge destination, 1-based contiguous index plus a stable label."""

    index: int
    label: str

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError("disposition index is 1-based")
        if not self.label:
            raise ValueError("disposition label must be non-empty")


DEFAULT_DISPOSITIONS: tuple[DispositionId, ...] = (
    DispositionId(1, "community"),
    DispositionId(2, "hospital"),
)


@dataclass(frozen=True)
class LognormalDispositionParams:
    """Location and scale of one latent lognormal time (log-day units)."""

    eta: float
    sigma: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.eta):
            raise ValueError("eta must be finite")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be positive and finite")


@dataclass(frozen=True)
class LosObservation:
    """One resident's stay: duration in days plus discharge/censoring status.

    censored is True exactly when disposition is None: the resident was still
    in the facility when observation ended.
    """

    t_days: float
    disposition: DispositionId | None
    censored: bool

    def __post_init__(self) -> None:
        if not (self.t_days > 0 and math.isfinite(self.t_days)):
            raise ValueError("t_days must be positive and finite")
        if self.censored != (self.disposition is None):
            raise ValueError("censored must hold exactly when disposition is None")


@dataclass
class LosDataset:
    """Observations plus the disposition universe they refer to."""

    observations: list[LosObservation]
    dispositions: list[DispositionId] = field(
        default_factory=lambda: list(DEFAULT_DISPOSITIONS)
    )

    def __post_init__(self) -> None:
        _validate_dispositions(self.dispositions)
        universe = set(self.dispositions)
        for i, obs in enumerate(self.observations):
            if obs.disposition is not None and obs.disposition not in universe:
                raise DataError(
                    f"observation {i}: disposition {obs.disposition.label!r} "
                    "is not in the dataset's disposition universe"
                )

    def log_times(self, mu: DispositionId) -> tuple[np.ndarray, np.ndarray]:
        """ln t split into (discharged to mu, everyone else)."""
        event, other = [], []
        for obs in self.observations:
            (event if obs.disposition == mu else other).append(math.log(obs.t_days))
        return np.asarray(event, dtype=float), np.asarray(other, dtype=float)


@dataclass
class FittedLosModel:
    """Per-disposition lognormal parameters plus fit diagnostics."""

    params: dict[DispositionId, LognormalDispositionParams]
    log_likelihood: float
    iterations: int
    converged: bool
    tolerance: float

    def __post_init__(self) -> None:
        _validate_dispositions(sorted(self.params, key=lambda d: d.index))

    @property
    def dispositions(self) -> list[DispositionId]:
        return sorted(self.params, key=lambda d: d.index)

    def param_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(etas, sigmas) ordered by disposition index."""
        ps = [self.params[mu] for mu in self.dispositions]
        return (
            np.array([p.eta for p in ps], dtype=float),
            np.array([p.sigma for p in ps], dtype=float),
        )


@dataclass(frozen=True)
class KmCurve:
    """Product-limit survival estimate as a right-continuous step function."""

    times: np.ndarray
    survival: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.survival, dtype=float)
        if t.shape != s.shape or t.ndim != 1:
            raise ValueError("times and survival must be 1-d arrays of equal length")
        if len(t) and (np.any(np.diff(t) <= 0) or np.any(np.diff(s) > 0)):
            raise ValueError("times must be strictly increasing, survival non-increasing")
        if len(s) and (s[0] > 1.0 or s[-1] < 0.0):
            raise ValueError("survival must lie in [0, 1]")

    def step_values(self, at: np.ndarray) -> np.ndarray:
        """Evaluate the step function: S = 1 before the first observed time."""
        at = np.asarray(at, dtype=float)
        idx = np.searchsorted(self.times, at, side="right")
        return np.where(idx == 0, 1.0, self.survival[np.maximum(idx - 1, 0)])


def _validate_dispositions(dispositions: list[DispositionId]) -> None:
    if not dispositions:
        raise ValueError("at least one disposition is required")
    labels = {d.label for d in dispositions}
    if len(labels) != len(dispositions):
        raise ValueError("disposition labels must be unique")
    indexes = sorted(d.index for d in dispositions)
    if indexes != list(range(1, len(dispositions) + 1)):
        raise ValueError("disposition indexes must be contiguous starting at 1")


def model_from_params(
    params: dict[DispositionId, LognormalDispositionParams],
) -> FittedLosModel:
    """Wrap known parameters as a model (for simulation and what-if runs)."""
    return FittedLosModel(
        params=dict(params),
        log_likelihood=math.nan,
        iterations=0,
        converged=True,
        tolerance=0.0,
    )


# ---------------------------------------------------------------------------
# hazards, survival, incidence
# ---------------------------------------------------------------------------


def _log_norm_pdf(z: np.ndarray | float) -> np.ndarray | float:
    return -0.5 * np.square(z) - LOG_SQRT_2PI


def disposition_hazard(t: float, p: LognormalDispositionParams) -> float:
    """Cause-specific hazard d_mu(t), finite and non-negative for all t > 0."""
    if not (t > 0):
        raise ValueError("t must be positive")
    log_t = math.log(t)
    z = (log_t - p.eta) / p.sigma
    log_h = _log_norm_pdf(z) - log_ndtr(-z) - log_t - math.log(p.sigma)
    return float(np.exp(log_h))


def total_hazard(t: float, m: FittedLosModel) -> float:
    """Sum of cause-specific hazards at t."""
    if not (t > 0):
        raise ValueError("t must be positive")
    etas, sigmas = m.param_arrays()
    log_t = math.log(t)
    z = (log_t - etas) / sigmas
    log_h = _log_norm_pdf(z) - log_ndtr(-z) - log_t - np.log(sigmas)
    return float(np.exp(log_h).sum())


def log_overall_survival(t: float, m: FittedLosModel) -> float:
    """ln S(t) = sum_mu ln Phi(-z_mu(t)); 0 at t = 0."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return 0.0
    etas, sigmas = m.param_arrays()
    z = (math.log(t) - etas) / sigmas
    return float(log_ndtr(-z).sum())


def overall_survival(t: float, m: FittedLosModel) -> float:
    """Probability the stay exceeds t: exp of the closed-form log survival."""
    return float(math.exp(log_overall_survival(t, m)))


def marginal_latent_cdf(t: float, mu: DispositionId, m: FittedLosModel) -> float:
    """CDF of the latent time for mu alone, Phi(z_mu(t)); ignores competition."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return 0.0
    p = m.params[mu]
    return float(ndtr((math.log(t) - p.eta) / p.sigma))


def cumulative_incidence(
    t: float,
    mu: DispositionId,
    m: FittedLosModel,
    *,
    abs_tol: float = 1e-8,
    max_depth: int = 40,
) -> float:
    """Probability of being discharged to mu by day t (competing risks).

    Integrates d_mu(tau) * S(tau) over (0, t] after substituting
    w = (ln tau - eta_mu) / sigma_mu, which turns the integrand into
    phi(w) * prod_{nu != mu} Phi(-z_nu), a bounded smooth function. Supports
    t = inf for the eventual incidence. Raises ArithmeticError if the
    adaptive Simpson rule cannot reach abs_tol within max_depth splits.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return 0.0
    p = m.params[mu]
    others = [m.params[nu] for nu in m.dispositions if nu != mu]
    slopes = np.array([p.sigma / q.sigma for q in others])
    offsets = np.array([(p.eta - q.eta) / q.sigma for q in others])

    sqrt2 = math.sqrt(2.0)
    inv_sqrt_2pi = 1.0 / math.sqrt(2.0 * math.pi)

    def integrand(w: float) -> float:
        # phi(w) * prod over competing dispositions of Phi(-(offset + slope*w))
        value = math.exp(-0.5 * w * w) * inv_sqrt_2pi
        for slope, offset in zip(slopes, offsets):
            value *= 0.5 * math.erfc((offset + slope * w) / sqrt2)
        return value

    upper = _Z_CUTOFF if math.isinf(t) else (math.log(t) - p.eta) / p.sigma
    upper = min(upper, _Z_CUTOFF)
    if upper <= -_Z_CUTOFF:
        return 0.0
    return _adaptive_simpson(integrand, -_Z_CUTOFF, upper, abs_tol, max_depth)


def _adaptive_simpson(f, a: float, b: float, abs_tol: float, max_depth: int) -> float:
    mid = 0.5 * (a + b)
    fa, fm, fb = f(a), f(mid), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_split(f, a, b, fa, fm, fb, whole, abs_tol, max_depth)


def _simpson_split(f, a, b, fa, fm, fb, whole, tol, depth):
    mid = 0.5 * (a + b)
    lmid, rmid = 0.5 * (a + mid), 0.5 * (mid + b)
    flm, frm = f(lmid), f(rmid)
    left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0:
        raise ArithmeticError(
            f"adaptive Simpson did not converge on [{a}, {b}]: "
            f"residual {abs(delta) / 15.0:.3e} exceeds {tol:.3e}"
        )
    return _simpson_split(f, a, mid, fa, flm, fm, left, 0.5 * tol, depth - 1) + \
        _simpson_split(f, mid, b, fm, frm, fb, right, 0.5 * tol, depth - 1)


# ---------------------------------------------------------------------------
# censored likelihood, score, Hessian
# ---------------------------------------------------------------------------


def _mills(z: np.ndarray) -> np.ndarray:
    """q(z) = phi(z) / Phi(-z), evaluated stably in the log domain."""
    return np.exp(_log_norm_pdf(z) - log_ndtr(-z))


def _component_loglik(
    lt_event: np.ndarray, lt_other: np.ndarray, eta: float, sigma: float
) -> float:
    ze = (lt_event - eta) / sigma
    zo = (lt_other - eta) / sigma
    event = -lt_event.sum() - len(lt_event) * (math.log(sigma) + LOG_SQRT_2PI) \
        - 0.5 * float(np.square(ze).sum())
    return event + float(log_ndtr(-zo).sum())


def _component_score(
    lt_event: np.ndarray, lt_other: np.ndarray, eta: float, sigma: float
) -> np.ndarray:
    ze = (lt_event - eta) / sigma
    zo = (lt_other - eta) / sigma
    q = _mills(zo)
    g_eta = (ze.sum() + q.sum()) / sigma
    g_sigma = (-len(lt_event) + np.square(ze).sum() + (q * zo).sum()) / sigma
    return np.array([g_eta, g_sigma])


def _component_hessian(
    lt_event: np.ndarray, lt_other: np.ndarray, eta: float, sigma: float
) -> np.ndarray:
    ze = (lt_event - eta) / sigma
    zo = (lt_other - eta) / sigma
    q = _mills(zo)
    n_event = len(lt_event)
    s2 = sigma * sigma
    a11 = (-n_event + (q * (zo - q)).sum()) / s2
    a12 = (-2.0 * ze.sum() + (q * (np.square(zo) - 1.0 - zo * q)).sum()) / s2
    a22 = (n_event - 3.0 * np.square(ze).sum()
           + (q * zo * (np.square(zo) - 2.0 - zo * q)).sum()) / s2
    return np.array([[a11, a12], [a12, a22]])


def log_likelihood(
    data: LosDataset, params: dict[DispositionId, LognormalDispositionParams]
) -> float:
    """Exact censored log-likelihood of the full observation set.

    Residents discharged to mu contribute ln f_mu(t_i) plus the survival terms
    of every other disposition; censored residents contribute all survival
    terms. Equivalently, each disposition component sums ln f_mu over its own
    discharges and ln S_mu over every other resident.
    """
    if not data.observations:
        raise DataError("dataset is empty")
    total = 0.0
    for mu in data.dispositions:
        lt_event, lt_other = data.log_times(mu)
        p = params[mu]
        total += _component_loglik(lt_event, lt_other, p.eta, p.sigma)
    return total


def score(
    data: LosDataset, mu: DispositionId, p: LognormalDispositionParams
) -> np.ndarray:
    """Gradient of the mu-component of the log-likelihood, [d/d eta, d/d sigma]."""
    if not data.observations:
        raise DataError("dataset is empty")
    lt_event, lt_other = data.log_times(mu)
    return _component_score(lt_event, lt_other, p.eta, p.sigma)


def hessian(
    data: LosDataset, mu: DispositionId, p: LognormalDispositionParams
) -> np.ndarray:
    """Symmetric 2x2 Hessian of the mu-component of the log-likelihood."""
    if not data.observations:
        raise DataError("dataset is empty")
    lt_event, lt_other = data.log_times(mu)
    return _component_hessian(lt_event, lt_other, p.eta, p.sigma)


def _newton_step(g: np.ndarray, hess: np.ndarray) -> np.ndarray:
    """Solve hess @ step = g, ridge-damping until the step points uphill.

    The update is theta - step, so ascent requires step . g < 0. A damped
    matrix hess - lam*I is used when the plain solve is singular, produces
    non-finite values, or yields a non-ascent direction; lam doubles until
    the condition holds.
    """
    scale = max(abs(hess[0, 0]), abs(hess[1, 1]), 1.0)
    lam = 0.0
    for _ in range(80):
        damped = hess if lam == 0.0 else hess - lam * np.eye(2)
        try:
            step = np.linalg.solve(damped, g)
        except np.linalg.LinAlgError:
            step = None
        if step is not None and np.all(np.isfinite(step)) and float(step @ g) < 0.0:
            return step
        lam = 1e-6 * scale if lam == 0.0 else 2.0 * lam
    raise ArithmeticError("ridge damping failed to produce an ascent direction")


def fit(
    data: LosDataset,
    init: dict[DispositionId, LognormalDispositionParams] | None = None,
    tolerance: float = 1e-6,
    max_iter: int = 100,
) -> FittedLosModel:
    """Censored MLE, one Newton-Raphson solve per disposition.

    Starting values are the log-moment statistics of each disposition's own
    discharges (sigma clamped to at least 0.05) unless init overrides them.
    Convergence requires both applied parameter changes below tolerance.
    Raises DataError when a disposition has fewer than 2 observed discharges.
    """
    if not data.observations:
        raise DataError("dataset is empty")
    fitted: dict[DispositionId, LognormalDispositionParams] = {}
    worst_iterations = 0
    all_converged = True

    for mu in data.dispositions:
        lt_event, lt_other = data.log_times(mu)
        if len(lt_event) < 2:
            raise DataError(
                f"disposition {mu.label!r} has {len(lt_event)} observed "
                "discharges; at least 2 are required to fit"
            )
        if init is not None and mu in init:
            eta, sigma = init[mu].eta, init[mu].sigma
        else:
            eta = float(lt_event.mean())
            sigma = max(float(lt_event.std()), SIGMA_INIT_FLOOR)

        converged = False
        iterations = 0
        for iteration in range(1, max_iter + 1):
            iterations = iteration
            g = _component_score(lt_event, lt_other, eta, sigma)
            hess = _component_hessian(lt_event, lt_other, eta, sigma)
            step = _newton_step(g, hess)

            objective = _component_loglik(lt_event, lt_other, eta, sigma)
            scale = 1.0
            new_eta, new_sigma = eta - step[0], sigma - step[1]
            for _ in range(60):
                new_eta = eta - scale * step[0]
                new_sigma = sigma - scale * step[1]
                if new_sigma > SIGMA_FLOOR and _component_loglik(
                    lt_event, lt_other, new_eta, new_sigma
                ) >= objective - 1e-12 * (1.0 + abs(objective)):
                    break
                scale *= 0.5

            delta_eta, delta_sigma = new_eta - eta, new_sigma - sigma
            eta, sigma = new_eta, new_sigma
            if max(abs(delta_eta), abs(delta_sigma)) < tolerance:
                converged = True
                break

        fitted[mu] = LognormalDispositionParams(eta=eta, sigma=sigma)
        worst_iterations = max(worst_iterations, iterations)
        all_converged = all_converged and converged

    return FittedLosModel(
        params=fitted,
        log_likelihood=log_likelihood(data, fitted),
        iterations=worst_iterations,
        converged=all_converged,
        tolerance=tolerance,
    )


# ---------------------------------------------------------------------------
# Kaplan-Meier product-limit estimator
# ---------------------------------------------------------------------------


def kaplan_meier(times: np.ndarray, event_flags: np.ndarray) -> KmCurve:
    """Product-limit survival estimate.

    event_flags marks observed discharges (True) versus right-censored stays.
    Ties are resolved by processing all events at a time point before the
    censorings at the same time, so censored subjects at t remain in the risk
    set for events at t.
    """
    t = np.asarray(times, dtype=float)
    e = np.asarray(event_flags, dtype=bool)
    if t.ndim != 1 or t.shape != e.shape:
        raise ValueError("times and event_flags must be 1-d arrays of equal length")
    if len(t) == 0:
        raise ValueError("at least one observation is required")
    if np.any(t <= 0) or not np.all(np.isfinite(t)):
        raise ValueError("times must be positive and finite")

    order = np.argsort(t, kind="mergesort")
    t_sorted, e_sorted = t[order], e[order]
    unique_times = np.unique(t_sorted)

    # the curve steps only at event times; censoring-only times just shrink
    # the risk set
    step_times: list[float] = []
    step_survival: list[float] = []
    at_risk = len(t_sorted)
    s = 1.0
    start = 0
    for u in unique_times:
        stop = start
        events = 0
        while stop < len(t_sorted) and t_sorted[stop] == u:
            events += int(e_sorted[stop])
            stop += 1
        if events:
            s *= 1.0 - events / at_risk
            step_times.append(float(u))
            step_survival.append(s)
        at_risk -= stop - start
        start = stop
    if not step_times:
        raise DataError("no events in the data; the survival curve never steps")
    return KmCurve(times=np.array(step_times), survival=np.array(step_survival))
