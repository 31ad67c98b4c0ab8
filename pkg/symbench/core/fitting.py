# symbench/core/fitting.py

"""Exponential-decay fits of survival curves.

The model is Gamma_y = sum_i A_i lambda_i^y + B with one or two exponentials.
B is the steady-state population left in the sector, so it is always a free
parameter. Fits use bounded weighted least squares (scipy) with several
starting decays; the two-exponential model is kept only when it reduces the
weighted residual by a configured factor.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np
import scipy.optimize
from numpy.typing import NDArray

from symbench.config import FitConfig, get_config
from symbench.core.protocol import DecayCurve
from symbench.utils.exceptions import FitConvergenceError, InvalidParameterError
from symbench.utils.logging import get_logger

log = get_logger(__name__)


def curve_fingerprint(curve: DecayCurve) -> str:
    """sha256 of the curve values, stable across runs and platforms."""
    payload = json.dumps(
        {
            "lengths": list(curve.lengths),
            "means": [repr(float(v)) for v in curve.means],
            "stderrs": [repr(float(v)) for v in curve.stderrs],
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()


class RateEstimate(NamedTuple):
    value: float
    stderr: float


@dataclass(frozen=True)
class FitResult:
    """Fitted decay model and the quantities derived from it.

    Attributes:
        order: Number of exponentials
        amplitudes: A_i
        decays: lambda_i, slowest first
        offset: B
        offset_handling: ``include`` reports Gamma_1 = model(1); ``subtract``
            reports model(1) - B
        chi2: Weighted sum of squared residuals
        residual_norm: sqrt(chi2)
        weighted: Whether 1/stderr^2 weights were used
        covariance: Parameter covariance in the order (A_1, lambda_1, ..., B)
        gamma1_stderr: Standard error of Gamma_1 from the covariance
        fingerprint: sha256 of the fitted curve
    """

    order: int
    amplitudes: tuple[float, ...]
    decays: tuple[float, ...]
    offset: float
    offset_handling: Literal["include", "subtract"]
    chi2: float
    residual_norm: float
    weighted: bool
    covariance: tuple[tuple[float, ...], ...]
    gamma1_stderr: float
    n_points: int
    fingerprint: str
    label: str = "curve"
    residual_trace: tuple[float, ...] = field(default=(), repr=False)

    def model(self, y: float | NDArray) -> float | NDArray:
        y_arr = np.asarray(y, dtype=float)
        value = self.offset + sum(a * np.power(lam, y_arr) for a, lam in zip(self.amplitudes, self.decays))
        return float(value) if np.ndim(value) == 0 else value

    @property
    def gamma1(self) -> float:
        value = float(self.model(1))
        return value - self.offset if self.offset_handling == "subtract" else value

    @property
    def gamma0(self) -> float:
        return float(self.model(0))

    @property
    def gamma1_ratio(self) -> float:
        """Gamma_1 / Gamma_0 of the fitted model."""
        return float(self.model(1)) / self.gamma0 if self.gamma0 > 0 else float("nan")

    @property
    def mu(self) -> float:
        return 1.0 - self.gamma1

    @property
    def decay(self) -> float:
        return self.decays[0]

    def to_dict(self) -> dict[str, object]:
        return {
            "label": self.label,
            "order": self.order,
            "amplitudes": list(self.amplitudes),
            "decays": list(self.decays),
            "offset": self.offset,
            "offset_handling": self.offset_handling,
            "gamma1": self.gamma1,
            "gamma1_stderr": self.gamma1_stderr,
            "gamma0": self.gamma0,
            "gamma1_ratio": self.gamma1_ratio,
            "mu": self.mu,
            "mu_stderr": self.gamma1_stderr,
            "chi2": self.chi2,
            "residual_norm": self.residual_norm,
            "weighted": self.weighted,
            "n_points": self.n_points,
            "covariance": [list(row) for row in self.covariance],
            "fingerprint": self.fingerprint,
        }


def _model(params: NDArray, x: NDArray, order: int) -> NDArray:
    value = np.full_like(x, params[-1])
    for i in range(order):
        value = value + params[2 * i] * np.power(params[2 * i + 1], x)
    return value


def _gamma1_gradient(params: NDArray, order: int, offset_handling: str) -> NDArray:
    grad = np.zeros_like(params)
    for i in range(order):
        grad[2 * i] = params[2 * i + 1]
        grad[2 * i + 1] = params[2 * i]
    grad[-1] = 0.0 if offset_handling == "subtract" else 1.0
    return grad


def _initial_guess(x: NDArray, y: NDArray, w: NDArray, decays: list[float]) -> NDArray:
    """Linear least squares for amplitudes and offset at fixed decays."""
    columns = [np.power(lam, x) for lam in decays] + [np.ones_like(x)]
    design = np.stack(columns, axis=1) * w[:, None]
    solution, *_ = np.linalg.lstsq(design, y * w, rcond=None)
    params = []
    for a, lam in zip(solution[:-1], decays):
        params += [float(np.clip(a, -1.0, 1.0)), lam]
    params.append(float(np.clip(solution[-1], 0.0, 1.0)))
    return np.asarray(params)


def _fit_order(
    x: NDArray, y: NDArray, w: NDArray, order: int, config: FitConfig
) -> tuple[scipy.optimize.OptimizeResult | None, list[float]]:
    lower = [-1.0, 0.0] * order + [0.0]
    upper = [1.0, 1.0] * order + [1.0]
    if order == 1:
        starts = [[lam] for lam in config.start_decays]
    else:
        starts = [[a, b] for a in config.start_decays for b in config.start_decays if a > b]
        starts = starts or [[config.start_decays[0], config.start_decays[0] / 2]]

    def residuals(params: NDArray) -> NDArray:
        return (_model(params, x, order) - y) * w

    best: scipy.optimize.OptimizeResult | None = None
    trace: list[float] = []
    for decays in starts:
        x0 = np.clip(_initial_guess(x, y, w, decays), lower, upper)
        try:
            result = scipy.optimize.least_squares(
                residuals,
                x0,
                bounds=(lower, upper),
                method="trf",
                ftol=config.tolerance,
                xtol=config.tolerance,
                gtol=config.tolerance,
                max_nfev=config.max_nfev,
            )
        except (ValueError, np.linalg.LinAlgError) as e:
            log.debug("fit_start_failed", order=order, start=decays, error=str(e))
            trace.append(float("nan"))
            continue
        trace.append(float(np.sqrt(2.0 * result.cost)))
        # status 0 means max_nfev was reached
        if result.status <= 0:
            continue
        if best is None or result.cost < best.cost:
            best = result
    return best, trace


def _covariance(result: scipy.optimize.OptimizeResult, weighted: bool, n_points: int) -> NDArray:
    jac = result.jac
    cov = np.linalg.pinv(jac.T @ jac)
    dof = n_points - jac.shape[1]
    if not weighted:
        cov = cov * (2.0 * result.cost / dof if dof > 0 else 0.0)
    return cov


def _flat_result(
    curve: DecayCurve, offset_handling: Literal["include", "subtract"], fingerprint: str
) -> FitResult:
    level = float(np.clip(np.mean(curve.y), 0.0, 1.0))
    return FitResult(
        order=1,
        amplitudes=(0.0,),
        decays=(1.0,),
        offset=level,
        offset_handling=offset_handling,
        chi2=0.0,
        residual_norm=0.0,
        weighted=bool(np.all(curve.sigma > 0)),
        covariance=((0.0, 0.0, 0.0),) * 3,
        gamma1_stderr=0.0,
        n_points=len(curve.lengths),
        fingerprint=fingerprint,
        label=curve.label,
    )


def fit_decay(
    curve: DecayCurve,
    max_order: int | None = None,
    offset_handling: Literal["include", "subtract"] | None = None,
    config: FitConfig | None = None,
) -> FitResult:
    """Fit A lambda^y + B (optionally with a second exponential) to a curve.

    Weights are 1/stderr^2 when every standard error is positive and uniform
    otherwise. lambda and B are constrained to [0, 1].

    Raises:
        InvalidParameterError: With fewer than 3 distinct lengths or a bad order
        FitConvergenceError: If no optimiser start converges

    Example:
        >>> fit = fit_decay(DecayCurve.exact(ys, 0.3 + 0.7 * 0.99**np.array(ys)))
        >>> round(fit.decay, 6)
        0.99
    """
    config = config or get_config().fit
    max_order = config.max_order if max_order is None else max_order
    offset_handling = offset_handling or config.offset_handling
    if max_order not in (1, 2):
        raise InvalidParameterError(f"max_order must be 1 or 2, got {max_order}")
    if len(set(curve.lengths)) < 3:
        raise InvalidParameterError("Fitting needs at least 3 distinct lengths")

    x, y, sigma = curve.x, curve.y, curve.sigma
    fingerprint = curve_fingerprint(curve)
    if float(np.ptp(y)) <= 1e-12:
        log.debug("flat_curve_fitted", label=curve.label, level=float(y[0]))
        return _flat_result(curve, offset_handling, fingerprint)

    weighted = bool(np.all(sigma > 0))
    w = 1.0 / sigma if weighted else np.ones_like(y)
    if not weighted:
        log.debug("uniform_weights_used", label=curve.label)

    best, trace = _fit_order(x, y, w, 1, config)
    order = 1
    if best is None:
        log.error("fit_failed", label=curve.label, residual_trace=trace)
        raise FitConvergenceError(f"Decay fit of {curve.label!r} did not converge", trace)

    if max_order == 2 and len(x) >= 5:
        second, trace2 = _fit_order(x, y, w, 2, config)
        trace += trace2
        if second is not None:
            chi1, chi2 = 2.0 * best.cost, 2.0 * second.cost
            improved = chi2 < chi1 and (chi2 == 0.0 or chi1 / chi2 >= config.order2_improvement)
            if improved:
                best, order = second, 2

    params = best.x
    amplitudes = [float(params[2 * i]) for i in range(order)]
    decays = [float(params[2 * i + 1]) for i in range(order)]
    # Slowest decay first
    ranking = sorted(range(order), key=lambda i: -decays[i])
    cov = _covariance(best, weighted, len(x))
    grad = _gamma1_gradient(params, order, offset_handling)
    gamma1_var = float(grad @ cov @ grad)
    chi2_value = float(2.0 * best.cost)

    result = FitResult(
        order=order,
        amplitudes=tuple(amplitudes[i] for i in ranking),
        decays=tuple(decays[i] for i in ranking),
        offset=float(params[-1]),
        offset_handling=offset_handling,
        chi2=chi2_value,
        residual_norm=math.sqrt(chi2_value),
        weighted=weighted,
        covariance=tuple(tuple(float(v) for v in row) for row in cov),
        gamma1_stderr=math.sqrt(max(gamma1_var, 0.0)),
        n_points=len(x),
        fingerprint=fingerprint,
        label=curve.label,
        residual_trace=tuple(trace),
    )
    log.info(
        "decay_fitted",
        label=curve.label,
        order=order,
        decay=result.decay,
        gamma1=result.gamma1,
        mu=result.mu,
    )
    return result


def extract_mu(fit: FitResult | float) -> RateEstimate:
    """Symmetry breaking per step, mu = 1 - Gamma_1, with its standard error.

    A bare number is read as Gamma_1 with no uncertainty.

    Example:
        >>> extract_mu(0.9912).value
        0.0088...
    """
    if isinstance(fit, FitResult):
        return RateEstimate(fit.mu, fit.gamma1_stderr)
    return RateEstimate(1.0 - float(fit), 0.0)


@dataclass(frozen=True)
class InterleavedEstimate:
    """Rate of an interleaved operation from the reference and interleaved rates.

    ``estimate`` is mu_ID - mu_D clamped at zero; ``lower``/``upper`` bound the
    rate using the interval of standard interleaved benchmarking written in
    terms of survival per step: with p_D = 1 - mu_D and p_ID = 1 - mu_ID the
    center is 1 - p_ID/p_D and the half width is min(E1, E2) where
    E1 = |p_D - p_ID/p_D| + (1 - p_D) and
    E2 = 2(d^2 - 1)(1 - p_D)/(p_D d^2) + 4 sqrt(1 - p_D) sqrt(d^2 - 1)/p_D.
    """

    estimate: float
    center: float
    lower: float
    upper: float
    mu_id: float
    mu_d: float
    dim: int

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_dict(self) -> dict[str, object]:
        return {
            "estimate": self.estimate,
            "center": self.center,
            "bounds": [self.lower, self.upper],
            "mu_id": self.mu_id,
            "mu_d": self.mu_d,
            "dim": self.dim,
        }


def interleaved_estimate(mu_id: float, mu_d: float, dim: int = 2) -> InterleavedEstimate:
    """Point estimate and bounds for the rate of an interleaved operation.

    Args:
        mu_id: Rate of the interleaved sequences
        mu_d: Rate of the reference sequences
        dim: Dimension of the benchmarked sector

    Raises:
        InvalidParameterError: If a rate is outside [0, 1] or ``dim`` < 1

    Example:
        >>> round(interleaved_estimate(0.0086, 0.0051).estimate, 12)
        0.0035
    """
    for name, value in (("mu_id", mu_id), ("mu_d", mu_d)):
        if not 0.0 <= value <= 1.0:
            raise InvalidParameterError(f"{name} must lie in [0, 1], got {value}")
    if dim < 1:
        raise InvalidParameterError(f"dim must be >= 1, got {dim}")

    estimate = max(0.0, mu_id - mu_d)
    p_d, p_id = 1.0 - mu_d, 1.0 - mu_id
    if p_d <= 0.0:
        return InterleavedEstimate(estimate, estimate, 0.0, 1.0, mu_id, mu_d, dim)
    center = 1.0 - p_id / p_d
    d2 = float(dim) ** 2
    e1 = abs(p_d - p_id / p_d) + (1.0 - p_d)
    e2 = 2.0 * (d2 - 1.0) * (1.0 - p_d) / (p_d * d2) + 4.0 * math.sqrt(1.0 - p_d) * math.sqrt(d2 - 1.0) / p_d
    half_width = min(e1, e2)
    return InterleavedEstimate(
        estimate=estimate,
        center=center,
        lower=max(0.0, center - half_width),
        upper=min(1.0, center + half_width),
        mu_id=mu_id,
        mu_d=mu_d,
        dim=dim,
    )
