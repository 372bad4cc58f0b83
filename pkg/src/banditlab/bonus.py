"""Confidence-bonus radius schedules.

Five designs are supported. ``standard`` is the classical sqrt(ln T / n)
width. ``new_sqrt_t`` inflates it by sqrt(T/n), trading early exploration for
a faster 1/n decay; ``optimal_k`` rescales that inflation by 1/sqrt(K) and
floors it with a standard-width term; ``any_time`` replaces the horizon with
the running time index so no horizon is needed; ``linear`` is the width used
by the ridge-based linear policy, a function of z = a' V^-1 a rather than n.

All functions are pure, accept scalars or numpy arrays, and use natural logs.
By convention every count-based schedule returns +inf at n = 0, which forces
index policies to pull each arm once before any comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DESIGNS",
    "BonusSchedule",
    "rad_standard",
    "rad_new",
    "rad_optimal",
    "rad_anytime",
    "rad_linear",
]

DESIGNS = ("standard", "new_sqrt_t", "optimal_k", "any_time", "linear")


def _as_positive_counts(n) -> np.ndarray:
    arr = np.asarray(n, dtype=float)
    if (arr < 0).any():
        raise ValueError("n: pull counts must be non-negative")
    return arr


def _scale_over(numerator: float, denom: np.ndarray) -> np.ndarray | float:
    """numerator / denom with the denom = 0 -> +inf convention."""
    with np.errstate(divide="ignore"):
        out = np.where(denom > 0, numerator / np.maximum(denom, 1e-300), np.inf)
    return float(out) if out.ndim == 0 else out


def rad_standard(n, horizon: int, sigma: float, eta: float):
    """Classical width sigma * sqrt(eta ln T / n)."""
    arr = _as_positive_counts(n)
    return _scale_over(sigma * math.sqrt(eta * math.log(horizon)), np.sqrt(arr))


def rad_new(n, horizon: int, sigma: float, eta: float):
    """Width sigma * sqrt(eta T ln T) / n; the product n * rad(n) is constant."""
    arr = _as_positive_counts(n)
    return _scale_over(sigma * math.sqrt(eta * horizon * math.log(horizon)), arr)


def rad_optimal(n, horizon: int, n_arms: int, sigma: float, eta1: float, eta2: float):
    """Width sigma * sqrt(ln T / n) * max(sqrt(eta1 T / (n K)), sqrt(eta2)).

    While eta1*T/(n*K) >= eta2 this matches ``new_sqrt_t`` shrunk by sqrt(K);
    past that crossover it coincides with the ``standard`` width at eta2.
    """
    arr = _as_positive_counts(n)
    with np.errstate(divide="ignore"):
        inv = np.where(arr > 0, 1.0 / np.maximum(arr, 1e-300), np.inf)
    lnT = math.log(horizon)
    out = sigma * np.sqrt(lnT * inv) * np.maximum(
        np.sqrt(eta1 * horizon / n_arms * inv), math.sqrt(eta2)
    )
    return float(out) if np.isscalar(n) or out.ndim == 0 else out


def rad_anytime(n, t: int, n_arms: int, sigma: float, eta: float):
    """Horizon-free width sigma * sqrt(eta t (1 v ln(Kt))) / (n sqrt(K))."""
    if t < 1:
        raise ValueError("t: time index must be >= 1")
    scale = sigma * math.sqrt(eta * t * max(1.0, math.log(n_arms * t))) / math.sqrt(
        n_arms
    )
    return _scale_over(scale, _as_positive_counts(n))


def rad_linear(z, t: int, dim: int, sigma: float, eta: float):
    """Width z * sigma * sqrt(eta t / d) + sqrt(d z) for z = a' V^-1 a.

    The sqrt(d z) term is an exploration floor that survives sigma = 0.
    """
    if t < 1:
        raise ValueError("t: time index must be >= 1")
    arr = np.asarray(z, dtype=float)
    if (arr < 0).any():
        raise ValueError("z: quadratic form must be non-negative")
    out = arr * (sigma * math.sqrt(eta * t / dim)) + np.sqrt(dim * arr)
    return float(out) if np.isscalar(z) or out.ndim == 0 else out


@dataclass(frozen=True)
class BonusSchedule:
    """A radius design plus its parameters, serializable to experiment configs.

    Constructors accept either (sigma, eta) or the single knob kappa, with
    kappa = sigma * sqrt(eta); kappa-based construction fixes sigma = 1.
    ``optimal_k`` carries a pair (eta1, eta2) instead of one eta.
    """

    design: str
    sigma: float = 1.0
    eta: float | None = None
    eta1: float | None = None
    eta2: float | None = None
    horizon: int | None = None  # unused by any_time
    n_arms: int | None = None  # used by optimal_k, any_time
    dim: int | None = None  # used by linear

    def __post_init__(self):
        if self.design not in DESIGNS:
            raise ValueError(f"design: unknown design {self.design!r}")
        if not (self.sigma > 0):
            raise ValueError("sigma: must be > 0")
        if self.design == "optimal_k":
            if self.eta1 is None or self.eta2 is None:
                raise ValueError("optimal_k: needs eta1 and eta2")
            if not (self.eta1 > 0) or self.eta2 < 0:
                raise ValueError("optimal_k: needs eta1 > 0 and eta2 >= 0")
        else:
            if self.eta is None or not (self.eta > 0):
                raise ValueError(f"{self.design}: needs eta > 0")
        if self.design in ("standard", "new_sqrt_t", "optimal_k") and (
            self.horizon is None or self.horizon < 3
        ):
            raise ValueError(f"{self.design}: needs horizon >= 3")
        if self.design in ("optimal_k", "any_time") and (
            self.n_arms is None or self.n_arms < 1
        ):
            raise ValueError(f"{self.design}: needs n_arms >= 1")
        if self.design == "linear" and (self.dim is None or self.dim < 1):
            raise ValueError("linear: needs dim >= 1")

    @classmethod
    def from_kappa(cls, design: str, kappa: float, **kwargs) -> "BonusSchedule":
        """Build with sigma = 1 and eta = kappa**2 (kappa = sigma * sqrt(eta))."""
        if not (kappa > 0):
            raise ValueError("kappa: must be > 0")
        if design == "optimal_k":
            return cls(design, sigma=1.0, eta1=kappa**2, eta2=kappa**2, **kwargs)
        return cls(design, sigma=1.0, eta=kappa**2, **kwargs)

    @property
    def kappa(self) -> float:
        eta = self.eta1 if self.design == "optimal_k" else self.eta
        return self.sigma * math.sqrt(eta)

    def rad(self, n, t: int | None = None):
        """Radius at pull count n (time index t required for any_time)."""
        if self.design == "standard":
            return rad_standard(n, self.horizon, self.sigma, self.eta)
        if self.design == "new_sqrt_t":
            return rad_new(n, self.horizon, self.sigma, self.eta)
        if self.design == "optimal_k":
            return rad_optimal(
                n, self.horizon, self.n_arms, self.sigma, self.eta1, self.eta2
            )
        if self.design == "any_time":
            if t is None:
                raise ValueError("any_time radius needs the time index t")
            return rad_anytime(n, t, self.n_arms, self.sigma, self.eta)
        raise ValueError("linear design has no count-based radius; use rad_z")

    def rad_z(self, z, t: int):
        """Linear-design radius at quadratic form z and time index t."""
        if self.design != "linear":
            raise ValueError("rad_z is only defined for the linear design")
        return rad_linear(z, t, self.dim, self.sigma, self.eta)

    def to_config(self) -> dict:
        out: dict = {"design": self.design, "sigma": self.sigma}
        if self.design == "optimal_k":
            out["eta1"], out["eta2"] = self.eta1, self.eta2
        else:
            out["eta"] = self.eta
        return out
