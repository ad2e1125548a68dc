"""Hybrid model of L(N): a chain at small N, a random-graph law at large N,
blended by a sigmoid in N.

    L_chain(N) = (N + 1) / 3
    L_rand(N)  = ln N / (ln(c0 / (alpha + 1)) + alpha ln N)      -> 1 / alpha
    S(N)       = 1 / (1 + (N0 / N) ** theta)
    L_fit(N)   = (1 - S) L_chain + S L_rand

``alpha`` here is the accelerated-growth index (``growth_alpha``), not the
Zipf or degree exponent.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .errors import CurveTooShortError, FitDivergedError, PoleError

POLE_EPS = 1e-9


def l_chain(n):
    """ASPL of a path on ``n`` nodes."""
    return (np.asarray(n, dtype=float) + 1.0) / 3.0 if np.ndim(n) else (n + 1) / 3


def _rand_denominator(n, c0, growth_alpha):
    return np.log(c0 / (growth_alpha + 1.0)) + growth_alpha * np.log(n)


def l_rand(n, c0, growth_alpha):
    """Random-graph form; raises :class:`PoleError` when the denominator is
    not safely positive at some ``n``."""
    n_arr = np.asarray(n, dtype=float)
    den = _rand_denominator(n_arr, c0, growth_alpha)
    if np.any(den <= POLE_EPS):
        raise PoleError(f"l_rand pole: c0={c0}, growth_alpha={growth_alpha}")
    out = np.log(n_arr) / den
    return float(out) if np.ndim(n) == 0 else out


def sigmoid(n, n0, theta):
    """``1 / (1 + (n0 / n) ** theta)``, computed in log space for stability."""
    z = theta * (np.log(n0) - np.log(np.asarray(n, dtype=float)))
    out = 0.5 * (1.0 - np.tanh(0.5 * z))
    out = np.where(z == 0, 0.5, out)
    return float(out) if np.ndim(n) == 0 else out


@dataclass(frozen=True)
class FitParams:
    c0: float
    growth_alpha: float
    n0: float
    theta: float
    residual: float = float("nan")
    delta_l_end: float = float("nan")
    converged: bool = True

    @property
    def asymptote(self):
        return 1.0 / self.growth_alpha

    def as_tuple(self):
        return (self.c0, self.growth_alpha, self.n0, self.theta)

    def to_dict(self):
        d = asdict(self)
        d["asymptote"] = self.asymptote
        return d

    def to_json(self, path=None, **extra):
        d = {**extra, **self.to_dict()}
        text = json.dumps(d, indent=2, sort_keys=True) + "\n"
        if path is not None:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            Path(path).write_text(text, encoding="utf-8")
        return text


def asymptote(params) -> float:
    """Large-N limit of L_rand: ``1 / growth_alpha``."""
    alpha = params.growth_alpha if isinstance(params, FitParams) else float(params)
    if alpha <= 0:
        raise ValueError("growth_alpha must be positive")
    return 1.0 / alpha


def l_fit(n, params: FitParams):
    s = sigmoid(n, params.n0, params.theta)
    return (1.0 - s) * l_chain(n) + s * l_rand(n, params.c0, params.growth_alpha)


# multi-start grid: growth_alpha x N0 x theta x c0
GRID_ALPHA = (0.2, 0.3, 0.4, 0.5, 0.6)
GRID_N0 = (10.0, 30.0, 100.0)
GRID_THETA = (1.0, 2.0, 4.0)
GRID_C0 = (1.0, 2.0, 5.0)


def _log_weights(n):
    """Weights proportional to the log-N interval each sample covers."""
    x = np.log(n)
    if len(x) == 1:
        return np.ones(1)
    edges = np.concatenate([[x[0]], (x[1:] + x[:-1]) / 2.0, [x[-1]]])
    w = np.diff(edges)
    w[w <= 0] = np.min(w[w > 0]) if np.any(w > 0) else 1.0
    return w / w.sum()


def _curve_arrays(curve):
    if hasattr(curve, "mean_l"):
        n, l = np.asarray(curve.n, dtype=float), np.asarray(curve.mean_l, dtype=float)
    else:
        n, l = (np.asarray(a, dtype=float) for a in curve)
    order = np.argsort(n, kind="stable")
    return n[order], l[order]


def _unpack(z):
    return math.exp(z[0]), math.exp(z[1]), math.exp(z[2]), math.exp(z[3])


def _objective(z, n, l, w, logn):
    if not np.all(np.isfinite(z)) or np.any(np.abs(z) > 50):
        return np.inf
    c0, alpha, n0, theta = _unpack(z)
    den = np.log(c0 / (alpha + 1.0)) + alpha * logn
    if np.any(den <= POLE_EPS) or n0 <= 1.0:
        return np.inf
    zz = theta * (math.log(n0) - logn)
    s = 0.5 * (1.0 - np.tanh(0.5 * zz))
    pred = (1.0 - s) * (n + 1.0) / 3.0 + s * logn / den
    r = pred - l
    return float(np.dot(w, r * r))


def _simplex(z0, args, xatol, fatol):
    res = minimize(_objective, z0, args=args, method="Nelder-Mead",
                   options={"xatol": xatol, "fatol": fatol, "maxiter": 4000,
                            "maxfev": 8000, "adaptive": True})
    return res


def fit(curve, init: FitParams | None = None, min_samples=20, min_decades=2.0) -> FitParams:
    """Least-squares fit of L_fit to a curve (``GrowthCurve`` or ``(N, L)`` arrays).

    Nelder-Mead runs in log-parameter space from every point of a small
    grid (plus ``init``), the best few are polished by restarting the
    simplex until it stops improving, and the lowest loss wins with a
    lexicographic tie-break on the parameters. Parameter sets that put a
    pole of L_rand at or before any sample are rejected. If no run
    settles, :class:`FitDivergedError` carries the best parameters found.
    """
    n, l = _curve_arrays(curve)
    if len(n) < min_samples:
        raise CurveTooShortError(f"need >= {min_samples} samples, got {len(n)}")
    if math.log10(n[-1] / n[0]) < min_decades:
        raise CurveTooShortError(f"curve spans less than {min_decades} decades of N")
    w = _log_weights(n)
    logn = np.log(n)
    args = (n, l, w, logn)

    starts = [np.log([c0, a, n0, th]) for a, n0, th, c0 in
              itertools.product(GRID_ALPHA, GRID_N0, GRID_THETA, GRID_C0)]
    if init is not None:
        starts.insert(0, np.log(init.as_tuple()))
    results = []
    for z0 in starts:
        if not np.isfinite(_objective(z0, *args)):
            continue
        res = _simplex(z0, args, 1e-4, 1e-10)
        if np.isfinite(res.fun):
            results.append((float(res.fun), tuple(float(v) for v in res.x), bool(res.success)))
    if not results:
        raise FitDivergedError("no starting point gave a finite loss")
    results.sort()

    polished = []
    for fun, z, ok in results[:5]:
        z = np.array(z)
        stable = False
        for _ in range(20):
            # absolute fatol below the loss's own rounding is never reached
            res = _simplex(z, args, 1e-10, max(fun, 1e-300) * 1e-12)
            stable = not res.fun < fun - 1e-16
            z, fun = res.x, float(res.fun)
            if stable:
                break
        polished.append((fun, tuple(float(v) for v in _unpack(z)), ok or stable))
    polished.sort()
    fun, (c0, alpha, n0, theta), ok = polished[0]
    params = FitParams(c0, alpha, n0, theta, converged=ok)
    pred = l_fit(n, params)
    params = replace(params,
                     residual=float(np.sqrt(np.mean((pred - l) ** 2))),
                     delta_l_end=float(pred[-1] - l[-1]))
    if not ok:
        raise FitDivergedError("simplex search did not settle from any start", best=params)
    return params


def fit_table(curve, params: FitParams):
    """Rows of ``(N, mean_L, L_fit)`` for plotting."""
    n, l = _curve_arrays(curve)
    return list(zip(n.astype(int).tolist(), l.tolist(), l_fit(n, params).tolist()))
