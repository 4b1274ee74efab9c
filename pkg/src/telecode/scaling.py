"""Finite-size-scaling analysis: data collapse, curve crossings, central charge."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator, make_smoothing_spline
from scipy.optimize import brentq, minimize


@dataclass(frozen=True)
class ScalingDataset:
    """Observable-vs-t curves for several code distances."""

    points: tuple  # rows of (d, t_over_pi, mean, se)
    observable: str = "coherent_info"
    params_echo: dict = field(default_factory=dict)

    def __post_init__(self):
        ds = {p[0] for p in self.points}
        if len(ds) < 3:
            raise ValueError("need at least 3 distinct code distances")
        for d in ds:
            if sum(1 for p in self.points if p[0] == d) < 5:
                raise ValueError(f"need >= 5 t points per distance (d={d})")
        if any(p[3] <= 0 for p in self.points):
            raise ValueError("standard errors must be positive")

    @staticmethod
    def from_rows(rows, observable="coherent_info", params_echo=None):
        pts = tuple((int(r["d"]), float(r["t_over_pi"]), float(r["mean"]), float(r["se"]))
                    for r in rows)
        return ScalingDataset(points=pts, observable=observable,
                              params_echo=params_echo or {})

    def distances(self):
        return sorted({p[0] for p in self.points})

    def curve(self, d):
        pts = sorted((p[1], p[2], p[3]) for p in self.points if p[0] == d)
        t = np.array([p[0] for p in pts])
        y = np.array([p[1] for p in pts])
        se = np.array([p[2] for p in pts])
        return t, y, se


@dataclass(frozen=True)
class CollapseResult:
    t_c_over_pi: float
    nu: float
    quality: float  # reduced chi^2 of the master-curve fit
    t_c_err: float
    nu_err: float
    converged: bool


def _master_residual(ds: ScalingDataset, t_c: float, nu: float) -> float:
    """Weighted residual of all points against a smoothed master curve."""
    if nu <= 0.05:
        return 1e12
    x, y, w = [], [], []
    for d, t, m, se in ds.points:
        x.append((t - t_c) * d ** (1.0 / nu))
        y.append(m)
        w.append(1.0 / se ** 2)
    x = np.asarray(x)
    y = np.asarray(y)
    w = np.asarray(w)
    order = np.argsort(x)
    x, y, w = x[order], y[order], w[order]
    # merge near-duplicate abscissae (weighted); the spline needs strict order
    xs, ys, ws = [x[0]], [y[0] * w[0]], [w[0]]
    span = x[-1] - x[0] if x[-1] > x[0] else 1.0
    for xi, yi, wi in zip(x[1:], y[1:], w[1:]):
        if xi - xs[-1] < 1e-12 * span:
            ys[-1] += yi * wi
            ws[-1] += wi
        else:
            xs.append(xi)
            ys.append(yi * wi)
            ws.append(wi)
    xs = np.asarray(xs)
    ys = np.asarray(ys) / np.asarray(ws)
    ws = np.asarray(ws)
    if len(xs) < 8:
        return 1e12
    try:
        spline = make_smoothing_spline(xs, ys, w=ws)  # GCV-selected smoothing
    except Exception:
        return 1e12
    resid = float(np.sum(w * (y - spline(x)) ** 2))
    dof = max(len(x) - 4, 1)
    return resid / dof


def collapse(ds: ScalingDataset, t_c0: float, nu0: float, n_bootstrap: int = 200,
             seed: int = 0, max_iter: int = 400) -> CollapseResult:
    """Fit (t_c, nu) by collapsing all curves onto one master curve.

    Minimizes the weighted residual of the observable against a
    cross-validated smoothing spline in the scaling variable
    (t - t_c) d^(1/nu); errors are parametric-bootstrap over the point
    uncertainties.  Deterministic for a fixed seed.
    """

    def fit_once(points):
        d2 = ScalingDataset(points=points, observable=ds.observable,
                            params_echo=ds.params_echo)
        res = minimize(
            lambda p: _master_residual(d2, p[0], p[1]),
            x0=np.array([t_c0, nu0]),
            method="Nelder-Mead",
            options={"maxiter": max_iter, "xatol": 1e-5, "fatol": 1e-8},
        )
        return res.x[0], res.x[1], res.fun, res.status == 0

    t_c, nu, quality, ok = fit_once(ds.points)
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_bootstrap):
        pts = tuple((d, t, m + rng.normal() * se, se) for d, t, m, se in ds.points)
        bt, bn, _, _ = fit_once(pts)
        boots.append((bt, bn))
    boots = np.asarray(boots) if boots else np.zeros((0, 2))
    t_err = float(boots[:, 0].std()) if len(boots) else math.nan
    n_err = float(boots[:, 1].std()) if len(boots) else math.nan
    return CollapseResult(t_c_over_pi=float(t_c), nu=float(nu), quality=float(quality),
                          t_c_err=t_err, nu_err=n_err, converged=bool(ok))


@dataclass(frozen=True)
class CrossingResult:
    pair_crossings: tuple  # rows of (d1, d2, t_cross, value)
    t_cross: float  # 1/d -> 0 extrapolation
    value: float
    found: bool


def find_crossing(ds: ScalingDataset) -> CrossingResult:
    """Pairwise curve crossings by monotone spline interpolation.

    The extrapolation is linear in the pair-averaged 1/d; with fewer than two
    pairs the mean crossing is returned.
    """
    dists = ds.distances()
    if len(dists) < 2:
        raise ValueError("need at least 2 distances")
    interp = {}
    ranges = {}
    for d in dists:
        t, y, _ = ds.curve(d)
        interp[d] = PchipInterpolator(t, y)
        ranges[d] = (t.min(), t.max())
    rows = []
    for i, d1 in enumerate(dists):
        for d2 in dists[i + 1:]:
            lo = max(ranges[d1][0], ranges[d2][0])
            hi = min(ranges[d1][1], ranges[d2][1])
            if hi <= lo:
                continue
            grid = np.linspace(lo, hi, 201)
            diff = interp[d1](grid) - interp[d2](grid)
            sign_change = np.nonzero(np.sign(diff[:-1]) * np.sign(diff[1:]) < 0)[0]
            if len(sign_change) == 0:
                continue
            k = sign_change[0]
            t_x = brentq(lambda t: interp[d1](t) - interp[d2](t), grid[k], grid[k + 1])
            rows.append((d1, d2, float(t_x), float(interp[d1](t_x))))
    if not rows:
        return CrossingResult(pair_crossings=(), t_cross=math.nan, value=math.nan,
                              found=False)
    if len(rows) >= 2:
        inv_d = np.array([0.5 * (1.0 / r[0] + 1.0 / r[1]) for r in rows])
        tx = np.array([r[2] for r in rows])
        vx = np.array([r[3] for r in rows])
        ct = np.polyfit(inv_d, tx, 1)
        cv = np.polyfit(inv_d, vx, 1)
        t_inf, v_inf = float(ct[1]), float(cv[1])
    else:
        t_inf, v_inf = rows[0][2], rows[0][3]
    return CrossingResult(pair_crossings=tuple(rows), t_cross=t_inf, value=v_inf,
                          found=True)


@dataclass(frozen=True)
class CentralChargeFit:
    c: float
    intercept: float
    residual: float
    flagged: bool  # negative slope


def central_charge(profile, d: int) -> CentralChargeFit:
    """Least-squares conformal fit S = (c/6) ln sin(pi l / 2d) + const.

    ``profile`` is a list of (cut position l, entropy) at even cuts.
    """
    pts = [(l, s) for l, s in profile]
    if len(pts) < 6:
        raise ValueError("need at least 6 cut positions")
    if any(l % 2 for l, _ in pts):
        raise ValueError("even cuts only")
    x = np.array([math.log(math.sin(math.pi * l / (2.0 * d))) for l, _ in pts])
    y = np.array([s for _, s in pts])
    a = np.vstack([x, np.ones_like(x)]).T
    coef, res, _, _ = np.linalg.lstsq(a, y, rcond=None)
    slope, intercept = coef
    residual = float(res[0]) if len(res) else 0.0
    c = 6.0 * float(slope)
    return CentralChargeFit(c=c, intercept=float(intercept), residual=residual,
                            flagged=c < 0.0)
