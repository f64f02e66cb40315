"""Scalar diagnostics: absorbing radius, Grashof number, thresholds, rate fits, audits."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .forcing import ForcingSpec, grid_of, translational_norms
from .grid import GridSpec


@dataclass(frozen=True)
class ConstantsReport:
    """
    Closed-form quantities attached to (nu, lambda1, tau, forcing norms):

    - R: squared radius of the absorbing ball in H.
    - c1: window constant 2(3 - exp(-nu lambda1 tau)) / (1 - exp(-nu lambda1 tau)).
    - G: Grashof number l20 / (nu^2 lambda1^(3/4)).
    - regularity_threshold: the bound on l20^2 under which complete bounded
      trajectories stay in V with ||u||^2 below grad_bound.
    - M: two-trajectory contraction rate nu lambda1 (1 - c_serrin tau l20^2 /
      (nu^3 lambda1^(1/2))); positive M forces a degenerate pullback attractor.
    - regularity_small / contraction_small: the two smallness criteria.

    c0 and c_serrin are configured constants (defaults 1.0), echoed verbatim.
    """

    nu: float
    lambda1: float
    tau: float
    l2b: float
    l20: float
    c0: float
    c_serrin: float
    R: float
    c1: float
    G: float
    regularity_threshold: float
    grad_bound: float
    M: float
    regularity_small: bool
    contraction_small: bool

    @property
    def absorbing_offset(self) -> float:
        """Additive constant of the absorbing inequality (equals R/2)."""
        return self.R / 2.0

    @property
    def window_mean_enstrophy_bound(self) -> float:
        """Bound on (1/tau) * integral of ||u||^2 over any tau-window."""
        e = math.exp(-self.nu * self.lambda1 * self.tau)
        return self.l2b ** 2 * (3.0 - e) / (self.nu ** 2 * (1.0 - e))

    @property
    def window_min_enstrophy_bound(self) -> float:
        """Bound attained by some point of every tau-window: twice the mean bound."""
        return 2.0 * self.window_mean_enstrophy_bound

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["regularity_small"] = bool(d["regularity_small"])
        d["contraction_small"] = bool(d["contraction_small"])
        return d


def constants_from_norms(
    nu: float,
    lambda1: float,
    tau: float,
    l2b: float,
    l20: float,
    c0: float = 1.0,
    c_serrin: float = 1.0,
) -> ConstantsReport:
    """Evaluate every closed form of the report from already-measured norms."""
    if min(nu, lambda1, tau, c0, c_serrin) <= 0:
        raise ValueError("nu, lambda1, tau, c0 and c_serrin must be positive")
    if l2b < 0 or l20 < 0:
        raise ValueError("force norms must be nonnegative")
    e = math.exp(-nu * lambda1 * tau)
    R = 2.0 * tau * l2b ** 2 / (nu * (1.0 - e))
    c1 = 2.0 * (3.0 - e) / (1.0 - e)
    G = l20 / (nu ** 2 * lambda1 ** 0.75)
    regularity_threshold = c0 ** -0.5 * nu ** 4 * lambda1 ** 1.5 / (2.0 * c1 + 4.0 * nu * lambda1 * tau)
    grad_bound = c0 ** -0.5 * nu ** 2 * lambda1 ** 0.5
    M = nu * lambda1 * (1.0 - c_serrin * tau * l20 ** 2 / (nu ** 3 * lambda1 ** 0.5))
    return ConstantsReport(
        nu=nu,
        lambda1=lambda1,
        tau=tau,
        l2b=l2b,
        l20=l20,
        c0=c0,
        c_serrin=c_serrin,
        R=R,
        c1=c1,
        G=G,
        regularity_threshold=regularity_threshold,
        grad_bound=grad_bound,
        M=M,
        regularity_small=l20 ** 2 <= regularity_threshold,
        contraction_small=c_serrin * tau * l20 ** 2 < nu ** 3 * lambda1 ** 0.5,
    )


def constants_report(
    nu: float,
    grid: GridSpec,
    forcing_spec: ForcingSpec,
    tau: float | None = None,
    c0: float = 1.0,
    c_serrin: float = 1.0,
    quadrature_points: int = 256,
) -> ConstantsReport:
    """Measure the forcing norms, then evaluate the closed forms."""
    grid.require_compatible(grid_of(forcing_spec))
    if tau is None:
        tau = 1.0 / (nu * grid.lambda1)
    norms = translational_norms(forcing_spec, tau, quadrature_points)
    return constants_from_norms(nu, grid.lambda1, tau, norms.l2b, norms.l20, c0, c_serrin)


def grashof_bound(c0: float = 1.0) -> float:
    """Grashof threshold of the regularity criterion at tau = (nu lambda1)^(-1)."""
    e = math.exp(-1.0)
    c1 = 2.0 * (3.0 - e) / (1.0 - e)
    return math.sqrt(c0 ** -0.5 / (2.0 * c1 + 4.0))


# --------------------------------------------------------------------------
# Trajectory audits
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AuditResult:
    name: str
    passed: bool
    worst_margin: float  # min over checks of (allowed - observed) / scale
    detail: dict

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "worst_margin": self.worst_margin,
            "detail": self.detail,
        }


def absorbing_inequality_audit(
    times: np.ndarray,
    energies: np.ndarray,
    report: ConstantsReport,
    slack: float = 1e-6,
    max_pairs_block: int = 256,
) -> AuditResult:
    """
    For all recorded t0 < t check
    |u(t)|^2 <= |u(t0)|^2 exp(nu lambda1 (t0 - t)) + tau l2b^2 / (nu (1 - e^-nu lambda1 tau)).
    """
    times = np.asarray(times, dtype=float)
    energies = np.asarray(energies, dtype=float)
    offset = report.absorbing_offset
    rate = report.nu * report.lambda1
    scale = max(float(energies.max(initial=0.0)), offset, 1e-300)
    worst = np.inf
    n = times.size
    n_pairs = 0
    for lo in range(0, n - 1, max_pairs_block):
        hi = min(lo + max_pairs_block, n - 1)
        t0 = times[lo:hi, None]
        e0 = energies[lo:hi, None]
        later = times[None, lo + 1 :]
        mask = later > t0
        bound = e0 * np.exp(rate * (t0 - later)) + offset
        margin = (bound - energies[None, lo + 1 :]) / scale
        if mask.any():
            worst = min(worst, float(margin[mask].min()))
            n_pairs += int(mask.sum())
    if n_pairs == 0:
        worst = 0.0
    return AuditResult(
        name="absorbing_inequality",
        passed=worst >= -slack,
        worst_margin=worst,
        detail={"pairs_checked": n_pairs, "offset": offset, "slack": slack},
    )


def _trapezoid_error_estimate(times: np.ndarray, values: np.ndarray) -> float:
    """
    Composite-trapezoid error estimate from second differences: per cell the
    error is h^3 |f''| / 12 and the second difference approximates f'' h^2.
    Each cell is charged the larger adjacent second difference so boundary
    cells (where decay layers peak) are not dropped.
    """
    if times.size < 3:
        return 0.0
    h = np.diff(times)
    d2 = np.abs(np.diff(values, 2))  # at interior nodes 1 .. n-2
    padded = np.concatenate([[d2[0]], d2, [d2[-1]]])
    per_cell = np.maximum(padded[:-1], padded[1:])
    return float((h * per_cell).sum() / 12.0)


def enstrophy_window_audit(
    times: np.ndarray,
    enstrophies: np.ndarray,
    tau: float,
    report: ConstantsReport,
    t_start: float | None = None,
    n_windows: int | None = None,
    slack: float = 1e-6,
) -> AuditResult:
    """
    Per window [s, s + tau] inside the absorbing ball, check that
    (a) the trapezoid value of the enstrophy integral stays below
        tau * window_mean_enstrophy_bound, and
    (b) the smallest recorded enstrophy stays below window_min_enstrophy_bound.
    """
    times = np.asarray(times, dtype=float)
    enstrophies = np.asarray(enstrophies, dtype=float)
    if t_start is None:
        t_start = float(times[0])
    mean_bound = tau * report.window_mean_enstrophy_bound
    min_bound = report.window_min_enstrophy_bound
    windows = []
    worst = np.inf
    i = 0
    while True:
        s = t_start + i * tau
        e = s + tau
        if e > times[-1] * (1 + 1e-12) + 1e-12:
            break
        if n_windows is not None and i >= n_windows:
            break
        sel = (times >= s - 1e-12) & (times <= e + 1e-12)
        tw, vw = times[sel], enstrophies[sel]
        if tw.size < 4:
            raise ValueError(f"window [{s}, {e}] extends outside the recorded span")
        integral = float(np.trapezoid(vw, tw))
        quad_err = _trapezoid_error_estimate(tw, vw)
        vmin = float(vw.min())
        scale_a = max(mean_bound, 1e-300)
        scale_b = max(min_bound, 1e-300)
        margin_a = (mean_bound * (1 + slack) + quad_err - integral) / scale_a
        margin_b = (min_bound * (1 + slack) - vmin) / scale_b
        worst = min(worst, margin_a, margin_b)
        windows.append(
            {
                "start": s,
                "integral": integral,
                "integral_bound": mean_bound,
                "quadrature_error": quad_err,
                "min_enstrophy": vmin,
                "min_bound": min_bound,
                "passed": margin_a >= 0 and margin_b >= 0,
            }
        )
        i += 1
    if not windows:
        raise ValueError("no complete tau-window inside the recorded span")
    return AuditResult(
        name="enstrophy_windows",
        passed=all(w["passed"] for w in windows),
        worst_margin=float(worst),
        detail={"tau": tau, "windows": windows},
    )


def gradient_bound_audit(
    times: np.ndarray,
    enstrophies: np.ndarray,
    report: ConstantsReport,
    t_min: float | None = None,
) -> AuditResult:
    """Check ||u(t)||^2 < grad_bound on the audited span (strict inequality)."""
    if not report.regularity_small:
        raise ValueError(
            "gradient bound audit requested while the regularity smallness "
            "criterion is false (misconfiguration, not a theorem violation)"
        )
    times = np.asarray(times, dtype=float)
    enstrophies = np.asarray(enstrophies, dtype=float)
    sel = times >= (t_min if t_min is not None else times[0])
    if not sel.any():
        raise ValueError("audit span contains no recorded samples")
    vmax = float(enstrophies[sel].max())
    bound = report.grad_bound
    margin = (bound - vmax) / max(bound, 1e-300)
    return AuditResult(
        name="gradient_bound",
        passed=vmax < bound,
        worst_margin=margin,
        detail={"max_enstrophy": vmax, "bound": bound, "samples": int(sel.sum())},
    )


def energy_balance_audit(
    times: np.ndarray,
    energies: np.ndarray,
    enstrophies: np.ndarray,
    g_dot_u: np.ndarray,
    nu: float,
    tol_per_time: float = 1e-6,
) -> AuditResult:
    """
    Residual of |u(t)|^2 + 2 nu int ||u||^2 - |u(s)|^2 - 2 int <g, u>
    with trapezoid integrals over the recorded samples. The tolerance is
    tol_per_time * span plus an explicit trapezoid-error estimate for the
    recorded integrand (stiff initial transients are quadrature-limited).
    """
    times = np.asarray(times, dtype=float)
    energies = np.asarray(energies, dtype=float)
    enstrophies = np.asarray(enstrophies, dtype=float)
    g_dot_u = np.asarray(g_dot_u, dtype=float)
    if times.size < 2:
        raise ValueError("need at least two recorded samples")
    dissipation = 2.0 * nu * float(np.trapezoid(enstrophies, times))
    work = 2.0 * float(np.trapezoid(g_dot_u, times))
    residual = energies[-1] + dissipation - energies[0] - work
    span = float(times[-1] - times[0])
    scale = max(energies[0], energies[-1], dissipation, abs(work), 1e-300)
    quad_est = _trapezoid_error_estimate(times, 2.0 * nu * enstrophies - 2.0 * g_dot_u)
    tol = tol_per_time * max(span, 1.0) + quad_est / scale
    rel = residual / scale
    return AuditResult(
        name="energy_balance",
        passed=abs(rel) <= tol,
        worst_margin=tol - abs(rel),
        detail={
            "residual": residual,
            "relative_residual": rel,
            "tolerance": tol,
            "quadrature_estimate": quad_est / scale,
            "span": span,
            "dissipation": dissipation,
            "work": work,
        },
    )


# --------------------------------------------------------------------------
# Decay-rate fitting
# --------------------------------------------------------------------------

UNDERFLOW_FLOOR = 1e-28


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log w^2(t); rate is the positive decay rate."""

    t_lo: float
    t_hi: float
    rate: float
    residual_rms: float
    n_samples: int


def fit_decay_rate(times: np.ndarray, wsq: np.ndarray, window: tuple[float, float]) -> RateFit:
    """
    Fit log wsq(t) over `window` by a line; samples below
    UNDERFLOW_FLOOR * wsq[0] are discarded as numerically dead.
    """
    times = np.asarray(times, dtype=float)
    wsq = np.asarray(wsq, dtype=float)
    t_lo, t_hi = window
    if not t_hi > t_lo:
        raise ValueError("window must satisfy t_hi > t_lo")
    floor = UNDERFLOW_FLOOR * float(wsq[0]) if wsq.size else 0.0
    sel = (times >= t_lo) & (times <= t_hi) & (wsq > max(floor, 0.0))
    if sel.sum() < 4:
        raise ValueError("fewer than 4 usable samples in the fit window")
    t, y = times[sel], np.log(wsq[sel])
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    return RateFit(
        t_lo=float(t_lo),
        t_hi=float(t_hi),
        rate=float(-slope),
        residual_rms=float(np.sqrt(np.mean(resid ** 2))),
        n_samples=int(sel.sum()),
    )
