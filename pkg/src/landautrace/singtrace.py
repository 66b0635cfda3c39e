"""Numerical Dixmier-trace engine.

Three independent estimators are provided for the coefficient of the
logarithmic divergence of singular-value partial sums:

* ``dixmier_via_gamma_fit`` - fits gamma_N = sigma_N / log N against
  1/log N over a geometric schedule of N;
* ``dixmier_via_zeta_residue`` - Richardson-extrapolates the residue
  lim_{s->1+} (s-1) zeta(s) of a trace zeta function;
* ``dixmier_graded`` - sums the diagonal of Q^{-1} M over the graded
  shells of the harmonic regulator Q = a+a- + b+b- + 2 and extrapolates
  the shell-indexed gamma sequence.

Only measurable operators are targeted, where every generalized-limit
state gives the same value; instead of an omega abstraction each estimate
carries a convergence flag, and independent estimators are cross-checked
in the test suite.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expi
from scipy.special import psi as _digamma

from .specfun import hurwitz_zeta

__all__ = [
    "SingularSequence",
    "DixmierEstimate",
    "GradedDiagonal",
    "sigma_partial",
    "gamma_sequence",
    "cesaro_tau",
    "dixmier_via_gamma_fit",
    "trace_Q_power",
    "trace_Q_power_proj",
    "dixmier_via_zeta_residue",
    "dixmier_graded",
    "graded_diagonal",
    "dixmier_from_shell_sums",
    "measurability_diagnostic",
    "macaev_norm_probe",
    "q_resolvent_sequence",
    "q_level_sequence",
    "finite_rank_sequence",
]

#: default geometric schedule for gamma fits, N = 2^10 .. 2^24
GAMMA_SCHEDULE = tuple(2 ** k for k in range(10, 25))

#: shells dropped at the truncation edge in graded estimates
GRADED_MARGIN = 2


class SingularSequence:
    """Non-increasing sequence of singular values with multiplicities.

    Backed either by closed-form shell generators ``value(j)``, ``mult(j)``
    (j indexes distinct values in decreasing order; both must accept numpy
    integer arrays) or by a finite array of unrolled values.
    """

    def __init__(self, value_fn=None, mult_fn=None, values=None, sigma_exact=None,
                 unit_multiplicity=False):
        self._sigma_exact = sigma_exact
        self._unit_mult = bool(unit_multiplicity)
        if values is not None:
            values = np.asarray(values, dtype=float)
            if values.size and np.any(np.diff(values) > 1e-12):
                raise ValueError("values must be non-increasing")
            if values.size and values[-1] < -1e-15:
                raise ValueError("values must be nonnegative")
            self._vals = np.maximum(values, 0.0)
            self._mults = np.ones_like(self._vals, dtype=np.int64)
            self.finite = True
        else:
            if value_fn is None or mult_fn is None:
                raise ValueError("need value_fn and mult_fn for a shell sequence")
            self._value_fn = value_fn
            self._mult_fn = mult_fn
            self._vals = np.empty(0)
            self._mults = np.empty(0, dtype=np.int64)
            self.finite = False
        self._rebuild_cum()

    @classmethod
    def from_shells(cls, value_fn, mult_fn, sigma_exact=None, unit_multiplicity=False):
        return cls(value_fn=value_fn, mult_fn=mult_fn, sigma_exact=sigma_exact,
                   unit_multiplicity=unit_multiplicity)

    @classmethod
    def from_values(cls, values):
        return cls(values=np.sort(np.asarray(values, dtype=float))[::-1])

    @classmethod
    def from_matrix(cls, mat):
        """Descending eigenvalues of a positive-semidefinite matrix."""
        entries = mat.entries if hasattr(mat, "entries") else np.asarray(mat)
        if np.abs(entries - entries.conj().T).max() > 1e-10:
            raise ValueError("matrix must be hermitian")
        ev = np.linalg.eigvalsh(entries)[::-1]
        if ev.size and ev[-1] < -1e-10 * max(1.0, abs(ev[0])):
            raise ValueError("matrix must be positive semidefinite")
        return cls(values=np.maximum(ev, 0.0))

    # -- internals ---------------------------------------------------------

    def _rebuild_cum(self):
        self._cum_count = np.concatenate([[0], np.cumsum(self._mults)])
        self._cum_sum = np.concatenate([[0.0], np.cumsum(self._mults * self._vals)])

    def _ensure_count(self, n_target):
        """Grow the shell tables until at least n_target unrolled entries."""
        if self.finite:
            return
        while self._cum_count[-1] < n_target:
            start = len(self._vals)
            grow = max(1024, start)
            js = np.arange(start, start + grow, dtype=np.int64)
            v = np.asarray(self._value_fn(js), dtype=float)
            m = np.asarray(self._mult_fn(js), dtype=np.int64)
            if np.any(m < 1):
                raise ValueError("multiplicities must be >= 1")
            self._vals = np.concatenate([self._vals, v])
            self._mults = np.concatenate([self._mults, m])
            self._rebuild_cum()

    @property
    def total_count(self):
        """Unrolled length (finite sequences only)."""
        if not self.finite:
            raise ValueError("sequence is infinite")
        return int(self._cum_count[-1])

    def mu(self, n):
        """Unrolled singular values at 0-based positions n (array ok)."""
        n = np.asarray(n, dtype=np.int64)
        if np.any(n < 0):
            raise ValueError("positions must be nonnegative")
        top = int(n.max()) + 1 if n.size else 0
        if self.finite:
            if top > self._cum_count[-1]:
                raise ValueError("position exceeds sequence length")
        else:
            self._ensure_count(top)
        shell = np.searchsorted(self._cum_count, n, side="right") - 1
        return self._vals[shell]

    def sigma(self, N):
        """Partial sums of the first N unrolled singular values."""
        N = np.asarray(N, dtype=np.int64)
        scalar = N.ndim == 0
        Nv = N[None] if scalar else N
        if np.any(Nv < 0):
            raise ValueError("N must be nonnegative")
        if self._sigma_exact is not None:
            out = np.asarray(self._sigma_exact(Nv.astype(float)), dtype=float)
            return float(out[0]) if scalar else out
        top = int(Nv.max()) if Nv.size else 0
        if self.finite:
            if top > self._cum_count[-1]:
                raise ValueError(f"N={top} exceeds sequence length {self._cum_count[-1]}")
        else:
            self._ensure_count(top)
        shell = np.searchsorted(self._cum_count, Nv, side="right") - 1
        shell = np.minimum(shell, len(self._vals) - 1)
        out = self._cum_sum[shell] + (Nv - self._cum_count[shell]) * self._vals[shell]
        return float(out[0]) if scalar else out

    def boundary_at_least(self, n):
        """Smallest multiplicity-block boundary >= n (unrolled count).

        Partial sums evaluated at these boundaries follow the smooth
        shell-subsequence profile instead of scalloping through the
        piecewise-linear interpolation inside a degenerate block.
        """
        n = int(n)
        if self._unit_mult:
            return n
        if not self.finite:
            self._ensure_count(n)
        idx = np.searchsorted(self._cum_count, n, side="left")
        idx = min(idx, len(self._cum_count) - 1)
        return int(self._cum_count[idx])

    def distinct(self, n_shells):
        """First n_shells (value, mult) pairs of the distinct-value table."""
        if not self.finite:
            # ensure enough shells generated
            while len(self._vals) < n_shells:
                self._ensure_count(self._cum_count[-1] + 1)
                if len(self._vals) >= n_shells:
                    break
                self._ensure_count(2 * max(1, int(self._cum_count[-1])))
        n_shells = min(n_shells, len(self._vals))
        return self._vals[:n_shells].copy(), self._mults[:n_shells].copy()


@dataclass
class DixmierEstimate:
    """Singular-trace estimate with convergence diagnostics."""

    value: float
    method: str
    samples: list
    converged: bool
    residual: float

    def to_dict(self):
        return {
            "value": self.value,
            "method": self.method,
            "residual": self.residual,
            "converged": self.converged,
            "samples": [list(map(float, s)) for s in self.samples],
        }


@dataclass
class GradedDiagonal:
    """Shell-resolved diagonal sums of Q^{-1} M (spin already traced)."""

    shell_sums: np.ndarray

    @property
    def n_shells(self):
        return len(self.shell_sums)


# ---------------------------------------------------------------------------
# partial sums and Cesaro machinery


def sigma_partial(seq, N):
    """Sum of the first N singular values (multiplicities unrolled)."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    return float(seq.sigma(int(N)))


def gamma_sequence(seq, schedule):
    """Regularized partial sums gamma_N = sigma_N / log N on a schedule."""
    schedule = [int(n) for n in schedule]
    if any(n < 2 for n in schedule):
        raise ValueError("schedule entries must be >= 2")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be increasing")
    sig = seq.sigma(np.asarray(schedule))
    return [(n, float(s) / np.log(n)) for n, s in zip(schedule, sig)]


def cesaro_tau(seq, lam, lam0):
    """Cesaro mean (1/log lam) * int_lam0^lam sigma_s/log s ds/s.

    sigma_s is the piecewise-linear interpolation of the partial sums (the
    scale-cutoff norm is exactly that interpolation, linear and concave
    between integer scales), so each unit segment integrates in closed
    form through log-log and logarithmic-integral antiderivatives.
    """
    if not (lam > lam0 > np.e):
        raise ValueError("need lam > lam0 > e")
    n_lo = int(np.floor(lam0))
    n_hi = int(np.ceil(lam))
    ns = np.arange(n_lo, n_hi, dtype=np.int64)
    mu_n = seq.mu(ns)          # slope on [n, n+1]
    sig_n = seq.sigma(ns)      # value at the left endpoint
    a = np.maximum(ns.astype(float), lam0)
    b = np.minimum(ns.astype(float) + 1.0, lam)
    good = b > a
    a, b = a[good], b[good]
    mu_g, sig_g, n_g = mu_n[good], sig_n[good], ns[good].astype(float)
    # int sigma_s/(s log s) ds = (sigma_n - n mu_n) loglog s + mu_n li(s)
    const = sig_g - n_g * mu_g
    part = const * (np.log(np.log(b)) - np.log(np.log(a)))
    part += mu_g * (expi(np.log(b)) - expi(np.log(a)))
    return float(np.sum(part) / np.log(lam))


# ---------------------------------------------------------------------------
# estimators


def _linfit(x, y):
    A = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    dev = float(np.abs(A @ coef - y).max())
    return coef, dev


def _sigma_slope(N, sig):
    """Slope of sigma_N = L log N + b + e / sqrt(N) and the gamma-unit deviation."""
    logn = np.log(N)
    A = np.vstack([logn, np.ones_like(N), N ** -0.5]).T
    coef, *_ = np.linalg.lstsq(A, sig, rcond=None)
    dev = float(np.abs((A @ coef - sig) / logn).max())
    return float(coef[0]), dev


def dixmier_via_gamma_fit(seq, tolerance=1e-3, schedule=GAMMA_SCHEDULE):
    """Extrapolate gamma_N = sigma_N / log N over a geometric schedule.

    The model gamma_N = L + c/log N is fitted in partial-sum form
    sigma_N = L log N + c (least squares there keeps the intercept drift
    out of the slope), evaluated at multiplicity-block boundaries (the
    shell-subsequence trick) and augmented by a 1/sqrt(N) column that
    captures the shell-tail correction of graded families. The residual
    combines the fit deviation (in gamma units) with the spread against a
    refit on the upper half of the schedule; non-convergence is reported
    through the flag, never raised.
    """
    schedule = [int(n) for n in schedule]
    if seq.finite:
        top = seq.total_count
        schedule = [n for n in schedule if n <= top]
        if len(schedule) < 4:
            schedule = sorted({max(2, top // 2 ** k) for k in range(6)} | {top})
    # snap to multiplicity-block boundaries (shell-subsequence evaluation)
    schedule = sorted({seq.boundary_at_least(n) for n in schedule})
    if len(schedule) < 4:
        return DixmierEstimate(np.nan, "gamma_fit", [], False, np.inf)
    N = np.array(schedule, dtype=float)
    sig = seq.sigma(np.array(schedule))
    samples = [(int(n), float(s) / np.log(n)) for n, s in zip(N, sig)]
    value, dev = _sigma_slope(N, sig)
    half = len(N) // 2
    if len(N) - half >= 5:
        value_hi, _ = _sigma_slope(N[half:], sig[half:])
        residual = max(dev, abs(value - value_hi))
    else:
        residual = dev
    return DixmierEstimate(value, "gamma_fit", samples, residual <= tolerance, residual)


def trace_Q_power(s, xi):
    """Closed-form Tr (Q + 2 xi)^{-s}; trace class needs s > 2."""
    if s <= 2:
        raise ValueError(f"(Q + 2 xi)^(-s) is trace class only for s > 2 (got {s})")
    if xi < 0:
        raise ValueError("xi must be nonnegative")
    return hurwitz_zeta(s - 1.0, 1.0 + 2.0 * xi) - (1.0 + 2.0 * xi) * hurwitz_zeta(s, 1.0 + 2.0 * xi)


def trace_Q_power_proj(s, xi, j):
    """Closed-form Tr (Q + 2 xi)^{-s} P_j; trace class needs s > 1."""
    if s <= 1:
        raise ValueError(f"(Q + 2 xi)^(-s) P_j is trace class only for s > 1 (got {s})")
    if xi < 0 or j < 0:
        raise ValueError("xi and j must be nonnegative")
    return hurwitz_zeta(s, j + 2.0 * (1.0 + xi))


def dixmier_via_zeta_residue(zeta_fn, tolerance=1e-8, k_range=range(3, 13)):
    """Estimate lim_{s->1+} (s-1) zeta_fn(s) by Richardson extrapolation.

    Samples s = 1 + 2^-k and eliminates the power corrections of the
    analytic function eps -> eps * zeta(1 + eps) on the halving grid.
    Divergence is flagged, not raised.
    """
    ks = list(k_range)
    eps = np.array([2.0 ** (-k) for k in ks])
    f = np.array([e * zeta_fn(1.0 + e) for e in eps])
    samples = [(1.0 + e, float(v)) for e, v in zip(eps, f)]
    # Neville tableau on the halving grid
    tab = [f.copy()]
    for m in range(1, len(f)):
        prev = tab[-1]
        fac = 2.0 ** m
        tab.append((fac * prev[1:] - prev[:-1]) / (fac - 1.0))
    value = float(tab[-1][-1])
    resid = abs(float(tab[-1][-1]) - float(tab[-2][-1])) if len(tab) > 1 else np.inf
    ok = np.isfinite(value) and resid <= tolerance
    return DixmierEstimate(value, "zeta_residue", samples, bool(ok), float(resid))


def graded_diagonal(M, xi):
    """Shell sums of the diagonal of (Q + 2 xi)^{-1} M, spin traced."""
    basis = M.basis
    diag = np.diag(M.entries)
    if M.spin_dim > 1:
        diag = diag.reshape(basis.dim, M.spin_dim).sum(axis=1)
    weights = 1.0 / (basis.shell + 2.0 + 2.0 * xi)
    vals = diag * weights
    sums = np.zeros(basis.nmax + 1, dtype=complex)
    np.add.at(sums, basis.shell, vals)
    if np.abs(sums.imag).max() > 1e-9 * max(1.0, np.abs(sums.real).max()):
        raise ValueError("graded diagonal is not real; M is far from self-adjoint")
    return GradedDiagonal(sums.real.copy())


def dixmier_from_shell_sums(shell_sums, tolerance=5e-2, margin=GRADED_MARGIN):
    """Extrapolate the shell-indexed gamma sequence of a graded diagonal.

    gamma_l = (sum of shell sums through l) / log(l+1) is fitted over the
    outer half of the retained shells. The fit basis is [1, x, x/(l+1)]
    with x = 1/log(l+1): the plain two-term model L + c x carries an
    O(x/l) systematic from the subleading shell structure that is larger
    than its own fit deviation, so the third term is included and the
    spread between the two- and three-term intercepts enters the reported
    residual as the model-uncertainty estimate.
    """
    shell_sums = np.asarray(shell_sums, dtype=float)
    n_shells = len(shell_sums)
    if n_shells < 12 + margin:
        raise ValueError(f"need at least {12 + margin} shells, got {n_shells}")
    keep = n_shells - margin
    cum = np.cumsum(shell_sums[:keep])
    ell = np.arange(keep, dtype=float)
    lo = keep // 2
    sel = np.arange(lo, keep)
    x = 1.0 / np.log(sel + 1.0)
    gamma = cum[sel] / np.log(sel + 1.0)
    coef2, _ = _linfit(x, gamma)

    cols = [np.ones_like(x), x, x / (sel + 1.0)]
    A = np.vstack(cols).T
    coef3, *_ = np.linalg.lstsq(A, gamma, rcond=None)
    dev3 = float(np.abs(A @ coef3 - gamma).max())
    value = float(coef3[0])
    residual = max(dev3, abs(value - float(coef2[0])))
    samples = [(float(l + 1), float(g)) for l, g in zip(sel, gamma)]
    return DixmierEstimate(value, "graded_diagonal", samples, residual <= tolerance, residual)


def dixmier_graded(M, xi, tolerance=5e-2):
    """Dixmier trace of (Q + 2 xi)^{-1} M from the graded diagonal of M.

    Exactly linear in M by construction. Requires Nmax >= 12 + margin
    shells; the outer ``GRADED_MARGIN`` shells are dropped because ladder
    products of order <= 2 corrupt them at the truncation edge.
    """
    gd = graded_diagonal(M, xi)
    return dixmier_from_shell_sums(gd.shell_sums, tolerance=tolerance)


# ---------------------------------------------------------------------------
# diagnostics


@dataclass
class MeasurabilityReport:
    """Power-law diagnostic of a singular sequence's distinct-value table."""

    C: float
    power: float
    alpha: float
    prediction: float
    trace_class: bool
    inconclusive: bool
    fit_residual: float

    def to_dict(self):
        return {
            "C": self.C,
            "power": self.power,
            "alpha": self.alpha,
            "prediction": self.prediction,
            "trace_class": self.trace_class,
            "inconclusive": self.inconclusive,
            "fit_residual": self.fit_residual,
        }


def measurability_diagnostic(seq, n_shells=4096):
    """Regress Mult[mu_n] mu_n ~ C n^(-p) on the distinct-value tail.

    Reports the fitted C and p, the index-rescaling factor
    alpha = log(#distinct) / log(#unrolled) at the tail end, and the
    predicted common Dixmier value alpha * C. A sequence whose unrolled
    sum has already saturated is flagged trace class (prediction 0).
    Never raises on odd data; sets ``inconclusive`` instead.
    """
    vals, mults = seq.distinct(n_shells)
    n_avail = len(vals)
    if n_avail < 16:
        return MeasurabilityReport(0.0, 0.0, 1.0, 0.0, True, True, np.inf)
    nz = vals > 0
    vals, mults = vals[nz], mults[nz]
    n_avail = len(vals)
    if n_avail < 16:
        return MeasurabilityReport(0.0, 0.0, 1.0, 0.0, True, False, 0.0)
    n = np.arange(1, n_avail + 1, dtype=float)
    unrolled = np.cumsum(mults.astype(float))
    total = np.sum(vals * mults)
    half = np.sum((vals * mults)[: n_avail // 2])
    trace_class = (total - half) <= 1e-6 * max(total, 1e-300)

    sel = slice(n_avail // 2, n_avail)
    yx = np.log(np.maximum(vals[sel] * mults[sel], 1e-300))
    xx = np.log(n[sel])
    A = np.vstack([np.ones_like(xx), xx]).T
    coef, *_ = np.linalg.lstsq(A, yx, rcond=None)
    resid = float(np.abs(A @ coef - yx).max())
    C = float(np.exp(coef[0]))
    p = float(-coef[1])
    # alpha as the asymptotic slope of log(#distinct) vs log(#unrolled);
    # the plain endpoint ratio converges too slowly to be useful
    yu = np.log(unrolled[sel])
    Au = np.vstack([np.ones_like(yu), yu]).T
    coef_a, *_ = np.linalg.lstsq(Au, xx, rcond=None)
    alpha = float(coef_a[1]) if unrolled[-1] > n_avail else 1.0
    prediction = 0.0 if trace_class else alpha * C
    inconclusive = resid > 0.5
    return MeasurabilityReport(C, p, alpha, prediction, trace_class, inconclusive, resid)


def macaev_norm_probe(seq, p, schedule=GAMMA_SCHEDULE):
    """Probe of the (p+)-class norm N^((1-p)/p) sigma_N on a schedule.

    Returns (sup over the schedule, growing flag); a growing tail signals
    the sequence falls outside the class. Documented check only.
    """
    if p <= 1:
        raise ValueError("use gamma_sequence for p = 1")
    schedule = [int(nv) for nv in schedule]
    if seq.finite:
        schedule = [nv for nv in schedule if nv <= seq.total_count] or [seq.total_count]
    vals = np.array([nv ** ((1.0 - p) / p) * seq.sigma(nv) for nv in schedule])
    growing = bool(len(vals) >= 3 and vals[-1] > 1.05 * vals[-3])
    return float(vals.max()), growing


# ---------------------------------------------------------------------------
# ready-made sequences


def q_resolvent_sequence(xi, power=1):
    """Singular values of (Q + 2 xi)^{-power}: value (l+2+2xi)^-power, mult l+1."""
    if xi < 0:
        raise ValueError("xi must be nonnegative")

    def value(js):
        return (js + 2.0 + 2.0 * xi) ** (-float(power))

    def mult(js):
        return js + 1

    return SingularSequence.from_shells(value, mult)


def q_level_sequence(xi, j):
    """Singular values of (Q + 2 xi)^{-1} P_j: simple values 1/(k+j+2+2xi).

    Ships an exact digamma partial sum so sigma_N is O(1) at any N.
    """
    if xi < 0 or j < 0:
        raise ValueError("xi and j must be nonnegative")
    a = j + 2.0 + 2.0 * xi

    def value(ks):
        return 1.0 / (ks + a)

    def mult(ks):
        return np.ones_like(ks)

    def sigma_exact(N):
        return _digamma(N + a) - _digamma(a)

    return SingularSequence.from_shells(value, mult, sigma_exact=sigma_exact,
                                        unit_multiplicity=True)


def finite_rank_sequence(rank, padding=0):
    """Rank-r projection sequence: r ones followed by optional zero padding."""
    return SingularSequence.from_values(np.concatenate([np.ones(rank), np.zeros(padding)]))
