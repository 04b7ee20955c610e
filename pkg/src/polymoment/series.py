"""Analytic layer: expansions of Q(P^-1) at infinity, moments, and vanishing.

Near infinity the inverse branches of a degree-n polynomial P expand in
powers of u = z^(1/n); for any polynomial Q the branch values are

    Q(P_i^-1(z)) = sum_k  s_k * eps^((i-1)k) * z^(-k/n),   eps = exp(2*pi*i/n),

with one common coefficient sequence s_k and a root-of-unity twist per
branch (branch numbering as produced by the monodromy layer).  The expansion
is computed by power-series Newton inversion of P; sub-series supported on
an arithmetic progression of indices descend to polynomials in a single
inverse branch and are recovered by leading-term elimination.

The vanishing verifier combines three independent views of the same
condition: quadrature moments along [a, b], sampled linear relations among
branch values for every vector of the invariant subspace, and orthogonality
of the twist vectors of all live series indices to that subspace.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DegreeTooLow,
    InvalidDivisor,
    NoConvergence,
    RecoveryFailure,
    TruncationTooShort,
)
from .monodromy import Cactus, MonodromyData, continue_branches
from .poly import ComplexPoly, derivative, eval_many
from .rational import RationalSubspace

TOL_MOMENT = 1e-9
TOL_PHI = 1e-9
TOL_SUPPORT = 1e-9
TOL_ORTH = 1e-9
TOL_RECOVER = 1e-8


def default_truncation(n: int, deg_q: int) -> int:
    """All structurally possible indices of a polynomial Q plus a guard band."""
    return n * (deg_q + 2) + 2 * n


def range_rescaled(P: ComplexPoly, md: MonodromyData) -> ComplexPoly:
    """P divided by the magnitude of its largest critical value.

    The rescale multiplies the expansion coefficient s_k by rho^(-k/n), so
    index supports and descended polynomials are unchanged, but it pins the
    convergence radius at 1: without it the coefficients of a deep
    truncation span the dynamic range rho^(N/n) and cancellation noise
    drowns the valley of the profile.
    """
    rho = max(1.0, max(abs(v) for v in md.critical_values))
    return ComplexPoly([c / rho for c in P.coeffs])


@dataclass
class PuiseuxSeries:
    """Truncated expansion sum_k vals[k - kmin] * z^(-k/n), valid for k <= trunc."""

    n: int
    kmin: int
    vals: np.ndarray
    trunc: int

    @property
    def coeffs(self) -> dict[int, complex]:
        out = {}
        for j, v in enumerate(self.vals):
            k = self.kmin + j
            if k > self.trunc:
                break
            if v != 0:
                out[k] = complex(v)
        return out

    def coeff(self, k: int) -> complex:
        j = k - self.kmin
        if 0 <= j < len(self.vals):
            return complex(self.vals[j])
        return 0.0

    def scale(self) -> float:
        """Max coefficient magnitude over the valid index range."""
        upto = min(len(self.vals), self.trunc - self.kmin + 1)
        m = float(np.max(np.abs(self.vals[:upto]))) if upto > 0 else 0.0
        return m or 1.0

    def support(self, tol: float | None = None, ref_scale: float | None = None) -> list[int]:
        """Indices with |s_k| above tol * max|s_k| (or a supplied scale)."""
        if tol is None:
            tol = TOL_SUPPORT
        cut = tol * (ref_scale if ref_scale is not None else self.scale())
        return [
            self.kmin + j
            for j, v in enumerate(self.vals)
            if self.kmin + j <= self.trunc and abs(v) > cut
        ]

    def eval(self, u: complex) -> complex:
        """Partial sum at u = z^(1/n) (branch 1)."""
        acc = 0j
        for j, v in enumerate(self.vals):
            k = self.kmin + j
            if k > self.trunc:
                break
            acc += v * u ** (-k)
        return acc

    def eval_branch(self, i: int, u: complex) -> complex:
        """Partial sum of branch i: index k twisted by eps^((i-1)k)."""
        eps = np.exp(2j * np.pi / self.n)
        return self.eval(u * eps ** (-(i - 1)))


def _ps_mul(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    out = np.convolve(a[:m], b[:m])[:m]
    if len(out) < m:
        out = np.pad(out, (0, m - len(out)))
    return out


def _series_eval_in_g(coeffs, g: np.ndarray, m: int) -> np.ndarray:
    """sum_j c_j x^(deg-j) g(x)^j mod x^m, by Horner in g."""
    deg = len(coeffs) - 1
    acc = np.zeros(m, dtype=complex)
    first = True
    for j in range(deg, -1, -1):
        c = coeffs[j]
        if first:
            acc[0] = c
            first = False
        else:
            acc = _ps_mul(acc, g, m)
            if deg - j < m:
                acc[deg - j] += c
    return acc


def _ps_inverse(a: np.ndarray, m: int) -> np.ndarray:
    if a[0] == 0:
        raise ZeroDivisionError("series has no inverse")
    inv = np.zeros(m, dtype=complex)
    inv[0] = 1.0 / a[0]
    prec = 1
    while prec < m:
        prec = min(2 * prec, m)
        t = _ps_mul(a, inv, prec)
        t = -t
        t[0] += 2.0
        inv = _ps_mul(inv, t, prec)
    return inv


def puiseux_inverse(P: ComplexPoly, N: int) -> PuiseuxSeries:
    """Series w(u) with P(w(u)) = u^n through order u^(n - N - 1).

    Writes w = u * g(1/u) and solves sum_j p_j x^(n-j) g^j = 1 for the power
    series g by Newton iteration with precision doubling; the residual of the
    functional is checked at full precision.  Index k of the result carries
    the coefficient of z^(-k/n), k >= -1.
    """
    n = P.degree
    if n < 2:
        raise DegreeTooLow("inverse expansion needs deg P >= 2")
    if N < n:
        raise TruncationTooShort(f"N = {N} < n = {n}")
    coeffs = list(P.coeffs)
    m = N + 2
    lead = coeffs[-1]
    g = np.zeros(m, dtype=complex)
    g[0] = abs(lead) ** (-1.0 / n) * np.exp(-1j * np.angle(lead) / n)
    # the functional is F(g) = sum_j p_j x^(n-j) g^j - 1; its g-derivative is
    # sum_j j p_j x^(n-j) g^(j-1), the same Horner scheme run on P'
    dcoeffs = [j * c for j, c in enumerate(coeffs)][1:]

    def newton_step(cur, prec):
        F = _series_eval_in_g(coeffs, cur, prec)
        F[0] -= 1.0
        Fp = _series_eval_in_g(dcoeffs, cur, prec)
        return cur[:prec] - _ps_mul(F, _ps_inverse(Fp, prec), prec)

    prec = 1
    while prec < m:
        prec = min(2 * prec, m)
        g = np.pad(newton_step(g, prec), (0, m - prec))
    for _ in range(2):
        g = newton_step(g, m)
    resid = _series_eval_in_g(coeffs, g, m)
    resid[0] -= 1.0
    # compare order by order against the magnitudes feeding each coefficient
    order_scale = np.abs(
        _series_eval_in_g([abs(c) for c in coeffs], np.abs(g).astype(complex), m)
    )
    if float(np.max(np.abs(resid) / (order_scale + 1.0))) > 1e-10:
        raise NoConvergence("series inversion residual too large")
    return PuiseuxSeries(n=n, kmin=-1, vals=g, trunc=N)


def q_of_inverse(Q: ComplexPoly, w: PuiseuxSeries) -> PuiseuxSeries:
    """Coefficients s_k of Q(w(u)); branch i follows by the eps twist."""
    if w.kmin != -1:
        raise ValueError("w must be an inverse-branch series")
    if Q.is_zero():
        return PuiseuxSeries(n=w.n, kmin=0, vals=np.zeros(1, complex), trunc=w.trunc)
    dq = Q.degree
    m = len(w.vals)
    trunc = w.trunc + 1 - dq
    if trunc < w.n:
        raise TruncationTooShort(
            f"truncation {w.trunc} too short for deg Q = {dq}"
        )
    b = _series_eval_in_g(list(Q.coeffs), w.vals, m)
    return PuiseuxSeries(n=w.n, kmin=-dq, vals=b, trunc=trunc)


def extract_psi(series: PuiseuxSeries, f: int) -> PuiseuxSeries:
    """Sub-series on the indices k = 0 mod n/f (the block-invariant part)."""
    n = series.n
    if f < 1 or n % f != 0 or f == n:
        raise InvalidDivisor(f"f = {f} must properly divide n = {n}")
    step = n // f
    vals = series.vals.copy()
    for j in range(len(vals)):
        if (series.kmin + j) % step != 0:
            vals[j] = 0.0
    return PuiseuxSeries(n=n, kmin=series.kmin, vals=vals, trunc=series.trunc)


def recover_polynomial(
    psi: PuiseuxSeries, w: PuiseuxSeries, tol_recover: float | None = None
) -> ComplexPoly:
    """Polynomial S with S(w(u)) = psi, by leading-term elimination.

    The most negative live index of psi fixes deg S; powers of w are
    subtracted from the top down.  A residual above tol_recover means psi
    does not descend to a polynomial in this branch (wrong index class or
    noise) and raises RecoveryFailure.
    """
    tol_recover = TOL_RECOVER if tol_recover is None else tol_recover
    m = len(w.vals)
    sig = psi.support(tol=1e-13)
    if not sig:
        return ComplexPoly()
    deg = max(0, -min(sig))
    res = {k: psi.coeff(k) for k in range(psi.kmin, psi.trunc + 1)}
    valid_to = min(psi.trunc, w.trunc + 1 - deg) if deg else psi.trunc
    g = w.vals
    gpow = np.zeros(m, dtype=complex)
    gpow[0] = 1.0
    pows = [gpow]
    for _ in range(deg):
        pows.append(_ps_mul(pows[-1], g, m))
    coeffs = [0j] * (deg + 1)
    for j in range(deg, 0, -1):
        c = res.get(-j, 0.0) / pows[j][0]
        coeffs[j] = c
        for t in range(m):
            k = t - j
            if k in res:
                res[k] -= c * pows[j][t]
    coeffs[0] = res.get(0, 0.0)
    res[0] = 0.0
    worst = max(
        (abs(v) for k, v in res.items() if k <= valid_to), default=0.0
    )
    if worst > tol_recover * psi.scale():
        raise RecoveryFailure(
            f"residual {worst:.3g} after elimination; no polynomial descent"
        )
    return ComplexPoly(coeffs)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def _gauss_nodes(a: complex, b: complex, count: int):
    x, wt = np.polynomial.legendre.leggauss(count)
    z = a + (b - a) * (x + 1.0) / 2.0
    return z, wt * (b - a) / 2.0


def default_nodes(I: int, deg_p: int, deg_q: int) -> int:
    return max(64, 4 * (I + deg_p * I + deg_q))


def quadrature_moments(
    P: ComplexPoly,
    Q: ComplexPoly,
    a: complex,
    b: complex,
    I: int,
    nodes: int | None = None,
    with_scales: bool = False,
):
    """Moments m_i = integral over [a, b] of P^i Q' dz, i = 0..I.

    Q is renormalized to Q(a) = 0 first (which does not change Q').  The
    straight segment suffices: the integrand is entire.  With with_scales,
    also returns the L1 bounds used for relative smallness tests.
    """
    Qn = Q - Q(a)
    q = derivative(Qn)
    if nodes is None:
        nodes = default_nodes(I, max(P.degree, 0), max(Q.degree, 0))
    z, wt = _gauss_nodes(a, b, nodes)
    pv = eval_many(P, z)
    qv = eval_many(q, z)
    moments = []
    scales = []
    acc = np.ones_like(z)
    for _ in range(I + 1):
        moments.append(complex(np.sum(acc * qv * wt)))
        scales.append(float(np.sum(np.abs(acc * qv * wt))))
        acc = acc * pv
    if with_scales:
        return moments, scales
    return moments


def h_series(
    P: ComplexPoly,
    Q: ComplexPoly,
    a: complex,
    b: complex,
    I: int,
    nodes: int | None = None,
):
    """First I+1 Taylor coefficients of -H(t) at infinity: integrals P^i Q P' dz."""
    Qn = Q - Q(a)
    if nodes is None:
        nodes = default_nodes(I, max(P.degree, 0), max(Q.degree, 0))
    z, wt = _gauss_nodes(a, b, nodes)
    pv = eval_many(P, z)
    qv = eval_many(Qn, z)
    dpv = eval_many(derivative(P), z)
    out = []
    acc = np.ones_like(z)
    for _ in range(I + 1):
        out.append(complex(np.sum(acc * qv * dpv * wt)))
        acc = acc * pv
    return out


# ---------------------------------------------------------------------------
# vanishing verification
# ---------------------------------------------------------------------------


@dataclass
class MomentReport:
    """Diagnostics of the three vanishing checks; verdict is their conjunction."""

    moments: list[complex]
    moment_residual: float
    phi_residuals: dict[int, float]
    relation_residual: float
    support: list[int]
    puiseux_violations: list[int]
    verdict: bool

    def to_json(self) -> dict:
        return {
            "moments": [[m.real, m.imag] for m in self.moments],
            "moment_residual": self.moment_residual,
            "phi_residuals": {str(s): r for s, r in self.phi_residuals.items()},
            "relation_residual": self.relation_residual,
            "support": list(self.support),
            "puiseux_violations": list(self.puiseux_violations),
            "verdict": bool(self.verdict),
        }


def sample_ray(md: MonodromyData, count: int = 8):
    """Geometrically spaced points on a ray from the basepoint away from the
    critical values (staying clear of every arc of the star)."""
    c = md.base_point
    ctr = sum(md.critical_values) / len(md.critical_values)
    u = (c - ctr) / abs(c - ctr)
    s0 = max(1.0, max(abs(v - c) for v in md.critical_values))
    return [c + s0 * (2.0**j) * u for j in range(1, count + 1)]


def branch_samples(P: ComplexPoly, md: MonodromyData, points):
    """Fiber values at the given ray points, branch order as in md.fiber."""
    path = [md.base_point] + list(points)
    _, rec = continue_branches(P, path, np.array(md.fiber), record_at=set(range(1, len(path))))
    return [rec[i] for i in range(1, len(path))]


def verify_vanishing(
    P: ComplexPoly,
    Q: ComplexPoly,
    a: complex,
    b: complex,
    fvectors,
    M: RationalSubspace,
    md: MonodromyData,
    I: int = 25,
    N: int | None = None,
    tol_moment: float | None = None,
    tol_phi: float | None = None,
    tol_support: float | None = None,
    tol_orth: float | None = None,
) -> MomentReport:
    """Run the three equivalent vanishing checks and report.

    (i) all quadrature moments small relative to their L1 bounds; (ii) the
    sampled branch relation sum_i v_i Q(P_i^-1) vanishes on a ray for every
    color vector and every basis vector of the invariant subspace; (iii) for
    every live series index k the twist vector (eps^(k(i-1)))_i is orthogonal
    to the subspace.  The verdict is the conjunction.
    """
    tol_moment = TOL_MOMENT if tol_moment is None else tol_moment
    tol_phi = TOL_PHI if tol_phi is None else tol_phi
    tol_support = TOL_SUPPORT if tol_support is None else tol_support
    tol_orth = TOL_ORTH if tol_orth is None else tol_orth
    n = P.degree
    Qn = Q - Q(a)
    moments, scales = quadrature_moments(P, Qn, a, b, I, with_scales=True)
    m_res = max(
        abs(m) / (s + 1.0) for m, s in zip(moments, scales)
    )
    ok_moments = m_res <= tol_moment

    pts = sample_ray(md)
    fibers = branch_samples(P, md, pts)
    qvals = [eval_many(Qn, f) for f in fibers]
    basis_f = [np.array([float(x) for x in row]) for row in M.basis]
    fvecs_f = [np.array([float(x) for x in fv]) for fv in fvectors]
    phi_residuals = {}
    for s, v in enumerate(fvecs_f, start=1):
        worst = 0.0
        for qv in qvals:
            sc = max(1.0, float(np.max(np.abs(qv))))
            worst = max(worst, abs(np.sum(v * qv)) / sc)
        phi_residuals[s] = worst
    rel_res = max(phi_residuals.values(), default=0.0)
    for v in basis_f:
        for qv in qvals:
            sc = max(1.0, float(np.max(np.abs(qv))))
            rel_res = max(rel_res, abs(np.sum(v * qv)) / sc)
    ok_phi = rel_res <= tol_phi

    if Qn.is_zero():
        support: list[int] = []
    else:
        if N is None:
            N = default_truncation(n, Qn.degree)
        w = puiseux_inverse(range_rescaled(P, md), N)
        series = q_of_inverse(Qn, w)
        support = series.support(tol=tol_support)
    eps = np.exp(2j * np.pi / n)
    violations = []
    for k in support:
        wk = eps ** (np.arange(n) * k)
        for v in basis_f:
            nv = float(np.max(np.abs(v))) or 1.0
            if abs(np.sum(v * wk)) > tol_orth * nv * n:
                violations.append(k)
                break
    ok_puiseux = not violations

    return MomentReport(
        moments=moments,
        moment_residual=m_res,
        phi_residuals=phi_residuals,
        relation_residual=rel_res,
        support=support,
        puiseux_violations=violations,
        verdict=bool(ok_moments and ok_phi and ok_puiseux),
    )


def brc_elements(cactus: Cactus, same_value: bool):
    """The guaranteed subspace members attached to the endpoint vertices.

    With P(a) = P(b): one vector, 1/d_a on V(a) minus 1/d_b on V(b).
    Otherwise two vectors, the normalized indicators of V(a) and of V(b).
    """
    n = cactus.n
    va, vb = cactus.V_a, cactus.V_b
    da, db = cactus.d_a, cactus.d_b
    if same_value:
        v = [Fraction(0)] * n
        for i in va:
            v[i - 1] += Fraction(1, da)
        for i in vb:
            v[i - 1] -= Fraction(1, db)
        return [tuple(v)]
    out = []
    for idx, d in ((va, da), (vb, db)):
        v = [Fraction(0)] * n
        for i in idx:
            v[i - 1] = Fraction(1, d)
        out.append(tuple(v))
    return out
