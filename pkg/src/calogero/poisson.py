"""Numerical Poisson brackets on the reduced Calogero-Moser phase space.

Convention for the canonical bracket:

    {f, g}_0 = sum_i (df/dx_i dg/dp_i - df/dp_i dg/dx_i)

which gives ``{J_1, I_1}_0 = n`` for ``I_k = tr L^k / k`` and
``J_k = tr X L^(k-1)``.  The second bracket is only known through its values
on the (I, J) chart:

    {I_k, I_l}_1 = 0,   {J_l, I_k}_1 = tr L^(k+l-1),   {J_k, J_l}_1 = (l-k) J_(k+l-1)

so ``{f, g}_1`` is evaluated by expanding ``df`` and ``dg`` in ``dI, dJ``.

Gradients are central differences in the 2n coordinates (x, p) with one
Richardson step.  Observables indexed by eigenvalue re-sort the spectrum at
every stencil point, so the step has to stay well below the eigenvalue gap;
:func:`check_stencil` enforces that.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (CalogeroError, EvalFailure, IndexOutOfRange, PreconditionViolation,
                     SingularChart)
from .fd import richardson
from .phase_core import PhaseState, build_lax, hamiltonian
from .serialize import complex_pair
from .spectral import eigen, gap_threshold, spectral_coords

DEFAULT_H = 1e-5
# the suites compare against closed forms at 1e-5..1e-6, so they use a wider,
# doubly extrapolated stencil (truncation error O(h^6))
SUITE_H = 1e-3
SUITE_LEVELS = 2
COND_MAX = 1e10


@dataclass(frozen=True)
class Observable:
    """Named function of a state; may return a scalar or a vector of values."""

    name: str
    fn: Callable[[PhaseState], complex]

    def __call__(self, s: PhaseState):
        return self.fn(s)


@dataclass
class BracketReport:
    check: str
    tolerance: float
    entries: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def add(self, i, j, value, target, relation: str | None = None, relative: bool = False,
            scale: float | None = None):
        """Record one entry; ``err`` is the residual divided by ``max(1, scale)``.

        ``scale`` defaults to ``|target|`` when ``relative`` and to 1 otherwise.
        """
        value, target = complex(value), complex(target)
        abs_err = abs(value - target)
        if scale is None:
            scale = abs(target) if relative else 1.0
        err = abs_err / max(1.0, scale)
        entry = {"i": i, "j": j, "value": value, "target": target, "abs_err": abs_err, "err": err}
        if relation is not None:
            entry["relation"] = relation
        self.entries.append(entry)
        return entry

    def fail(self, message: str):
        self.failures.append(message)

    @property
    def max_err(self) -> float:
        return max((e["err"] for e in self.entries), default=0.0)

    @property
    def passed(self) -> bool:
        return not self.failures and all(e["err"] <= self.tolerance for e in self.entries)

    def to_dict(self) -> dict:
        entries = []
        for e in self.entries:
            d = dict(e)
            d["value"] = complex_pair(e["value"])
            d["target"] = complex_pair(e["target"])
            entries.append(d)
        return {"check": self.check, "entries": entries, "pass": self.passed,
                "tolerance": self.tolerance, "max_err": self.max_err,
                "failures": list(self.failures), "notes": _jsonable(self.notes)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return complex_pair(obj)
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


# -- gradients ---------------------------------------------------------------

def jacobian(fn, s: PhaseState, h: float = DEFAULT_H, levels: int = 1) -> np.ndarray:
    """Derivatives of a (possibly vector-valued) function w.r.t. (x, p); shape (m, 2n).

    Central differences with step ``h * max(1, |u_k|)`` in coordinate ``k``,
    refined by ``levels`` Richardson sweeps.
    """
    u = s.as_vector()
    cols = []
    try:
        for k in range(u.size):
            hk = h * max(1.0, abs(u[k]))

            def central(step):
                up = u.copy()
                um = u.copy()
                up[k] += step
                um[k] -= step
                fp = np.atleast_1d(np.asarray(fn(s.with_vector(up)), dtype=complex))
                fm = np.atleast_1d(np.asarray(fn(s.with_vector(um)), dtype=complex))
                return (fp - fm) / (2 * step)

            cols.append(richardson(central, hk, levels))
    except (CalogeroError, ArithmeticError, np.linalg.LinAlgError) as exc:
        if isinstance(exc, EvalFailure):
            raise
        name = getattr(fn, "name", getattr(fn, "__name__", "observable"))
        raise EvalFailure(f"{name}: {exc}") from exc
    return np.stack(cols, axis=1)


def gradient(f: Observable, s: PhaseState, h: float = DEFAULT_H, levels: int = 1) -> np.ndarray:
    J = jacobian(f, s, h, levels)
    return J[0] if J.shape[0] == 1 else J


def bracket0_grad(df: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Canonical bracket of gradient rows; broadcasts to a matrix for stacked rows."""
    df = np.atleast_2d(df)
    dg = np.atleast_2d(dg)
    n = df.shape[1] // 2
    return df[:, :n] @ dg[:, n:].T - df[:, n:] @ dg[:, :n].T


def bracket0(f: Observable, g: Observable, s: PhaseState, h: float = DEFAULT_H) -> complex:
    return complex(bracket0_grad(gradient(f, s, h), gradient(g, s, h))[0, 0])


# -- invariants --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class InvariantBasis:
    I: np.ndarray
    J: np.ndarray


def trace_powers(s: PhaseState, kmax: int):
    """(tr L^k, tr X L^(k-1)) for k = 0..kmax; the J list starts at k = 1 (index 0 unused)."""
    pair = build_lax(s)
    L, X = pair.L, pair.X
    n = s.n
    trL = np.empty(kmax + 1, dtype=complex)
    trXL = np.zeros(kmax + 1, dtype=complex)
    P = np.eye(n, dtype=complex)
    trL[0] = n
    for k in range(1, kmax + 1):
        trXL[k] = np.trace(X @ P)
        P = P @ L
        trL[k] = np.trace(P)
    return trL, trXL


def invariants_IJ(s: PhaseState, kmax: int | None = None) -> InvariantBasis:
    kmax = s.n if kmax is None else kmax
    trL, trXL = trace_powers(s, kmax)
    k = np.arange(1, kmax + 1)
    return InvariantBasis(trL[1:] / k, trXL[1:])


def I_obs(k: int) -> Observable:
    return Observable(f"I_{k}", lambda s: invariants_IJ(s, k).I[k - 1])


def J_obs(k: int) -> Observable:
    return Observable(f"J_{k}", lambda s: invariants_IJ(s, k).J[k - 1])


def _ij_family(s: PhaseState) -> np.ndarray:
    b = invariants_IJ(s)
    return np.concatenate([b.I, b.J])


IJ_FAMILY = Observable("IJ", _ij_family)
H_OBS = Observable("H", lambda s: hamiltonian(s))


def x_obs(i: int) -> Observable:
    return Observable(f"x_{i}", lambda s: s.x[i])


def p_obs(i: int) -> Observable:
    return Observable(f"p_{i}", lambda s: s.p[i])


def gamma(s: PhaseState, ell: int) -> complex:
    """Additional integral ``ell J_2 I_ell - 2 J_ell I_2`` (ell != 2, ell <= n)."""
    n = s.n
    if n < 2 or ell == 2 or not 1 <= ell <= n:
        raise IndexOutOfRange(f"gamma needs 1 <= ell <= n, ell != 2 and n >= 2 (ell={ell}, n={n})")
    b = invariants_IJ(s)
    return complex(ell * b.J[1] * b.I[ell - 1] - 2 * b.J[ell - 1] * b.I[1])


def gamma_obs(ell: int) -> Observable:
    return Observable(f"Gamma_{ell}", lambda s: gamma(s, ell))


def delta_obs(lam: complex) -> Observable:
    def fn(s):
        L = build_lax(s).L
        return np.linalg.det(lam * np.eye(s.n) - L)
    return Observable(f"Delta({lam})", fn)


def _coords_family(s: PhaseState) -> np.ndarray:
    sc = spectral_coords(build_lax(s))
    return np.concatenate([sc.lambdas, sc.mu, sc.mu_tilde])


SPECTRAL_FAMILY = Observable("spectral", _coords_family)


def lambda_obs(i: int) -> Observable:
    return Observable(f"lambda_{i}", lambda s: spectral_coords(build_lax(s)).lambdas[i])


def mu_obs(i: int) -> Observable:
    return Observable(f"mu_{i}", lambda s: spectral_coords(build_lax(s)).mu[i])


def mu_tilde_obs(i: int) -> Observable:
    return Observable(f"mu_tilde_{i}", lambda s: spectral_coords(build_lax(s)).mu_tilde[i])


# -- second bracket through the (I, J) chart ----------------------------------

def table_tensors(s: PhaseState):
    """Bracket matrices of the chart coordinates z = (I_1..I_n, J_1..J_n)."""
    n = s.n
    trL, trXL = trace_powers(s, 2 * n)
    P0 = np.zeros((2 * n, 2 * n), dtype=complex)
    P1 = np.zeros_like(P0)
    for k in range(1, n + 1):
        for l in range(1, n + 1):
            P0[n + l - 1, k - 1] = trL[k + l - 2]
            P0[k - 1, n + l - 1] = -trL[k + l - 2]
            P1[n + l - 1, k - 1] = trL[k + l - 1]
            P1[k - 1, n + l - 1] = -trL[k + l - 1]
            if k != l:
                P0[n + k - 1, n + l - 1] = (l - k) * trXL[k + l - 2]
                P1[n + k - 1, n + l - 1] = (l - k) * trXL[k + l - 1]
    return P0, P1


class Chart:
    """Jacobian of (I, J) at a state together with the bracket tables there."""

    def __init__(self, s: PhaseState, h: float = DEFAULT_H, cond_max: float = COND_MAX,
                 levels: int = 1):
        self.state = s
        self.T = jacobian(IJ_FAMILY, s, h, levels)
        # columns scaled to unit norm; the condition number is what the solve sees
        self.cond = float(np.linalg.cond(self.T / np.linalg.norm(self.T, axis=1, keepdims=True)))
        if not np.isfinite(self.cond) or self.cond > cond_max:
            raise SingularChart(f"(I, J) Jacobian condition number {self.cond:.3g} exceeds {cond_max:.1g}")
        self.P0, self.P1 = table_tensors(s)

    def coefficients(self, grads) -> np.ndarray:
        """Rows a with grad = a @ T, i.e. df = sum a_u dz_u."""
        grads = np.atleast_2d(grads)
        return np.linalg.solve(self.T.T, grads.T).T

    def bracket1(self, df, dg) -> np.ndarray:
        return self.coefficients(df) @ self.P1 @ self.coefficients(dg).T

    def bracket0(self, df, dg) -> np.ndarray:
        return self.coefficients(df) @ self.P0 @ self.coefficients(dg).T


def bracket1(f: Observable, g: Observable, s: PhaseState, h: float = DEFAULT_H) -> complex:
    chart = Chart(s, h)
    return complex(chart.bracket1(gradient(f, s, h), gradient(g, s, h))[0, 0])


# -- calibrated signs ---------------------------------------------------------

_N1 = PhaseState([0.3], [0.7])


@functools.lru_cache(maxsize=None)
def calibrated_sigma() -> int:
    """Sign of {lambda, mu_tilde}_0 at n = 1, where lambda = p and mu_tilde = x."""
    v = bracket0(lambda_obs(0), mu_tilde_obs(0), _N1)
    return int(np.sign(v.real))


@functools.lru_cache(maxsize=None)
def calibrated_tau() -> int:
    """Response of mu = x to a uniform translation in x at n = 1."""
    d = translation_derivative(mu_obs(0), _N1)
    return int(np.sign(np.real(d)))


def translation_derivative(f, s: PhaseState, h: float = DEFAULT_H, levels: int = 1) -> np.ndarray:
    """Derivative of ``f`` along the uniform translation sum_i d/dx_i."""
    step = h * max(1.0, float(np.max(np.abs(s.x))))

    def shifted(eps):
        return np.atleast_1d(np.asarray(f(s.with_vector(np.concatenate([s.x + eps, s.p]))), dtype=complex))

    def central(e):
        return (shifted(e) - shifted(-e)) / (2 * e)

    try:
        d = richardson(central, step, levels)
    except CalogeroError as exc:
        raise EvalFailure(str(exc)) from exc
    return d[0] if d.size == 1 else d


# -- verification suites ------------------------------------------------------

def check_stencil(s: PhaseState, h: float = SUITE_H):
    """Eigenvalue tracks must move by less than a quarter of the gap across the stencil."""
    base = eigen(build_lax(s).L, s.coupling)
    if s.n < 2:
        return
    thr = gap_threshold(build_lax(s).L)
    if base.min_gap < thr:
        raise PreconditionViolation(f"degenerate spectrum (gap {base.min_gap:.3g})")
    u = s.as_vector()
    worst = 0.0
    for k in range(u.size):
        hk = h * max(1.0, abs(u[k]))
        for sgn in (1.0, -1.0):
            v = u.copy()
            v[k] += sgn * hk
            lam = eigen(build_lax(s.with_vector(v)).L, s.coupling).lambdas
            worst = max(worst, float(np.max(np.abs(lam - base.lambdas))))
    if worst >= base.min_gap / 4:
        raise PreconditionViolation(
            f"stencil moves eigenvalues by {worst:.3g}, gap is {base.min_gap:.3g}")


def _split(F: np.ndarray, n: int):
    return F[:n], F[n:2 * n], F[2 * n:]


def verify_canonicity(s: PhaseState, tol: float = 1e-6, h: float = SUITE_H,
                  levels: int = SUITE_LEVELS) -> BracketReport:
    """{lam_i, lam_j}_0 = {mu_i, mu_j}_0 = {mu~_i, mu~_j}_0 = 0 and
    {lam_i, mu_j}_0 = {lam_i, mu~_j}_0 = sigma delta_ij."""
    check_stencil(s, h)
    sigma = calibrated_sigma()
    n = s.n
    G = jacobian(SPECTRAL_FAMILY, s, h, levels)
    dl, dm, dmt = _split(G, n)
    pairs = {
        "lambda,lambda": (bracket0_grad(dl, dl), 0),
        "mu~,mu~": (bracket0_grad(dmt, dmt), 0),
        "lambda,mu~": (bracket0_grad(dl, dmt), sigma),
        "mu,mu": (bracket0_grad(dm, dm), 0),
        "lambda,mu": (bracket0_grad(dl, dm), sigma),
    }
    report = BracketReport("canonicity", tol)
    report.notes["sigma"] = sigma
    for rel, (M, diag) in pairs.items():
        for i in range(n):
            for j in range(n):
                report.add(i, j, M[i, j], diag if i == j else 0.0, relation=rel)
    return report


def verify_bracket1_relations(s: PhaseState, tol: float = 1e-6, h: float = SUITE_H,
                  levels: int = SUITE_LEVELS) -> BracketReport:
    """Second-bracket relations of the spectral coordinates."""
    check_stencil(s, h)
    sigma = calibrated_sigma()
    n = s.n
    chart = Chart(s, h, levels=levels)
    G = jacobian(SPECTRAL_FAMILY, s, h, levels)
    dl, dm, dmt = _split(G, n)
    lam = spectral_coords(build_lax(s)).lambdas
    report = BracketReport("bracket1", tol)
    report.notes["sigma"] = sigma
    report.notes["chart_cond"] = chart.cond
    LL = chart.bracket1(dl, dl)
    LM = chart.bracket1(dl, dmt)
    LD = chart.bracket1(dl, dm)
    B = chart.bracket1(dmt, dmt)
    MM = chart.bracket1(dm, dm)
    for i in range(n):
        for j in range(n):
            report.add(i, j, LL[i, j], 0.0, relation="lambda,lambda")
            report.add(i, j, LM[i, j], sigma * lam[j] if i == j else 0.0, relation="lambda,mu~")
            report.add(i, j, LD[i, j], sigma * lam[j] if i == j else 0.0, relation="lambda,mu")
            report.add(i, j, B[i, j], -B[j, i], relation="B antisymmetry")
            report.add(i, j, MM[i, j], 0.0, relation="mu,mu")
    dJ = chart.T[n:]
    M1 = chart.bracket1(dm, dJ)
    M0 = bracket0_grad(dm, dJ)
    for i in range(n):
        for k in range(n):
            report.add(i, f"J_{k + 1}", M1[i, k], lam[i] * M0[i, k], relation="eigen-form",
                       relative=True)
    report.notes["B"] = [[complex(v) for v in row] for row in B]
    return report


def verify_lenard(s: PhaseState, tol: float = 1e-6, h: float = SUITE_H,
                  levels: int = SUITE_LEVELS) -> BracketReport:
    """{J_l, I_(k+1)}_0 = {J_l, I_k}_1 = tr L^(k+l-1), compared relative to max(1, |target|)."""
    n = s.n
    report = BracketReport("lenard", tol)
    if n < 2:
        report.notes["vacuous"] = True
        return report
    chart = Chart(s, h, levels=levels)
    trL, _ = trace_powers(s, 2 * n)
    dI, dJ = chart.T[:n], chart.T[n:]
    B0 = bracket0_grad(dJ, dI)
    B1 = chart.bracket1(dJ, dI)
    for l in range(1, n + 1):
        for k in range(1, n):
            target = trL[k + l - 1]
            lhs, rhs = B0[l - 1, k], B1[l - 1, k - 1]
            report.add(f"J_{l}", f"I_{k + 1}", lhs, target, relation="{J,I}_0 table", relative=True)
            report.add(f"J_{l}", f"I_{k}", rhs, target, relation="{J,I}_1 table", relative=True)
            e = report.add(f"J_{l}", f"I_{k}", lhs, rhs, relation="lenard", relative=True)
            e["err"] = abs(lhs - rhs) / max(1.0, abs(target))
    return report


def verify_bracket_table(s: PhaseState, tol: float = 1e-5, h: float = SUITE_H,
                  levels: int = SUITE_LEVELS) -> BracketReport:
    """Every closed form of the (I, J) bracket table, relative to max(1, |target|).

    Entries whose closed form vanishes are measured against the product of the
    two gradient norms instead.

    ``{,}_0`` is evaluated directly in (x, p); ``{,}_1`` through the Lie-Poisson
    bracket on gl(n) x gl(n) at (A, B) = (L, X), which is independent of the
    chart construction used by :func:`bracket1`.
    """
    from .biham_lift import LiftedPoint, _pairing_gradient, lie_poisson, lift_I, lift_J

    n = s.n
    report = BracketReport("bracket_table", tol)
    trL, trXL = trace_powers(s, 2 * n)
    T = jacobian(IJ_FAMILY, s, h, levels)
    dI, dJ = T[:n], T[n:]
    II, JI, JJ = bracket0_grad(dI, dI), bracket0_grad(dJ, dI), bracket0_grad(dJ, dJ)
    pair = build_lax(s)
    pt = LiftedPoint(pair.L, pair.X)
    gI = [_pairing_gradient(lift_I(k), pt, h, levels) for k in range(1, n + 1)]
    gJ = [_pairing_gradient(lift_J(k), pt, h, levels) for k in range(1, n + 1)]
    nI0 = np.linalg.norm(dI, axis=1)
    nJ0 = np.linalg.norm(dJ, axis=1)
    nI1 = [np.sqrt(np.sum(np.abs(a) ** 2) + np.sum(np.abs(b) ** 2)) for a, b in gI]
    nJ1 = [np.sqrt(np.sum(np.abs(a) ** 2) + np.sum(np.abs(b) ** 2)) for a, b in gJ]

    def put(f, g, value, target, relation, grad_scale):
        # a vanishing bracket is a cancellation between terms of size |df| |dg|
        scale = abs(target) if target != 0 else grad_scale
        report.add(f, g, value, target, relation=relation, scale=scale)

    for k in range(1, n + 1):
        for l in range(1, n + 1):
            a, b = k - 1, l - 1
            put(f"I_{k}", f"I_{l}", II[a, b], 0.0, "{I,I}_0", nI0[a] * nI0[b])
            put(f"J_{l}", f"I_{k}", JI[b, a], trL[k + l - 2], "{J,I}_0", nJ0[b] * nI0[a])
            t0 = (l - k) * trXL[k + l - 2] if k != l else 0.0
            put(f"J_{k}", f"J_{l}", JJ[a, b], t0, "{J,J}_0", nJ0[a] * nJ0[b])
            v = lie_poisson(*gI[a], *gI[b], pt.A, pt.B)
            put(f"I_{k}", f"I_{l}", v, 0.0, "{I,I}_1", nI1[a] * nI1[b])
            v = lie_poisson(*gJ[b], *gI[a], pt.A, pt.B)
            put(f"J_{l}", f"I_{k}", v, trL[k + l - 1], "{J,I}_1", nJ1[b] * nI1[a])
            v = lie_poisson(*gJ[a], *gJ[b], pt.A, pt.B)
            t1 = (l - k) * trXL[k + l - 1] if k != l else 0.0
            put(f"J_{k}", f"J_{l}", v, t1, "{J,J}_1", nJ1[a] * nJ1[b])
    return report


def verify_superintegrability(s: PhaseState, tol: float = 1e-6, h: float = SUITE_H,
                  levels: int = SUITE_LEVELS) -> BracketReport:
    """{Gamma_l, I_2}_0 = 0 for l != 2 and independence of (I_1..I_n, Gamma_l).

    The bracket residual is divided by ``max(1, |dGamma| |dI_2|)``.
    """
    n = s.n
    if n < 2:
        raise IndexOutOfRange("superintegrability needs n >= 2")
    ells = [l for l in range(1, n + 1) if l != 2]
    report = BracketReport("superintegrability", tol)
    dI = jacobian(IJ_FAMILY, s, h, levels)[:n]
    dG = {l: gradient(gamma_obs(l), s, h, levels) for l in ells}
    for l in ells:
        e = report.add(f"Gamma_{l}", "I_2", bracket0_grad(dG[l], dI[1])[0, 0], 0.0,
                       relation="{Gamma,I_2}_0")
        # zero target: scale by the size of the two gradients
        e["err"] = e["abs_err"] / max(1.0, np.linalg.norm(dG[l]) * np.linalg.norm(dI[1]))
    rows = np.vstack([dI] + [dG[l] for l in ells])
    rows = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    sv = np.linalg.svd(rows, compute_uv=False)
    rank = int(np.sum(sv > 1e-8 * sv[0]))
    report.notes["rank"] = rank
    report.notes["expected_rank"] = n + len(ells)
    if rank != n + len(ells):
        report.fail(f"gradient rank {rank} != {n + len(ells)}")
    return report


def verify_euler_field(s: PhaseState, tol: float = 1e-8, h: float = SUITE_H,
                  levels: int = SUITE_LEVELS) -> BracketReport:
    """Uniform translation in x moves every mu and mu~ at unit rate and leaves lambda fixed."""
    check_stencil(s, h)
    tau = calibrated_tau()
    n = s.n
    d = translation_derivative(SPECTRAL_FAMILY, s, h, levels)
    dl, dm, dmt = _split(np.atleast_1d(d), n)
    report = BracketReport("euler", tol)
    report.notes["tau"] = tau
    for i in range(n):
        report.add(i, "lambda", dl[i], 0.0, relation="Y(lambda)")
        report.add(i, "mu", dm[i], tau, relation="Y(mu)")
        report.add(i, "mu~", dmt[i], tau, relation="Y(mu~)")
    return report


def verify_delta_generator(s: PhaseState, lambda_probe: complex, tol: float = 1e-6,
                           h: float = SUITE_H, levels: int = SUITE_LEVELS) -> BracketReport:
    """{Delta(lam), F}_1 = lam {Delta(lam), F}_0 + Delta(lam) {I_1, F}_0 for F = J_1..J_n."""
    pair = build_lax(s)
    lams = np.linalg.eigvals(pair.L)
    if np.min(np.abs(lams - lambda_probe)) < gap_threshold(pair.L):
        raise PreconditionViolation(f"probe {lambda_probe} coincides with an eigenvalue")
    n = s.n
    chart = Chart(s, h, levels=levels)
    dD = gradient(delta_obs(lambda_probe), s, h, levels)
    D = delta_obs(lambda_probe)(s)
    dI1, dJ = chart.T[0], chart.T[n:]
    lhs = chart.bracket1(dD, dJ)[0]
    rhs = lambda_probe * bracket0_grad(dD, dJ)[0] + D * bracket0_grad(dI1, dJ)[0]
    report = BracketReport("delta_generator", tol)
    scale = max(1.0, float(np.max(np.abs(rhs))))
    for k in range(n):
        e = report.add("Delta", f"J_{k + 1}", lhs[k], rhs[k], relation="N* dDelta")
        e["err"] = e["abs_err"] / scale
    return report
