"""Poisson pair on T*gl(n) = gl(n) x gl(n) before reduction.

``P1`` is the Lie-Poisson tensor of the semidirect product with bracket
``[(A1, B1), (A2, B2)] = (B1 A2 - B2 A1, [B1, B2])`` and ``P0`` its freezing
at ``(A, B) = (I, 0)``.  With trace-pairing gradients ``dA f``, ``dB f``
(so ``df = tr(dA f . dA) + tr(dB f . dB)``) the brackets read

    {f, g}_1 = tr(A (dB f dA g - dB g dA f)) + tr(B [dB f, dB g])
    {f, g}_0 = tr(dB f dA g - dB g dA f)

The overall sign is the one for which the reduced invariants
``I_k = tr A^k / k`` and ``J_k = tr A^(k-1) B`` obey ``{J_1, I_1}_0 = n``,
i.e. the same convention as :mod:`calogero.poisson`.

Observables are assumed holomorphic in the matrix entries, so real-step
finite differences give their complex derivatives.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import Degenerate, EvalFailure, IndexOutOfRange, PreconditionViolation
from .fd import richardson
from .serialize import complex_matrix, parse_complex_matrix

LIFT_H = 1e-6


@dataclass(frozen=True, eq=False)
class LiftedPoint:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=complex)
        B = np.array(self.B, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape:
            raise ValueError("A and B must be square matrices of equal size")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise ValueError("non-finite entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.A.ravel(), self.B.ravel()])

    def with_vector(self, v) -> "LiftedPoint":
        n2 = self.n * self.n
        return LiftedPoint(v[:n2].reshape(self.n, self.n), v[n2:].reshape(self.n, self.n))

    def to_dict(self) -> dict:
        return {"n": self.n, "A": complex_matrix(self.A), "B": complex_matrix(self.B)}

    @classmethod
    def from_dict(cls, d: dict) -> "LiftedPoint":
        return cls(parse_complex_matrix(d["A"]), parse_complex_matrix(d["B"]))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "LiftedPoint":
        return cls(rng.normal(size=(n, n)), rng.normal(size=(n, n)))


@dataclass(frozen=True)
class MatrixObservable:
    name: str
    fn: Callable[[LiftedPoint], complex]

    def __call__(self, pt: LiftedPoint) -> complex:
        return self.fn(pt)


def entry_A(i: int, j: int) -> MatrixObservable:
    return MatrixObservable(f"A[{i},{j}]", lambda pt: pt.A[i, j])


def entry_B(i: int, j: int) -> MatrixObservable:
    return MatrixObservable(f"B[{i},{j}]", lambda pt: pt.B[i, j])


def entry_observables(n: int) -> list:
    return [entry_A(i, j) for i in range(n) for j in range(n)] + \
           [entry_B(i, j) for i in range(n) for j in range(n)]


def lift_H(k: int) -> MatrixObservable:
    if k < 1:
        raise IndexOutOfRange("H_k needs k >= 1")
    return MatrixObservable(f"H_{k}", lambda pt: np.trace(np.linalg.matrix_power(pt.A, k)) / k)


lift_I = lift_H


def lift_J(k: int) -> MatrixObservable:
    if k < 1:
        raise IndexOutOfRange("J_k needs k >= 1")
    return MatrixObservable(f"J_{k}", lambda pt: np.trace(np.linalg.matrix_power(pt.A, k - 1) @ pt.B))


def matrix_gradient(f: MatrixObservable, pt: LiftedPoint, h: float = LIFT_H, levels: int = 1):
    """Entrywise derivatives ``(df/dA_ij, df/dB_ij)`` by central differences with one Richardson step."""
    v = pt.as_vector()
    out = np.empty(v.size, dtype=complex)
    try:
        for k in range(v.size):
            hk = h * max(1.0, abs(v[k]))

            def central(step):
                vp = v.copy()
                vm = v.copy()
                vp[k] += step
                vm[k] -= step
                return (f(pt.with_vector(vp)) - f(pt.with_vector(vm))) / (2 * step)

            out[k] = richardson(central, hk, levels)
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        raise EvalFailure(f"{f.name}: {exc}") from exc
    n2 = pt.n * pt.n
    return out[:n2].reshape(pt.n, pt.n), out[n2:].reshape(pt.n, pt.n)


def _pairing_gradient(f, pt, h, levels=1):
    gA, gB = matrix_gradient(f, pt, h, levels)
    return gA.T, gB.T


def lie_poisson(fA, fB, gA, gB, A, B) -> complex:
    """Semidirect-product Lie-Poisson form on trace-pairing gradients."""
    return complex(np.trace(A @ (fB @ gA - gB @ fA)) + np.trace(B @ (fB @ gB - gB @ fB)))


def frozen_form(fA, fB, gA, gB) -> complex:
    return complex(np.trace(fB @ gA - gB @ fA))


def bracket1_lift(f, g, pt: LiftedPoint, h: float = LIFT_H) -> complex:
    fA, fB = _pairing_gradient(f, pt, h)
    gA, gB = _pairing_gradient(g, pt, h)
    return lie_poisson(fA, fB, gA, gB, pt.A, pt.B)


def bracket0_lift(f, g, pt: LiftedPoint, h: float = LIFT_H) -> complex:
    fA, fB = _pairing_gradient(f, pt, h)
    gA, gB = _pairing_gradient(g, pt, h)
    return frozen_form(fA, fB, gA, gB)


def pencil_bracket(f, g, pt: LiftedPoint, lam: float, h: float = LIFT_H) -> complex:
    fA, fB = _pairing_gradient(f, pt, h)
    gA, gB = _pairing_gradient(g, pt, h)
    return frozen_form(fA, fB, gA, gB) + lam * lie_poisson(fA, fB, gA, gB, pt.A, pt.B)


def poisson_tensors(pt: LiftedPoint):
    """Dense matrices ``P[a, b] = {z_a, z_b}`` over coordinates ``z = (A_ij, B_ij)``."""
    n = pt.n
    n2 = n * n
    basis = []
    for a in range(2 * n2):
        E = np.zeros((n, n), dtype=complex)
        i, j = divmod(a % n2, n)
        E[j, i] = 1.0  # trace-pairing gradient of the entry (i, j)
        zero = np.zeros((n, n), dtype=complex)
        basis.append((E, zero) if a < n2 else (zero, E))
    P0 = np.empty((2 * n2, 2 * n2), dtype=complex)
    P1 = np.empty_like(P0)
    for a, (fA, fB) in enumerate(basis):
        for b, (gA, gB) in enumerate(basis):
            P0[a, b] = frozen_form(fA, fB, gA, gB)
            P1[a, b] = lie_poisson(fA, fB, gA, gB, pt.A, pt.B)
    return P0, P1


def _named_bracket(kind: str, f, g, lam: float, h: float) -> MatrixObservable:
    return MatrixObservable(f"{{{f.name},{g.name}}}_{kind}", lambda q: pencil_bracket(f, g, q, lam, h))


def jacobi_check(pencil_lambda: float, pt: LiftedPoint, trials: int = 50,
                 rng: np.random.Generator | None = None, h: float = LIFT_H) -> float:
    """Max |{{f,g},h} + cyclic| for the bracket ``{,}_0 + lam {,}_1`` over sampled coordinate triples."""
    if pt.n > 3:
        raise PreconditionViolation("jacobi_check is capped at n <= 3")
    rng = np.random.default_rng(0) if rng is None else rng
    coords = entry_observables(pt.n)
    worst = 0.0
    for _ in range(trials):
        f, g, k = (coords[i] for i in rng.choice(len(coords), size=3, replace=False))
        total = 0.0
        for a, b, c in ((f, g, k), (g, k, f), (k, f, g)):
            inner = _named_bracket("lam", a, b, pencil_lambda, h)
            total += pencil_bracket(inner, c, pt, pencil_lambda, h)
        worst = max(worst, abs(total))
    return float(worst)


def hierarchy_check(pt: LiftedPoint, k_max: int | None = None, tol: float = 1e-6, h: float = LIFT_H):
    """Hamiltonian field of H_k is (0, A^(k-1)); Lenard chain {f, H_(k+1)}_0 = {f, H_k}_1."""
    from .poisson import BracketReport

    n = pt.n
    k_max = n if k_max is None else k_max
    if not 1 <= k_max <= n:
        raise IndexOutOfRange(f"k_max must lie in 1..{n}")
    report = BracketReport("hierarchy", tol)
    coords = entry_observables(n)
    grads = [_pairing_gradient(f, pt, h) for f in coords]
    H = {k: _pairing_gradient(lift_H(k), pt, h) for k in range(1, k_max + 2)}
    for k in range(1, k_max + 1):
        Ak = np.linalg.matrix_power(pt.A, k - 1)
        HA, HB = H[k]
        HA1, HB1 = H[k + 1]
        for a, (fA, fB) in enumerate(grads):
            field = frozen_form(fA, fB, HA, HB)
            report.add(coords[a].name, k, field, np.trace(fB @ Ak), relation="field")
            lhs = frozen_form(fA, fB, HA1, HB1)
            rhs = lie_poisson(fA, fB, HA, HB, pt.A, pt.B)
            report.add(coords[a].name, k, lhs, rhs, relation="lenard")
    return report


def involution_check(pt: LiftedPoint, tol: float = 1e-6, h: float = LIFT_H):
    from .poisson import BracketReport

    report = BracketReport("lift_involution", tol)
    grads = {k: _pairing_gradient(lift_H(k), pt, h) for k in range(1, pt.n + 1)}
    for j in grads:
        for k in grads:
            if j < k:
                report.add(j, k, frozen_form(*grads[j], *grads[k]), 0.0, relation="H0")
                report.add(j, k, lie_poisson(*grads[j], *grads[k], pt.A, pt.B), 0.0, relation="H1")
    return report


def _cluster(values, tol):
    clusters = []
    for v in sorted(values, key=lambda z: (z.real, z.imag)):
        for c in clusters:
            if abs(v - c[0]) <= tol:
                c.append(v)
                break
        else:
            clusters.append([v])
    return clusters


def nijenhuis_spectrum_check(pt: LiftedPoint, tol: float = 1e-6, gap: float = 1e-6):
    """Spectrum of N* = P0^-1 P1 against spec(A); every eigenvalue must have even multiplicity."""
    from .poisson import BracketReport

    if pt.n > 3:
        raise PreconditionViolation("nijenhuis_spectrum_check is capped at n <= 3")
    P0, P1 = poisson_tensors(pt)
    N = np.linalg.solve(P0, P1)
    nev = np.linalg.eigvals(N)
    aev = np.linalg.eigvals(pt.A)
    a_gap = np.inf
    if aev.size > 1:
        d = np.abs(aev[:, None] - aev[None, :])
        np.fill_diagonal(d, np.inf)
        a_gap = float(d.min())
    degenerate = a_gap < gap
    scale = max(1.0, float(np.max(np.abs(aev))))
    # Nilpotent parts split numerical eigenvalues by ~eps**(1/k); clusters use a looser radius.
    clusters = _cluster(nev, max(1e-4 * scale, 10 * tol))
    report = BracketReport("nijenhuis_spectrum", tol)
    report.notes["degenerate"] = bool(degenerate)
    report.notes["A_min_gap"] = a_gap
    multiplicities = []
    for c in clusters:
        centre = np.mean(c)
        nearest = aev[np.argmin(np.abs(aev - centre))]
        report.add(f"N*:{len(c)}", "spec(A)", centre, nearest, relation="N_in_A")
        multiplicities.append(len(c))
        if len(c) % 2:
            report.fail(f"odd multiplicity {len(c)} at {centre:.6g}")
    for a in aev:
        centres = np.array([np.mean(c) for c in clusters])
        nearest = centres[np.argmin(np.abs(centres - a))]
        report.add("spec(A)", "N*", a, nearest, relation="A_in_N")
    report.notes["multiplicities"] = multiplicities
    return report


def freezing_residual(f, g, pt: LiftedPoint, h: float = LIFT_H) -> float:
    """|bracket0_lift(f, g, pt) - bracket1_lift(f, g, (I, 0))|."""
    frozen = LiftedPoint(np.eye(pt.n), np.zeros((pt.n, pt.n)))
    fA, fB = _pairing_gradient(f, pt, h)
    gA, gB = _pairing_gradient(g, pt, h)
    return abs(frozen_form(fA, fB, gA, gB) - lie_poisson(fA, fB, gA, gB, frozen.A, frozen.B))


def check_lift(pt: LiftedPoint, rng: np.random.Generator, trials: int = 50,
               lambdas=(-2.0, 0.0, 1.0), jacobi_tol: float = 1e-5, tol: float = 1e-6) -> dict:
    """Aggregate of the Jacobi, hierarchy and Nijenhuis-spectrum checks."""
    from .poisson import BracketReport

    jac = BracketReport("pencil_jacobi", jacobi_tol)
    for lam in lambdas:
        jac.add(lam, trials, jacobi_check(lam, pt, trials, rng), 0.0, relation="jacobi")
    return {
        "jacobi": jac,
        "hierarchy": hierarchy_check(pt, tol=tol),
        "involution": involution_check(pt, tol=tol),
        "nijenhuis": nijenhuis_spectrum_check(pt, tol=tol),
    }


def degenerate_guard(pt: LiftedPoint, gap: float = 1e-6):
    aev = np.linalg.eigvals(pt.A)
    d = np.abs(aev[:, None] - aev[None, :])
    np.fill_diagonal(d, np.inf)
    if aev.size > 1 and d.min() < gap:
        raise Degenerate(f"spectrum of A has gap {d.min():.3g}")
