"""Characteristic polynomial, adjugate, spectrum and spectral coordinates.

The adjugate of ``lam - L`` is kept as a matrix polynomial
``adj(lam) = sum_k lam**k M_k`` produced together with the coefficients of
``Delta(lam) = det(lam - L)`` by the Faddeev-LeVerrier recursion.  Two
generating functions are built from it:

    G(lam) = tr(X adj(lam))          E(lam) = x^T adj(lam) e

and evaluated at the eigenvalues of ``L`` they give the conjugate momenta

    mu_i       = G(lam_i) / Delta'(lam_i)
    mu_tilde_i = E(lam_i) / Delta'(lam_i).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DegenerateSpectrum, IdentityViolation, NormalizationFailure
from .phase_core import Coupling, LaxPair

GAP_REL = 1e-6
IDENTITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CharData:
    """Coefficients of det(lam - L) (ascending, monic) and adjugate coefficients M_0..M_{n-1}."""

    delta: np.ndarray
    adj: tuple

    @property
    def n(self) -> int:
        return self.delta.size - 1

    def adjugate(self, lam: complex) -> np.ndarray:
        out = np.zeros_like(self.adj[0])
        for M in reversed(self.adj):
            out = lam * out + M
        return out

    def delta_at(self, lam: complex) -> complex:
        return delta_derivatives(self, lam)[0]


def faddeev_leverrier(L) -> CharData:
    L = np.asarray(L, dtype=complex)
    n = L.shape[0]
    delta = np.zeros(n + 1, dtype=complex)
    delta[n] = 1.0
    adj = [None] * n
    M = np.eye(n, dtype=complex)
    for k in range(n - 1, -1, -1):
        adj[k] = M
        LM = L @ M
        delta[k] = -np.trace(LM) / (n - k)
        M = LM + delta[k] * np.eye(n)
    return CharData(delta, tuple(adj))


def adjugate_residual(char: CharData, L, lam: complex) -> float:
    """Relative residual of ``(lam - L) adj(lam) = Delta(lam) I``."""
    L = np.asarray(L, dtype=complex)
    n = L.shape[0]
    A = lam * np.eye(n) - L
    adj = char.adjugate(lam)
    d = char.delta_at(lam)
    res = np.max(np.abs(A @ adj - d * np.eye(n)))
    scale = max(1.0, abs(d), np.max(np.abs(A)) * np.max(np.abs(adj)))
    return float(res / scale)


def delta_derivatives(char: CharData, lam: complex) -> tuple:
    """(Delta, Delta', Delta'') at ``lam`` by a Horner sweep over the coefficients."""
    d0 = d1 = d2 = 0.0 + 0j
    for a in reversed(char.delta):
        d2 = d2 * lam + 2.0 * d1
        d1 = d1 * lam + d0
        d0 = d0 * lam + a
    return d0, d1, d2


def spectral_order(lams, scale: float = 1.0) -> np.ndarray:
    """Permutation sorting by real part, then imaginary part.

    Real parts equal to within ``1e-9 * scale`` count as ties, so that a
    complex-conjugate pair is ordered by its imaginary part regardless of
    rounding in the real part.
    """
    lams = np.asarray(lams, dtype=complex)
    tol = 1e-9 * max(scale, 1.0)
    by_re = np.argsort(lams.real, kind="stable")
    out = []
    group = [by_re[0]]
    for k in by_re[1:]:
        if lams.real[k] - lams.real[group[0]] <= tol:
            group.append(k)
        else:
            out.extend(sorted(group, key=lambda q: lams.imag[q]))
            group = [k]
    out.extend(sorted(group, key=lambda q: lams.imag[q]))
    return np.array(out, dtype=int)


def min_gap(lams) -> float:
    lams = np.asarray(lams, dtype=complex)
    if lams.size < 2:
        return np.inf
    d = np.abs(lams[:, None] - lams[None, :])
    np.fill_diagonal(d, np.inf)
    return float(d.min())


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Sorted eigenvalues; ``right[:, i]`` and ``left[:, i]`` satisfy
    ``L right_i = lam_i right_i`` and ``left_i^T L = lam_i left_i^T``."""

    lambdas: np.ndarray
    right: np.ndarray
    left: np.ndarray
    min_gap: float
    degenerate: bool


def gap_threshold(L) -> float:
    return GAP_REL * max(1.0, float(np.linalg.norm(L, 2)))


def eigen(L, coupling: Coupling = Coupling.IMAGINARY, gap_tol: float | None = None) -> Spectrum:
    L = np.asarray(L, dtype=complex)
    if coupling is Coupling.IMAGINARY:
        w, V = np.linalg.eigh(L)
        lams = w.astype(complex)
        W = V.conj()
    else:
        lams, W, V = scipy.linalg.eig(L, left=True, right=True)
        W = W.conj()
    scale = float(np.max(np.abs(lams), initial=1.0))
    order = spectral_order(lams, scale)
    lams, V, W = lams[order], V[:, order], W[:, order]
    gap = min_gap(lams)
    tol = gap_threshold(L) if gap_tol is None else gap_tol
    return Spectrum(lams, V, W, gap, bool(gap < tol))


def gen_G(char: CharData, X, lam: complex) -> complex:
    return complex(np.trace(np.asarray(X) @ char.adjugate(lam)))


def gen_E(char: CharData, x, lam: complex) -> complex:
    x = np.asarray(x, dtype=float)
    return complex(x @ char.adjugate(lam) @ np.ones(x.size))


def gen_e_adj_e(char: CharData, lam: complex) -> complex:
    n = char.n
    e = np.ones(n)
    return complex(e @ char.adjugate(lam) @ e)


@dataclass(frozen=True, eq=False)
class SpectralCoords:
    lambdas: np.ndarray
    mu: np.ndarray
    mu_tilde: np.ndarray
    min_gap: float = np.inf
    degenerate: bool = False
    denominator_residual: float = 0.0
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        from .serialize import complex_list

        return {
            "lambda": complex_list(self.lambdas),
            "mu": complex_list(self.mu),
            "mu_tilde": complex_list(self.mu_tilde),
            "min_gap": float(self.min_gap) if np.isfinite(self.min_gap) else None,
            "degenerate": bool(self.degenerate),
        }


def spectral_coords(pair: LaxPair, gap_tol: float | None = None,
                    identity_tol: float = IDENTITY_TOL) -> SpectralCoords:
    """Eigenvalues of ``L`` with DN momenta ``mu`` and Sklyanin momenta ``mu_tilde``.

    Raises :class:`DegenerateSpectrum` when two eigenvalues are closer than the
    gap threshold, and :class:`IdentityViolation` if ``e^T adj(lam_i) e`` and
    ``Delta'(lam_i)`` disagree by more than ``identity_tol`` (relative).
    """
    eig = eigen(pair.L, pair.coupling, gap_tol)
    if eig.degenerate:
        raise DegenerateSpectrum(f"eigenvalue gap {eig.min_gap:.3g} below threshold")
    char = faddeev_leverrier(pair.L)
    x = pair.x
    n = pair.n
    mu = np.empty(n, dtype=complex)
    mu_t = np.empty(n, dtype=complex)
    worst = 0.0
    for i, lam in enumerate(eig.lambdas):
        adj = char.adjugate(lam)
        d1 = delta_derivatives(char, lam)[1]
        eae = adj.sum()
        worst = max(worst, abs(eae - d1) / abs(d1))
        mu[i] = np.trace(pair.X @ adj) / d1
        mu_t[i] = (x @ adj).sum() / d1
    if worst > identity_tol:
        raise IdentityViolation(f"e^T adj e differs from Delta' by {worst:.3g} (relative)")
    return SpectralCoords(eig.lambdas, mu, mu_t, eig.min_gap, False, worst)


def eigenvector_coords(pair: LaxPair, gap_tol: float | None = None) -> np.ndarray:
    """Sklyanin momenta from eigenvectors: ``(x . psi_i) / (e . psi_i)``."""
    eig = eigen(pair.L, pair.coupling, gap_tol)
    if eig.degenerate:
        raise DegenerateSpectrum(f"eigenvalue gap {eig.min_gap:.3g} below threshold")
    V = eig.right
    num = pair.x @ V
    den = V.sum(axis=0)
    norms = np.linalg.norm(V, axis=0)
    if np.any(np.abs(den) < 1e-12 * norms):
        raise NormalizationFailure("eigenvector orthogonal to e")
    return num / den


def conjecture_residual(pair: LaxPair, probes, scale_by_c: bool = False) -> float:
    """max over probes of |E - G - k Delta''/2| / max(1, |Delta''|), k = 1 or c."""
    char = faddeev_leverrier(pair.L)
    k = pair.coupling.c if scale_by_c else 1.0
    worst = 0.0
    for lam in probes:
        d2 = delta_derivatives(char, lam)[2]
        r = gen_E(char, pair.x, lam) - gen_G(char, pair.X, lam) - 0.5 * k * d2
        worst = max(worst, abs(r) / max(1.0, abs(d2)))
    return float(worst)


def default_probes(pair: LaxPair) -> list:
    s = max(1.0, float(np.max(np.abs(np.linalg.eigvals(pair.L)))))
    return [0.0, 0.5 * s, -s, 1j * s, 0.3 + 0.7j, 1.5 * s - 0.25j]
