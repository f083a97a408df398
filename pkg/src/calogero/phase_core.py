"""Phase-space states and Calogero-Moser Lax pairs.

A state holds ``n`` particle positions ``x`` and momenta ``p`` together with a
coupling choice ``c``.  The Lax pair built from it is

    L_ii = p_i,   L_ij = c / (x_i - x_j)  (i != j),   X = diag(x),

and the physical coupling constant of the inverse-square potential is
``g = -c**2``.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .errors import NotCMPair, PositionCollision

EPS_POS = 1e-10
TAU_LAX = 1e-8


class Coupling(enum.Enum):
    REAL = "real"
    IMAGINARY = "imaginary"

    @property
    def c(self) -> complex:
        return 1.0 + 0j if self is Coupling.REAL else 1j

    @property
    def g(self) -> float:
        return float(-(self.c * self.c).real)

    @classmethod
    def parse(cls, value) -> "Coupling":
        if isinstance(value, Coupling):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown coupling {value!r}; expected 'real' or 'imaginary'") from None


def _min_separation(x: np.ndarray) -> float:
    if x.size < 2:
        return np.inf
    return float(np.min(np.diff(np.sort(x))))


@dataclass(frozen=True, eq=False)
class PhaseState:
    x: np.ndarray
    p: np.ndarray
    coupling: Coupling = Coupling.IMAGINARY
    eps_pos: float = EPS_POS

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        p = np.array(self.p, dtype=float).reshape(-1)
        if x.size < 1:
            raise ValueError("need at least one particle")
        if x.shape != p.shape:
            raise ValueError(f"x and p differ in length ({x.size} vs {p.size})")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
            raise ValueError("non-finite coordinates")
        x.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "coupling", Coupling.parse(self.coupling))
        gap = _min_separation(x)
        if gap <= self.eps_pos:
            raise PositionCollision(f"particles closer than {self.eps_pos:g} (min separation {gap:.3g})")

    @property
    def n(self) -> int:
        return self.x.size

    def as_vector(self) -> np.ndarray:
        """Phase-space point as the 2n-vector (x_1..x_n, p_1..p_n)."""
        return np.concatenate([self.x, self.p])

    def with_vector(self, u) -> "PhaseState":
        u = np.asarray(u, dtype=float)
        return PhaseState(u[: self.n], u[self.n:], self.coupling, self.eps_pos)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "coupling": self.coupling.value,
            "x": [float(v) for v in self.x],
            "p": [float(v) for v in self.p],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PhaseState":
        try:
            x, p = d["x"], d["p"]
            coupling = Coupling.parse(d.get("coupling", "imaginary"))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed PhaseState: {exc}") from None
        if "n" in d and int(d["n"]) != len(x):
            raise ValueError(f"n={d['n']} does not match len(x)={len(x)}")
        return cls(x, p, coupling)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PhaseState":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class LaxPair:
    L: np.ndarray
    X: np.ndarray
    coupling: Coupling = Coupling.IMAGINARY

    @property
    def n(self) -> int:
        return self.L.shape[0]

    @property
    def x(self) -> np.ndarray:
        return np.real(np.diag(self.X)).copy()


def build_lax(state: PhaseState) -> LaxPair:
    x = state.x
    if _min_separation(x) <= state.eps_pos:
        raise PositionCollision("position collision")
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    L = state.coupling.c / diff
    np.fill_diagonal(L, state.p)
    return LaxPair(L.astype(complex), np.diag(x), state.coupling)


def hamiltonian(state: PhaseState) -> float:
    """Kinetic energy plus ``g * sum_{i<j} (x_i - x_j)**-2``."""
    x = state.x
    i, j = np.triu_indices(state.n, k=1)
    potential = np.sum(1.0 / (x[i] - x[j]) ** 2)
    return 0.5 * float(np.dot(state.p, state.p)) + state.coupling.g * float(potential)


def commutation_residual(pair: LaxPair, lam: complex = 0.0) -> float:
    """Max-entry norm of ``[lam - L, X] - c (e e^T - I)``."""
    n = pair.n
    M = lam * np.eye(n) - pair.L
    comm = M @ pair.X - pair.X @ M
    target = pair.coupling.c * (np.ones((n, n)) - np.eye(n))
    return float(np.max(np.abs(comm - target)))


def recover_state(pair: LaxPair, tau: float = TAU_LAX) -> PhaseState:
    """Invert :func:`build_lax`, inferring the coupling from ``L_12 (x_1 - x_2)``.

    With a single particle nothing fixes ``c``; IMAGINARY is returned.
    """
    L = np.asarray(pair.L, dtype=complex)
    X = np.asarray(pair.X)
    n = L.shape[0]
    if L.shape != (n, n) or X.shape != (n, n):
        raise NotCMPair("L and X must be square of equal size")
    if np.max(np.abs(X - np.diag(np.diag(X)))) > tau:
        raise NotCMPair("X is not diagonal")
    x = np.real(np.diag(X)).astype(float)
    diag = np.diag(L)
    if np.max(np.abs(diag.imag), initial=0.0) > tau:
        raise NotCMPair("diagonal of L is not real")
    p = diag.real.copy()
    if n == 1:
        return PhaseState(x, p, Coupling.IMAGINARY)
    if _min_separation(x) <= EPS_POS:
        raise PositionCollision("position collision")
    w = L[0, 1] * (x[0] - x[1])
    coupling = Coupling.REAL if (w * w).real > 0 else Coupling.IMAGINARY
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    expected = coupling.c / diff
    off = ~np.eye(n, dtype=bool)
    dev = np.abs(L - expected)[off]
    scale = np.maximum(1.0, np.abs(expected[off]))
    if np.any(dev > tau * scale):
        raise NotCMPair(f"off-diagonal entries deviate from c/(x_i - x_j) by up to {dev.max():.3g}")
    return PhaseState(x, p, coupling)


def random_state(n: int, rng: np.random.Generator, coupling=Coupling.IMAGINARY,
                 min_gap: float = 0.2) -> PhaseState:
    """Sorted positions uniform on [-n, n] at least ``min_gap`` apart, momenta uniform on [-1, 1]."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if min_gap * (n - 1) >= 2 * n:
        raise ValueError(f"cannot fit {n} particles {min_gap} apart in [-{n}, {n}]")
    while True:
        x = np.sort(rng.uniform(-n, n, n))
        if n == 1 or np.min(np.diff(x)) >= min_gap:
            break
    return PhaseState(x, rng.uniform(-1.0, 1.0, n), coupling)
