"""JSON helpers: complex numbers travel as ``[re, im]`` pairs."""
import numpy as np


def complex_pair(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def complex_list(values) -> list:
    return [complex_pair(z) for z in np.asarray(values).reshape(-1)]


def complex_matrix(M) -> list:
    return [complex_list(row) for row in np.asarray(M)]


def parse_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        re, im = v
        return complex(float(re), float(im))
    return complex(v)


def parse_complex_matrix(rows) -> np.ndarray:
    return np.array([[parse_complex(v) for v in row] for row in rows], dtype=complex)
