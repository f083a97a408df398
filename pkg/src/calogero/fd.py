"""Central differences with Richardson extrapolation."""
import numpy as np


def richardson(central, h: float, levels: int = 1):
    """Extrapolate ``central(step)`` (error even in ``step``) towards ``step -> 0``.

    Evaluates at ``h, h/2, ..., h/2**levels`` and eliminates the leading
    ``levels`` error terms; ``levels=1`` is ``(4 D(h/2) - D(h)) / 3``.
    """
    table = [np.asarray(central(h / 2 ** i)) for i in range(levels + 1)]
    for lev in range(1, levels + 1):
        w = 4.0 ** lev
        table = [(w * table[i + 1] - table[i]) / (w - 1) for i in range(len(table) - 1)]
    return table[0]
