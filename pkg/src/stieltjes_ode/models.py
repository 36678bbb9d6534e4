"""Benchmark problems: the linear family and the silkworm population model.

The silkworm model runs on the staged periodic driver of
:func:`~stieltjes_ode.derivator.make_silkworm_derivator`.  Each 5-unit
period covers worms, cocoons, moths and eggs; the population decays at rate
``c`` while alive, is wiped out by the unit jump at ``5k+4`` (moths die
after laying eggs), and restarts at the unit jump at ``5(k+1)`` with
``lambda`` times the integral of the previous generation over its life span
``[5(k-1), 5k-1]``.  That delay integral is what makes the right-hand side
functional: it reads the trajectory computed so far.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .derivator import _silkworm_base
from .solver import IvpSpec, TrajectoryHistory

__all__ = [
    "SilkwormParams",
    "silkworm_rhs",
    "silkworm_rhs_right",
    "make_silkworm_spec",
    "SilkwormSolution",
    "silkworm_exact",
    "make_linear_spec",
]


@dataclass(frozen=True)
class SilkwormParams:
    """Decay rate ``c``, fecundity ``lam``, initial population and horizon.

    ``lam = 0`` is allowed as the degenerate no-reproduction case (the
    population dies out after the first cycle); negative rates are not.
    """

    c: float
    lam: float
    x0: float
    T: float = 10.0

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError(f"decay rate c must be positive, got {self.c}")
        if self.lam < 0:
            raise ValueError(f"fecundity lam must be nonnegative, got {self.lam}")


def _stage_indices(t: float, step: float):
    """Node index of ``t`` modulo one period, in exact integer arithmetic.

    Requires ``5/step`` (hence ``4/step``) to be an integer, which the grid
    construction enforces for the silkworm driver; this avoids any float
    comparison against the stage boundaries ``5k`` and ``5k+4``.
    """
    m = int(round(t / step))
    per = int(round(5.0 / step))
    moth = int(round(4.0 / step))
    return m, m % per, moth


def silkworm_rhs(t: float, x: float, history: TrajectoryHistory,
                 params: SilkwormParams) -> float:
    """Staged right-hand side: decay, moth death, or hatch integral."""
    m, r, moth = _stage_indices(t, history.step)
    if m > 0 and r == 0:
        return params.lam * history.integral(t - 5.0, t - 1.0)
    if r == moth:
        return -x
    return -params.c * x


def silkworm_rhs_right(t: float, x: float, history: TrajectoryHistory,
                       params: SilkwormParams) -> float:
    """Right limit of the right-hand side.

    Just after a hatch or moth-death time the population is back in the
    decay regime, and everywhere else the stage does not change from the
    right, so this is plain decay.  (At moth-death times the value is
    irrelevant anyway: the driver is flat there, so the predictor and
    corrector weights vanish.)
    """
    return -params.c * x


def make_silkworm_spec(params: SilkwormParams) -> IvpSpec:
    """Bundle the staged right-hand side into a solver spec."""
    return IvpSpec(
        rhs=lambda t, x, hist: silkworm_rhs(t, x, hist, params),
        rhs_right=lambda t, x, hist: silkworm_rhs_right(t, x, hist, params),
        x0=params.x0,
    )


def _simpson(fn, lo: float, hi: float, n: int) -> float:
    """Composite Simpson with ``n`` (even) subintervals."""
    if n % 2:
        n += 1
    xs = np.linspace(lo, hi, n + 1)
    ys = fn(xs)
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float((hi - lo) / (3.0 * n) * np.dot(w, ys))


class SilkwormSolution:
    """Exact population path, evaluated generation by generation.

    Generation 0 decays from ``x0``; each later generation starts at
    ``lam`` times the time integral of its parent over the parent's life
    span and decays along the driver from there; the population is zero in
    every egg phase.  The per-generation life-span integral is a single
    quadrature (the driver repeats with period 5), computed by composite
    Simpson refined until two successive refinements agree to 1e-10.
    """

    def __init__(self, params: SilkwormParams, resolution: int = 1000):
        self.params = params
        base = _silkworm_base
        decay = lambda s: np.exp(-params.c * base(s))
        n = max(8, 4 * int(resolution))
        value = _simpson(decay, 0.0, 4.0, n)
        for _ in range(24):
            n *= 2
            refined = _simpson(decay, 0.0, 4.0, n)
            if abs(refined - value) <= 1e-10:
                value = refined
                break
            value = refined
        else:
            raise RuntimeError("life-span quadrature did not stabilize")
        self._decay_mass = value  # integral of exp(-c g) over one life span
        n_gen = int(math.floor(params.T / 5.0)) + 1
        amps = [params.x0]
        for _ in range(n_gen):
            amps.append(params.lam * amps[-1] * self._decay_mass)
        self._amps = np.array(amps)
        self._base = base

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        k = np.floor(arr / 5.0).astype(int)
        offset = arr - 5.0 * k
        out = np.zeros_like(arr)
        alive = (offset <= 4.0) & ((offset > 0.0) | (k == 0))
        if np.any(alive):
            amps = self._amps[np.minimum(k[alive], len(self._amps) - 1)]
            out[alive] = amps * np.exp(-self.params.c * self._base(offset[alive]))
        return float(out[0]) if scalar else out

    def right(self, t):
        """Right limit: zero after moth death, a fresh hatch after ``5k``."""
        arr = np.asarray(t, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        out = np.asarray(self(arr), dtype=float).copy()
        k = np.round(arr / 5.0).astype(int)
        hatch = (arr == 5.0 * k) & (k >= 1)
        out[hatch] = self._amps[np.minimum(k[hatch], len(self._amps) - 1)]
        died = arr == 5.0 * np.floor(arr / 5.0) + 4.0
        out[died] = 0.0
        return float(out[0]) if scalar else out

    def generation_start(self, k: int) -> float:
        """Population right after the hatch at ``t = 5k``."""
        return float(self._amps[k])


def silkworm_exact(t, params: SilkwormParams, resolution: int = 1000):
    """Convenience wrapper building a fresh :class:`SilkwormSolution`."""
    return SilkwormSolution(params, resolution)(t)


def make_linear_spec(d: float, x0: float) -> IvpSpec:
    """Solver spec for the homogeneous linear benchmark ``x'_g = -d x``."""
    return IvpSpec(rhs=lambda t, x, hist: -d * x, x0=x0)
