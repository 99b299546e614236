"""Zeros of b in the open upper half-plane and their residue data.

These spectral points generate the solitons riding on the oscillatory
background in the tail region; zeros of a are irrelevant there and are not
searched for.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousMatch, AssumptionViolated, BoundaryZero
from .numerics import complex_newton, count_zeros_rect
from .scattering import ScatteringData

logger = logging.getLogger(__name__)

_IM_FLOOR = 1e-4      # zeros below this would violate the off-axis assumption
_MAX_SUBDIV = 14


@dataclass(frozen=True)
class SolitonSpectrum:
    """Zeros k_j (Im k_j > 0, |k_j| ascending), residues and velocities."""

    zeros: tuple[complex, ...]
    residues: tuple[complex, ...]       # gamma_j = 1/(a(k_j) * bdot(k_j))
    velocities: tuple[float, ...]       # 4|k_j|^2 / (1 + 4|k_j|^2), in (0, 1)
    box: tuple[float, float, float, float] = field(default=(0.0, 0.0, 0.0, 0.0))

    def __len__(self):
        return len(self.zeros)

    def default_match_eps(self) -> float:
        """Half the minimal velocity gap; 0.02 when fewer than two solitons."""
        if len(self.velocities) < 2:
            return 0.02
        gaps = np.diff(sorted(self.velocities))
        return 0.5 * float(np.min(gaps))


def velocity_of(k: complex) -> float:
    q = 4.0 * abs(k) ** 2
    return q / (1.0 + q)


def _cell_count(sd: ScatteringData, cell, root_tol):
    """Winding count on a cell, nudging the cell when a zero grazes it."""
    re_lo, re_hi, im_lo, im_hi = cell
    f = lambda k: sd.ab(k)[1]
    for attempt in range(6):
        try:
            return count_zeros_rect(f, (re_lo, re_hi, im_lo, im_hi), root_tol), \
                (re_lo, re_hi, im_lo, im_hi)
        except BoundaryZero:
            pad = (re_hi - re_lo) * 1e-3 * (attempt + 1)
            re_lo -= pad
            re_hi += pad
            im_lo = max(_IM_FLOOR * 0.5, im_lo - pad)
            im_hi += pad
    raise BoundaryZero(f"could not clear the boundary of cell {cell}")


def find_zeros(sd: ScatteringData,
               box: tuple[float, float, float, float] | None = None,
               root_tol: float | None = None) -> SolitonSpectrum:
    """Locate all zeros of b inside ``box`` (re_lo, re_hi, im_lo, im_hi).

    Quadtree subdivision by the argument principle until each cell holds at
    most one zero, then Newton refinement with the variational derivative.
    Raises AssumptionViolated when the found zeros are not simple, touch the
    real line, or have coinciding moduli.
    """
    root_tol = root_tol if root_tol is not None else sd.tol.root_tol
    if box is None:
        box = default_search_box(sd)
    re_lo, re_hi, im_lo, im_hi = box
    im_lo = max(im_lo, _IM_FLOOR)
    if im_hi <= im_lo:
        raise ValueError("search box must lie in Im k > 0")

    total, cell0 = _cell_count(sd, (re_lo, re_hi, im_lo, im_hi), root_tol)
    if total == 0:
        return SolitonSpectrum((), (), (), box=box)

    zeros: list[complex] = []
    stack = [(cell0, total, 0)]
    while stack:
        cell, count, depth = stack.pop()
        if count == 0:
            continue
        if count == 1:
            zeros.append(_refine_zero(sd, cell, root_tol))
            continue
        if depth >= _MAX_SUBDIV:
            raise AssumptionViolated(
                f"cell {cell} still holds {count} zeros at max subdivision; "
                "zeros are clustered or multiple")
        lo_re, hi_re, lo_im, hi_im = cell
        if hi_re - lo_re >= hi_im - lo_im:
            mid = 0.5 * (lo_re + hi_re)
            halves = [(lo_re, mid, lo_im, hi_im), (mid, hi_re, lo_im, hi_im)]
        else:
            mid = 0.5 * (lo_im + hi_im)
            halves = [(lo_re, hi_re, lo_im, mid), (lo_re, hi_re, mid, hi_im)]
        for half in halves:
            c, half_adj = _cell_count(sd, half, root_tol)
            stack.append((half_adj, c, depth + 1))

    # Cell perturbation can make siblings overlap; drop duplicate refinements.
    unique: list[complex] = []
    for z in zeros:
        if all(abs(z - u) > 1e-8 * max(1.0, abs(z)) for u in unique):
            unique.append(z)
    zeros = unique
    if len(zeros) != total:
        raise AssumptionViolated(
            f"argument principle counts {total} zeros but {len(zeros)} were "
            "refined; a zero is grazing a cell boundary")

    zeros.sort(key=abs)
    _validate(sd, zeros, root_tol)

    residues = []
    for k in zeros:
        a, _, _, bdot = sd.ab_and_derivs_many([k])
        residues.append(1.0 / (complex(a[0]) * complex(bdot[0])))
    velocities = [velocity_of(k) for k in zeros]
    return SolitonSpectrum(tuple(zeros), tuple(residues), tuple(velocities),
                           box=box)


def _refine_zero(sd: ScatteringData, cell, root_tol) -> complex:
    seed = complex(0.5 * (cell[0] + cell[1]), 0.5 * (cell[2] + cell[3]))
    return complex_newton(lambda k: sd.ab(k)[1], sd.b_deriv, seed, root_tol)


def _validate(sd: ScatteringData, zeros, root_tol):
    for k in zeros:
        if k.imag <= 1e-8:
            raise AssumptionViolated(f"zero {k} touches the real line")
        bdot = sd.b_deriv(k)
        if abs(bdot) <= 1e-10:
            raise AssumptionViolated(f"zero {k} is not simple: |bdot| = {abs(bdot):.2e}")
    mods = [abs(k) for k in zeros]
    for m1, m2 in zip(mods[:-1], mods[1:]):
        if (m2 - m1) / max(m2, 1e-300) <= 1e-6:
            raise AssumptionViolated(
                f"moduli {m1} and {m2} are not pairwise distinct")


def default_search_box(sd: ScatteringData, halfwidth_start: float = 4.0,
                       halfwidth_cap: float = 16.0) -> tuple[float, float, float, float]:
    """Grow a symmetric box until |b| on its far edges is negligible
    compared to the real-line maximum of |b|.

    b can decay as slowly as 1/k, so the growth is capped: zeros of b for a
    compact pulse cluster at spectral scales set by the pulse itself, and
    callers probing farther should pass an explicit box.
    """
    ks, _, b = sd._cache_arrays()
    ceiling = 1e-3 * float(np.max(np.abs(b)))
    K = halfwidth_start
    while True:
        edge = []
        n = 33
        top = np.linspace(-K, K, n) + 1j * K
        left = -K + 1j * np.linspace(_IM_FLOOR, K, n)
        right = K + 1j * np.linspace(_IM_FLOOR, K, n)
        for seg in (top, left, right):
            _, bv = sd.ab_many(seg)
            edge.append(float(np.max(np.abs(bv))))
        if max(edge) < ceiling:
            return (-K, K, _IM_FLOOR, K)
        if K * 1.6 > halfwidth_cap:
            logger.info("search box capped at halfwidth %.1f (|b| decays "
                        "slowly); zeros beyond are not reported", K)
            return (-K, K, _IM_FLOOR, K)
        K *= 1.6


def velocity_match(spec: SolitonSpectrum, t: float, x: float,
                   eps: float | None = None) -> int | None:
    """Index j of the unique soliton with |x/t - v_j| < eps, or None."""
    if eps is None:
        eps = spec.default_match_eps()
    ratio = x / t
    hits = [j for j, v in enumerate(spec.velocities) if abs(ratio - v) < eps]
    if not hits:
        return None
    if len(hits) > 1:
        raise AmbiguousMatch(
            f"velocities {[spec.velocities[j] for j in hits]} all within "
            f"{eps} of x/t = {ratio}; shrink eps")
    return hits[0]
