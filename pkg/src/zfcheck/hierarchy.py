"""Conserved charges built from the boundary generators.

H(n) sums k^n at†_i(k) at_i(k) over the grid and the colors.  On a
negation-symmetric grid the odd orders cancel exactly (each +k term
telescopes against its -k partner through the reflection-twisted identity),
the even orders preserve particle number, commute with one another and with
every reflection generator, and act on the dressed one-particle states
at†(k) vacuum with eigenvalue k^n.  Every one of those statements is checked
numerically here; none is assumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .boundary import BoundaryContext
from .fock import FockState, states_equal
from .rmatrix import Residual, eval_b
from .vertex import _max_residual

# Particle headroom per relation beyond the sample's sector.  Applying a
# charge never raises the count (the lowering leg acts first), so only the
# eigenrelation check, which creates before applying the charge, needs room.
RELATION_HEADROOM = {
    "H-odd": 0,
    "H-eigen": 1,
    "H-commute": 0,
    "H-iom": 0,
    "ssb": 0,
}


@dataclass(frozen=True)
class HierarchyOperator:
    """One charge of fixed order, bound to a boundary context."""

    order: int
    ctx: BoundaryContext

    def __call__(self, state: FockState) -> FockState:
        return apply_H(self.ctx, self.order, state)


def apply_H(ctx: BoundaryContext, n: int, state: FockState) -> FockState:
    """Apply sum over grid k, colors i of k^n at†_i(k) at_i(k)."""
    if n < 0:
        raise ValueError(f"hierarchy order must be nonnegative, got {n}")
    terms: list[tuple[complex, FockState]] = []
    for k in ctx.grid:
        weight = complex(k**n)
        if weight == 0:
            continue
        for i in range(ctx.N):
            lowered = ctx.apply_a_tilde(i, k, state)
            if lowered.is_zero():
                continue
            terms.append((weight, ctx.apply_a_tilde_dagger(i, k, lowered)))
    return FockState.combine(terms).pruned(ctx.space.prune)


def check_flow_commutes(
    ctx: BoundaryContext, n: int, m: int, samples: Sequence[FockState]
) -> Residual:
    """Residual of H(n) H(m) s - H(m) H(n) s over samples."""
    vals = []
    for s in samples:
        lhs = apply_H(ctx, n, apply_H(ctx, m, s))
        rhs = apply_H(ctx, m, apply_H(ctx, n, s))
        vals.append((lhs - rhs).maxamp())
    return _max_residual(vals, {"relation": "H-commute", "orders": (n, m)})


def check_integrals_of_motion(
    ctx: BoundaryContext, n: int, k: float, samples: Sequence[FockState]
) -> Residual:
    """Residual of the entrywise commutator [H(n), b(k)] on samples."""
    vals = []
    for s in samples:
        hs = apply_H(ctx, n, s)
        b_then_h = ctx.vertex.apply_b(k, s)
        dev = 0.0
        h_of_b = np.empty((ctx.N, ctx.N), dtype=object)
        for i in range(ctx.N):
            for j in range(ctx.N):
                h_of_b[i, j] = apply_H(ctx, n, b_then_h[i, j])
        b_of_h = ctx.vertex.apply_b(k, hs)
        for i in range(ctx.N):
            for j in range(ctx.N):
                _, d = states_equal(h_of_b[i, j], b_of_h[i, j], tol=0.0)
                dev = max(dev, d)
        vals.append(dev)
    return _max_residual(vals, {"relation": "H-iom", "order": n, "momenta": (k,)})


@dataclass(frozen=True)
class SymmetryBreakingReport:
    """Vacuum test of the reflection generators plus the surviving-symmetry list."""

    residual: Residual
    broken: tuple[tuple[int, int], ...]
    expectations: dict


def check_symmetry_breaking(
    ctx: BoundaryContext, expectation_tol: float = 1e-13
) -> SymmetryBreakingReport:
    """Measure b(k) on the vacuum against the numeric reflection matrix.

    The residual compares every component of b(k) vacuum with B_ij(k) times
    the vacuum, over the whole grid.  The broken-generator list collects the
    index pairs (i, j) whose vacuum expectation is nonzero for some grid k:
    those components act on the vacuum with a nonvanishing value, so the
    symmetry they generate does not fix it.
    """
    vac = ctx.space.vacuum()
    worst = 0.0
    broken: set[tuple[int, int]] = set()
    expectations: dict = {}
    for k in ctx.grid:
        got = ctx.vertex.apply_b(k, vac)
        bmat = eval_b(ctx.vertex.reflection, k)
        for i in range(ctx.N):
            for j in range(ctx.N):
                want = vac.scaled(complex(bmat[i, j]))
                _, d = states_equal(got[i, j], want, tol=0.0)
                worst = max(worst, d)
                expect = got[i, j].amps.get((), 0j)
                expectations[(i, j, k)] = expect
                if abs(expect) > expectation_tol:
                    broken.add((i, j))
    residual = Residual(worst, {"relation": "ssb", "momenta": tuple(ctx.grid)})
    return SymmetryBreakingReport(
        residual=residual, broken=tuple(sorted(broken)), expectations=expectations
    )


def check_eigenrelations(
    ctx: BoundaryContext,
    n: int,
    k: float,
    samples: Sequence[FockState] | None = None,
) -> Residual:
    """Commutator spectrum test for one order and one grid momentum.

    Even orders must satisfy [H(n), at†(k)] = k^n at†(k) and
    [H(n), at(k)] = -k^n at(k) on samples.  Odd orders vanish identically,
    so their commutators must vanish too (eigenvalue 0).
    """
    ctx.grid.index_of(k)
    if samples is None:
        samples = [ctx.space.vacuum()]
    lam = complex(k**n) if n % 2 == 0 else 0j
    vals = []
    for s in samples:
        for i in range(ctx.N):
            raised = ctx.apply_a_tilde_dagger(i, k, s)
            lhs = apply_H(ctx, n, raised) - ctx.apply_a_tilde_dagger(
                i, k, apply_H(ctx, n, s)
            )
            vals.append((lhs - raised.scaled(lam)).maxamp())
            lowered = ctx.apply_a_tilde(i, k, s)
            lhs = apply_H(ctx, n, lowered) - ctx.apply_a_tilde(
                i, k, apply_H(ctx, n, s)
            )
            vals.append((lhs - lowered.scaled(-lam)).maxamp())
    return _max_residual(
        vals, {"relation": "H-eigen", "order": n, "momenta": (k,)}
    )


def check_odd_vanishing(
    ctx: BoundaryContext, n: int, samples: Sequence[FockState]
) -> Residual:
    """Residual of H(n) s = 0 for odd n over samples."""
    if n % 2 == 0:
        raise ValueError(f"odd-order check called with even order {n}")
    vals = [apply_H(ctx, n, s).maxamp() for s in samples]
    return _max_residual(vals, {"relation": "H-odd", "order": n})


def one_particle_matrix(ctx: BoundaryContext, n: int) -> tuple[np.ndarray, list]:
    """Dense matrix of H(n) on the one-particle sector, plus the basis words."""
    words = ctx.space.canonical_words(1)
    index = {w: t for t, w in enumerate(words)}
    dim = len(words)
    mat = np.zeros((dim, dim), dtype=complex)
    for col, w in enumerate(words):
        image = apply_H(ctx, n, ctx.space.basis_state(w))
        for nw, a in image.amps.items():
            mat[index[nw], col] = a
    return mat, words
