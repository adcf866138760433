"""Vertex operator T(k), its inverse, and the dressed reflection operator b(k).

T(k0) is pinned down by three facts: it fixes the vacuum, it intertwines
creation operators as ``T_0 a†_1 = a†_1 R_01 T_0``, and it is invertible.
Pushing T through a canonical word letter by letter turns those facts into a
closed form: on a word with momenta (k_1, ..., k_n) the operator acts on the
colors alone, through the chain matrix

    C(k0; k_1..k_n) = R_01(k0, k_1) R_02(k0, k_2) ... R_0n(k0, k_n)

living on the (n+1)-leg space (aux leg 0, then one leg per letter).  Entry
(i, l) of the resulting AuxState is the contraction of C against the aux pair
(i, l) and the word's colors.  The inverse uses the reversed product of
unitarity inverses, R_0j(k0, k_j)^-1 = P R(k_j, k0) P lifted to the same
legs.  b(k) composes the three maps T(k), B(k), T(-k)^-1 on the aux leg, so
each word again picks up a single cached matrix.

Chain matrices depend only on (k0, momentum tuple), never on colors, and are
cached per context.  Everything here is pure: states in, states out.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import NotWhitelistedError
from .fock import AuxState, FockSpace, FockState, Word
from .relations import CoVec, OpMat, RMat, Vec, identity_residual
from .rmatrix import (
    Residual,
    ReflectionMatrixSpec,
    WhitelistReport,
    eval_b,
    eval_r,
    lift_pair,
    perm_conj,
    whitelist_reflection,
)

_TINY = 1e-300  # drop exact-zero matrix entries only

# Extra particle headroom each relation needs on top of the sample's sector
# (worst intermediate particle count above the input).
RELATION_HEADROOM = {
    "defT-a": 0,
    "defT-adag": 1,
    "rtt": 0,
    "T-inverse": 0,
    "eq:ab": 0,
    "eq:bad": 1,
    "eq:bb": 0,
    "rbrb": 0,
}

ResidualFn = Callable[[FockState], float]


class VertexContext:
    """Carries the Fock space, the reflection family, and the chain caches."""

    def __init__(
        self,
        space: FockSpace,
        reflection: ReflectionMatrixSpec,
        whitelist_tol: float = 1e-10,
    ):
        if reflection.N != space.N:
            raise ValueError(
                f"reflection matrix dimension {reflection.N} != R-matrix dimension {space.N}"
            )
        self.space = space
        self.reflection = reflection
        self.N = space.N
        self.grid = space.grid
        self.whitelist: WhitelistReport = whitelist_reflection(
            space.r, reflection, space.grid.momenta, whitelist_tol
        )
        self._chains: dict[tuple[float, tuple[int, ...]], np.ndarray] = {}
        self._chains_inv: dict[tuple[float, tuple[int, ...]], np.ndarray] = {}
        self._bmats: dict[tuple[float, tuple[int, ...]], np.ndarray] = {}

    # -- cached matrices ------------------------------------------------------

    def chain(self, k0: float, gs: tuple[int, ...]) -> np.ndarray:
        key = (float(k0), gs)
        mat = self._chains.get(key)
        if mat is None:
            n = len(gs)
            dim = self.N ** (n + 1)
            mat = np.eye(dim, dtype=complex)
            for j, g in enumerate(gs):
                factor = lift_pair(
                    eval_r(self.space.r, k0, self.grid.value(g)), n + 1, 0, j + 1, self.N
                )
                mat = mat @ factor
            self._chains[key] = mat
        return mat

    def chain_inv(self, k0: float, gs: tuple[int, ...]) -> np.ndarray:
        key = (float(k0), gs)
        mat = self._chains_inv.get(key)
        if mat is None:
            n = len(gs)
            dim = self.N ** (n + 1)
            mat = np.eye(dim, dtype=complex)
            for j in range(n - 1, -1, -1):
                inv_factor = perm_conj(
                    eval_r(self.space.r, self.grid.value(gs[j]), k0), self.N
                )
                mat = mat @ lift_pair(inv_factor, n + 1, 0, j + 1, self.N)
            self._chains_inv[key] = mat
        return mat

    def b_matrix(self, k: float, gs: tuple[int, ...]) -> np.ndarray:
        """Word-level matrix of b(k) = T(k) B(k) T(-k)^-1 on (aux, colors)."""
        key = (float(k), gs)
        mat = self._bmats.get(key)
        if mat is None:
            n = len(gs)
            bfac = np.kron(eval_b(self.reflection, k), np.eye(self.N**n, dtype=complex))
            mat = self.chain(k, gs) @ bfac @ self.chain_inv(-k, gs)
            self._bmats[key] = mat
        return mat

    # -- closed-form applications ---------------------------------------------

    def _color_code(self, colors: Sequence[int]) -> int:
        code = 0
        for c in colors:
            code = code * self.N + c
        return code

    def _decode_colors(self, code: int, n: int) -> tuple[int, ...]:
        out = [0] * n
        for pos in range(n - 1, -1, -1):
            code, out[pos] = divmod(code, self.N)
        return tuple(out)

    def _apply_matrix_map(
        self, matrix_of: Callable[[tuple[int, ...]], np.ndarray], state: FockState
    ) -> AuxState:
        """Contract a per-word (aux, colors) matrix against every word."""
        N = self.N
        acc: list[list[dict[Word, complex]]] = [
            [dict() for _ in range(N)] for _ in range(N)
        ]
        for w, amp in state.amps.items():
            gs = tuple(g for g, _ in w)
            cs = tuple(c for _, c in w)
            n = len(w)
            dimc = N**n
            mat = matrix_of(gs)
            base = self._color_code(cs)
            for l in range(N):
                col = mat[:, l * dimc + base]
                for row, v in enumerate(col):
                    if abs(v) <= _TINY:
                        continue
                    i, rem = divmod(row, dimc)
                    nw = tuple(zip(gs, self._decode_colors(rem, n)))
                    target = acc[i][l]
                    target[nw] = target.get(nw, 0j) + amp * v
        data = np.empty((N, N), dtype=object)
        for i in range(N):
            for l in range(N):
                data[i, l] = FockState(acc[i][l]).pruned(self.space.prune)
        return AuxState(data)

    def apply_T(self, k0: float, state: FockState) -> AuxState:
        """T(k0) applied to a state; acts on colors only, word by word."""
        return self._apply_matrix_map(lambda gs: self.chain(k0, gs), state)

    def apply_T_inverse(self, k0: float, state: FockState) -> AuxState:
        return self._apply_matrix_map(lambda gs: self.chain_inv(k0, gs), state)

    def b_allowed(self) -> bool:
        return self.whitelist.ok or self.reflection.family == "identity"

    def _require_b(self, force: bool) -> None:
        if force or self.b_allowed():
            return
        worst = self.whitelist.worst
        detail = (
            f"worst residual {self.whitelist.max_residual:.3e} at {worst.context}"
            if worst
            else "no checks ran"
        )
        raise NotWhitelistedError(
            f"reflection family {self.reflection.family!r} failed the whitelist "
            f"gate ({detail}); refusing to build b(k)"
        )

    def apply_b(self, k: float, state: FockState, force: bool = False) -> AuxState:
        """b(k) applied to a state.  Requires k (hence -k) on the grid.

        ``force`` bypasses the whitelist gate; that exists for negative
        controls and nothing else.
        """
        self.grid.index_of(k)
        self._require_b(force)
        return self._apply_matrix_map(lambda gs: self.b_matrix(k, gs), state)

    # -- factor builders for the relation evaluator -------------------------------

    def t_opmat(self, space_label: int, k0: float) -> OpMat:
        return OpMat(space_label, lambda s: self.apply_T(k0, s).data)

    def b_opmat(self, space_label: int, k: float, force: bool = False) -> OpMat:
        return OpMat(space_label, lambda s: self.apply_b(k, s, force=force).data)

    def a_vec(self, space_label: int, k: float) -> Vec:
        return Vec(space_label, lambda c, s: self.space.apply_annihilation(c, k, s))

    def adag_covec(self, space_label: int, k: float) -> CoVec:
        return CoVec(space_label, lambda c, s: self.space.apply_creation(c, k, s))


def compose_aux(outer: Callable[[FockState], AuxState], inner: AuxState) -> AuxState:
    """Matrix composition of operator values: (O U)_{il} = sum_p O_{ip} U_{pl}."""
    N = inner.N
    data = np.empty((N, N), dtype=object)
    applied = [[outer(inner[p, l]) for l in range(N)] for p in range(N)]
    for i in range(N):
        for l in range(N):
            data[i, l] = FockState.combine(
                (1.0 + 0j, applied[p][l][i, p]) for p in range(N)
            )
    return AuxState(data)


def identity_aux(N: int, state: FockState) -> AuxState:
    return AuxState.from_scalar_matrix(np.eye(N, dtype=complex), state)


# ---------------------------------------------------------------------------
# Per-relation residual evaluators (state -> float).  The check_* wrappers
# below aggregate them over samples; the harness drives them directly so it
# can cap sample sectors per relation and record each sample separately.


def _max_residual(values: Sequence[float], context: dict) -> Residual:
    worst = max(values) if values else 0.0
    return Residual(worst, {**context, "samples": len(values)})


def t_relation_evaluators(
    ctx: VertexContext, k0: float, k: float
) -> dict[str, ResidualFn]:
    """The two defining relations of T at one (aux, particle) momentum pair.

    Creation side: T_0 a†_1 = a†_1 R_01 T_0.  Annihilation side:
    T_0 a_1 = R_10 a_1 T_0.  Aux space is labeled 1, the particle space 2.
    """
    N = ctx.N
    r01 = RMat(1, 2, eval_r(ctx.space.r, k0, k))
    r10 = RMat(1, 2, perm_conj(eval_r(ctx.space.r, k, k0), N))
    t1 = ctx.t_opmat(1, k0)
    dag = ctx.adag_covec(2, k)
    ann = ctx.a_vec(2, k)
    return {
        "defT-adag": lambda s: identity_residual(
            [(1.0, [t1, dag])], [(1.0, [dag, r01, t1])], s, N
        ),
        "defT-a": lambda s: identity_residual(
            [(1.0, [t1, ann])], [(1.0, [r10, ann, t1])], s, N
        ),
    }


def rtt_evaluator(ctx: VertexContext, k1: float, k2: float) -> ResidualFn:
    """Residual function for R_12 T_1 T_2 = T_2 T_1 R_12."""
    N = ctx.N
    r12 = RMat(1, 2, eval_r(ctx.space.r, k1, k2))
    t1 = ctx.t_opmat(1, k1)
    t2 = ctx.t_opmat(2, k2)
    return lambda s: identity_residual(
        [(1.0, [r12, t1, t2])], [(1.0, [t2, t1, r12])], s, N
    )


def t_inverse_evaluator(ctx: VertexContext, k0: float) -> ResidualFn:
    def fn(s: FockState) -> float:
        inv = ctx.apply_T_inverse(k0, s)
        roundtrip = compose_aux(lambda t: ctx.apply_T(k0, t), inv)
        return roundtrip.max_deviation(identity_aux(ctx.N, s))

    return fn


def b_involution_evaluator(
    ctx: VertexContext, k: float, force: bool = False
) -> ResidualFn:
    def fn(s: FockState) -> float:
        inner = ctx.apply_b(-k, s, force=force)
        comp = compose_aux(lambda t: ctx.apply_b(k, t, force=force), inner)
        return comp.max_deviation(identity_aux(ctx.N, s))

    return fn


def b_exchange_evaluators(
    ctx: VertexContext, k1: float, k2: float, force: bool = False
) -> dict[str, ResidualFn]:
    """The three exchange identities between the bulk generators and b.

    eq:ab  : a_1 b_2   = R_21 b_2 R'_12 a_1
    eq:bad : b_1 a†_2  = a†_2 R_12 b_1 R'_21
    eq:bb  : R_12 b_1 R'_21 b_2 = b_2 R'_12 b_1 Rbar_21

    Primed and barred values are argument substitutions, e.g. R'_21 is the
    leg-swapped evaluation at (k2, -k1) and Rbar_21 at (-k2, -k1).
    """
    N = ctx.N
    r = ctx.space.r
    a1 = ctx.a_vec(1, k1)
    adag2 = ctx.adag_covec(2, k2)
    b1 = ctx.b_opmat(1, k1, force=force)
    b2 = ctx.b_opmat(2, k2, force=force)
    r_12 = RMat(1, 2, eval_r(r, k1, k2))
    r_21 = RMat(1, 2, perm_conj(eval_r(r, k2, k1), N))
    rp_12 = RMat(1, 2, eval_r(r, k1, -k2))
    rp_21 = RMat(1, 2, perm_conj(eval_r(r, k2, -k1), N))
    rbar_21 = RMat(1, 2, perm_conj(eval_r(r, -k2, -k1), N))
    return {
        "eq:ab": lambda s: identity_residual(
            [(1.0, [a1, b2])], [(1.0, [r_21, b2, rp_12, a1])], s, N
        ),
        "eq:bad": lambda s: identity_residual(
            [(1.0, [b1, adag2])], [(1.0, [adag2, r_12, b1, rp_21])], s, N
        ),
        "eq:bb": lambda s: identity_residual(
            [(1.0, [r_12, b1, rp_21, b2])], [(1.0, [b2, rp_12, b1, rbar_21])], s, N
        ),
    }


# ---------------------------------------------------------------------------
# Aggregated checks


def check_T_vacuum(ctx: VertexContext, k0: float) -> Residual:
    """T(k0) acting on the vacuum must be the identity aux matrix times the vacuum."""
    got = ctx.apply_T(k0, ctx.space.vacuum())
    want = identity_aux(ctx.N, ctx.space.vacuum())
    return Residual(got.max_deviation(want), {"relation": "TOmega", "momenta": (k0,)})


def check_T_intertwining(
    ctx: VertexContext, k0: float, k: float, samples: Sequence[FockState]
) -> Residual:
    fns = t_relation_evaluators(ctx, k0, k)
    parts = {tag: max((fn(s) for s in samples), default=0.0) for tag, fn in fns.items()}
    return Residual(
        max(parts.values()),
        {"relation": "defT", "momenta": (k0, k), "parts": parts},
    )


def check_rtt(
    ctx: VertexContext, k1: float, k2: float, samples: Sequence[FockState]
) -> Residual:
    fn = rtt_evaluator(ctx, k1, k2)
    return _max_residual([fn(s) for s in samples], {"relation": "rtt", "momenta": (k1, k2)})


def check_T_inverse(
    ctx: VertexContext, k0: float, samples: Sequence[FockState]
) -> Residual:
    fn = t_inverse_evaluator(ctx, k0)
    return _max_residual(
        [fn(s) for s in samples], {"relation": "T-inverse", "momenta": (k0,)}
    )


def check_b_vacuum(ctx: VertexContext, k: float, force: bool = False) -> Residual:
    """b(k) on the vacuum must equal the numeric B(k) tensored with the vacuum."""
    got = ctx.apply_b(k, ctx.space.vacuum(), force=force)
    want = AuxState.from_scalar_matrix(eval_b(ctx.reflection, k), ctx.space.vacuum())
    return Residual(got.max_deviation(want), {"relation": "b-vacuum", "momenta": (k,)})


def check_b_involution(
    ctx: VertexContext, k: float, samples: Sequence[FockState], force: bool = False
) -> Residual:
    fn = b_involution_evaluator(ctx, k, force=force)
    return _max_residual(
        [fn(s) for s in samples], {"relation": "rbrb", "momenta": (k, -k)}
    )


def check_b_exchange(
    ctx: VertexContext,
    k1: float,
    k2: float,
    samples: Sequence[FockState],
    force: bool = False,
) -> Residual:
    fns = b_exchange_evaluators(ctx, k1, k2, force=force)
    parts = {tag: max((fn(s) for s in samples), default=0.0) for tag, fn in fns.items()}
    return Residual(
        max(parts.values()),
        {"relation": "b-exchange", "momenta": (k1, k2), "parts": parts},
    )
