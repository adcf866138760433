"""Independent reference implementations the unit tests compare against.

Everything here is deliberately the slow, obvious version: explicit loops
instead of einsum, recursion straight off the defining relations instead of
cached closed forms.  Where a value is frozen as a literal, the formula it
came from sits next to it.
"""

from __future__ import annotations

import numpy as np

from zfcheck.fock import FockSpace, FockState, Word
from zfcheck.rmatrix import eval_r


def naive_lift_pair(mat: np.ndarray, n_legs: int, leg_a: int, leg_b: int, N: int):
    """Loop-built embedding of a pair matrix into an n-leg tensor product."""
    dim = N**n_legs
    out = np.zeros((dim, dim), dtype=complex)

    def digits(idx: int) -> list[int]:
        ds = [0] * n_legs
        for pos in range(n_legs - 1, -1, -1):
            idx, ds[pos] = divmod(idx, N)
        return ds

    for row in range(dim):
        rd = digits(row)
        for col in range(dim):
            cd = digits(col)
            if any(rd[p] != cd[p] for p in range(n_legs) if p not in (leg_a, leg_b)):
                continue
            out[row, col] = mat[rd[leg_a] * N + rd[leg_b], cd[leg_a] * N + cd[leg_b]]
    return out


def creation_pair_oracle(
    space: FockSpace, j: int, k2: float, c1: int, k1: float
) -> FockState:
    """a†_j(k2) applied to the one-particle state a†_{c1}(k1) |vac>, by hand.

    Straight from the creation exchange rule

        a†_j(k2) a†_c(k1) = sum_{l,m} R(k1, k2)[(l,m), (c,j)] a†_l(k1) a†_m(k2)

    used once when k2 > k1 (the prepended word is then out of order), and not
    at all when k2 <= k1.
    """
    g1 = space.grid.index_of(k1)
    g2 = space.grid.index_of(k2)
    N = space.N
    if g2 <= g1:
        return FockState({((g2, j), (g1, c1)): 1.0 + 0j})
    mat = eval_r(space.r, k1, k2)
    amps: dict[Word, complex] = {}
    for l in range(N):
        for m in range(N):
            coeff = mat[l * N + m, c1 * N + j]
            if coeff != 0:
                amps[((g1, l), (g2, m))] = coeff
    return FockState(amps)


def annihilation_pair_oracle(
    space: FockSpace, i: int, k: float, word: Word
) -> FockState:
    """a_i(k) applied to a canonical two-letter basis word, by hand.

    With word letters (k', j), (k'', j2), the move-through rule gives

        delta_{k,k'} delta_{i,j} |(k'', j2)>
        + sum_l R(k, k')[(i,l), (j2,j)] |(k', l)>   when k == k''

    (the recursion's second step only survives through its own delta).
    """
    (g1, j), (g2, j2) = word
    gi = space.grid.index_of(k)
    N = space.N
    amps: dict[Word, complex] = {}
    if gi == g1 and i == j:
        amps[((g2, j2),)] = amps.get(((g2, j2),), 0j) + 1.0
    if gi == g2:
        mat = eval_r(space.r, k, space.grid.value(g1))
        for l in range(N):
            coeff = mat[i * N + l, j2 * N + j]
            if coeff != 0:
                amps[((g1, l),)] = amps.get(((g1, l),), 0j) + coeff
    return FockState(amps)


def dense_T_oracle(space: FockSpace, k0: float, state: FockState) -> np.ndarray:
    """T(k0) applied to a state using only the defining relations.

    Recursion over the leftmost letter: T fixes the vacuum as the identity
    aux matrix, and pushing T through one creation operator costs one
    exchange matrix,

        (T a†_c(k) s)_{il} = sum_{c', p} R(k0, k)[(i,c'), (p,c)]
                             a†_{c'}(k) (T s)_{pl}.

    Returns an (N, N) object array of FockStates.  No chain matrices, no
    caching: this is the slow path the closed form must reproduce.
    """
    N = space.N
    memo: dict[Word, np.ndarray] = {}

    def rec(word: Word) -> np.ndarray:
        hit = memo.get(word)
        if hit is not None:
            return hit
        out = np.empty((N, N), dtype=object)
        if not word:
            vac = space.vacuum()
            zero = FockState()
            for i in range(N):
                for l in range(N):
                    out[i, l] = vac if i == l else zero
        else:
            (g1, c1), rest = word[0], word[1:]
            k1 = space.grid.value(g1)
            inner = rec(rest)
            mat = eval_r(space.r, k0, k1)
            for i in range(N):
                for l in range(N):
                    terms = []
                    for cp in range(N):
                        for p in range(N):
                            coeff = mat[i * N + cp, p * N + c1]
                            if coeff == 0:
                                continue
                            terms.append(
                                (coeff, space.apply_creation(cp, k1, inner[p, l]))
                            )
                    out[i, l] = FockState.combine(terms)
        memo[word] = out
        return out

    total = np.empty((N, N), dtype=object)
    for i in range(N):
        for l in range(N):
            total[i, l] = FockState()
    for w, a in state.amps.items():
        block = rec(w)
        for i in range(N):
            for l in range(N):
                total[i, l] = total[i, l] + block[i, l].scaled(a)
    return total


def dense_operator_matrix(space: FockSpace, n: int, apply_aux) -> tuple[np.ndarray, list]:
    """Dense matrix of an aux-matrix-valued operator on (aux ⊗ sector n).

    ``apply_aux(state)`` must return an (N, N) object array (or AuxState).
    Row/column composite index is aux * dim_sector + word_index.
    """
    words = space.canonical_words(n)
    index = {w: t for t, w in enumerate(words)}
    N = space.N
    dim = len(words)
    out = np.zeros((N * dim, N * dim), dtype=complex)
    for col_w, w in enumerate(words):
        applied = apply_aux(space.basis_state(w))
        data = applied.data if hasattr(applied, "data") else applied
        for l in range(N):
            for i in range(N):
                for nw, amp in data[i, l].amps.items():
                    out[i * dim + index[nw], l * dim + col_w] = amp
    return out, words


# -- frozen values ------------------------------------------------------------

# Rational exchange matrix, N = 2, g = 1, momentum difference 1:
# ((k1-k2) I + i g P) / (k1 - k2 + i g) = (I + iP) / (1 + i), and
# 1 / (1+i) = (1-i)/2, i / (1+i) = (1+i)/2.
R_N2_G1_DIFF1 = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.5 - 0.5j, 0.5 + 0.5j, 0.0],
        [0.0, 0.5 + 0.5j, 0.5 - 0.5j, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ],
    dtype=complex,
)

# Momentum-dependent diagonal reflection family, c = 1, signs (+1, -1), k = 1:
# B_00 = (1 + i)/(1 - i) = i, B_11 = (1 - i)/(1 - i) = 1.
PHASE_B_C1_K1 = np.diag([1j, 1.0 + 0j])

# Constant diagonal (2, 1): B(k) B(-k) = diag(4, 1), so the deviation from
# the identity is diag(3, 0) and the max-norm residual is exactly 3.
CONST_DIAG_21_UNITARITY_RESIDUAL = 3.0
