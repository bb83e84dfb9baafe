"""Weight combinatorics for sl(n) and the standard-structure eigenvalue census.

Torsion-type tensors (T^l_{ij}, antisymmetric in ij) and curvature-type
tensors (A^l_{kij}, antisymmetric in ij) decompose into irreducible pieces
under sl(n). The decompositions are driven by one fact: tensoring an
irreducible with the defining representation V (or its dual) splits with
multiplicity one, the components being indexed by the dominant sums of the
highest weight with the weights of the factor. Dimensions come from the
classical product formula, and the census realizes each component as the
image of an explicit equivariant projector to read off which eigenvalues the
standard complex structure takes on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .tensor import OddDimension
from .twistor import standard_complex_structure

__all__ = [
    "NotDominant", "WeightVector", "IrrepComponent",
    "weights_of_V", "weights_of_dual", "decompose_with", "weyl_dim",
    "fundamental", "torsion_component_weights", "curvature_component_weights",
    "j0_census",
]


class NotDominant(ValueError):
    """The weight has a negative fundamental-weight coefficient."""


@dataclass(frozen=True)
class WeightVector:
    """Integer coefficients in the fundamental-weight basis w1..w(n-1)."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))

    @property
    def dominant(self) -> bool:
        return all(c >= 0 for c in self.coeffs)

    def __add__(self, other: "WeightVector") -> "WeightVector":
        return WeightVector(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "WeightVector":
        return WeightVector(tuple(-c for c in self.coeffs))

    def __str__(self) -> str:
        out = ""
        for i, c in enumerate(self.coeffs, start=1):
            if c == 0:
                continue
            sign = "-" if c < 0 else ("+" if out else "")
            mag = abs(c)
            out += sign + (f"w{i}" if mag == 1 else f"{mag}*w{i}")
        return out or "0"


def fundamental(i: int, n: int) -> WeightVector:
    """The fundamental weight w_i for sl(n), or the zero weight for i = 0."""
    if not 0 <= i <= n - 1:
        raise ValueError(f"fundamental index must be in 0..{n - 1}, got {i}")
    coeffs = [0] * (n - 1)
    if i > 0:
        coeffs[i - 1] = 1
    return WeightVector(tuple(coeffs))


def weights_of_V(n: int) -> "list[WeightVector]":
    """The n weights of the defining representation: w1, w2-w1, ..., -w(n-1)."""
    out = [fundamental(1, n)]
    for k in range(2, n):
        out.append(fundamental(k, n) + (-fundamental(k - 1, n)))
    out.append(-fundamental(n - 1, n))
    return out


def weights_of_dual(n: int) -> "list[WeightVector]":
    """The weights of V*, the negatives of the weights of V."""
    return [-w for w in weights_of_V(n)]


def decompose_with(hw: WeightVector, factor: str, n: int) -> "list[WeightVector]":
    """Highest weights of (irreducible with highest weight hw) tensor V or V*.

    Valid because V and V* have multiplicity-one weights: the components are
    exactly the dominant elements among hw + (weight of factor), each once.
    """
    if not hw.dominant:
        raise NotDominant(f"{hw} is not dominant")
    if factor == "V":
        mu = weights_of_V(n)
    elif factor in ("V*", "dual"):
        mu = weights_of_dual(n)
    else:
        raise ValueError(f"factor must be 'V' or 'V*', got {factor!r}")
    return [hw + m for m in mu if (hw + m).dominant]


def weyl_dim(hw: WeightVector, n: int) -> int:
    """Dimension of the sl(n) irreducible with highest weight hw.

    Uses the partition lambda_a = sum of m_k for k >= a and the hook-style
    product over index pairs, in exact rational arithmetic.
    """
    if not hw.dominant:
        raise NotDominant(f"{hw} is not dominant")
    if len(hw.coeffs) != n - 1:
        raise ValueError(f"weight length {len(hw.coeffs)} does not fit sl({n})")
    lam = [sum(hw.coeffs[a:]) for a in range(n - 1)] + [0]
    out = Fraction(1)
    for a in range(n):
        for b in range(a + 1, n):
            out *= Fraction(lam[a] - lam[b] + b - a, b - a)
    assert out.denominator == 1
    return int(out)


def torsion_component_weights(n: int) -> "list[WeightVector]":
    """Components of the torsion space (vector-valued 2-forms): trace-free, trace."""
    return decompose_with(fundamental(n - 2, n), "V", n)


def curvature_component_weights(n: int) -> "list[WeightVector]":
    """Components of the curvature space: the fully antisymmetric branch
    (trace-free then trace; a single entry at n=3), then the cyclic-symmetry
    branch (Weyl, symmetric-Ricci, skew-Ricci images)."""
    if n < 3:
        raise ValueError("the curvature component list needs n >= 3")
    lam3 = decompose_with(fundamental(n - 3, n), "V", n)
    bianchi = decompose_with(fundamental(n - 2, n) + fundamental(n - 1, n), "V", n)
    return lam3 + bianchi


@dataclass(frozen=True)
class IrrepComponent:
    """One irreducible constituent with its standard-structure eigenvalue data."""

    highest: WeightVector
    dim: int
    spectrum: "dict[int, int]"  # imaginary part k -> multiplicity of eigenvalue ik


def _torsion_basis(n: int) -> np.ndarray:
    """Orthonormal basis of {T^l_{ij} antisymmetric in ij}, flattened rows."""
    rows = []
    s = 1.0 / np.sqrt(2.0)
    for l in range(n):
        for i in range(n):
            for j in range(i + 1, n):
                t = np.zeros((n, n, n))
                t[l, i, j] = s
                t[l, j, i] = -s
                rows.append(t.ravel())
    return np.array(rows)


def _curvature_basis(n: int) -> np.ndarray:
    rows = []
    s = 1.0 / np.sqrt(2.0)
    for l in range(n):
        for k in range(n):
            for i in range(n):
                for j in range(i + 1, n):
                    a = np.zeros((n, n, n, n))
                    a[l, k, i, j] = s
                    a[l, k, j, i] = -s
                    rows.append(a.ravel())
    return np.array(rows)


def _torsion_projectors(n: int):
    eye = np.eye(n)

    def trace_part(t):
        alpha = np.einsum("kjk->j", t) / (n - 1)
        return (np.einsum("i,kj->kij", alpha, eye)
                - np.einsum("j,ki->kij", alpha, eye))

    return [lambda t: t - trace_part(t), trace_part]


def _curvature_projectors(n: int):
    eye = np.eye(n)

    def cyc(a):
        return (a + np.einsum("lijk->lkij", a) + np.einsum("ljki->lkij", a)) / 3.0

    def wedge(q):
        return (np.einsum("ji,lk->lkij", q, eye) - np.einsum("ij,lk->lkij", q, eye)
                - np.einsum("ik,lj->lkij", q, eye) + np.einsum("jk,li->lkij", q, eye))

    def embed(omega):
        return cyc(np.einsum("lk,ij->lkij", eye, omega))

    # Schur scalar of (trace after embed) on 2-forms, from a probe
    probe = np.zeros((n, n))
    probe[0, 1], probe[1, 0] = 1.0, -1.0
    c = np.einsum("kkij->ij", embed(probe))[0, 1]

    def lam3_trace(a):
        return embed(np.einsum("kkij->ij", cyc(a))) / c

    def lam3_tracefree(a):
        return cyc(a) - lam3_trace(a)

    def ricci_of(a):
        return np.einsum("kjik->ij", a)

    def sym_part(a):
        r = ricci_of(a - cyc(a))
        return wedge(-(r + r.T) / (2.0 * (n - 1)))

    def skew_part(a):
        r = ricci_of(a - cyc(a))
        return wedge(-(r - r.T) / (2.0 * (n + 1)))

    def weyl_part(a):
        b = a - cyc(a)
        return b - sym_part(a) - skew_part(a)

    return [lam3_tracefree, lam3_trace, weyl_part, sym_part, skew_part]


def _lie_action_matrix(x: np.ndarray, basis: np.ndarray, rank: int) -> np.ndarray:
    """Matrix of the Lie-algebra action of x on the spanned tensor space."""
    n = x.shape[0]
    shape = (n,) * rank
    cols = []
    for row in basis:
        a = row.reshape(shape)
        if rank == 3:
            act = (np.einsum("lm,mij->lij", x, a)
                   - np.einsum("lmj,mi->lij", a, x)
                   - np.einsum("lim,mj->lij", a, x))
        else:
            act = (np.einsum("lm,mkij->lkij", x, a)
                   - np.einsum("lmij,mk->lkij", a, x)
                   - np.einsum("lkmj,mi->lkij", a, x)
                   - np.einsum("lkim,mj->lkij", a, x))
        cols.append(basis @ act.ravel())
    return np.array(cols).T


def j0_census(space: str, n: int) -> "list[IrrepComponent]":
    """Eigenvalues of the standard complex structure on each component.

    Realizes each irreducible component as the image of its projector on an
    orthonormal tensor basis, restricts the induced Lie-algebra action of j0,
    and counts eigenvalue-ik multiplicities by the rank defect of (M - ik I),
    tolerance 1e-8. Labels are attached positionally from the decomposition
    lists and cross-checked against the product dimension formula.
    """
    if n % 2 != 0:
        raise OddDimension("the census pairs coordinates into 2-planes")
    if n not in (4, 6):
        raise ValueError(
            "census supports n = 4 and 6; the generic component lists collapse at n = 2")
    if space == "torsion":
        basis, rank = _torsion_basis(n), 3
        projectors = _torsion_projectors(n)
        labels = torsion_component_weights(n)
    elif space == "curvature":
        basis, rank = _curvature_basis(n), 4
        projectors = _curvature_projectors(n)
        labels = curvature_component_weights(n)
    else:
        raise ValueError(f"space must be 'torsion' or 'curvature', got {space!r}")
    if len(labels) != len(projectors):
        # n <= 3 collapses branch labels; the census only supports n where
        # the generic component count holds
        raise ValueError(f"component labels degenerate at n={n}")

    shape = (n,) * rank
    action = _lie_action_matrix(standard_complex_structure(n), basis, rank)

    out = []
    for proj, label in zip(projectors, labels):
        cols = np.array([basis @ proj(row.reshape(shape)).ravel() for row in basis]).T
        u, sv, _ = np.linalg.svd(cols)
        d = int(np.sum(sv > 1e-8))
        expected = weyl_dim(label, n)
        if d != expected:
            raise ValueError(
                f"projector image for {label} has dimension {d}, expected {expected}")
        comp = u[:, :d]
        m = comp.T @ action @ comp
        spectrum: dict[int, int] = {}
        for k in range(0, rank + 1):
            defect = d - np.linalg.matrix_rank(m - 1j * k * np.eye(d), tol=1e-8)
            if defect > 0:
                spectrum[k] = int(defect)
                if k > 0:
                    spectrum[-k] = int(defect)
        if sum(spectrum.values()) != d:
            raise ValueError(f"census multiplicities for {label} do not add to {d}")
        out.append(IrrepComponent(label, d, dict(sorted(spectrum.items()))))
    return out
