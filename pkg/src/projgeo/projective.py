"""Projective changes of connection and equivalence tests.

A projective change by a 1-form alpha replaces Gamma^k_{ij} with
Gamma^k_{ij} + alpha_i delta^k_j + alpha_j delta^k_i. It keeps the
unparametrized geodesics, the Weyl tensor W (n >= 3), the Cotton tensor
(n = 2) and the twistor almost complex structure; those invariances are what
this module measures.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import expr as ex
from .algebra import cotton, torsion_split, weyl
from .connection import ChartError, ConnectionSpec, curvature, torsion
from .tensor import OddDimension, norm

__all__ = [
    "OneFormField", "load_alpha", "sample_points", "projective_change",
    "WeylInvariance", "check_weyl_invariance",
    "Equivalence", "projectively_equivalent",
    "TorsionRemoval", "remove_torsion",
    "TwistorComparison", "same_twistor_structure", "OddDimension",
]


@dataclass(frozen=True)
class OneFormField:
    """Closed-form 1-form on a chart: n expressions alpha_1 .. alpha_n."""

    n: int
    entries: tuple[ex.Expr, ...]

    @classmethod
    def from_strings(cls, texts: "list[str]") -> "OneFormField":
        n = len(texts)
        return cls(n, tuple(ex.parse(t, n) for t in texts))

    @classmethod
    def zero(cls, n: int) -> "OneFormField":
        return cls(n, tuple(ex.Num(0.0) for _ in range(n)))

    def values_at(self, p) -> np.ndarray:
        return np.array([ex.eval_jet(e, p, 1).value for e in self.entries])


def load_alpha(path_or_text: "str | Path", n: int | None = None) -> OneFormField:
    """Read an alpha-field file: optional `dim = n` plus lines `a <i> = <expr>`.

    Indices are 1-based; missing entries are zero.
    """
    text = Path(path_or_text).read_text() if "\n" not in str(path_or_text) \
        else str(path_or_text)
    entries: dict[int, str] = {}
    dim = n
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ChartError(f"line {lineno}: expected 'a i = expression'")
        key, _, rhs = line.partition("=")
        parts = key.split()
        if parts == ["dim"]:
            header = int(rhs.strip())
            if n is not None and header != n:
                raise ChartError(
                    f"line {lineno}: alpha file has dim = {header}, expected {n}")
            dim = header
            continue
        if len(parts) != 2 or parts[0] != "a":
            raise ChartError(f"line {lineno}: expected 'a i = expression'")
        i = int(parts[1])
        if i in entries:
            raise ChartError(f"line {lineno}: duplicate entry a {i}")
        entries[i] = rhs.strip()
    if dim is None:
        raise ChartError("alpha field needs a dim header or an explicit dimension")
    if any(not 1 <= i <= dim for i in entries):
        raise ChartError(f"alpha index out of range 1..{dim}")
    exprs = [ex.parse(entries.get(i, "0"), dim) for i in range(1, dim + 1)]
    return OneFormField(dim, tuple(exprs))


def sample_points(n: int, count: int, seed: int = 0, half_width: float = 0.4) -> np.ndarray:
    """Deterministic sample of chart points, uniform in a centered box."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-half_width, half_width, size=(count, n))


def _add(a: ex.Expr | None, b: ex.Expr) -> ex.Expr:
    return b if a is None else ex.BinOp("+", a, b)


def projective_change(spec: ConnectionSpec, alpha: OneFormField) -> ConnectionSpec:
    """The connection with Gamma^k_{ij} + alpha_i delta^k_j + alpha_j delta^k_i.

    Christoffel charts stay in closed form (the perturbation is spliced into
    the entry expressions); metric charts gain a pointwise perturbation since
    no symbolic Levi-Civita is attempted.
    """
    if alpha.n != spec.n:
        raise ValueError("alpha dimension does not match the chart")
    n = spec.n
    if spec.source == "metric":
        if spec.alpha is None:
            combined = alpha.entries
        else:
            combined = tuple(ex.BinOp("+", old, new)
                             for old, new in zip(spec.alpha, alpha.entries))
        return ConnectionSpec(n, metric=spec.metric, alpha=combined, name=spec.name)
    entries: dict[tuple[int, int, int], ex.Expr | None] = dict(spec.christoffel)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                term = None
                if k == j:
                    term = _add(term, alpha.entries[i])
                if k == i:
                    term = _add(term, alpha.entries[j])
                if term is not None:
                    entries[(k, i, j)] = _add(entries.get((k, i, j)), term)
    return ConnectionSpec(n, christoffel=entries, name=spec.name)


@dataclass
class WeylInvariance:
    """Projective-invariance residuals over a point sample."""

    n: int
    weyl_residual: float
    cotton_residual: float | None  # n = 2 only, where W vanishes identically


def check_weyl_invariance(spec: ConnectionSpec, alpha: OneFormField,
                          points=None, tol: float = 1e-10) -> WeylInvariance:
    """Max difference of W (and of C when n = 2) between spec and its alpha-change."""
    n = spec.n
    if points is None:
        points = sample_points(n, 10, seed=7)
    changed = projective_change(spec, alpha)
    derivs = 2 if n == 2 else 1
    worst_w = 0.0
    worst_c: float | None = 0.0 if n == 2 else None
    for p in np.atleast_2d(points):
        cv_a = spec.evaluate(p, derivs=derivs)
        cv_b = changed.evaluate(p, derivs=derivs)
        w_a, _, _ = weyl(curvature(cv_a), tol=tol)
        w_b, _, _ = weyl(curvature(cv_b), tol=tol)
        worst_w = max(worst_w, float(np.max(np.abs(w_a.data - w_b.data))))
        if n == 2:
            c_a, c_b = cotton(cv_a, tol=tol), cotton(cv_b, tol=tol)
            worst_c = max(worst_c, float(np.max(np.abs(c_a.data - c_b.data))))
    return WeylInvariance(n, worst_w, worst_c)


@dataclass
class Equivalence:
    """Verdict of the pointwise projective-equivalence test."""

    equivalent: bool
    residual: float
    alphas: np.ndarray  # recovered alpha_i per sample point, shape (count, n)


def projectively_equivalent(spec_a: ConnectionSpec, spec_b: ConnectionSpec,
                            points=None, tol: float = 1e-8) -> Equivalence:
    """Whether Gamma_B - Gamma_A is alpha_i delta^k_j + alpha_j delta^k_i pointwise.

    alpha is recovered from the trace (n+1) alpha_i = D^k_{ik} and the
    reconstruction residual is measured in max-abs norm.
    """
    if spec_a.n != spec_b.n:
        raise ValueError("charts have different dimensions")
    n = spec_a.n
    if points is None:
        points = sample_points(n, 10, seed=11)
    points = np.atleast_2d(points)
    eye = np.eye(n)
    worst = 0.0
    alphas = np.zeros((points.shape[0], n))
    for row, p in enumerate(points):
        d = (spec_b.evaluate(p, derivs=0).gamma
             - spec_a.evaluate(p, derivs=0).gamma)
        alpha = np.einsum("kik->i", d) / (n + 1)
        alphas[row] = alpha
        recon = np.einsum("i,kj->kij", alpha, eye) + np.einsum("j,ki->kij", alpha, eye)
        worst = max(worst, float(np.max(np.abs(d - recon))))
    return Equivalence(worst <= tol, worst, alphas)


@dataclass
class TorsionRemoval:
    """Outcome of the canonical torsion removal nabla' = nabla - T2/2."""

    ok: bool
    t1_residual: float
    alpha: OneFormField | None
    spec: ConnectionSpec | None


def remove_torsion(spec: ConnectionSpec, points=None, tol: float = 1e-9) -> TorsionRemoval:
    """Remove trace-type torsion in closed form, if that is all there is.

    Builds alpha_j = (Gamma^k_{jk} - Gamma^k_{kj}) / (n-1) as expressions and
    returns the corrected chart; fails (ok=False) when the trace-free torsion
    part T1 exceeds `tol` at the sampled points, since only the T2 component
    can be removed canonically.
    """
    n = spec.n
    if points is None:
        points = sample_points(n, 5, seed=3)
    points = np.atleast_2d(points)

    if spec.source == "metric":
        # Levi-Civita (plus a projective term) is already symmetric
        return TorsionRemoval(True, 0.0, OneFormField.zero(n), spec)

    half = ex.Num(0.5)
    scale = ex.Num(1.0 / (n - 1))
    alpha_exprs: list[ex.Expr] = []
    for j in range(n):
        acc: ex.Expr | None = None
        for k in range(n):
            plus = spec.christoffel.get((k, j, k))
            minus = spec.christoffel.get((k, k, j))
            if plus is not None:
                acc = _add(acc, plus)
            if minus is not None:
                acc = ex.BinOp("-", acc if acc is not None else ex.Num(0.0), minus)
        alpha_exprs.append(ex.Num(0.0) if acc is None else ex.BinOp("*", scale, acc))

    # Gamma'^k_{ij} = Gamma^k_{ij} - alpha_i delta^k_j / 2 + alpha_j delta^k_i / 2;
    # on the diagonal k = i = j the two halves cancel.
    entries = dict(spec.christoffel)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                if k == j and not _is_zero(alpha_exprs[i]):
                    entries[(k, i, j)] = ex.BinOp(
                        "-", entries.get((k, i, j), ex.Num(0.0)),
                        ex.BinOp("*", half, alpha_exprs[i]))
                elif k == i and not _is_zero(alpha_exprs[j]):
                    entries[(k, i, j)] = _add(
                        entries.get((k, i, j)), ex.BinOp("*", half, alpha_exprs[j]))
    fixed = ConnectionSpec(n, christoffel=entries, name=spec.name)

    worst_t1 = 0.0
    for p in points:
        t1, _ = torsion_split(torsion(spec.evaluate(p, derivs=0)))
        worst_t1 = max(worst_t1, norm(t1))
    if worst_t1 > tol:
        return TorsionRemoval(False, worst_t1, None, None)
    return TorsionRemoval(True, worst_t1,
                          OneFormField(n, tuple(alpha_exprs)), fixed)


def _is_zero(e: ex.Expr) -> bool:
    return isinstance(e, ex.Num) and e.value == 0.0


@dataclass
class TwistorComparison:
    """Verdict of the shared-twistor-structure criterion."""

    same: bool
    residual: float


def same_twistor_structure(spec_a: ConnectionSpec, spec_b: ConnectionSpec,
                           points=None, j_samples: int = 10, seed: int = 0,
                           tol: float = 1e-8) -> TwistorComparison:
    """Whether the difference tensor A = Gamma_B - Gamma_A is invisible to every
    almost complex structure: (j + i) A((j - i) X)(j - i) = 0 for sampled j.

    The projection isolates the 3i-eigencomponent of A; for torsion-free pairs
    a zero residual is equivalent to projective equivalence, and trace-type
    torsion corrections also project to zero. The residual is normalized by
    (1 + max|j|)^3 so ill-conditioned j samples do not amplify rounding into
    the verdict.
    """
    from .twistor import random_complex_structure

    n = spec_a.n
    if spec_a.n != spec_b.n:
        raise ValueError("charts have different dimensions")
    if n % 2 != 0:
        raise OddDimension("the twistor criterion needs even dimension")
    if points is None:
        points = sample_points(n, 3, seed=seed + 1)
    points = np.atleast_2d(points)
    rng = np.random.default_rng(seed)
    js = [random_complex_structure(n, rng) for _ in range(j_samples)]
    worst = 0.0
    for p in points:
        cv_a = spec_a.evaluate(p, derivs=0)
        cv_b = spec_b.evaluate(p, derivs=0)
        a = cv_b.gamma - cv_a.gamma  # a[k, x, y] = A(d_x) d_y coefficient
        for j in js:
            jp = j + 1j * np.eye(n)
            jm = j - 1j * np.eye(n)
            proj = np.einsum("lk,kbc,bx,cy->lxy", jp, a.astype(complex), jm, jm)
            scale = (1.0 + float(np.max(np.abs(j)))) ** 3
            worst = max(worst, float(np.max(np.abs(proj))) / scale)
    return TwistorComparison(worst <= tol, worst)
