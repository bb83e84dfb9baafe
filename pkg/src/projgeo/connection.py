"""Affine connections on a coordinate chart and their curvature data.

Index conventions (fixed once, used by every downstream module):

    Gamma^k_{ij}        = gamma[k, i, j]       (nabla_{d_i} d_j = Gamma^k_{ij} d_k)
    d_l Gamma^k_{ij}    = dgamma[l, k, i, j]
    d_m d_l Gamma^k_{ij} = ddgamma[m, l, k, i, j]

    R(d_i, d_j) d_k = R^l_{kij} d_l   with
    R^l_{kij} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
                + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik}

so curvature values have variance (up, down, down, down) in slot order
[l, k, i, j]. The Ricci trace is r_ij = R^k_{jik} (trace of Z -> R(X,Z)Y over
Z), and the trace 2-form is s_ij = R^k_{kij}.

Connections come from closed-form Christoffel entries, from a metric
(Levi-Civita, computed pointwise through jet arithmetic, never symbolically),
or from either of those plus a projective perturbation alpha (which adds
alpha_i delta^k_j + alpha_j delta^k_i).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import expr as ex
from .tensor import TensorValue

__all__ = [
    "ConnectionSpec", "ConnectionValue", "load_chart", "levi_civita",
    "torsion", "curvature", "ricci", "trace2form", "curvature_derivative",
    "second_bianchi_residual", "SingularMetric", "MissingJet", "ChartError",
]


class SingularMetric(ArithmeticError):
    """Metric not invertible to working precision (condition estimate > 1e12)."""


class MissingJet(ValueError):
    """Operation needs a derivative level the ConnectionValue does not carry."""


class ChartError(ValueError):
    """Malformed chart or field file; message carries the line number."""


@dataclass
class ConnectionValue:
    """Pointwise connection data: Gamma and optionally its first two derivative levels."""

    n: int
    point: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray | None = None
    ddgamma: np.ndarray | None = None

    def require(self, level: int) -> None:
        if level >= 1 and self.dgamma is None:
            raise MissingJet("dgamma (first derivatives of Gamma) not evaluated")
        if level >= 2 and self.ddgamma is None:
            raise MissingJet("ddgamma (second derivatives of Gamma) not evaluated")


@dataclass
class ConnectionSpec:
    """A connection given in closed form on a chart of dimension n.

    Exactly one of `christoffel` (0-based (k, i, j) -> Expr) or `metric`
    (0-based (i, j), i <= j -> Expr) is set; absent entries are zero. `alpha`
    optionally holds n expressions adding the projective perturbation
    alpha_i delta^k_j + alpha_j delta^k_i on top of the base connection.
    """

    n: int
    christoffel: dict[tuple[int, int, int], ex.Expr] | None = None
    metric: dict[tuple[int, int], ex.Expr] | None = None
    alpha: tuple[ex.Expr, ...] | None = None
    name: str = ""

    def __post_init__(self):
        if (self.christoffel is None) == (self.metric is None):
            raise ValueError("exactly one of christoffel/metric must be given")

    @property
    def source(self) -> str:
        return "metric" if self.metric is not None else "christoffel"

    @classmethod
    def from_christoffel(cls, n: int, entries: dict[tuple[int, int, int], "ex.Expr | str"],
                         name: str = "") -> "ConnectionSpec":
        return cls(n, christoffel=_parse_entries(entries, n), name=name)

    @classmethod
    def from_metric(cls, n: int, entries: dict[tuple[int, int], "ex.Expr | str"],
                    name: str = "") -> "ConnectionSpec":
        parsed = _parse_entries(entries, n)
        for (i, j) in parsed:
            if i > j:
                raise ValueError(f"metric entries use i <= j, got ({i}, {j})")
        return cls(n, metric=parsed, name=name)

    def evaluate(self, p, derivs: int = 1) -> ConnectionValue:
        """Connection data at point p with `derivs` derivative levels of Gamma (0..2)."""
        if derivs not in (0, 1, 2):
            raise ValueError("derivs must be 0, 1 or 2")
        p = np.asarray(p, dtype=float)
        if p.shape != (self.n,):
            raise ValueError(f"point has shape {p.shape}, chart dimension is {self.n}")
        if self.metric is not None:
            value = _levi_civita_value(self.n, self.metric, p, derivs)
        else:
            value = _christoffel_value(self.n, self.christoffel, p, derivs)
        if self.alpha is not None:
            _add_projective_term(value, self.alpha, p, derivs)
        return value

    def metric_at(self, p) -> np.ndarray:
        """Metric matrix g_ij at p (metric-sourced specs only)."""
        if self.metric is None:
            raise ValueError("not a metric-sourced connection")
        p = np.asarray(p, dtype=float)
        g, *_ = _metric_jets(self.n, self.metric, p, order=1)
        return g


def _parse_entries(entries, n):
    parsed = {}
    interned: dict[str, ex.Expr] = {}
    for key, value in entries.items():
        if isinstance(value, str):
            if value not in interned:
                interned[value] = ex.parse(value, n)
            value = interned[value]
        for idx in key:
            if not 0 <= idx < n:
                raise ValueError(f"index {idx} out of range for dimension {n}")
        parsed[key] = value
    return parsed


def _eval_cached(entries, p, order, cache):
    out = {}
    for key, e in entries.items():
        jet = cache.get(id(e))
        if jet is None:
            jet = ex.eval_jet(e, p, order)
            cache[id(e)] = jet
        out[key] = jet
    return out


def _christoffel_value(n, entries, p, derivs):
    order = max(1, derivs)
    jets = _eval_cached(entries, p, order, {})
    gamma = np.zeros((n, n, n))
    dgamma = np.zeros((n, n, n, n)) if derivs >= 1 else None
    ddgamma = np.zeros((n, n, n, n, n)) if derivs >= 2 else None
    for (k, i, j), jet in jets.items():
        gamma[k, i, j] = jet.value
        if derivs >= 1:
            dgamma[:, k, i, j] = jet.d1
        if derivs >= 2:
            ddgamma[:, :, k, i, j] = jet.d2
    return ConnectionValue(n, p, gamma, dgamma, ddgamma)


def _metric_jets(n, entries, p, order):
    """Stacked derivative arrays of the metric: g, dg[a,i,j], ddg, dddg."""
    jets = _eval_cached(entries, p, order, {})
    g0 = np.zeros((n, n))
    g1 = np.zeros((n, n, n))
    g2 = np.zeros((n, n, n, n)) if order >= 2 else None
    g3 = np.zeros((n, n, n, n, n)) if order >= 3 else None
    for (i, j), jet in jets.items():
        for a, b in ((i, j), (j, i)) if i != j else ((i, j),):
            g0[a, b] = jet.value
            g1[:, a, b] = jet.d1
            if order >= 2:
                g2[:, :, a, b] = jet.d2
            if order >= 3:
                g3[:, :, :, a, b] = jet.d3
    return g0, g1, g2, g3


def _inverse_jets(g0, g1, g2, g3):
    """Derivative arrays of g^{-1} from those of g, via the product-rule recursion."""
    if np.linalg.cond(g0) > 1e12:
        raise SingularMetric(f"metric condition estimate {np.linalg.cond(g0):.3e} exceeds 1e12")
    i0 = np.linalg.inv(g0)
    i1 = -np.einsum("km,amn,np->akp", i0, g1, i0)
    i2 = i3 = None
    if g2 is not None:
        inner = (np.einsum("abmn,np->abmp", g2, i0)
                 + np.einsum("amn,bnp->abmp", g1, i1)
                 + np.einsum("bmn,anp->abmp", g1, i1))
        i2 = -np.einsum("km,abmp->abkp", i0, inner)
    if g3 is not None:
        inner = (np.einsum("abcmn,np->abcmp", g3, i0)
                 + np.einsum("abmn,cnp->abcmp", g2, i1)
                 + np.einsum("acmn,bnp->abcmp", g2, i1)
                 + np.einsum("bcmn,anp->abcmp", g2, i1)
                 + np.einsum("amn,bcnp->abcmp", g1, i2)
                 + np.einsum("bmn,acnp->abcmp", g1, i2)
                 + np.einsum("cmn,abnp->abcmp", g1, i2))
        i3 = -np.einsum("km,abcmp->abckp", i0, inner)
    return i0, i1, i2, i3


def _levi_civita_value(n, entries, p, derivs):
    order = derivs + 1
    g0, g1, g2, g3 = _metric_jets(n, entries, p, order)
    i0, i1, i2, _ = _inverse_jets(g0, g1, g2, g3)

    # c[l,i,j] = (d_i g_jl + d_j g_il - d_l g_ij) / 2, with derivative levels
    # read off one order higher in the metric jets
    c0 = 0.5 * (np.einsum("ijl->lij", g1) + np.einsum("jil->lij", g1) - g1)
    gamma = np.einsum("kl,lij->kij", i0, c0)
    dgamma = ddgamma = None
    if derivs >= 1:
        c1 = 0.5 * (np.einsum("aijl->alij", g2) + np.einsum("ajil->alij", g2)
                    - np.einsum("alij->alij", g2))
        dgamma = (np.einsum("akl,lij->akij", i1, c0)
                  + np.einsum("kl,alij->akij", i0, c1))
    if derivs >= 2:
        c2 = 0.5 * (np.einsum("abijl->ablij", g3) + np.einsum("abjil->ablij", g3)
                    - np.einsum("ablij->ablij", g3))
        ddgamma = (np.einsum("abkl,lij->abkij", i2, c0)
                   + np.einsum("akl,blij->abkij", i1, c1)
                   + np.einsum("bkl,alij->abkij", i1, c1)
                   + np.einsum("kl,ablij->abkij", i0, c2))
    return ConnectionValue(n, p, gamma, dgamma, ddgamma)


def _add_projective_term(value: ConnectionValue, alpha, p, derivs):
    n = value.n
    order = max(1, derivs)
    jets = [ex.eval_jet(e, p, order) for e in alpha]
    a0 = np.array([j.value for j in jets])
    eye = np.eye(n)
    value.gamma += (np.einsum("i,kj->kij", a0, eye)
                    + np.einsum("j,ki->kij", a0, eye))
    if derivs >= 1:
        a1 = np.stack([j.d1 for j in jets], axis=-1)  # a1[l, i] = d_l alpha_i
        value.dgamma += (np.einsum("li,kj->lkij", a1, eye)
                         + np.einsum("lj,ki->lkij", a1, eye))
    if derivs >= 2:
        a2 = np.stack([j.d2 for j in jets], axis=-1)  # a2[m, l, i]
        value.ddgamma += (np.einsum("mli,kj->mlkij", a2, eye)
                          + np.einsum("mlj,ki->mlkij", a2, eye))


def levi_civita(spec: ConnectionSpec, p, derivs: int = 1) -> ConnectionValue:
    """Levi-Civita connection data of a metric-sourced spec at p."""
    if spec.source != "metric":
        raise ValueError("levi_civita needs a metric-sourced ConnectionSpec")
    return spec.evaluate(p, derivs)


def torsion(cv: ConnectionValue) -> TensorValue:
    """Torsion T^k_{ij} = Gamma^k_{ij} - Gamma^k_{ji}, variance (up, down, down)."""
    data = cv.gamma - cv.gamma.transpose(0, 2, 1)
    return TensorValue(cv.n, ("up", "down", "down"), data)


def curvature(cv: ConnectionValue) -> TensorValue:
    """Curvature R^l_{kij} in the fixed convention, variance (up, down, down, down)."""
    cv.require(1)
    dg, g = cv.dgamma, cv.gamma
    t1 = np.einsum("iljk->lkij", dg)
    r = t1 - t1.transpose(0, 1, 3, 2)
    t3 = np.einsum("lim,mjk->lkij", g, g)
    r = r + t3 - t3.transpose(0, 1, 3, 2)
    return TensorValue(cv.n, ("up", "down", "down", "down"), r)


def ricci(r: TensorValue) -> TensorValue:
    """Ricci r_ij = R^k_{jik}: trace of Z -> R(X, Z)Y over Z."""
    if r.variance != ("up", "down", "down", "down"):
        raise ValueError("ricci expects a curvature-variance tensor")
    return TensorValue(r.n, ("down", "down"), np.einsum("kjik->ij", r.data))


def trace2form(r: TensorValue) -> TensorValue:
    """Trace 2-form s_ij = R^k_{kij} (trace of the curvature endomorphism)."""
    if r.variance != ("up", "down", "down", "down"):
        raise ValueError("trace2form expects a curvature-variance tensor")
    return TensorValue(r.n, ("down", "down"), np.einsum("kkij->ij", r.data))


def curvature_derivative(cv: ConnectionValue) -> np.ndarray:
    """Coordinate derivative d_m R^l_{kij}, as a raw array [m, l, k, i, j]."""
    cv.require(2)
    g, dg, ddg = cv.gamma, cv.dgamma, cv.ddgamma
    t = np.einsum("miljk->mlkij", ddg)
    out = t - t.transpose(0, 1, 2, 4, 3)
    t = (np.einsum("mlip,pjk->mlkij", dg, g)
         + np.einsum("lip,mpjk->mlkij", g, dg))
    out = out + t - t.transpose(0, 1, 2, 4, 3)
    return out


def second_bianchi_residual(cv: ConnectionValue) -> TensorValue:
    """Residual of the differential Bianchi identity with torsion terms.

    (nabla_X R)(Y,Z) + (nabla_Y R)(Z,X) + (nabla_Z R)(X,Y)
      + R(T(X,Y), Z) + R(T(Y,Z), X) + R(T(Z,X), Y) = 0
    returned as a rank-5 tensor over (X, Y, Z) = (d_a, d_b, d_c).
    """
    g = cv.gamma
    r = curvature(cv).data
    dr = curvature_derivative(cv)
    nabla_r = (dr
               + np.einsum("lap,pkij->alkij", g, r)
               - np.einsum("pak,lpij->alkij", g, r)
               - np.einsum("pai,lkpj->alkij", g, r)
               - np.einsum("paj,lkip->alkij", g, r))
    total = (np.einsum("alkbc->lkabc", nabla_r)
             + np.einsum("blkca->lkabc", nabla_r)
             + np.einsum("clkab->lkabc", nabla_r))
    t = (g - g.transpose(0, 2, 1))
    total = total + (np.einsum("pab,lkpc->lkabc", t, r)
                     + np.einsum("pbc,lkpa->lkabc", t, r)
                     + np.einsum("pca,lkpb->lkabc", t, r))
    return TensorValue(cv.n, ("up",) + ("down",) * 4, total)


def load_chart(path_or_text: "str | Path", name: str | None = None) -> ConnectionSpec:
    """Read a chart file (dim header plus one [metric]/[christoffel] section).

    File indices are 1-based (`g 1 2 = ...`, `G 1 2 3 = ...`); missing entries
    are zero, metric entries require i <= j, duplicates are rejected.
    """
    if isinstance(path_or_text, Path) or "\n" not in str(path_or_text):
        path = Path(path_or_text)
        text = path.read_text()
        if name is None:
            name = path.name
    else:
        text = str(path_or_text)
    n = None
    section = None
    metric: dict[tuple[int, int], ex.Expr] = {}
    christoffel: dict[tuple[int, int, int], ex.Expr] = {}
    interned: dict[str, ex.Expr] = {}
    seen_sections = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in ("metric", "christoffel"):
                raise ChartError(f"line {lineno}: unknown section [{section}]")
            if seen_sections:
                raise ChartError(
                    f"line {lineno}: [metric] and [christoffel] are exclusive, "
                    f"and only one section is allowed")
            if n is None:
                raise ChartError(f"line {lineno}: dim must come before any section")
            seen_sections.append(section)
            continue
        if "=" not in line:
            raise ChartError(f"line {lineno}: expected 'key = expression'")
        key, _, rhs = line.partition("=")
        key_parts = key.split()
        rhs = rhs.strip()
        if key_parts == ["dim"]:
            if n is not None:
                raise ChartError(f"line {lineno}: duplicate dim")
            try:
                n = int(rhs)
            except ValueError:
                raise ChartError(f"line {lineno}: dim must be an integer") from None
            if not 1 <= n <= 8:
                raise ChartError(f"line {lineno}: dim must be in 1..8")
            continue
        if section is None:
            raise ChartError(f"line {lineno}: entry before any section")
        try:
            indices = [int(part) for part in key_parts[1:]]
        except ValueError:
            raise ChartError(f"line {lineno}: bad indices in {key.strip()!r}") from None
        if any(not 1 <= i <= n for i in indices):
            raise ChartError(f"line {lineno}: index out of range 1..{n}")
        if rhs not in interned:
            try:
                interned[rhs] = ex.parse(rhs, n)
            except ex.ParseError as err:
                raise ChartError(f"line {lineno}: {err}") from err
        parsed = interned[rhs]
        if section == "metric":
            if key_parts[0] != "g" or len(indices) != 2:
                raise ChartError(f"line {lineno}: metric entries look like 'g i j = ...'")
            i, j = indices[0] - 1, indices[1] - 1
            if i > j:
                raise ChartError(f"line {lineno}: metric entries use i <= j")
            if (i, j) in metric:
                raise ChartError(f"line {lineno}: duplicate entry g {i + 1} {j + 1}")
            metric[(i, j)] = parsed
        else:
            if key_parts[0] != "G" or len(indices) != 3:
                raise ChartError(f"line {lineno}: christoffel entries look like 'G k i j = ...'")
            k, i, j = (x - 1 for x in indices)
            if (k, i, j) in christoffel:
                raise ChartError(f"line {lineno}: duplicate entry G {k + 1} {i + 1} {j + 1}")
            christoffel[(k, i, j)] = parsed

    if n is None:
        raise ChartError("missing dim header")
    if not seen_sections:
        raise ChartError("missing [metric] or [christoffel] section")
    if seen_sections[0] == "metric":
        return ConnectionSpec(n, metric=metric, name=name or "")
    return ConnectionSpec(n, christoffel=christoffel, name=name or "")
