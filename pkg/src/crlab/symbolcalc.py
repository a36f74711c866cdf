"""Truncated total symbols of microdifferential operators over Q(i).

A symbol in ``n`` variables is stored as a map from monomials
``z^beta * zeta'^gamma * zeta_n^e`` to Gaussian rationals. The last cotangent
variable may carry a negative exponent, which is how negative homogeneity is
represented (a conic chart where ``zeta_n != 0``). A :class:`FormalSymbol`
keeps the components of degree ``m, m-1, ..., m-D+1``.

Composition and adjoint follow the usual Leibniz formulas with ``D = d/dz``:

    (P o Q)(z, zeta) = sum_alpha 1/alpha! (d_zeta^alpha P)(d_z^alpha Q)
    P*(z, zeta)      = sum_alpha (-1)^|alpha|/alpha! [d_z^alpha d_zeta^alpha P](z, -zeta)

In the adjoint formula the derivatives are taken first and ``zeta -> -zeta``
is substituted afterwards. Substituting first gives ``(z zeta)* = -z zeta + 1``,
which contradicts integration by parts, ``int (z f') g = -int f (g + z g')``,
and breaks ``(PQ)* = Q* P*`` already for ``P = zeta``, ``Q = z``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import itertools
import math
import random
from typing import Dict, Iterable, Mapping, Tuple

from .exact import QI

Monomial = Tuple[Tuple[int, ...], Tuple[int, ...]]  # (z exponents, zeta exponents)


class SymbolError(ValueError):
    pass


class NotInvertibleError(SymbolError):
    pass


class RepresentationError(SymbolError):
    pass


def _degree(mono: Monomial) -> int:
    return sum(mono[1])


def _check_mono(mono: Monomial, n: int) -> None:
    zs, ks = mono
    if len(zs) != n or len(ks) != n:
        raise SymbolError(f"monomial {mono} does not have {n} variables")
    if any(e < 0 for e in zs) or any(e < 0 for e in ks[:-1]):
        raise SymbolError(f"only zeta_n may carry a negative exponent: {mono}")


@dataclass(frozen=True)
class SymbolComponent:
    """Homogeneous piece of a symbol: every monomial has zeta-degree ``degree``."""

    n: int
    degree: int
    terms: Mapping[Monomial, QI]

    def evaluate(self, z, zeta) -> QI:
        total = QI(0)
        for (zs, ks), c in self.terms.items():
            v = c
            for x, e in zip(z, zs):
                v = v * QI.coerce(x) ** e
            for x, e in zip(zeta, ks):
                v = v * QI.coerce(x) ** e
            total = total + v
        return total


def _clean(terms: Mapping[Monomial, QI]) -> Dict[Monomial, QI]:
    return {m: c for m, c in terms.items() if c}


def _add_into(acc: Dict[Monomial, QI], mono: Monomial, c: QI) -> None:
    prev = acc.get(mono)
    acc[mono] = c if prev is None else prev + c


def _falling(e: int, a: int) -> int:
    out = 1
    for i in range(a):
        out *= e - i
    return out


class FormalSymbol:
    """Total symbol truncated to ``depth`` homogeneous components below ``order``."""

    __slots__ = ("n", "order", "depth", "terms")

    def __init__(self, n: int, order: int, depth: int, terms: Mapping[Monomial, object]):
        if depth < 1:
            raise SymbolError("depth must be >= 1")
        self.n = n
        self.order = order
        self.depth = depth
        clean: Dict[Monomial, QI] = {}
        low = order - depth + 1
        for mono, c in terms.items():
            mono = (tuple(mono[0]), tuple(mono[1]))
            _check_mono(mono, n)
            d = _degree(mono)
            if d > order:
                raise SymbolError(f"monomial {mono} has degree {d} above order {order}")
            if d < low:
                continue
            c = QI.coerce(c)
            if c:
                _add_into(clean, mono, c)
        self.terms = _clean(clean)

    # construction helpers -------------------------------------------------
    @classmethod
    def identity(cls, n: int, depth: int) -> "FormalSymbol":
        return cls(n, 0, depth, {((0,) * n, (0,) * n): 1})

    @classmethod
    def constant(cls, n: int, depth: int, c) -> "FormalSymbol":
        return cls(n, 0, depth, {((0,) * n, (0,) * n): c})

    @classmethod
    def zeta(cls, n: int, i: int, depth: int) -> "FormalSymbol":
        ks = [0] * n
        ks[i] = 1
        return cls(n, 1, depth, {((0,) * n, tuple(ks)): 1})

    @classmethod
    def z(cls, n: int, i: int, depth: int) -> "FormalSymbol":
        zs = [0] * n
        zs[i] = 1
        return cls(n, 0, depth, {(tuple(zs), (0,) * n): 1})

    def __add__(self, other: "FormalSymbol") -> "FormalSymbol":
        _same_n(self, other)
        order = max(self.order, other.order)
        low = max(self.order - self.depth, other.order - other.depth) + 1
        acc = dict(self.terms)
        for m, c in other.terms.items():
            _add_into(acc, m, c)
        return FormalSymbol(self.n, order, order - low + 1, acc)

    def __neg__(self):
        return FormalSymbol(self.n, self.order, self.depth, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, FormalSymbol):
            return NotImplemented
        return (self.n, self.order, self.depth) == (other.n, other.order, other.depth) \
            and self.terms == other.terms

    def equal_up_to_depth(self, other: "FormalSymbol") -> bool:
        """Compare on the degrees both symbols carry."""
        low = max(self.order - self.depth, other.order - other.depth) + 1
        a = {m: c for m, c in self.terms.items() if _degree(m) >= low}
        b = {m: c for m, c in other.terms.items() if _degree(m) >= low}
        return a == b

    def truncate(self, depth: int) -> "FormalSymbol":
        return FormalSymbol(self.n, self.order, min(depth, self.depth), self.terms)

    def component(self, degree: int) -> SymbolComponent:
        return SymbolComponent(self.n, degree,
                               {m: c for m, c in self.terms.items() if _degree(m) == degree})

    def components(self) -> list:
        return [self.component(self.order - k) for k in range(self.depth)]

    def __repr__(self):
        body = " + ".join(f"({c})*{_mono_str(m)}" for m, c in sorted(self.terms.items()))
        return f"FormalSymbol(n={self.n}, order={self.order}, depth={self.depth}: {body or '0'})"

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        comps = []
        for comp in self.components():
            monos = [{"z_exps": list(zs), "zeta_exps": list(ks[:-1]), "zeta_n_exp": ks[-1],
                      "re": str(c.re), "im": str(c.im)}
                     for (zs, ks), c in sorted(comp.terms.items())]
            comps.append({"degree": comp.degree, "monomials": monos})
        return {"n": self.n, "order": self.order, "depth": self.depth, "components": comps}

    @classmethod
    def from_json(cls, d: dict) -> "FormalSymbol":
        terms = {}
        for comp in d["components"]:
            for m in comp["monomials"]:
                ks = tuple(m["zeta_exps"]) + (m["zeta_n_exp"],)
                if sum(ks) != comp["degree"]:
                    raise SymbolError(f"monomial {m} is not of degree {comp['degree']}")
                terms[(tuple(m["z_exps"]), ks)] = QI(Fraction(m["re"]), Fraction(m["im"]))
        return cls(d["n"], d["order"], d["depth"], terms)


def _mono_str(m: Monomial) -> str:
    zs, ks = m
    parts = [f"z{i+1}^{e}" for i, e in enumerate(zs) if e] + \
            [f"zeta{i+1}^{e}" for i, e in enumerate(ks) if e]
    return "*".join(parts) or "1"


def _same_n(p: FormalSymbol, q: FormalSymbol) -> None:
    if p.n != q.n:
        raise SymbolError(f"variable-count mismatch: {p.n} vs {q.n}")


def _multi_indices(n: int, total: int) -> Iterable[Tuple[int, ...]]:
    if n == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _multi_indices(n - 1, total - first):
            yield (first,) + rest


def _d_zeta(mono: Monomial, alpha) -> Tuple[int, Monomial | None]:
    zs, ks = mono
    coef = 1
    new = []
    for e, a in zip(ks, alpha):
        f = _falling(e, a)
        if f == 0:
            return 0, None
        coef *= f
        new.append(e - a)
    return coef, (zs, tuple(new))


def _d_z(mono: Monomial, alpha) -> Tuple[int, Monomial | None]:
    zs, ks = mono
    coef = 1
    new = []
    for e, a in zip(zs, alpha):
        if a > e:
            return 0, None
        coef *= _falling(e, a)
        new.append(e - a)
    return coef, (tuple(new), ks)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return (tuple(x + y for x, y in zip(a[0], b[0])), tuple(x + y for x, y in zip(a[1], b[1])))


def compose(P: FormalSymbol, Q: FormalSymbol) -> FormalSymbol:
    """Symbol of the product ``P Q``, truncated to the common depth."""
    _same_n(P, Q)
    n = P.n
    order = P.order + Q.order
    depth = min(P.depth, Q.depth)
    low = order - depth + 1
    acc: Dict[Monomial, QI] = {}
    for k in range(depth):
        for alpha in _multi_indices(n, k):
            afact = math.prod(math.factorial(a) for a in alpha)
            dP: Dict[Monomial, QI] = {}
            for m, c in P.terms.items():
                f, nm = _d_zeta(m, alpha)
                if f:
                    _add_into(dP, nm, c * f)
            if not dP:
                continue
            dQ: Dict[Monomial, QI] = {}
            for m, c in Q.terms.items():
                f, nm = _d_z(m, alpha)
                if f:
                    _add_into(dQ, nm, c * f)
            left = [(m, _degree(m), c / afact) for m, c in dP.items() if c]
            right = [(m, _degree(m), c) for m, c in dQ.items() if c]
            for (pz, pk), dp, cp in left:
                for (qz, qk), dq, cq in right:
                    if dp + dq < low:
                        continue
                    mono = (tuple(map(sum, zip(pz, qz))), tuple(map(sum, zip(pk, qk))))
                    prev = acc.get(mono)
                    acc[mono] = cp * cq if prev is None else prev + cp * cq
    return FormalSymbol(n, order, depth, acc)


def adjoint(P: FormalSymbol) -> FormalSymbol:
    """Formal adjoint for the standard density ``dz_1 ... dz_n``."""
    n = P.n
    low = P.order - P.depth + 1
    acc: Dict[Monomial, QI] = {}
    for k in range(P.depth):
        for alpha in _multi_indices(n, k):
            afact = math.prod(math.factorial(a) for a in alpha)
            sign = -1 if k % 2 else 1
            for m, c in P.terms.items():
                f1, m1 = _d_z(m, alpha)
                if not f1:
                    continue
                f2, m2 = _d_zeta(m1, alpha)
                if not f2 or _degree(m2) < low:
                    continue
                # substitute zeta -> -zeta after differentiating
                sub = -1 if _degree(m2) % 2 else 1
                _add_into(acc, m2, c * (sign * sub * f1 * f2) / afact)
    return FormalSymbol(n, P.order, P.depth, acc)


def principal_part(P: FormalSymbol) -> Tuple[SymbolComponent, int]:
    """Principal symbol ``P_m`` together with the order ``m``."""
    return P.component(P.order), P.order


def invert(P: FormalSymbol, point) -> FormalSymbol:
    """Parametrix of ``P`` near the conic point ``(z0, zeta0)``.

    The principal symbol must be nonzero at the point; the recursion divides by
    it, so it must also be a unit among Laurent monomials, i.e. ``c * zeta_n^m``.
    """
    z0, zeta0 = point
    n = P.n
    if len(z0) != n or len(zeta0) != n:
        raise SymbolError("point dimension does not match the symbol")
    if complex(zeta0[-1]) == 0:
        raise RepresentationError("the conic chart requires zeta_n != 0 at the point")
    principal, m = principal_part(P)
    if not principal.evaluate(z0, zeta0):
        raise NotInvertibleError(f"principal symbol vanishes at {point}")
    lead = ((0,) * n, (0,) * (n - 1) + (m,))
    if set(principal.terms) != {lead}:
        raise RepresentationError(
            "principal symbol is not c * zeta_n^m; its inverse is not a Laurent polynomial")
    inv_c = principal.terms[lead].inverse()
    inv_mono = ((0,) * n, (0,) * (n - 1) + (-m,))
    Q = FormalSymbol(n, -m, P.depth, {inv_mono: inv_c})
    for k in range(1, P.depth):
        R = compose(P, Q)
        resid = {mono: c for mono, c in R.terms.items() if _degree(mono) == -k}
        if not resid:
            continue
        terms = dict(Q.terms)
        for mono, c in resid.items():
            _add_into(terms, _mono_mul(mono, inv_mono), -c * inv_c)
        Q = FormalSymbol(n, -m, P.depth, terms)
    return Q


def act_on_expansion(P: FormalSymbol, u):
    """Apply a one-variable symbol ``sum c z^b zeta^e`` to a Phi-expansion.

    ``z`` acts by multiplication with ``t`` and ``zeta`` by ``d/dt`` (negative
    powers by the inverse, ``Phi_j -> -Phi_{j-1}``); derivatives act first.
    """
    from .exact import Scalar
    from .microexpand import MicroExpansion, SmoothSeries, differentiate, integrate, \
        multiply_smooth

    if P.n != 1:
        raise SymbolError("only one-variable symbols act on Phi-expansions")
    total = MicroExpansion({}, u.lower)
    for ((b,), (e,)), c in P.terms.items():
        w = u
        step = differentiate if e >= 0 else integrate
        for _ in range(abs(e)):
            w = step(w)
        w = multiply_smooth(w, SmoothSeries.monomial(b))
        total = total + w.scale(Scalar(c))
    return total


# random corpus --------------------------------------------------------------

def random_symbol(rng: random.Random, n: int, order: int, depth: int,
                  max_z: int = 2, max_zeta: int = 2, density: float = 0.5,
                  principal_unit: bool = False) -> FormalSymbol:
    """Pseudo-random symbol with small integer Gaussian coefficients.

    ``max_z`` bounds the z-degree of each monomial, ``max_zeta`` the degree in
    the non-distinguished cotangent variables.
    """
    terms: Dict[Monomial, QI] = {}
    for k in range(depth):
        deg = order - k
        for zs in itertools.product(range(max_z + 1), repeat=n):
            if sum(zs) > max_z:
                continue
            for gamma in itertools.product(range(max_zeta + 1), repeat=n - 1):
                if sum(gamma) > max_zeta or rng.random() > density:
                    continue
                if principal_unit and k == 0:
                    continue
                ks = gamma + (deg - sum(gamma),)
                c = QI(rng.randint(-3, 3), rng.randint(-3, 3))
                if c:
                    terms[(zs, ks)] = c
    if principal_unit:
        lead = ((0,) * n, (0,) * (n - 1) + (order,))
        terms[lead] = QI(rng.choice([1, 2, -1, 3]), rng.choice([0, 1, -2]))
    elif not any(_degree(m) == order for m in terms):
        terms[((0,) * n, (0,) * (n - 1) + (order,))] = QI(1)
    return FormalSymbol(n, order, depth, terms)


def selftest(count: int = 100, seed: int = 20240501) -> Dict[str, bool]:
    """Run the algebraic property corpus; returns ``{property: passed}``."""
    rng = random.Random(seed)
    results = {k: True for k in ("involution", "anti_homomorphism", "associativity",
                                 "order_additivity", "principal_multiplicativity", "inverse")}
    for _ in range(count):
        n = rng.choice([1, 2])
        depth = rng.randint(1, 8)
        def mk(**kw):
            return random_symbol(rng, n, rng.randint(-2, 2), depth,
                                 max_z=rng.randint(0, 4), max_zeta=1, density=0.25, **kw)
        P, Q, R = mk(), mk(), mk()
        results["involution"] &= adjoint(adjoint(P)) == P
        PQ = compose(P, Q)
        results["anti_homomorphism"] &= adjoint(PQ).equal_up_to_depth(
            compose(adjoint(Q), adjoint(P)))
        results["associativity"] &= compose(PQ, R).equal_up_to_depth(compose(P, compose(Q, R)))
        results["order_additivity"] &= PQ.order == P.order + Q.order
        pp, _ = principal_part(P)
        pq, _ = principal_part(Q)
        prod = {}
        for m1, c1 in pp.terms.items():
            for m2, c2 in pq.terms.items():
                _add_into(prod, _mono_mul(m1, m2), c1 * c2)
        results["principal_multiplicativity"] &= principal_part(PQ)[0].terms == _clean(prod)
        U = mk(principal_unit=True)
        point = ((0,) * n, (0,) * (n - 1) + (QI(0, 1),))
        Ui = invert(U, point)
        ident = FormalSymbol.identity(n, depth)
        results["inverse"] &= compose(U, Ui).equal_up_to_depth(ident)
        results["inverse"] &= compose(Ui, U).equal_up_to_depth(ident)
    return results
