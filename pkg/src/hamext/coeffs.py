"""Exact coefficient functions of the position variables.

The coefficient domain is deliberately small: fractions N/D where N and D
are polynomials in per-variable generators, with parameter-polynomial
coefficients.  A position variable is either

* linear  -- the generator is the coordinate itself, or
* tagged trigonometric -- a generator pair (S, C) obeying C^2 = 1 - tag*S^2
  with derivatives S' = rate*C and C' = -tag*rate*S.

tag > 0 gives circular pairs (sin, cos for tag = rate = 1), tag < 0
hyperbolic ones.  Reducing every C-power to at most one via the Pythagorean
relation makes the stored form a free-module basis representation, so the
zero test is an exact dictionary emptiness check and never a heuristic.

Fractions are combined over common denominators without polynomial GCDs;
denominators are kept factored as monomial * product of normalized
multi-term factors, which keeps the everyday monomial denominators fully
cancelled.  Optional GCD-style compaction is available behind
``CanonicalCoeff.compact`` for expression-swell control.

All values are immutable after construction and safe to share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .params import ParamPoly, Q, QONE, QZERO, as_parampoly, as_q

Mono = Tuple[int, ...]


class ZeroCoefficientDivision(ZeroDivisionError):
    """Raised on division by an identically-zero coefficient."""


class SingularEvaluation(ArithmeticError):
    """Raised when a denominator is below the evaluation guard threshold.

    Samplers treat this as a rejection signal, not a failure.
    """


@dataclass(frozen=True)
class Var:
    """A position variable together with its generator kind.

    ``tag`` is zero for linear variables.  For tagged variables the
    generators represent S_tag(rate*v) and C_tag(rate*v).
    """

    name: str
    tag: Q = QZERO
    rate: Q = QONE

    def __post_init__(self):
        if not self.name.isidentifier():
            raise ValueError(f"variable name {self.name!r} must be an identifier")
        if self.tag == 0 and self.rate != 1:
            raise ValueError("linear variables take no rate")

    @property
    def is_linear(self) -> bool:
        return self.tag == 0

    @property
    def kind(self) -> str:
        if self.tag == 0:
            return "linear"
        return "circular" if self.tag > 0 else "hyperbolic"

    @property
    def slots(self) -> int:
        # layout per variable: linear -> (exp,), tagged -> (C-exp, S-exp)
        return 1 if self.is_linear else 2

    @classmethod
    def linear(cls, name: str) -> "Var":
        return cls(name)

    @classmethod
    def circular(cls, name: str, rate=1) -> "Var":
        return cls(name, QONE, as_q(rate))

    @classmethod
    def hyperbolic(cls, name: str, rate=1) -> "Var":
        return cls(name, -QONE, as_q(rate))

    @classmethod
    def tagged(cls, name: str, tag, rate=1) -> "Var":
        tag = as_q(tag)
        if tag == 0:
            return cls(name)
        return cls(name, tag, as_q(rate))

    def gen_names(self) -> Tuple[str, ...]:
        if self.is_linear:
            return (self.name,)
        arg = self.name if self.rate == 1 else f"{self.rate}*{self.name}"
        if self.tag == 1:
            return (f"cos({arg})", f"sin({arg})")
        if self.tag == -1:
            return (f"cosh({arg})", f"sinh({arg})")
        return (f"C_{self.tag}({arg})", f"S_{self.tag}({arg})")


class VarSystem:
    """Ordered collection of position variables; fixes the monomial layout."""

    __slots__ = ("vars", "_index", "_offset", "width", "_hash")

    def __init__(self, variables: Sequence[Var]):
        self.vars: Tuple[Var, ...] = tuple(variables)
        names = [v.name for v in self.vars]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        self._index = {v.name: i for i, v in enumerate(self.vars)}
        self._offset = []
        off = 0
        for v in self.vars:
            self._offset.append(off)
            off += v.slots
        self.width = off
        self._hash = hash(self.vars)

    def __eq__(self, other):
        return isinstance(other, VarSystem) and self.vars == other.vars

    def __hash__(self):
        return self._hash

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def offset(self, name: str) -> int:
        return self._offset[self.index(name)]

    def var(self, name: str) -> Var:
        return self.vars[self.index(name)]

    @property
    def unit_mono(self) -> Mono:
        return (0,) * self.width

    # -- element constructors -------------------------------------------

    def zero(self) -> "CanonicalCoeff":
        return CanonicalCoeff(self, Poly(self, {}), self.unit_mono, ())

    def lift(self, x) -> "CanonicalCoeff":
        """Lift scalars, parameters, or ParamPoly into the ring."""
        if isinstance(x, CanonicalCoeff):
            if x.sys != self:
                raise ValueError("coefficient belongs to a different system")
            return x
        pp = as_parampoly(x)
        if pp.is_zero:
            return self.zero()
        return CanonicalCoeff(self, Poly(self, {self.unit_mono: pp}), self.unit_mono, ())

    def one(self) -> "CanonicalCoeff":
        return self.lift(1)

    def scalar(self, x) -> "CanonicalCoeff":
        return self.lift(as_q(x))

    def param(self, name: str) -> "CanonicalCoeff":
        return self.lift(ParamPoly.var(name))

    def _gen(self, name: str, slot: int) -> "CanonicalCoeff":
        mono = list(self.unit_mono)
        mono[self.offset(name) + slot] = 1
        return CanonicalCoeff(
            self, Poly(self, {tuple(mono): ParamPoly.one()}), self.unit_mono, ()
        )

    def coord(self, name: str) -> "CanonicalCoeff":
        """The coordinate itself; only linear variables live in the ring."""
        if not self.var(name).is_linear:
            raise ValueError(
                f"{name!r} is a tagged variable; only S({name}) and C({name}) "
                "belong to the coefficient ring"
            )
        return self._gen(name, 0)

    def S(self, name: str) -> "CanonicalCoeff":
        v = self.var(name)
        if v.is_linear:
            return self._gen(name, 0)  # S_0 of a linear variable is the variable
        return self._gen(name, 1)

    def C(self, name: str) -> "CanonicalCoeff":
        v = self.var(name)
        if v.is_linear:
            return self.one()  # C_0 is identically 1
        return self._gen(name, 0)

    def T(self, name: str) -> "CanonicalCoeff":
        return self.S(name) / self.C(name)


# ---------------------------------------------------------------------------
# monomial helpers


@lru_cache(maxsize=None)
def _reduce_raw(sys: VarSystem, raw: Mono) -> Tuple[Tuple[Mono, Q], ...]:
    """Rewrite C-powers >= 2 via C^2 = 1 - tag*S^2; returns basis terms."""
    pending: List[Tuple[List[int], Q]] = [(list(raw), QONE)]
    for v, off in zip(sys.vars, sys._offset):
        if v.is_linear:
            continue
        c_off, s_off = off, off + 1
        nxt: List[Tuple[List[int], Q]] = []
        for mono, coef in pending:
            bexp = mono[c_off]
            if bexp <= 1:
                nxt.append((mono, coef))
                continue
            k, rem = divmod(bexp, 2)
            for j in range(k + 1):
                m2 = list(mono)
                m2[c_off] = rem
                m2[s_off] += 2 * j
                nxt.append((m2, coef * math.comb(k, j) * (-v.tag) ** j))
        pending = nxt
    acc: Dict[Mono, Q] = {}
    for mono, coef in pending:
        key = tuple(mono)
        s = acc.get(key, QZERO) + coef
        if s:
            acc[key] = s
        else:
            acc.pop(key, None)
    return tuple(acc.items())


def _mono_key(m: Mono):
    return (sum(m), m)


def _mono_add(a: Mono, b: Mono) -> Mono:
    return tuple(x + y for x, y in zip(a, b))


def _mono_sub(a: Mono, b: Mono) -> Mono:
    return tuple(x - y for x, y in zip(a, b))


def _mono_min(a: Mono, b: Mono) -> Mono:
    return tuple(min(x, y) for x, y in zip(a, b))


def _mono_max(a: Mono, b: Mono) -> Mono:
    return tuple(max(x, y) for x, y in zip(a, b))


class Poly:
    """Polynomial in the position generators with ParamPoly coefficients."""

    __slots__ = ("sys", "terms", "_hash")

    def __init__(self, sys: VarSystem, terms: Mapping[Mono, ParamPoly]):
        self.sys = sys
        self.terms: Dict[Mono, ParamPoly] = dict(terms)
        self._hash = None

    @classmethod
    def one(cls, sys: VarSystem) -> "Poly":
        return cls(sys, {sys.unit_mono: ParamPoly.one()})

    @classmethod
    def from_mono(cls, sys: VarSystem, mono: Mono, coeff=None) -> "Poly":
        return cls(sys, {mono: coeff if coeff is not None else ParamPoly.one()})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def _accumulate(self, acc: Dict[Mono, ParamPoly], mono: Mono, pp: ParamPoly):
        cur = acc.get(mono)
        s = pp if cur is None else cur + pp
        if s.is_zero:
            acc.pop(mono, None)
        else:
            acc[mono] = s

    def add(self, other: "Poly") -> "Poly":
        acc = dict(self.terms)
        for m, pp in other.terms.items():
            self._accumulate(acc, m, pp)
        return Poly(self.sys, acc)

    def neg(self) -> "Poly":
        return Poly(self.sys, {m: -pp for m, pp in self.terms.items()})

    def sub(self, other: "Poly") -> "Poly":
        return self.add(other.neg())

    def scale(self, pp: ParamPoly) -> "Poly":
        if pp.is_zero:
            return Poly(self.sys, {})
        if pp.is_one:
            return self
        acc: Dict[Mono, ParamPoly] = {}
        for m, c in self.terms.items():
            self._accumulate(acc, m, c * pp)
        return Poly(self.sys, acc)

    def scale_q(self, q: Q) -> "Poly":
        return Poly(self.sys, {m: pp.scale(q) for m, pp in self.terms.items()}) if q != 1 else self

    def mul(self, other: "Poly") -> "Poly":
        acc: Dict[Mono, ParamPoly] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                c = c1 * c2
                for mono, q in _reduce_raw(self.sys, _mono_add(m1, m2)):
                    self._accumulate(acc, mono, c.scale(q))
        return Poly(self.sys, acc)

    def mul_mono(self, mono: Mono) -> "Poly":
        if mono == self.sys.unit_mono:
            return self
        acc: Dict[Mono, ParamPoly] = {}
        for m, c in self.terms.items():
            for m2, q in _reduce_raw(self.sys, _mono_add(m, mono)):
                self._accumulate(acc, m2, c.scale(q))
        return Poly(self.sys, acc)

    def pow(self, n: int) -> "Poly":
        acc = Poly.one(self.sys)
        base = self
        while n:
            if n & 1:
                acc = acc.mul(base)
            n >>= 1
            if n:
                base = base.mul(base)
        return acc

    def derivative(self, name: str) -> "Poly":
        sys = self.sys
        v = sys.var(name)
        off = sys.offset(name)
        acc: Dict[Mono, ParamPoly] = {}
        for m, c in self.terms.items():
            if v.is_linear:
                e = m[off]
                if e == 0:
                    continue
                m2 = list(m)
                m2[off] = e - 1
                self._accumulate(acc, tuple(m2), c.scale(Q(e)))
            else:
                cexp, sexp = m[off], m[off + 1]
                # d(C^b S^a) = rate * (a C^(b+1) S^(a-1) - tag*b C^(b-1) S^(a+1))
                if sexp:
                    raw = list(m)
                    raw[off] = cexp + 1
                    raw[off + 1] = sexp - 1
                    for m2, q in _reduce_raw(sys, tuple(raw)):
                        self._accumulate(acc, m2, c.scale(q * v.rate * sexp))
                if cexp:
                    raw = list(m)
                    raw[off] = cexp - 1
                    raw[off + 1] = sexp + 1
                    self._accumulate(acc, tuple(raw), c.scale(-v.tag * v.rate * cexp))
        return Poly(self.sys, acc)

    def content(self) -> Mono:
        """Componentwise minimum exponent vector over all terms."""
        it = iter(self.terms)
        first = next(it)
        out = first
        for m in it:
            out = _mono_min(out, m)
            if not any(out):
                break
        return out

    def shift_down(self, mono: Mono) -> "Poly":
        if not any(mono):
            return self
        return Poly(self.sys, {_mono_sub(m, mono): c for m, c in self.terms.items()})

    def leading(self) -> Tuple[Mono, ParamPoly]:
        m = max(self.terms, key=_mono_key)
        return m, self.terms[m]

    def evaluate(self, genvals: Mapping[str, tuple], params: Mapping[str, object], conv):
        total = conv(0)
        offs = self.sys._offset
        for m, c in self.terms.items():
            term = c.evaluate(params, conv)
            for v, off in zip(self.sys.vars, offs):
                for k in range(v.slots):
                    e = m[off + k]
                    if e:
                        term = term * genvals[v.name][k] ** e
            total = total + term
        return total

    def sorted_items(self):
        return tuple(sorted(self.terms.items(), key=lambda kv: _mono_key(kv[0]), reverse=True))

    def __eq__(self, other):
        return isinstance(other, Poly) and self.sys == other.sys and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.sys, tuple(sorted(self.terms.items()))))
        return self._hash

    def sort_key(self):
        return tuple((m, pp.sorted_items()) for m, pp in self.sorted_items())

    def render(self) -> str:
        if not self.terms:
            return "0"
        names: List[str] = []
        for v in self.sys.vars:
            gn = v.gen_names()
            names.extend(gn if len(gn) == 1 else (gn[0], gn[1]))
        parts = []
        for m, pp in self.sorted_items():
            gens = []
            for slot, e in enumerate(m):
                if e == 1:
                    gens.append(names[slot])
                elif e > 1:
                    gens.append(f"{names[slot]}^{e}")
            gstr = "*".join(gens)
            ps = str(pp)
            if not gstr:
                parts.append(f"({ps})" if (" " in ps and not ps.startswith("(")) else ps)
            elif pp.is_one:
                parts.append(gstr)
            elif pp == ParamPoly.scalar(-1):
                parts.append(f"-{gstr}")
            elif len(pp.terms) == 1:
                parts.append(f"{ps}*{gstr}")
            else:
                parts.append(f"({ps})*{gstr}")
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out


def poly_divexact(num: Poly, div: Poly) -> Optional[Poly]:
    """Exact division in the reduced-basis ring; None when not divisible.

    Termination relies on the monomial layout ranking C-slots before
    S-slots, which makes the Pythagorean rewrite strictly decreasing.
    """
    if div.is_zero:
        raise ZeroDivisionError("polynomial division by zero")
    sys = num.sys
    lm, lc = div.leading()
    rem = Poly(sys, num.terms)
    quot: Dict[Mono, ParamPoly] = {}
    guard = 0
    while not rem.is_zero:
        guard += 1
        if guard > 10000:
            return None
        m, c = rem.leading()
        qm = _mono_sub(m, lm)
        if any(e < 0 for e in qm):
            return None
        qc = c.divexact(lc)
        if qc is None:
            return None
        quot[qm] = qc
        rem = rem.sub(div.mul_mono(qm).scale(qc))
    return Poly(sys, quot)


# ---------------------------------------------------------------------------


def _factor_sort_key(item):
    poly, mult = item
    return (poly.sort_key(), mult)


class CanonicalCoeff:
    """Canonically-normalized fraction of generator polynomials.

    The denominator is stored as a monomial together with a multiset of
    normalized multi-term factors.  Zero testing reduces to emptiness of
    the numerator, which is exact in this restricted ring.
    """

    __slots__ = ("sys", "num", "den_mono", "den_factors", "_hash")

    def __init__(self, sys: VarSystem, num: Poly, den_mono: Mono,
                 den_factors: Tuple[Tuple[Poly, int], ...]):
        self.sys = sys
        self.num = num
        self.den_mono = den_mono
        self.den_factors = den_factors
        self._hash = None

    # -- normalization ----------------------------------------------------

    @staticmethod
    def _normalize(sys: VarSystem, num: Poly, den_mono: Mono,
                   factors: Iterable[Tuple[Poly, int]]) -> "CanonicalCoeff":
        if num.is_zero:
            return CanonicalCoeff(sys, Poly(sys, {}), sys.unit_mono, ())

        den = list(den_mono)
        fac_acc: Dict[Poly, int] = {}
        num_scale = QONE

        def push_factor(f: Poly, mult: int):
            nonlocal num_scale, den
            if mult <= 0:
                return
            cont = f.content()
            if any(cont):
                f = f.shift_down(cont)
                for i, e in enumerate(cont):
                    den[i] += e * mult
            _, lead_pp = f.leading()
            _, lead_q = lead_pp.leading()
            if lead_q != 1:
                f = f.scale_q(QONE / lead_q)
                num_scale = num_scale * lead_q ** mult
            if len(f.terms) == 1 and f.terms.get(sys.unit_mono, None) is not None:
                if f.terms[sys.unit_mono].is_one:
                    return  # pure unit after normalization
            fac_acc[f] = fac_acc.get(f, 0) + mult

        for f, mult in factors:
            if f.is_zero:
                raise ZeroCoefficientDivision("denominator factor is identically zero")
            push_factor(f, mult)

        # C-powers above one in the denominator monomial become Pythagorean
        # factors so the stored monomial stays within the reduced basis.
        for v, off in zip(sys.vars, sys._offset):
            if v.is_linear:
                continue
            b = den[off]
            if b >= 2:
                k, rem = divmod(b, 2)
                den[off] = rem
                smono = list(sys.unit_mono)
                smono[off + 1] = 2
                pyth = Poly(sys, {sys.unit_mono: ParamPoly.one(),
                                  tuple(smono): ParamPoly.scalar(-v.tag)})
                push_factor(pyth, k)

        if num_scale != 1:
            num = num.scale_q(QONE / num_scale)

        den_mono = tuple(den)
        cont = _mono_min(num.content(), den_mono)
        if any(cont):
            num = num.shift_down(cont)
            den_mono = _mono_sub(den_mono, cont)

        fac = tuple(sorted(fac_acc.items(), key=_factor_sort_key))
        return CanonicalCoeff(sys, num, den_mono, fac)

    # -- predicates ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def constant_part(self) -> Optional[ParamPoly]:
        """The ParamPoly value if this coefficient is a constant, else None."""
        c = self.compact() if self.den_factors else self
        if any(c.den_mono) or c.den_factors:
            return None
        if c.num.is_zero:
            return ParamPoly.zero()
        if set(c.num.terms) == {self.sys.unit_mono}:
            return c.num.terms[self.sys.unit_mono]
        return None

    def depends_on(self, name: str) -> bool:
        off = self.sys.offset(name)
        slots = range(off, off + self.sys.var(name).slots)
        if any(any(m[s] for s in slots) for m in self.num.terms):
            return True
        if any(self.den_mono[s] for s in slots):
            return True
        return any(any(m[s] for s in slots) for f, _ in self.den_factors for m in f.terms)

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> Optional["CanonicalCoeff"]:
        if isinstance(other, CanonicalCoeff):
            if other.sys != self.sys:
                raise ValueError("coefficients from different variable systems")
            return other
        if isinstance(other, (int, ParamPoly, type(QONE))):
            return self.sys.lift(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_zero:
            return o
        if o.is_zero:
            return self
        lcm_mono = _mono_max(self.den_mono, o.den_mono)
        fa, fb = dict(self.den_factors), dict(o.den_factors)
        lcm_fac = {f: max(fa.get(f, 0), fb.get(f, 0)) for f in set(fa) | set(fb)}

        def raise_num(c: "CanonicalCoeff") -> Poly:
            num = c.num.mul_mono(_mono_sub(lcm_mono, c.den_mono))
            have = dict(c.den_factors)
            for f, k in lcm_fac.items():
                extra = k - have.get(f, 0)
                if extra:
                    num = num.mul(f.pow(extra))
            return num

        num = raise_num(self).add(raise_num(o))
        return self._normalize(self.sys, num, lcm_mono, tuple(lcm_fac.items()))

    __radd__ = __add__

    def __neg__(self):
        return CanonicalCoeff(self.sys, self.num.neg(), self.den_mono, self.den_factors)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_zero or o.is_zero:
            return self.sys.zero()
        fac: Dict[Poly, int] = dict(self.den_factors)
        for f, k in o.den_factors:
            fac[f] = fac.get(f, 0) + k
        return self._normalize(
            self.sys,
            self.num.mul(o.num),
            _mono_add(self.den_mono, o.den_mono),
            tuple(fac.items()),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero:
            raise ZeroCoefficientDivision("division by an identically-zero coefficient")
        num = self.num.mul_mono(o.den_mono)
        for f, k in o.den_factors:
            num = num.mul(f.pow(k))
        fac: Dict[Poly, int] = dict(self.den_factors)
        fac[o.num] = fac.get(o.num, 0) + 1
        return self._normalize(self.sys, num, self.den_mono, tuple(fac.items()))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("powers must be integers")
        if n < 0:
            return (self.sys.one() / self) ** (-n)
        acc = self.sys.one()
        base = self
        while n:
            if n & 1:
                acc = acc * base
            n >>= 1
            if n:
                base = base * base
        return acc

    # -- calculus --------------------------------------------------------------

    def differentiate(self, name: str) -> "CanonicalCoeff":
        """Exact partial derivative with respect to a position variable."""
        sys = self.sys
        if self.is_zero:
            return self
        dnum = self.num.derivative(name)
        if not any(self.den_mono) and not self.den_factors:
            return self._normalize(sys, dnum, sys.unit_mono, ())
        mono_poly = Poly.from_mono(sys, self.den_mono)
        dmono = mono_poly.derivative(name)
        # After cancelling the common prod_i f_i^(k_i - 1):
        #   (N / (M prod f^k))' =
        #   [N' M prod f - N (M' prod f + M sum_i k_i f_i' prod_{j != i} f_j)]
        #     / (M^2 prod f^(k+1))
        prod1 = Poly.one(sys)
        for f, _ in self.den_factors:
            prod1 = prod1.mul(f)
        top = dnum.mul(mono_poly).mul(prod1)
        dden = dmono.mul(prod1)
        for i, (f, k) in enumerate(self.den_factors):
            piece = f.derivative(name).scale(ParamPoly.scalar(k))
            for j, (g, _) in enumerate(self.den_factors):
                if j != i:
                    piece = piece.mul(g)
            dden = dden.add(mono_poly.mul(piece))
        top = top.sub(self.num.mul(dden))
        new_fac = tuple((f, k + 1) for f, k in self.den_factors)
        return self._normalize(sys, top, _mono_add(self.den_mono, self.den_mono), new_fac)

    # -- evaluation --------------------------------------------------------------

    def evaluate(self, point: Mapping[str, object], params: Mapping[str, object],
                 conv=float, guard: float = 1e-12, prec: Optional[int] = None):
        """Numeric value at a point; raises SingularEvaluation near poles.

        Pass ``prec`` (significant decimal digits) for high-precision
        evaluation through mpmath; the default is double precision.
        """
        if prec is not None:
            import mpmath
            with mpmath.workdps(prec):
                return self.evaluate(point, params, conv=_to_mpf,
                                     guard=float(10.0 ** (10 - prec)))
        genvals = generator_values(self.sys, point, conv)
        den = Poly.from_mono(self.sys, self.den_mono).evaluate(genvals, params, conv)
        for f, k in self.den_factors:
            den = den * f.evaluate(genvals, params, conv) ** k
        if abs(den) < guard:
            raise SingularEvaluation(f"denominator magnitude {den} below guard {guard}")
        return self.num.evaluate(genvals, params, conv) / den

    # -- structure ----------------------------------------------------------------

    def substitute(self, mapping: Mapping[str, object]) -> "CanonicalCoeff":
        num = Poly(self.sys, {})
        for m, pp in self.num.terms.items():
            sub = pp.substitute(mapping)
            if not sub.is_zero:
                num = num.add(Poly.from_mono(self.sys, m, sub))
        fac = []
        for f, k in self.den_factors:
            g = Poly(self.sys, {})
            for m, pp in f.terms.items():
                sub = pp.substitute(mapping)
                if not sub.is_zero:
                    g = g.add(Poly.from_mono(self.sys, m, sub))
            if g.is_zero:
                raise ZeroCoefficientDivision("substitution zeroed a denominator factor")
            fac.append((g, k))
        return self._normalize(self.sys, num, self.den_mono, tuple(fac))

    def compact(self) -> "CanonicalCoeff":
        """Cancel denominator factors that exactly divide the numerator.

        This is the optional GCD-style compaction; default arithmetic does
        not attempt it.
        """
        num = self.num
        remaining: List[Tuple[Poly, int]] = []
        for f, k in self.den_factors:
            const = f.terms.get(self.sys.unit_mono) if len(f.terms) == 1 else None
            while k > 0:
                if const is not None:
                    divided: Dict[Mono, ParamPoly] = {}
                    for m, pp in num.terms.items():
                        q = pp.divexact(const)
                        if q is None:
                            divided = None
                            break
                        divided[m] = q
                    quot = Poly(self.sys, divided) if divided is not None else None
                else:
                    quot = poly_divexact(num, f)
                if quot is None:
                    break
                num = quot
                k -= 1
            if k:
                remaining.append((f, k))
        return self._normalize(self.sys, num, self.den_mono, tuple(remaining))

    def embed(self, big: VarSystem) -> "CanonicalCoeff":
        """Reinterpret over a larger variable system containing the same vars."""
        if big == self.sys:
            return self
        mapping = []
        for v in self.sys.vars:
            if v.name not in big or big.var(v.name) != v:
                raise ValueError(f"target system lacks variable {v!r}")
            mapping.append((self.sys.offset(v.name), big.offset(v.name), v.slots))

        def conv(m: Mono) -> Mono:
            out = [0] * big.width
            for so, to, k in mapping:
                for i in range(k):
                    out[to + i] = m[so + i]
            return tuple(out)

        num = Poly(big, {conv(m): pp for m, pp in self.num.terms.items()})
        fac = tuple(
            (Poly(big, {conv(m): pp for m, pp in f.terms.items()}), k)
            for f, k in self.den_factors
        )
        return CanonicalCoeff(big, num, conv(self.den_mono), fac)

    def sort_key(self):
        return (self.num.sort_key(), self.den_mono,
                tuple((f.sort_key(), k) for f, k in self.den_factors))

    def __eq__(self, other):
        if not isinstance(other, CanonicalCoeff):
            return NotImplemented
        return (self.sys == other.sys and self.num == other.num
                and self.den_mono == other.den_mono and self.den_factors == other.den_factors)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.sys, self.num, self.den_mono, self.den_factors))
        return self._hash

    def render(self) -> str:
        if self.is_zero:
            return "0"
        num = self.num.render()
        if not any(self.den_mono) and not self.den_factors:
            return num
        dparts = []
        mono = Poly.from_mono(self.sys, self.den_mono)
        if any(self.den_mono):
            dparts.append(mono.render())
        for f, k in self.den_factors:
            fs = f"({f.render()})"
            dparts.append(fs if k == 1 else f"{fs}^{k}")
        den = "*".join(dparts)
        if len(self.num.terms) > 1:
            num = f"({num})"
        if "*" in den or " " in den:
            den = f"({den})" if not (den.startswith("(") and den.endswith(")")) else den
        return f"{num}/{den}"

    __str__ = render

    def __repr__(self):
        return f"CanonicalCoeff({self.render()})"


def generator_values(sys: VarSystem, point: Mapping[str, object], conv=float) -> Dict[str, tuple]:
    """Numeric generator values (C, S) or (x,) per variable at a point."""
    out: Dict[str, tuple] = {}
    for v in sys.vars:
        if v.name not in point:
            raise KeyError(f"no value supplied for position variable {v.name!r}")
        x = conv(point[v.name])
        if v.is_linear:
            out[v.name] = (x,)
            continue
        rate = conv(v.rate.numerator) / conv(v.rate.denominator)
        tag = conv(v.tag.numerator) / conv(v.tag.denominator)
        arg = rate * x
        if v.tag > 0:
            root = tag ** conv("0.5") if not isinstance(tag, float) else math.sqrt(tag)
            s, c = _sin(root * arg), _cos(root * arg)
            out[v.name] = (c, s / root)
        else:
            root = (-tag) ** conv("0.5") if not isinstance(tag, float) else math.sqrt(-tag)
            out[v.name] = (_cosh(root * arg), _sinh(root * arg) / root)
    return out


def _to_mpf(x):
    import mpmath
    if isinstance(x, (int, float)):
        return mpmath.mpf(x)
    if hasattr(x, "numerator") and not isinstance(x, mpmath.mpf):
        return mpmath.mpf(int(x.numerator)) / mpmath.mpf(int(x.denominator))
    return mpmath.mpf(x)


def _sin(x):
    if isinstance(x, float):
        return math.sin(x)
    import mpmath
    return mpmath.sin(x)


def _cos(x):
    if isinstance(x, float):
        return math.cos(x)
    import mpmath
    return mpmath.cos(x)


def _sinh(x):
    if isinstance(x, float):
        return math.sinh(x)
    import mpmath
    return mpmath.sinh(x)


def _cosh(x):
    if isinstance(x, float):
        return math.cosh(x)
    import mpmath
    return mpmath.cosh(x)
