"""Closed-under-differentiation scalar expressions.

The grammar covers constants, the argument x, general powers u^a, exp, log,
sums, products and Mittag-Leffler atoms E^lam_{p,b}(-c x^q).  Differentiation
stays inside the grammar (the atom differentiates by shifting its indices),
and constructors canonicalize aggressively -- constants fold, products merge
powers of a common base, sums collect structurally identical terms -- so that
high-order derivative chains grow polynomially rather than exponentially.

Functions are understood on x > 0; evaluation at x = 0 is only meaningful
through `limit_at_zero`.
"""

from __future__ import annotations

import math
import re

from .errors import DifferentiationDepthExceeded, DomainError
from .specfun import MLSpec, gamma_recip, ml_eval, pochhammer

__all__ = [
    "Expr", "const", "X", "add", "mul", "pow_", "exp_", "log_", "ml_atom",
    "parse_expr", "nth_derivative", "limit_at_zero", "ExprDerivatives",
]

_MAX_NODES = 500_000


class Expr:
    """Base expression node.  Immutable; derivatives are memoized."""

    __slots__ = ("_d", "_sig", "_size", "_chain")

    def __init__(self):
        self._d = None
        self._sig = None
        self._size = None
        self._chain = None

    # -- core interface -----------------------------------------------------
    def eval(self, x: float) -> float:
        raise NotImplementedError

    def _diff(self) -> "Expr":
        raise NotImplementedError

    def diff(self) -> "Expr":
        if self._d is None:
            self._d = self._diff()
        return self._d

    def signature(self):
        if self._sig is None:
            self._sig = self._signature()
        return self._sig

    def _signature(self):
        raise NotImplementedError

    def size(self) -> int:
        if self._size is None:
            self._size = self._compute_size()
        return self._size

    def _compute_size(self) -> int:
        return 1

    # -- structure probes ---------------------------------------------------
    def leading_term_at_zero(self):
        """(coef, exponent) of the leading power as x -> 0+, or None."""
        return None

    def power_sum(self):
        """{exponent: coef} when the expression is a finite sum of powers."""
        return None

    def __repr__(self):
        return f"<expr {self.signature()!r}>"


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: float):
        super().__init__()
        self.value = float(value)

    def eval(self, x):
        return self.value

    def _diff(self):
        return _ZERO

    def _signature(self):
        return ("c", self.value)

    def leading_term_at_zero(self):
        if self.value == 0.0:
            return (0.0, math.inf)
        return (self.value, 0.0)

    def power_sum(self):
        return {} if self.value == 0.0 else {0.0: self.value}


class Arg(Expr):
    __slots__ = ()

    def eval(self, x):
        return x

    def _diff(self):
        return _ONE

    def _signature(self):
        return ("x",)

    def leading_term_at_zero(self):
        return (1.0, 1.0)

    def power_sum(self):
        return {1.0: 1.0}


class Pow(Expr):
    __slots__ = ("base", "alpha")

    def __init__(self, base: Expr, alpha: float):
        super().__init__()
        self.base = base
        self.alpha = float(alpha)

    def eval(self, x):
        b = self.base.eval(x)
        a = self.alpha
        if b > 0.0:
            return b ** a
        if b == 0.0:
            if a > 0.0:
                return 0.0
            if a == 0.0:
                return 1.0
            return math.inf
        if a == round(a):
            return b ** int(round(a))
        raise DomainError(f"negative base {b} for fractional power {a}")

    def _diff(self):
        return mul(Const(self.alpha), pow_(self.base, self.alpha - 1.0), self.base.diff())

    def _signature(self):
        return ("pow", self.base.signature(), self.alpha)

    def _compute_size(self):
        return 1 + self.base.size()

    def leading_term_at_zero(self):
        lt = self.base.leading_term_at_zero()
        if lt is None:
            return None
        c, e = lt
        if c > 0.0:
            return (c ** self.alpha, e * self.alpha)
        if c == 0.0:
            return (0.0, math.inf) if self.alpha > 0 else None
        if self.alpha == round(self.alpha):
            return (c ** int(round(self.alpha)), e * self.alpha)
        return None

    def power_sum(self):
        ps = self.base.power_sum()
        if ps is None:
            return None
        if len(ps) == 1:
            (e, c), = ps.items()
            if c > 0.0 or self.alpha == round(self.alpha):
                return {e * self.alpha: c ** self.alpha}
            return None
        if self.alpha == round(self.alpha) and 0 <= self.alpha <= 4:
            out = {0.0: 1.0}
            for _ in range(int(round(self.alpha))):
                out = _convolve(out, ps)
            return out
        return None


class Exp(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        super().__init__()
        self.arg = arg

    def eval(self, x):
        u = self.arg.eval(x)
        try:
            return math.exp(u)
        except OverflowError:
            return math.inf

    def _diff(self):
        return mul(self, self.arg.diff())

    def _signature(self):
        return ("exp", self.arg.signature())

    def _compute_size(self):
        return 1 + self.arg.size()

    def leading_term_at_zero(self):
        lt = self.arg.leading_term_at_zero()
        if lt is None:
            return None
        c, e = lt
        if e > 0.0 or e == math.inf:
            return (1.0, 0.0)
        if e == 0.0:
            return (math.exp(c), 0.0)
        return None


class Log(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        super().__init__()
        self.arg = arg

    def eval(self, x):
        u = self.arg.eval(x)
        if u <= 0.0:
            if u == 0.0:
                return -math.inf
            raise DomainError("log of a negative value")
        return math.log(u)

    def _diff(self):
        return mul(self.arg.diff(), pow_(self.arg, -1.0))

    def _signature(self):
        return ("log", self.arg.signature())

    def _compute_size(self):
        return 1 + self.arg.size()

    def leading_term_at_zero(self):
        lt = self.arg.leading_term_at_zero()
        if lt is None:
            return None
        c, e = lt
        if e == 0.0 and c > 0.0 and c != 1.0:
            return (math.log(c), 0.0)
        return None


class Sum(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: tuple):
        super().__init__()
        self.terms = terms

    def eval(self, x):
        return math.fsum(t.eval(x) for t in self.terms)

    def _diff(self):
        return add(*(t.diff() for t in self.terms))

    def _signature(self):
        return ("sum",) + tuple(t.signature() for t in self.terms)

    def _compute_size(self):
        return 1 + sum(t.size() for t in self.terms)

    def leading_term_at_zero(self):
        best = {}
        for t in self.terms:
            lt = t.leading_term_at_zero()
            if lt is None:
                return None
            c, e = lt
            if c == 0.0:
                continue
            key = _r(e)
            best[key] = best.get(key, 0.0) + c
        if not best:
            return (0.0, math.inf)
        e = min(best)
        c = best[e]
        scale = max(abs(v) for v in best.values())
        if abs(c) <= 1e-12 * scale:
            return None  # leading coefficients cancel; order unknown
        return (c, e)

    def power_sum(self):
        out: dict = {}
        for t in self.terms:
            ps = t.power_sum()
            if ps is None:
                return None
            for e, c in ps.items():
                _ps_put(out, e, c)
        return {e: c for e, c in out.items() if c != 0.0}


class Product(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: tuple):
        super().__init__()
        self.factors = factors

    def eval(self, x):
        out = 1.0
        for f in self.factors:
            out *= f.eval(x)
        return out

    def _diff(self):
        pieces = []
        fs = self.factors
        for i, f in enumerate(fs):
            rest = fs[:i] + fs[i + 1:]
            pieces.append(mul(f.diff(), *rest))
        return add(*pieces)

    def _signature(self):
        return ("prod",) + tuple(f.signature() for f in self.factors)

    def _compute_size(self):
        return 1 + sum(f.size() for f in self.factors)

    def leading_term_at_zero(self):
        coef, expo = 1.0, 0.0
        for f in self.factors:
            lt = f.leading_term_at_zero()
            if lt is None:
                return None
            c, e = lt
            if c == 0.0 and e == math.inf:
                return (0.0, math.inf)
            coef *= c
            expo += e
        return (coef, expo)

    def power_sum(self):
        out = {0.0: 1.0}
        for f in self.factors:
            ps = f.power_sum()
            if ps is None:
                return None
            out = _convolve(out, ps)
        return out


class MLAtom(Expr):
    """E^lam_{p,b}(-c x^q) as a first-class leaf.

    Its derivative shifts the indices: d/dx E^lam_{p,b}(-c x^q)
    = -lam c q x^{q-1} E^{lam+1}_{p,b+p}(-c x^q).
    """

    __slots__ = ("lam", "p", "b", "c", "q")

    def __init__(self, lam: float, p: float, b: float, c: float = 1.0, q: float = 1.0):
        super().__init__()
        if c < 0.0:
            raise DomainError("ML atom argument must be -c x^q with c >= 0")
        self.lam, self.p, self.b = float(lam), float(p), float(b)
        self.c, self.q = float(c), float(q)

    def spec(self) -> MLSpec:
        return MLSpec(self.lam, self.p, self.b)

    def eval(self, x):
        return ml_eval(self.spec(), -self.c * x ** self.q)

    def _diff(self):
        return mul(
            Const(-self.lam * self.c * self.q),
            pow_(_X, self.q - 1.0),
            MLAtom(self.lam + 1.0, self.p, self.b + self.p, self.c, self.q),
        )

    def _signature(self):
        return ("ml", self.lam, self.p, self.b, self.c, self.q)

    def leading_term_at_zero(self):
        poch = 1.0
        fact = 1.0
        for k in range(0, 200):
            if k > 0:
                poch *= self.lam + (k - 1)
                fact *= k
            rg = gamma_recip(self.p * k + self.b)
            if poch == 0.0:
                return (0.0, math.inf)
            if rg != 0.0:
                return (poch * (-self.c) ** k / fact * rg, self.q * k)
        return None


# ---------------------------------------------------------------------------
# canonicalizing constructors
# ---------------------------------------------------------------------------

_ZERO = Const(0.0)
_ONE = Const(1.0)
_X = Arg()
X = _X


def const(v: float) -> Expr:
    return Const(v)


def _r(e: float) -> float:
    return round(e, 12)


def _ps_put(d: dict, e: float, c: float) -> None:
    """Accumulate into a power-sum map, merging nearly equal exponents while
    keeping the first-seen exact float as the representative."""
    for k in d:
        if abs(k - e) <= 1e-9 * (1.0 + abs(e)):
            d[k] += c
            return
    d[e] = c


def _convolve(a: dict, b: dict) -> dict:
    out: dict = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            _ps_put(out, e1 + e2, c1 * c2)
    return {e: c for e, c in out.items() if c != 0.0}


def _split_const(t: Expr) -> tuple[float, Expr | None]:
    """Separate a numeric prefactor from a term."""
    if isinstance(t, Const):
        return t.value, None
    if isinstance(t, Product):
        coef = 1.0
        rest = []
        for f in t.factors:
            if isinstance(f, Const):
                coef *= f.value
            else:
                rest.append(f)
        if not rest:
            return coef, None
        if len(rest) == 1:
            return coef, rest[0]
        return coef, Product(tuple(rest))
    return 1.0, t


def add(*terms: Expr) -> Expr:
    flat = []
    stack = list(terms)
    while stack:
        t = stack.pop()
        if isinstance(t, Sum):
            stack.extend(t.terms)
        else:
            flat.append(t)
    const_part = 0.0
    groups: dict = {}
    for t in flat:
        coef, rest = _split_const(t)
        if rest is None:
            const_part += coef
            continue
        key = rest.signature()
        if key in groups:
            groups[key] = (groups[key][0] + coef, rest)
        else:
            groups[key] = (coef, rest)
    out = []
    for key in sorted(groups, key=repr):
        coef, rest = groups[key]
        if coef == 0.0:
            continue
        out.append(rest if coef == 1.0 else mul(Const(coef), rest))
    if const_part != 0.0 or not out:
        out.insert(0, Const(const_part))
    if len(out) == 1:
        return out[0]
    return Sum(tuple(out))


def mul(*factors: Expr) -> Expr:
    flat = []
    stack = list(factors)
    while stack:
        f = stack.pop()
        if isinstance(f, Product):
            stack.extend(f.factors)
        else:
            flat.append(f)
    coef = 1.0
    powers: dict = {}   # signature(base) -> [base, alpha]
    exp_args = []
    others = []
    for f in flat:
        if isinstance(f, Const):
            coef *= f.value
        elif isinstance(f, Exp):
            exp_args.append(f.arg)
        else:
            base, alpha = (f.base, f.alpha) if isinstance(f, Pow) else (f, 1.0)
            key = base.signature()
            if key in powers:
                powers[key][1] += alpha
            else:
                powers[key] = [base, alpha]
    if coef == 0.0:
        return _ZERO
    for key in sorted(powers, key=repr):
        base, alpha = powers[key]
        p = pow_(base, alpha)
        if isinstance(p, Const):
            coef *= p.value
        else:
            others.append(p)
    if exp_args:
        e = exp_(add(*exp_args))
        if isinstance(e, Const):
            coef *= e.value
        else:
            others.append(e)
    if not others:
        return Const(coef)
    if coef != 1.0:
        others.insert(0, Const(coef))
    if len(others) == 1:
        return others[0]
    return Product(tuple(others))


def pow_(base: Expr, alpha: float) -> Expr:
    alpha = float(alpha)
    if alpha == 0.0:
        return _ONE
    if alpha == 1.0:
        return base
    if isinstance(base, Const):
        v = base.value
        if v > 0.0 or alpha == round(alpha):
            return Const(v ** alpha if v > 0.0 else v ** int(round(alpha)))
        raise DomainError("negative constant under fractional power")
    if isinstance(base, Pow):
        return pow_(base.base, base.alpha * alpha)
    if isinstance(base, Product):
        coef, rest = _split_const(base)
        if rest is not None and coef != 1.0 and coef > 0.0:
            return mul(Const(coef ** alpha), pow_(rest, alpha))
    return Pow(base, alpha)


def exp_(arg: Expr) -> Expr:
    if isinstance(arg, Const):
        return Const(math.exp(arg.value))
    return Exp(arg)


def log_(arg: Expr) -> Expr:
    if isinstance(arg, Const):
        if arg.value <= 0.0:
            raise DomainError("log of a non-positive constant")
        return Const(math.log(arg.value))
    if isinstance(arg, Pow):
        return mul(Const(arg.alpha), log_(arg.base))
    return Log(arg)


def ml_atom(lam: float, p: float, b: float, c: float = 1.0, q: float = 1.0) -> Expr:
    return MLAtom(lam, p, b, c, q)


def from_power_sum(ps: dict) -> Expr:
    """Rebuild an expression from a {exponent: coef} map."""
    terms = [mul(Const(c), pow_(_X, e)) for e, c in sorted(ps.items())]
    return add(*terms) if terms else _ZERO


# ---------------------------------------------------------------------------
# derivative chains and limits
# ---------------------------------------------------------------------------

def nth_derivative(expr: Expr, n: int, cap: int | None = None) -> Expr:
    """n-th symbolic derivative, with an order cap and a growth guard."""
    if cap is not None and n > cap:
        raise DifferentiationDepthExceeded(f"order {n} above cap {cap}")
    if expr._chain is None:
        expr._chain = [expr]
    chain = expr._chain
    while len(chain) <= n:
        d = chain[-1].diff()
        if d.size() > _MAX_NODES:
            raise DifferentiationDepthExceeded(
                f"expression grew past {_MAX_NODES} nodes at order {len(chain)}")
        chain.append(d)
    return chain[n]


def limit_at_zero(expr: Expr) -> float:
    """lim_{x->0+} expr(x), via the leading power when it is known."""
    lt = expr.leading_term_at_zero()
    if lt is not None:
        c, e = lt
        if e > 0.0 or c == 0.0:
            return 0.0
        if e == 0.0:
            return c
        return math.copysign(math.inf, c)
    return expr.eval(1e-300)


class ExprDerivatives:
    """Adapter exposing eval_deriv(n, x) for sign-pattern scans."""

    def __init__(self, expr: Expr, cap: int | None = None):
        self.expr = expr
        self.cap = cap

    def eval_deriv(self, n: int, x: float) -> float:
        return nth_derivative(self.expr, n, self.cap).eval(x)


# ---------------------------------------------------------------------------
# text grammar
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    \s*(
        \d+\.\d*(?:[eE][+-]?\d+)? | \.\d+(?:[eE][+-]?\d+)? | \d+(?:[eE][+-]?\d+)?
      | [A-Za-z_][A-Za-z_0-9]*
      | \*\* | [()+\-*/^,;]
    )""", re.VERBOSE)


def _tokenize(src: str) -> list[str]:
    pos, out = 0, []
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise DomainError(f"cannot tokenize {src[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    out.append("<end>")
    return out


class _Parser:
    def __init__(self, tokens: list[str]):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, t):
        got = self.next()
        if got != t:
            raise DomainError(f"expected {t!r}, got {got!r}")

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek() != "<end>":
            raise DomainError(f"trailing input at {self.peek()!r}")
        return e

    def expr(self) -> Expr:
        t = self.term()
        while self.peek() in ("+", "-"):
            op = self.next()
            rhs = self.term()
            t = add(t, rhs if op == "+" else mul(Const(-1.0), rhs))
        return t

    def term(self) -> Expr:
        f = self.factor()
        while self.peek() in ("*", "/"):
            op = self.next()
            rhs = self.factor()
            f = mul(f, rhs if op == "*" else pow_(rhs, -1.0))
        return f

    def factor(self) -> Expr:
        if self.peek() in ("+", "-"):
            op = self.next()
            f = self.factor()
            return f if op == "+" else mul(Const(-1.0), f)
        a = self.atom()
        if self.peek() in ("^", "**"):
            self.next()
            a = pow_(a, self.exponent())
        return a

    def exponent(self) -> float:
        sign = 1.0
        if self.peek() in ("+", "-"):
            sign = -1.0 if self.next() == "-" else 1.0
        t = self.next()
        if t == "(":
            inner = self.exponent()
            self.expect(")")
            return sign * inner
        try:
            return sign * float(t)
        except ValueError:
            raise DomainError(f"power exponent must be numeric, got {t!r}") from None

    def number(self) -> float:
        sign = 1.0
        if self.peek() in ("+", "-"):
            sign = -1.0 if self.next() == "-" else 1.0
        t = self.next()
        try:
            return sign * float(t)
        except ValueError:
            raise DomainError(f"expected a number, got {t!r}") from None

    def atom(self) -> Expr:
        t = self.next()
        if t == "(":
            e = self.expr()
            self.expect(")")
            return e
        if t in ("x", "psi", "Psi"):
            return _X
        if t == "pow":
            self.expect("(")
            base = self.expr()
            self.expect(",")
            alpha = self.number()
            self.expect(")")
            return pow_(base, alpha)
        if t == "exp":
            self.expect("(")
            e = self.expr()
            self.expect(")")
            return exp_(e)
        if t == "log":
            self.expect("(")
            e = self.expr()
            self.expect(")")
            return log_(e)
        if t == "mlf":
            self.expect("(")
            lam = self.number()
            self.expect(",")
            p = self.number()
            self.expect(",")
            b = self.number()
            self.expect(";")
            arg = self.expr()
            self.expect(")")
            ps = arg.power_sum()
            if ps is None or len(ps) != 1:
                raise DomainError("mlf argument must be of the form -c*x^q")
            (q, cneg), = ps.items()
            if cneg > 0.0:
                raise DomainError("mlf argument must be non-positive, -c*x^q with c >= 0")
            return MLAtom(lam, p, b, -cneg, q)
        try:
            return Const(float(t))
        except ValueError:
            raise DomainError(f"unknown token {t!r}") from None


def parse_expr(src: str) -> Expr:
    """Parse the small text grammar: numbers, x, + - * / ^,
    pow(u,a), exp(u), log(u), mlf(lam,p,b; -c*x^q)."""
    return _Parser(_tokenize(src)).parse()
