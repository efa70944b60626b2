"""Exact rational-function algebra on a 4-dimensional phase space.

The phase space carries canonical variables (x1, x2, p1, p2) plus named
parameters treated as transcendentals over Q.  Everything is exact: elements
live in a multivariate rational-function field with rational coefficients,
kept in a canonical gcd-reduced, normalized form so that structural equality
is mathematical equality.  No floating point ever enters.

Positivity flags on parameters never trigger numeric approximation; they only
license sign decisions (see expression_sign) made by the reduction layer.
"""

from fractions import Fraction

from sympy.polys.domains import QQ
from sympy.polys.fields import field as _frac_field

from .errors import (
    EvaluationError,
    ExpressionParseError,
    ZeroDenominatorError,
)

PHASE_VARIABLES = ("x1", "x2", "p1", "p2")
DEFAULT_PARAMETERS = ("mu", "omega_c", "omega_0", "omega_P", "a")
# omega_0 carries either sign (charge/field orientation), so it is not listed.
DEFAULT_POSITIVE = frozenset({"mu", "omega_c", "omega_P", "a"})


class PhaseSpace:
    """A fixed generator context: phase variables, optional auxiliary
    variables (velocities, axial coordinate), and parameters.

    Generator order is the normal-form order: x1, x2, p1, p2, auxiliaries in
    declaration order, then parameters lexicographically.
    """

    def __init__(self, parameters=DEFAULT_PARAMETERS, positive=None, aux=()):
        params = tuple(sorted(dict.fromkeys(parameters)))
        aux = tuple(dict.fromkeys(aux))
        for name in params + aux:
            if not name.isidentifier():
                raise ValueError(f"invalid symbol name {name!r}")
            if name in PHASE_VARIABLES:
                raise ValueError(f"{name!r} collides with a phase variable")
        if set(params) & set(aux):
            raise ValueError("parameter and auxiliary names overlap")
        if positive is None:
            positive = DEFAULT_POSITIVE & set(params)
        else:
            positive = frozenset(positive)
            unknown = positive - set(params)
            if unknown:
                raise ValueError(f"positivity flags for undeclared parameters: {sorted(unknown)}")
        self.parameters = params
        self.aux = aux
        self.positive = frozenset(positive)
        self.names = PHASE_VARIABLES + aux + params
        fld_and_gens = _frac_field(",".join(self.names), QQ)
        self.field = fld_and_gens[0]
        self._gens = tuple(fld_and_gens[1:])
        self._index = {name: i for i, name in enumerate(self.names)}

    # -- element constructors -------------------------------------------------

    def var(self, name):
        """The generator with this name, as a RationalPhaseFunction."""
        try:
            i = self._index[name]
        except KeyError:
            raise KeyError(f"unknown symbol {name!r}; declared: {', '.join(self.names)}") from None
        return RationalPhaseFunction(self, self._gens[i])

    def const(self, value):
        """An exact rational constant."""
        fr = Fraction(value)
        return RationalPhaseFunction(self, self.field.one * QQ(fr.numerator, fr.denominator))

    @property
    def zero(self):
        return RationalPhaseFunction(self, self.field.zero)

    @property
    def one(self):
        return RationalPhaseFunction(self, self.field.one)

    def vars(self, *names):
        return tuple(self.var(n) for n in names)

    def parse(self, text):
        return parse_expression(self, text)

    def is_parameter(self, name):
        return name in self.parameters

    def __eq__(self, other):
        return isinstance(other, PhaseSpace) and self.names == other.names and self.positive == other.positive

    def __hash__(self):
        return hash((self.names, self.positive))

    def __repr__(self):
        return f"PhaseSpace(aux={self.aux}, parameters={self.parameters})"


def _coerce(space, value):
    if isinstance(value, RationalPhaseFunction):
        if value.space != space:
            raise ValueError("operands belong to different phase spaces")
        return value.expr
    if isinstance(value, (int, Fraction)):
        fr = Fraction(value)
        return space.field.one * QQ(fr.numerator, fr.denominator)
    raise TypeError(f"cannot interpret {type(value).__name__} as a phase-space expression")


class RationalPhaseFunction:
    """Exact rational function of the phase-space generators.

    Thin immutable wrapper around a canonical fraction-field element; supports
    arithmetic, differentiation, and deterministic serialization.  Structural
    equality is mathematical equality.
    """

    __slots__ = ("space", "expr")

    def __init__(self, space, expr):
        self.space = space
        self.expr = expr

    def _wrap(self, expr):
        return RationalPhaseFunction(self.space, expr)

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other):
        return self._wrap(self.expr + _coerce(self.space, other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.expr - _coerce(self.space, other))

    def __rsub__(self, other):
        return self._wrap(_coerce(self.space, other) - self.expr)

    def __mul__(self, other):
        return self._wrap(self.expr * _coerce(self.space, other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        den = _coerce(self.space, other)
        if not den:
            raise ZeroDenominatorError("division by the zero function")
        return self._wrap(self.expr / den)

    def __rtruediv__(self, other):
        if not self.expr:
            raise ZeroDenominatorError("division by the zero function")
        return self._wrap(_coerce(self.space, other) / self.expr)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("exponent must be an integer")
        if n < 0 and not self.expr:
            raise ZeroDenominatorError("negative power of the zero function")
        return self._wrap(self.expr ** n)

    def __neg__(self):
        return self._wrap(-self.expr)

    def __pos__(self):
        return self

    # -- structure ------------------------------------------------------------

    def diff(self, name):
        """Exact partial derivative with respect to a named generator."""
        i = self.space._index.get(name)
        if i is None:
            raise KeyError(f"unknown symbol {name!r}")
        return self._wrap(self.expr.diff(self.space._gens[i]))

    @property
    def is_zero(self):
        return not self.expr

    def free_names(self):
        """Names of generators actually present in the expression."""
        used = set()
        for poly in (self.expr.numer, self.expr.denom):
            for monom, _ in poly.terms():
                for i, e in enumerate(monom):
                    if e:
                        used.add(self.space.names[i])
        return used

    def is_parameter_only(self):
        """True when no phase or auxiliary variable appears."""
        return self.free_names() <= set(self.space.parameters)

    def is_constant(self):
        return not self.free_names()

    def constant_value(self):
        """The expression as an exact Fraction; requires is_constant()."""
        if not self.is_constant():
            raise EvaluationError("expression is not a constant")
        return evaluate(self, {})

    def __eq__(self, other):
        if isinstance(other, RationalPhaseFunction):
            return self.space == other.space and self.expr == other.expr
        if isinstance(other, (int, Fraction)):
            return self.expr == _coerce(self.space, other)
        return NotImplemented

    def __hash__(self):
        return hash(self.expr)

    def __str__(self):
        return serialize_expression(self)

    def __repr__(self):
        return f"<RationalPhaseFunction {serialize_expression(self)}>"


# -- Poisson bracket ---------------------------------------------------------


def poisson_bracket(f, g):
    """{f, g} = sum_i (df/dx_i dg/dp_i - df/dp_i dg/dx_i), exact."""
    space = f.space
    if g.space != space:
        raise ValueError("operands belong to different phase spaces")
    fe, ge = f.expr, g.expr
    gx1, gx2, gp1, gp2 = space._gens[:4]
    expr = (fe.diff(gx1) * ge.diff(gp1) - fe.diff(gp1) * ge.diff(gx1)
            + fe.diff(gx2) * ge.diff(gp2) - fe.diff(gp2) * ge.diff(gx2))
    return RationalPhaseFunction(space, expr)


# -- substitution and evaluation ----------------------------------------------


def _poly_image(space, poly, table):
    """Evaluate a polynomial at field-element values for selected generators.

    table maps generator index -> FracElement; untouched generators map to
    themselves.  Exact throughout.
    """
    fld = space.field
    total = fld.zero
    gens = space._gens
    for monom, coeff in poly.terms():
        term = fld.one * coeff
        for i, e in enumerate(monom):
            if e:
                base = table.get(i)
                if base is None:
                    term = term * gens[i] ** e
                else:
                    term = term * base ** e
        total = total + term
    return total


def substitute(f, bindings):
    """Simultaneous substitution of generators by rational phase functions.

    bindings: map name -> RationalPhaseFunction | int | Fraction.  Targets are
    usually phase variables (imposing constraints as strong conditions) but
    auxiliary variables and parameters may be substituted the same way.
    """
    space = f.space
    table = {}
    for name, value in bindings.items():
        i = space._index.get(name)
        if i is None:
            raise KeyError(f"unknown symbol {name!r}")
        if i in table:
            raise ValueError(f"duplicate binding for {name!r}")
        table[i] = _coerce(space, value)
    num = _poly_image(space, f.expr.numer, table)
    den = _poly_image(space, f.expr.denom, table)
    if not den:
        raise ZeroDenominatorError(
            "substitution produced an identically-zero denominator")
    return RationalPhaseFunction(space, num / den)


def _poly_value(space, poly, values):
    total = Fraction(0)
    for monom, coeff in poly.terms():
        term = Fraction(coeff.numerator, coeff.denominator)
        for i, e in enumerate(monom):
            if e:
                term *= values[i] ** e
        total += term
    return total


def evaluate(f, point):
    """Exact rational value of f at a numeric point.

    point: map name -> int | Fraction.  Every generator occurring in f must be
    bound; a vanishing denominator is a reported evaluation error.
    """
    space = f.space
    values = {}
    for name, value in point.items():
        i = space._index.get(name)
        if i is None:
            raise EvaluationError(f"unknown symbol {name!r}")
        values[i] = Fraction(value)
    free = f.free_names()
    missing = sorted(free - {space.names[i] for i in values})
    if missing:
        raise EvaluationError(f"unbound symbols at evaluation point: {', '.join(missing)}")
    den = _poly_value(space, f.expr.denom, values)
    if den == 0:
        raise EvaluationError("denominator vanishes at the evaluation point")
    return _poly_value(space, f.expr.numer, values) / den


# -- sign decisions ------------------------------------------------------------


def _poly_sign(space, poly):
    """Sign of a parameter-only polynomial decidable from positivity flags.

    Returns +1 / -1 when every term has the same coefficient sign and every
    generator appearing is a positive-flagged parameter; 0 for the zero
    polynomial; None when undecidable.
    """
    terms = poly.terms()
    if not terms:
        return 0
    sign = None
    for monom, coeff in terms:
        for i, e in enumerate(monom):
            if e and space.names[i] not in space.positive:
                return None
        s = 1 if coeff > 0 else -1
        if sign is None:
            sign = s
        elif s != sign:
            return None
    return sign


def expression_sign(f):
    """Decidable sign of an expression under the declared positivity flags.

    +1 / -1 / 0, or None when the sign does not follow from the flags alone.
    """
    if f.is_zero:
        return 0
    ns = _poly_sign(f.space, f.expr.numer)
    ds = _poly_sign(f.space, f.expr.denom)
    if not ns or not ds:
        return None
    return ns * ds


# -- parser ---------------------------------------------------------------------


class _Tokenizer:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.tokens = []
        self._scan()
        self.i = 0

    def _scan(self):
        text = self.text
        n = len(text)
        pos = 0
        while pos < n:
            ch = text[pos]
            if ch.isspace():
                pos += 1
                continue
            if ch.isdigit():
                start = pos
                while pos < n and text[pos].isdigit():
                    pos += 1
                self.tokens.append(("INT", text[start:pos], start))
                continue
            if ch.isalpha() or ch == "_":
                start = pos
                while pos < n and (text[pos].isalnum() or text[pos] == "_"):
                    pos += 1
                self.tokens.append(("NAME", text[start:pos], start))
                continue
            if ch in "+-*/^()":
                self.tokens.append((ch, ch, pos))
                pos += 1
                continue
            raise ExpressionParseError(f"unexpected character {ch!r} at position {pos}", pos)
        self.tokens.append(("END", "", n))

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok


class _Parser:
    """Recursive-descent parser for the infix grammar:

        expr  := term (('+'|'-') term)*
        term  := unary (('*'|'/') unary)*
        unary := ('+'|'-')* power
        power := atom ('^' ('-')? INT)?
        atom  := INT | NAME | '(' expr ')'
    """

    def __init__(self, space, text):
        self.space = space
        self.toks = _Tokenizer(text)

    def parse(self):
        value = self._expr()
        kind, text, pos = self.toks.peek()
        if kind != "END":
            raise ExpressionParseError(f"unexpected {text!r} at position {pos}", pos)
        return value

    def _expr(self):
        value = self._term()
        while True:
            kind, _, _ = self.toks.peek()
            if kind == "+":
                self.toks.next()
                value = value + self._term()
            elif kind == "-":
                self.toks.next()
                value = value - self._term()
            else:
                return value

    def _term(self):
        value = self._unary()
        while True:
            kind, _, pos = self.toks.peek()
            if kind == "*":
                self.toks.next()
                value = value * self._unary()
            elif kind == "/":
                self.toks.next()
                divisor = self._unary()
                if divisor.is_zero:
                    raise ExpressionParseError(f"division by zero at position {pos}", pos)
                value = value / divisor
            else:
                return value

    def _unary(self):
        sign = 1
        while True:
            kind, _, _ = self.toks.peek()
            if kind == "-":
                self.toks.next()
                sign = -sign
            elif kind == "+":
                self.toks.next()
            else:
                break
        value = self._power()
        return -value if sign < 0 else value

    def _power(self):
        value = self._atom()
        kind, _, _ = self.toks.peek()
        if kind == "^":
            self.toks.next()
            neg = False
            kind, text, pos = self.toks.peek()
            if kind == "-":
                self.toks.next()
                neg = True
                kind, text, pos = self.toks.peek()
            if kind != "INT":
                raise ExpressionParseError(f"integer exponent expected at position {pos}", pos)
            self.toks.next()
            e = int(text)
            if neg:
                if value.is_zero:
                    raise ExpressionParseError(f"negative power of zero at position {pos}", pos)
                e = -e
            value = value ** e
        return value

    def _atom(self):
        kind, text, pos = self.toks.next()
        if kind == "INT":
            return self.space.const(int(text))
        if kind == "NAME":
            try:
                return self.space.var(text)
            except KeyError:
                known = ", ".join(self.space.names)
                raise ExpressionParseError(
                    f"unknown symbol {text!r} at position {pos}; declared symbols: {known}", pos) from None
        if kind == "(":
            value = self._expr()
            kind2, text2, pos2 = self.toks.next()
            if kind2 != ")":
                raise ExpressionParseError(f"')' expected at position {pos2}", pos2)
            return value
        raise ExpressionParseError(f"unexpected {text or 'end of input'!r} at position {pos}", pos)


def parse_expression(space, text):
    """Parse infix text into a canonical RationalPhaseFunction."""
    try:
        return _Parser(space, text).parse()
    except ZeroDivisionError:
        raise ZeroDenominatorError("division by zero in expression") from None


# -- serializer -------------------------------------------------------------------


def _poly_string(space, poly):
    terms = poly.terms()
    if not terms:
        return "0"
    parts = []
    for monom, coeff in terms:
        num = coeff.numerator
        den = coeff.denominator
        sign = "-" if num < 0 else "+"
        num = abs(num)
        factors = []
        if num != 1 or den != 1 or not any(monom):
            factors.append(str(num) if den == 1 else f"{num}/{den}")
        for i, e in enumerate(monom):
            if e == 1:
                factors.append(space.names[i])
            elif e > 1:
                factors.append(f"{space.names[i]}^{e}")
        body = "*".join(factors)
        if not parts:
            parts.append(body if sign == "+" else f"-{body}")
        else:
            parts.append(f" {sign} {body}")
    return "".join(parts)


def serialize_expression(f):
    """Deterministic serialization to the parser's grammar.

    Round trip is exact: parse_expression(space, serialize_expression(f))
    reproduces f structurally.
    """
    space = f.space
    num = _poly_string(space, f.expr.numer)
    if f.expr.denom == f.expr.denom.ring.one:
        return num
    den = _poly_string(space, f.expr.denom)
    return f"({num})/({den})"
