"""
Problem files and the equation grammar.

A problem file is a JSON document validated by ``ProblemSpec``. Its equation
string is read by a small Pratt parser:

    expr   := expr ('+' | '-') expr | expr ('*' | '/') expr
            | '-' expr | expr '^' expr | atom
    atom   := number | name | name "'" | call | '(' expr ')'
    call   := unknown '(' expr ')' | unknown "'" '(' expr ')'

Multiplication must be written out; ``2z`` and ``(a)(b)`` are syntax errors.
Evaluation turns the expression into a polynomial in the two evaluations of
the unknown (y and y', y(s) and y(s+step), y(z) and y(q*z)) with
coefficients in the problem field.
"""

import re
from pathlib import Path
from typing import Any, Dict, Iterator, NamedTuple, Optional, Tuple, Union

from loguru import logger
from pydantic import ValidationError
from sympy import QQ
from sympy.polys.fields import FracElement

from .algebra import AlgebraContext, same
from .exceptions import AlgebraError, EquationSyntaxError, ProblemSpecError
from .models import EquationKind, ProblemSpec
from .series_solver import EquationModel

TOKEN_PATTERN = re.compile(
    r"""
    (?P<space>\s+)
    |(?P<num>\d+)
    |(?P<name>[A-Za-z_][A-Za-z0-9_]*)
    |(?P<op>\*\*|[-+*/^()='])
    |(?P<bad>.)
    """,
    re.VERBOSE,
)

Key = Tuple[int, int]


class Token(NamedTuple):
    type: str
    value: str
    position: int


def tokenize(source: str) -> Iterator[Token]:
    for match in TOKEN_PATTERN.finditer(source):
        kind, value, position = match.lastgroup, match.group(), match.start()
        if kind == "space":
            continue
        if kind == "bad":
            raise EquationSyntaxError(f"unexpected character '{value}'", source, position)
        if kind == "op":
            kind = "^" if value == "**" else value
        yield Token(kind, value, position)


# 取值

class Expr:
    """Polynomial in Y0, Y1 with coefficients in the problem field."""

    __slots__ = ("context", "terms")

    def __init__(self, context: AlgebraContext, terms: Dict[Key, FracElement]):
        self.context = context
        self.terms = {k: v for k, v in terms.items() if v}

    @classmethod
    def constant(cls, context: AlgebraContext, value: FracElement) -> "Expr":
        return cls(context, {(0, 0): value})

    @classmethod
    def unknown(cls, context: AlgebraContext, which: int) -> "Expr":
        return cls(context, {(1, 0) if which == 0 else (0, 1): context.one})

    @property
    def is_constant(self) -> bool:
        return all(k == (0, 0) for k in self.terms)

    @property
    def value(self) -> FracElement:
        return self.terms.get((0, 0), self.context.zero)

    def __add__(self, other: "Expr") -> "Expr":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, self.context.zero) + v
        return Expr(self.context, out)

    def __neg__(self) -> "Expr":
        return Expr(self.context, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "Expr") -> "Expr":
        return self + (-other)

    def __mul__(self, other: "Expr") -> "Expr":
        out: Dict[Key, FracElement] = {}
        for (i, j), a in self.terms.items():
            for (k, l), b in other.terms.items():
                key = (i + k, j + l)
                out[key] = out.get(key, self.context.zero) + a * b
        return Expr(self.context, out)

    def scale(self, c: FracElement) -> "Expr":
        return Expr(self.context, {k: v * c for k, v in self.terms.items()})


class Scope:
    """What names mean while evaluating one expression."""

    def __init__(
        self,
        context: AlgebraContext,
        names: Dict[str, FracElement],
        source: str,
        unknown: Optional[str] = None,
        kind: Optional[EquationKind] = None,
        step: int = 1,
    ):
        self.context = context
        self.names = names
        self.source = source
        self.unknown = unknown
        self.kind = kind
        self.step = step

    def fail(self, message: str, position: int) -> ProblemSpecError:
        return ProblemSpecError(f"{message} (at position {position} of '{self.source}')")


# Pratt 解析器

class Symbol:
    type = ""
    lbp = 0

    def __init__(self, parser: "Parser", token: Token):
        self.parser = parser
        self.value = token.value
        self.position = token.position
        self.first: Optional["Symbol"] = None
        self.second: Optional["Symbol"] = None
        self.grouped = False

    def nud(self) -> "Symbol":
        raise self.parser.error(f"unexpected '{self.value}'", self.position)

    def led(self, left: "Symbol") -> "Symbol":
        raise self.parser.error(f"unexpected '{self.value}'", self.position)

    def eval(self, scope: Scope) -> Expr:
        raise NotImplementedError


class Literal(Symbol):
    lbp = 60

    def nud(self) -> Symbol:
        return self

    def led(self, left: Symbol) -> Symbol:
        raise self.parser.error("implicit multiplication is not allowed; write '*'", self.position)


class Number(Literal):
    type = "num"

    def eval(self, scope: Scope) -> Expr:
        ctx = scope.context
        return Expr.constant(ctx, ctx.element(int(self.value)))


class Name(Literal):
    type = "name"

    def eval(self, scope: Scope) -> Expr:
        if scope.unknown is not None and self.value == scope.unknown:
            return Expr.unknown(scope.context, 0)
        if self.value not in scope.names:
            raise scope.fail(f"undeclared name '{self.value}'", self.position)
        return Expr.constant(scope.context, scope.names[self.value])


class Infix(Symbol):
    right_assoc = False

    def led(self, left: Symbol) -> Symbol:
        self.first = left
        self.second = self.parser.expression(self.lbp - int(self.right_assoc))
        return self


class Plus(Infix):
    type = "+"
    lbp = 10

    def eval(self, scope: Scope) -> Expr:
        return self.first.eval(scope) + self.second.eval(scope)


class Minus(Infix):
    type = "-"
    lbp = 10

    def nud(self) -> Symbol:
        self.first = self.parser.expression(30)
        return self

    def eval(self, scope: Scope) -> Expr:
        if self.second is None:
            return -self.first.eval(scope)
        return self.first.eval(scope) - self.second.eval(scope)


class Times(Infix):
    type = "*"
    lbp = 20

    def eval(self, scope: Scope) -> Expr:
        return self.first.eval(scope) * self.second.eval(scope)


class Divide(Infix):
    type = "/"
    lbp = 20

    def eval(self, scope: Scope) -> Expr:
        divisor = self.second.eval(scope)
        if not divisor.is_constant:
            raise scope.fail("division by an expression involving the unknown", self.position)
        if not divisor.value:
            raise scope.fail("division by zero", self.position)
        return self.first.eval(scope).scale(1 / divisor.value)


class Power(Infix):
    type = "^"
    lbp = 40
    right_assoc = True

    def eval(self, scope: Scope) -> Expr:
        exponent = self.second.eval(scope)
        k = _integer_value(exponent)
        if k is None:
            raise scope.fail("exponent must be an integer constant", self.position)
        base = self.first.eval(scope)
        if k < 0:
            if not base.is_constant or not base.value:
                raise scope.fail("negative powers need a nonzero base free of the unknown", self.position)
            return Expr.constant(scope.context, base.value**k)
        out = Expr.constant(scope.context, scope.context.one)
        for _ in range(k):
            out = out * base
        return out


class Prime(Symbol):
    type = "'"
    lbp = 50

    def led(self, left: Symbol) -> Symbol:
        if not isinstance(left, Name):
            raise self.parser.error("a derivative mark must follow the unknown", self.position)
        self.first = left
        return self

    def eval(self, scope: Scope) -> Expr:
        if self.first.value != scope.unknown:
            raise scope.fail(f"'{self.first.value}' is not the unknown", self.position)
        if scope.kind != EquationKind.DIFFERENTIAL:
            raise scope.fail("derivatives only appear in ode problems", self.position)
        return Expr.unknown(scope.context, 1)


class Paren(Symbol):
    type = "("
    lbp = 50

    def nud(self) -> Symbol:
        inner = self.parser.expression(0)
        self.parser.advance(")")
        inner.grouped = True
        return inner

    def led(self, left: Symbol) -> Symbol:
        if left.grouped or not isinstance(left, (Name, Prime)):
            raise self.parser.error("implicit multiplication is not allowed; write '*'", self.position)
        self.first = left
        self.second = self.parser.expression(0)
        self.parser.advance(")")
        return self

    def eval(self, scope: Scope) -> Expr:
        callee = self.first if isinstance(self.first, Name) else self.first.first
        if callee.value != scope.unknown:
            raise scope.fail(f"unknown function '{callee.value}'", self.position)
        argument = self.second.eval(scope)
        if not argument.is_constant:
            raise scope.fail("the unknown cannot be evaluated at itself", self.position)
        if isinstance(self.first, Prime):
            which = self.first.eval(scope)
            if not same(argument.value, scope.names[scope.context.variable]):
                raise scope.fail("y' can only be evaluated at the variable", self.position)
            return which
        return Expr.unknown(scope.context, _evaluation(scope, argument.value, self.position))


class End(Symbol):
    type = "end"


class Closer(Symbol):
    type = ")"


class Equals(Symbol):
    type = "="


class Parser:
    symbol_table = {
        cls.type: cls
        for cls in (Number, Name, Plus, Minus, Times, Divide, Power, Prime, Paren, End, Closer, Equals)
    }

    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.token: Symbol = End(self, Token("end", "", len(source)))

    def error(self, message: str, position: int) -> EquationSyntaxError:
        return EquationSyntaxError(message, self.source, position)

    def advance(self, expected: Optional[str] = None) -> Symbol:
        if expected is not None and self.token.type != expected:
            found = "end of input" if self.token.type == "end" else f"'{self.token.value}'"
            raise self.error(f"expected '{expected}', found {found}", self.token.position)
        token = next(self.tokens, None)
        if token is None:
            self.token = End(self, Token("end", "", len(self.source)))
        else:
            self.token = self.symbol_table[token.type](self, token)
        return self.token

    def expression(self, rbp: int) -> Symbol:
        symbol = self.token
        if isinstance(symbol, End):
            raise self.error("unexpected end of input", symbol.position)
        self.advance()
        left = symbol.nud()
        while rbp < self.token.lbp:
            symbol = self.token
            self.advance()
            left = symbol.led(left)
        return left

    def parse(self) -> Tuple[Symbol, Optional[Symbol]]:
        """Left side and, when an '=' is present, the right side."""
        self.advance()
        left = self.expression(0)
        right = None
        if isinstance(self.token, Equals):
            self.advance()
            right = self.expression(0)
        if not isinstance(self.token, End):
            raise self.error(f"unexpected '{self.token.value}'", self.token.position)
        return left, right


def _integer_value(e: Expr) -> Optional[int]:
    if not e.is_constant:
        return None
    f = e.value
    if not f.numer.is_ground or not f.denom.is_ground:
        return None
    value = QQ(f.numer.LC if f.numer else 0) / QQ(f.denom.LC)
    if QQ.denom(value) != 1:
        return None
    return int(QQ.numer(value))


def _evaluation(scope: Scope, argument: FracElement, position: int) -> int:
    """0 for y at the variable, 1 for the shifted or dilated evaluation."""
    ctx = scope.context
    variable = scope.names[ctx.variable]
    if same(argument, variable):
        return 0
    if scope.kind == EquationKind.DIFFERENCE and same(argument, variable + scope.step):
        return 1
    if scope.kind == EquationKind.Q_DIFFERENCE and same(argument, ctx.q * variable):
        return 1
    if scope.kind == EquationKind.DIFFERENCE:
        expected = f"{ctx.variable} or {ctx.variable}+{scope.step}"
    elif scope.kind == EquationKind.Q_DIFFERENCE:
        expected = f"{ctx.variable} or {ctx.q_parameter}*{ctx.variable}"
    else:
        expected = ctx.variable
    raise scope.fail(f"the unknown may only be evaluated at {expected}", position)


# 公共接口

def build_context(spec: ProblemSpec) -> AlgebraContext:
    try:
        return AlgebraContext(
            spec.parameters,
            spec.variable,
            q_parameter=spec.q if spec.kind == EquationKind.Q_DIFFERENCE else None,
            inverted=spec.kind == EquationKind.DIFFERENCE,
        )
    except AlgebraError as e:
        raise ProblemSpecError(str(e)) from e


def parse_expression(
    source: str, ctx: AlgebraContext, names: Optional[Dict[str, FracElement]] = None
) -> FracElement:
    """An expression free of the unknown, as a field element."""
    scope = Scope(ctx, ctx.symbol_table() if names is None else names, source)
    left, right = Parser(source).parse()
    if right is not None:
        raise EquationSyntaxError("an expression cannot contain '='", source, source.index("="))
    return left.eval(scope).value


def parse_equation(spec: ProblemSpec, ctx: AlgebraContext) -> Dict[Key, FracElement]:
    """Terms {(i, j): c} of ``lhs - rhs`` as a polynomial in the two evaluations."""
    names = {name: ctx.gen(name) for name in ctx.parameters}
    names[ctx.variable] = ctx.symbol_table()[ctx.variable]
    scope = Scope(ctx, names, spec.equation, spec.unknown, spec.kind, spec.step)
    left, right = Parser(spec.equation).parse()
    value = left.eval(scope)
    if right is not None:
        value = value - right.eval(scope)
    return value.terms


def _constant(source: str, ctx: AlgebraContext, what: str) -> FracElement:
    names = {name: ctx.gen(name) for name in ctx.parameters}
    try:
        return parse_expression(source, ctx, names)
    except ProblemSpecError as e:
        raise ProblemSpecError(f"{what}: {e}") from e


def build_equation(spec: ProblemSpec) -> EquationModel:
    """The normalized equation model of a problem."""
    ctx = build_context(spec)
    terms = parse_equation(spec, ctx)
    initial = _constant(spec.initial, ctx, "initial value")
    leading = None if spec.leading is None else _constant(spec.leading, ctx, "leading coefficient")
    eq = EquationModel.build(
        spec.kind, ctx, terms, initial, step=spec.step, leading=leading, source=spec.equation
    )
    logger.debug(f"{spec.name}: 规范化后共 {len(eq.terms)} 项")
    return eq


def parse_problem(source: Union[str, Dict[str, Any]]) -> ProblemSpec:
    """Validate a problem document (JSON text or decoded dict) including its equation."""
    try:
        if isinstance(source, str):
            spec = ProblemSpec.model_validate_json(source)
        else:
            spec = ProblemSpec.model_validate(source)
    except ValidationError as e:
        raise ProblemSpecError(f"invalid problem file: {e}") from e
    build_equation(spec)
    return spec


def load_problem(path: Union[str, Path]) -> ProblemSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ProblemSpecError(f"cannot read problem file {path}: {e}") from e
    return parse_problem(text)


def render_problem(spec: ProblemSpec) -> str:
    return spec.model_dump_json(indent=2, exclude_none=True)
