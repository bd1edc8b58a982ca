"""Scalar expressions in the time variable ``t``.

Forcing terms and coefficient functions are written as plain text in the run configuration,
for example ``"6*sin(2*pi*t/1.2)"`` or ``"2+cos(2*pi*t/0.8)^3"``. This module parses such text
into a small syntax tree and evaluates it with numpy, so a whole time grid can be evaluated in
one call.

Grammar (lowest to highest precedence)::

    sum     := product (('+' | '-') product)*
    product := unary (('*' | '/') unary)*
    unary   := '-' unary | '+' unary | power
    power   := primary ('^' unary)?
    primary := NUMBER | 'pi' | 't' | FUNC '(' sum ')' | '(' sum ')'

``^`` is right-associative (``2^3^2 == 512``) and binds tighter than unary minus, so ``-2^2``
is ``-(2^2) == -4``. The functions are ``sin``, ``cos`` and ``exp``.

Expressions are immutable once parsed and can be shared between threads.
"""

from __future__ import annotations

import re
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from perioscope.errors import ExpressionSyntaxError, UnknownIdentifierError, EvaluationError

if TYPE_CHECKING:
    from typing import Callable, List, Mapping, Union
    from numpy.typing import ArrayLike, NDArray

    TimeValue = Union[float, NDArray[np.float64]]


FUNCTIONS: Mapping[str, Callable[[NDArray], NDArray]] = {
    'sin' : np.sin,
    'cos' : np.cos,
    'exp' : np.exp,
}

CONSTANTS: Mapping[str, float] = {
    'pi' : np.pi,
}

VARIABLE = 't'


## Syntax Tree

class Node(ABC):
    """Base class for syntax tree nodes."""

    __slots__ = ()

    @abstractmethod
    def evaluate(self, t: NDArray) -> NDArray:
        """Evaluate the node on an array of times."""
        ...

    @abstractmethod
    def to_source(self) -> str:
        """Render the node as expression text that parses back to an equivalent tree."""
        ...

    def __repr__(self) -> str:
        return f'<{self.__class__.__qualname__}: {self.to_source()}>'


class Number(Node):
    __slots__ = ('value',)

    def __init__(self, value: float):
        self.value = float(value)

    def evaluate(self, t: NDArray) -> NDArray:
        return np.full_like(t, self.value)

    def to_source(self) -> str:
        return repr(self.value)


class Constant(Node):
    __slots__ = ('name',)

    def __init__(self, name: str):
        self.name = name

    def evaluate(self, t: NDArray) -> NDArray:
        return np.full_like(t, CONSTANTS[self.name])

    def to_source(self) -> str:
        return self.name


class Variable(Node):
    __slots__ = ()

    def evaluate(self, t: NDArray) -> NDArray:
        return t

    def to_source(self) -> str:
        return VARIABLE


class Negate(Node):
    __slots__ = ('operand',)

    def __init__(self, operand: Node):
        self.operand = operand

    def evaluate(self, t: NDArray) -> NDArray:
        return -self.operand.evaluate(t)

    def to_source(self) -> str:
        return f'(-{self.operand.to_source()})'


class BinaryOp(Node):
    __slots__ = ('op', 'left', 'right')

    def __init__(self, op: str, left: Node, right: Node):
        self.op = op
        self.left = left
        self.right = right

    def evaluate(self, t: NDArray) -> NDArray:
        lhs = self.left.evaluate(t)
        rhs = self.right.evaluate(t)
        if self.op == '+':
            return lhs + rhs
        if self.op == '-':
            return lhs - rhs
        if self.op == '*':
            return lhs * rhs
        if self.op == '/':
            if np.any(rhs == 0.0):
                raise EvaluationError(f"division by zero in '{self.to_source()}'")
            return lhs / rhs
        if self.op == '^':
            if np.any((lhs == 0.0) & (rhs < 0.0)):
                raise EvaluationError(f"zero raised to a negative power in '{self.to_source()}'")
            return np.power(lhs, rhs)
        raise ValueError(f"unknown operator '{self.op}'")

    def to_source(self) -> str:
        return f'({self.left.to_source()} {self.op} {self.right.to_source()})'


class Call(Node):
    __slots__ = ('func', 'arg')

    def __init__(self, func: str, arg: Node):
        self.func = func
        self.arg = arg

    def evaluate(self, t: NDArray) -> NDArray:
        return FUNCTIONS[self.func](self.arg.evaluate(t))

    def to_source(self) -> str:
        return f'{self.func}({self.arg.to_source()})'


class Expression:
    """A parsed expression in ``t``.

    Calling the expression evaluates it: a scalar time gives a ``float``, an array of times
    gives an array of the same shape.

    Raises:
        EvaluationError: on division by zero, ``0^negative`` or any non-finite result.
    """

    __slots__ = ('root', 'source')

    def __init__(self, root: Node, source: str = ''):
        self.root = root
        self.source = source or root.to_source()

    def __call__(self, t: ArrayLike) -> TimeValue:
        times = np.asarray(t, dtype=np.float64)
        with np.errstate(all='ignore'):
            values = self.root.evaluate(times)
        values = np.broadcast_to(values, times.shape)
        if not np.all(np.isfinite(values)):
            raise EvaluationError(f"'{self.source}' is not finite on the requested times")
        if values.ndim == 0:
            return float(values)
        return np.array(values, dtype=np.float64)

    def __repr__(self) -> str:
        return f'<{self.__class__.__qualname__}({self.source!r})>'

    def __str__(self) -> str:
        return self.source


## Tokenizer

class Token(NamedTuple):
    kind: str    #: 'number', 'name', 'op' or 'end'
    text: str
    offset: int  #: byte offset into the UTF-8 encoded source

_TOKEN_RE = re.compile(r'''
    (?P<space>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
''', re.VERBOSE)

def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode('utf-8'))

def tokenize(source: str) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ExpressionSyntaxError(_byte_offset(source, pos), 'an operand or operator')
        kind = match.lastgroup
        if kind != 'space':
            tokens.append(Token(kind, match.group(), _byte_offset(source, pos)))
        pos = match.end()
    tokens.append(Token('end', '', _byte_offset(source, len(source))))
    return tokens


## Parser

class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def _advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def _accept(self, *ops: str) -> bool:
        token = self.current
        return token.kind == 'op' and token.text in ops

    def _expect(self, op: str) -> None:
        if not self._accept(op):
            raise ExpressionSyntaxError(self.current.offset, f"'{op}'")
        self._advance()

    def parse(self) -> Node:
        node = self.parse_sum()
        if self.current.kind != 'end':
            raise ExpressionSyntaxError(self.current.offset, 'an operator or end of input')
        return node

    def parse_sum(self) -> Node:
        node = self.parse_product()
        while self._accept('+', '-'):
            op = self._advance().text
            node = BinaryOp(op, node, self.parse_product())
        return node

    def parse_product(self) -> Node:
        node = self.parse_unary()
        while self._accept('*', '/'):
            op = self._advance().text
            node = BinaryOp(op, node, self.parse_unary())
        return node

    def parse_unary(self) -> Node:
        if self._accept('-'):
            self._advance()
            return Negate(self.parse_unary())
        if self._accept('+'):
            self._advance()
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self) -> Node:
        base = self.parse_primary()
        if self._accept('^'):
            self._advance()
            return BinaryOp('^', base, self.parse_unary())
        return base

    def parse_primary(self) -> Node:
        token = self.current
        if token.kind == 'number':
            value = float(token.text)
            if not np.isfinite(value):
                raise ExpressionSyntaxError(token.offset, 'a finite number')
            self._advance()
            return Number(value)

        if token.kind == 'name':
            self._advance()
            if token.text in FUNCTIONS:
                self._expect('(')
                arg = self.parse_sum()
                self._expect(')')
                return Call(token.text, arg)
            if token.text == VARIABLE:
                return Variable()
            if token.text in CONSTANTS:
                return Constant(token.text)
            raise UnknownIdentifierError(token.text, token.offset)

        if self._accept('('):
            self._advance()
            node = self.parse_sum()
            self._expect(')')
            return node

        raise ExpressionSyntaxError(token.offset, 'expression')


def parse(source: str) -> Expression:
    """Parse expression text.

    Raises:
        ExpressionSyntaxError: if the text is malformed; ``offset`` locates the problem.
        UnknownIdentifierError: if the text uses a name other than ``t``, ``pi``, ``sin``,
            ``cos`` or ``exp``.
    """
    if not source or not source.strip():
        raise ExpressionSyntaxError(0, 'expression')
    return Expression(_Parser(source).parse(), source)

def evaluate(expr: Expression, t: ArrayLike) -> TimeValue:
    """Evaluate a parsed expression at a time or an array of times."""
    return expr(t)

def to_source(expr: Expression) -> str:
    """Print an expression as fully parenthesized text.

    Re-parsing the result gives a tree that evaluates identically to ``expr``.
    """
    return expr.root.to_source()


__all__ = [
    'Expression',
    'parse',
    'evaluate',
    'to_source',
    'tokenize',
    'Token',
    'FUNCTIONS',
    'CONSTANTS',
]
