"""PFTL abstract syntax, concrete syntax, and fragment classification.

Concrete syntax (whitespace-insensitive)::

    state  := atom | "true" | "false" | "!" state | state "&" state
            | state "|" state | state "->" state
            | "P" cmp num "[" path "]" | "(" state ")"
    path   := state | "!" path | path "&" path | path "|" path | path "->" path
            | "X" path | path "U" iv? path | "F" iv? path | "G" iv? path
            | "Q" cmp num iv? "(" path ("|" path)? ")" | "(" path ")"
    cmp    := "<" | "<=" | ">" | ">="
    iv     := ("[" | "(") num "," (num | "inf") ("]" | ")")

Binding strength, tightest first: unary operators, ``&``, ``|``, ``->``,
``U`` (right associative). Inside the parentheses of ``Q`` the top-level
``|`` separates the event from the condition, so a disjunction there needs
its own parentheses. Disjunction, implication, ``false``,
``F``, ``G`` and unconditional ``Q`` are desugared while parsing.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union


class FormulaError(ValueError):
    """Ill-formed formula or interval."""


class FormulaSyntaxError(FormulaError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class Comparator(enum.Enum):
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="

    @property
    def strict(self) -> bool:
        return self in (Comparator.LT, Comparator.GT)

    @property
    def upper(self) -> bool:
        """True for ``>``/``>=``, the comparators bounding from below."""
        return self in (Comparator.GT, Comparator.GE)

    def holds(self, x, y) -> bool:
        if self is Comparator.LT:
            return x < y
        if self is Comparator.LE:
            return x <= y
        if self is Comparator.GT:
            return x > y
        return x >= y

    def holds_tol(self, x: float, y: float, tol: float) -> bool:
        """Compare, treating values within ``tol`` of each other as equal."""
        if abs(x - y) <= tol:
            x = y
        return self.holds(x, y)

    def negate(self) -> "Comparator":
        return {Comparator.LT: Comparator.GE, Comparator.LE: Comparator.GT,
                Comparator.GT: Comparator.LE, Comparator.GE: Comparator.LT}[self]


def exact(q) -> Fraction:
    """Rational value of a bound as written, so ``0.1`` becomes exactly 1/10."""
    if isinstance(q, Fraction):
        return q
    if isinstance(q, int):
        return Fraction(q)
    return Fraction(repr(float(q)))


def frequency_holds(cmp: Comparator, q, hits: int, total: int) -> bool:
    """Exact test of ``hits / total (cmp) q``; an empty condition (total 0) holds."""
    if total == 0:
        return True
    fq = exact(q)
    return cmp.holds(hits * fq.denominator, total * fq.numerator)


@dataclass(frozen=True)
class TimeInterval:
    lo: float = 0
    hi: float = math.inf
    lo_closed: bool = True
    hi_closed: bool = False

    def __post_init__(self):
        if not math.isfinite(self.lo) or self.lo < 0:
            raise FormulaError(f"interval lower bound must be finite and nonnegative, got {self.lo}")
        if self.hi < self.lo:
            raise FormulaError(f"interval [{self.lo}, {self.hi}] has hi < lo")
        if math.isinf(self.hi) and self.hi_closed:
            object.__setattr__(self, "hi_closed", False)

    @classmethod
    def closed(cls, lo, hi) -> "TimeInterval":
        return cls(lo, hi, True, not math.isinf(hi))

    @property
    def bounded(self) -> bool:
        return not math.isinf(self.hi)

    def contains(self, x) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    def __str__(self) -> str:
        hi = "inf" if math.isinf(self.hi) else _num(self.hi)
        return f"{'[' if self.lo_closed else '('}{_num(self.lo)},{hi}{']' if self.hi_closed else ')'}"


UNBOUNDED = TimeInterval()


def normalize_interval(interval: TimeInterval, timebase: str) -> TimeInterval:
    """Canonical form: ``[k, k']``/``[k, inf)`` over the naturals, closed over the reals."""
    if timebase == "discrete":
        lo = math.ceil(interval.lo) if interval.lo_closed else math.floor(interval.lo) + 1
        if not interval.bounded:
            return TimeInterval(int(lo), math.inf, True, False)
        hi = math.floor(interval.hi) if interval.hi_closed else math.ceil(interval.hi) - 1
        if hi < lo:
            raise FormulaError(f"interval {interval} contains no natural numbers")
        return TimeInterval(int(lo), int(hi), True, True)
    if timebase == "continuous":
        if not interval.bounded:
            return TimeInterval(interval.lo, math.inf, True, False)
        if interval.lo == interval.hi and not (interval.lo_closed and interval.hi_closed):
            raise FormulaError(f"interval {interval} is empty")
        return TimeInterval(interval.lo, interval.hi, True, True)
    raise ValueError(f"unknown timebase {timebase!r}")


# ---------------------------------------------------------------------------
# abstract syntax
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class Not:
    sub: "StateFormula"


@dataclass(frozen=True)
class And:
    left: "StateFormula"
    right: "StateFormula"


@dataclass(frozen=True)
class Prob:
    cmp: Comparator
    p: float
    path: "PathFormula"


StateFormula = Union[Atom, TrueF, Not, And, Prob]


@dataclass(frozen=True)
class Embed:
    state: StateFormula


@dataclass(frozen=True)
class PathNot:
    sub: "PathFormula"


@dataclass(frozen=True)
class PathAnd:
    left: "PathFormula"
    right: "PathFormula"


@dataclass(frozen=True)
class Next:
    sub: "PathFormula"


@dataclass(frozen=True)
class Until:
    left: "PathFormula"
    right: "PathFormula"
    interval: TimeInterval = UNBOUNDED


@dataclass(frozen=True)
class Freq:
    """Conditional frequency ``Q cmp q over interval <event | condition>``."""

    cmp: Comparator
    q: float
    interval: TimeInterval
    left: "PathFormula"
    right: "PathFormula"


PathFormula = Union[Embed, PathNot, PathAnd, Next, Until, Freq]

_STATE_TYPES = (Atom, TrueF, Not, And, Prob)


def is_state(f) -> bool:
    return isinstance(f, _STATE_TYPES)


def as_path(f) -> PathFormula:
    return Embed(f) if is_state(f) else f


def mk_not(f):
    if is_state(f):
        return Not(f)
    if isinstance(f, Embed):
        return Embed(Not(f.state))
    return PathNot(f)


def mk_and(a, b):
    sa = a.state if isinstance(a, Embed) else a
    sb = b.state if isinstance(b, Embed) else b
    if is_state(sa) and is_state(sb):
        res = And(sa, sb)
        return res if is_state(a) and is_state(b) else Embed(res)
    return PathAnd(as_path(a), as_path(b))


def mk_or(a, b):
    return mk_not(mk_and(mk_not(a), mk_not(b)))


def mk_implies(a, b):
    return mk_or(mk_not(a), b)


def eventually(f, interval: TimeInterval = UNBOUNDED) -> Until:
    return Until(Embed(TrueF()), as_path(f), interval)


def globally(f, interval: TimeInterval = UNBOUNDED) -> PathNot:
    return PathNot(eventually(mk_not(as_path(f)), interval))


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

_KEYWORDS = {"P", "Q", "X", "U", "F", "G", "true", "false", "inf"}
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


def _num(x) -> str:
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def _atom_text(name: str) -> str:
    if _IDENT.fullmatch(name) and name not in _KEYWORDS:
        return name
    return '"' + name.replace('"', '') + '"'


def _iv_text(iv: TimeInterval) -> str:
    return "" if iv == UNBOUNDED else str(iv)


def format_formula(f) -> str:
    """Concrete syntax that parses back to the same tree."""
    if isinstance(f, Atom):
        return _atom_text(f.name)
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, (Not, PathNot)):
        return "!" + format_formula(f.sub)
    if isinstance(f, (And, PathAnd)):
        return f"({format_formula(f.left)} & {format_formula(f.right)})"
    if isinstance(f, Prob):
        return f"P{f.cmp.value}{_num(f.p)} [ {format_formula(f.path)} ]"
    if isinstance(f, Embed):
        return format_formula(f.state)
    if isinstance(f, Next):
        return "X " + format_formula(f.sub)
    if isinstance(f, Until):
        return f"({format_formula(f.left)} U{_iv_text(f.interval)} {format_formula(f.right)})"
    if isinstance(f, Freq):
        return (f"Q{f.cmp.value}{_num(f.q)}{_iv_text(f.interval)} "
                f"({format_formula(f.left)} | {format_formula(f.right)})")
    raise TypeError(f"not a formula node: {f!r}")


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<str>"[^"]*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><=|>=|->|[<>!&|()\[\],])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def take(self) -> _Tok:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        if not self.at(text):
            got = self.tok.text or "end of input"
            raise FormulaSyntaxError(f"expected {text!r}, got {got!r}", self.tok.pos)
        return self.take()

    def error(self, message: str):
        raise FormulaSyntaxError(message, self.tok.pos)

    # grammar ---------------------------------------------------------------

    def until(self, no_or: bool = False):
        left = self.implies(no_or)
        if self.at("U"):
            self.take()
            iv = self.maybe_interval()
            right = self.until(no_or)
            return Until(as_path(left), as_path(right), iv)
        return left

    def implies(self, no_or: bool):
        left = self.disj(no_or)
        if self.at("->"):
            self.take()
            return mk_implies(left, self.implies(no_or))
        return left

    def disj(self, no_or: bool):
        left = self.conj()
        while not no_or and self.at("|"):
            self.take()
            left = mk_or(left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.at("&"):
            self.take()
            left = mk_and(left, self.unary())
        return left

    def unary(self):
        if self.at("!"):
            self.take()
            return mk_not(self.unary())
        if self.at("X"):
            self.take()
            return Next(as_path(self.unary()))
        if self.at("F"):
            self.take()
            iv = self.maybe_interval()
            return eventually(self.unary(), iv)
        if self.at("G"):
            self.take()
            iv = self.maybe_interval()
            return globally(self.unary(), iv)
        return self.primary()

    def primary(self):
        tok = self.tok
        if tok.kind == "str":
            self.take()
            return Atom(tok.text[1:-1])
        if tok.kind == "ident":
            if tok.text == "true":
                self.take()
                return TrueF()
            if tok.text == "false":
                self.take()
                return Not(TrueF())
            if tok.text == "P":
                return self.prob()
            if tok.text == "Q":
                return self.freq()
            if tok.text in _KEYWORDS:
                self.error(f"unexpected keyword {tok.text!r}")
            self.take()
            return Atom(tok.text)
        if self.at("("):
            self.take()
            inner = self.until()
            self.expect(")")
            return inner
        self.error(f"unexpected {tok.text or 'end of input'!r}")

    def comparator(self) -> Comparator:
        tok = self.tok
        if tok.kind == "op" and tok.text in ("<", "<=", ">", ">="):
            self.take()
            return Comparator(tok.text)
        self.error("expected a comparator (<, <=, >, >=)")

    def number(self):
        tok = self.tok
        if tok.kind != "num":
            self.error("expected a number")
        self.take()
        text = tok.text
        if re.fullmatch(r"\d+", text):
            return int(text)
        return float(text)

    def bound(self, what: str):
        pos = self.tok.pos
        val = self.number()
        if not 0 <= val <= 1:
            raise FormulaSyntaxError(f"{what} bound {val} outside [0, 1]", pos)
        return val

    def prob(self):
        self.expect("P")
        cmp = self.comparator()
        p = self.bound("probability")
        self.expect("[")
        body = self.until()
        self.expect("]")
        return Prob(cmp, p, as_path(body))

    def freq(self):
        self.expect("Q")
        cmp = self.comparator()
        q = self.bound("frequency")
        iv = self.maybe_interval()
        self.expect("(")
        event = self.until(no_or=True)
        cond = TrueF()
        if self.at("|"):
            self.take()
            cond = self.until(no_or=True)
        self.expect(")")
        return Freq(cmp, q, iv, as_path(event), as_path(cond))

    def maybe_interval(self) -> TimeInterval:
        opening = self.at("[") or (self.at("(") and self.peek().kind == "num" and self.peek(2).text == ",")
        if not opening:
            return UNBOUNDED
        pos = self.tok.pos
        lo_closed = self.take().text == "["
        lo = self.number()
        self.expect(",")
        if self.at("inf"):
            self.take()
            hi = math.inf
        else:
            hi = self.number()
        if not (self.at("]") or self.at(")")):
            self.error("expected ']' or ')' closing the interval")
        hi_closed = self.take().text == "]"
        try:
            return TimeInterval(lo, hi, lo_closed, hi_closed and not math.isinf(hi))
        except FormulaError as exc:
            raise FormulaSyntaxError(str(exc), pos) from None


def parse_formula(text: str) -> StateFormula:
    """Parse a state formula in concrete syntax."""
    parser = _Parser(text)
    tree = parser.until()
    if parser.tok.kind != "eof":
        parser.error(f"unexpected {parser.tok.text!r}")
    if isinstance(tree, Embed):
        tree = tree.state
    if not is_state(tree):
        raise FormulaSyntaxError("top level must be a state formula (wrap path formulas in P)", 0)
    return tree


# ---------------------------------------------------------------------------
# fragments and horizons
# ---------------------------------------------------------------------------


class Fragment(enum.Enum):
    CTL_LIKE = "CTL_LIKE"
    BOUNDED_LTL_LIKE = "BOUNDED_LTL_LIKE"
    NEITHER = "NEITHER"


def _ctl_path(psi) -> bool:
    if isinstance(psi, PathNot):
        return _ctl_path(psi.sub)
    if isinstance(psi, Embed):
        return _ctl_state(psi.state)
    if isinstance(psi, Next):
        return isinstance(psi.sub, Embed) and _ctl_state(psi.sub.state)
    if isinstance(psi, (Until, Freq)):
        return (isinstance(psi.left, Embed) and isinstance(psi.right, Embed)
                and _ctl_state(psi.left.state) and _ctl_state(psi.right.state))
    return False


def _ctl_state(phi) -> bool:
    if isinstance(phi, (Atom, TrueF)):
        return True
    if isinstance(phi, Not):
        return _ctl_state(phi.sub)
    if isinstance(phi, And):
        return _ctl_state(phi.left) and _ctl_state(phi.right)
    if isinstance(phi, Prob):
        return _ctl_path(phi.path)
    return False


def _has_prob(phi) -> bool:
    if isinstance(phi, Prob):
        return True
    if isinstance(phi, Not):
        return _has_prob(phi.sub)
    if isinstance(phi, And):
        return _has_prob(phi.left) or _has_prob(phi.right)
    return False


def _bounded_path(psi) -> bool:
    if isinstance(psi, Embed):
        return not _has_prob(psi.state)
    if isinstance(psi, PathNot):
        return _bounded_path(psi.sub)
    if isinstance(psi, PathAnd):
        return _bounded_path(psi.left) and _bounded_path(psi.right)
    if isinstance(psi, (Until, Freq)):
        return psi.interval.bounded and _bounded_path(psi.left) and _bounded_path(psi.right)
    return False


def is_bounded_ltl_like(phi) -> bool:
    """``P~p[psi]`` with ``0 < p < 1``, no nested ``P``, no ``X`` and only bounded intervals."""
    return isinstance(phi, Prob) and 0 < phi.p < 1 and _bounded_path(phi.path)


def classify_fragment(phi: StateFormula) -> Fragment:
    """CTL-like wins when a formula belongs to both fragments."""
    if _ctl_state(phi):
        return Fragment.CTL_LIKE
    if is_bounded_ltl_like(phi):
        return Fragment.BOUNDED_LTL_LIKE
    return Fragment.NEITHER


def total_bound(psi) -> float:
    """Length of the path prefix that decides a bounded path formula."""
    if isinstance(psi, Embed) or is_state(psi):
        return 0
    if isinstance(psi, PathNot):
        return total_bound(psi.sub)
    if isinstance(psi, PathAnd):
        return max(total_bound(psi.left), total_bound(psi.right))
    if isinstance(psi, Next):
        return 1 + total_bound(psi.sub)
    if isinstance(psi, (Until, Freq)):
        if not psi.interval.bounded:
            raise FormulaError(f"unbounded interval in {format_formula(psi)}")
        return psi.interval.hi + max(total_bound(psi.left), total_bound(psi.right))
    raise TypeError(f"not a path formula: {psi!r}")


def subformulas(f):
    """All nodes of the tree, children before parents."""
    children = ()
    if isinstance(f, (Not, PathNot, Next)):
        children = (f.sub,)
    elif isinstance(f, (And, PathAnd, Until, Freq)):
        children = (f.left, f.right)
    elif isinstance(f, Prob):
        children = (f.path,)
    elif isinstance(f, Embed):
        children = (f.state,)
    for c in children:
        yield from subformulas(c)
    yield f
