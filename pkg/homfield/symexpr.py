"""
symexpr: exact symbolic expression kernel

Expressions are sympy expressions over the symbols of a per-model SymbolTable.
This module adds the canonical simplification used for exact zero tests,
simultaneous substitution, guarded numeric evaluation and the text syntax
(infix with ^ and d(y, x, tau) jet coordinates) shared by the model files.
"""

import collections
import enum
import fractions
import functools
import logging
import re
import threading

import sympy as sp
from sympy.printing.str import StrPrinter

from . import errors

Expression = sp.Expr

BUILTINS = collections.OrderedDict([("sqrt", sp.sqrt),
                                    ("sin", sp.sin),
                                    ("cos", sp.cos),
                                    ("exp", sp.exp),
                                    ("ln", sp.log)])

MAX_REWRITE_PASSES = 4

class Kind(enum.IntEnum):
    """ Symbol kinds, in canonical ordering rank
    """
    BASE = 0
    LINE = 1
    FIELD = 2
    JET = 3
    MOMENTUM = 4
    PARAMETER = 5
    GAUGED = 6

SymbolInfo = collections.namedtuple("SymbolInfo", "name kind index field orders")

def _info(name, kind, index=None, field=None, orders=()):
    return SymbolInfo(name, kind, index, field, tuple(orders))

class SymbolTable(object):
    """ Registry of the symbols of one model.
    Base coordinates, the line coordinate, fields, momenta and parameters are declared
    while the model is built. Jet coordinates are registered on first use, under a
    name derived from their field and derivative orders, so lookups stay deterministic.
    """
    def __init__(self):
        self._by_name = collections.OrderedDict()
        self._info = {}
        self._jets = {}
        self._gauged = {}
        self._lock = threading.Lock()

    def declare(self, name, kind, index=None, field=None, orders=(), **assumptions):
        with self._lock:
            if name in self._by_name:
                raise errors.DuplicateDeclaration("Symbol '%s' already declared" % name)
            symbol = sp.Symbol(name, **assumptions)
            info = _info(name, kind, index=index, field=field, orders=orders)
            self._by_name[name] = symbol
            self._info[symbol] = info
            if kind == Kind.JET:
                self._jets[(field, info.orders)] = symbol
            return symbol

    def __contains__(self, item):
        if isinstance(item, str):
            return item in self._by_name
        return item in self._info

    def __getitem__(self, name):
        try:
            return self._by_name[name]
        except KeyError:
            raise errors.UndeclaredSymbol("Symbol '%s' not declared" % name)

    def get(self, name, default=None):
        return self._by_name.get(name, default)

    def info(self, symbol):
        return self._info.get(symbol)

    def kind(self, symbol):
        info = self._info.get(symbol)
        return info.kind if info else None

    def symbols(self, *kinds):
        return [sym for sym, info in self._info.items() if not kinds or info.kind in kinds]

    def base_coords(self):
        return sorted(self.symbols(Kind.BASE), key=lambda s: self._info[s].index)

    def line_coord(self):
        line = self.symbols(Kind.LINE)
        return line[0] if line else None

    def coordinate_names(self):
        """ Base coordinate names followed by the line coordinate name (the jet order slots)
        """
        names = [sym.name for sym in self.base_coords()]
        line = self.line_coord()
        names.append(line.name if line is not None else "tau")
        return names

    def sort_key(self, symbol):
        info = self._info.get(symbol)
        if info is None:
            return (len(Kind), 0, (), symbol.name)
        return (int(info.kind), info.index if info.index is not None else 0, info.orders, info.name)

    def jet(self, field, orders):
        """ Jet coordinate of field (symbol or name) with orders = (alpha_1..alpha_n, tau-order).
        Zero orders return the field symbol itself.
        """
        name = field if isinstance(field, str) else field.name
        orders = tuple(int(k) for k in orders)
        if any(k < 0 for k in orders):
            raise errors.JetOrderError("Negative derivative order for %s: %s" % (name, orders))
        if not any(orders):
            return self[name]
        symbol = self._jets.get((name, orders))
        if symbol is not None:
            return symbol
        base = self[name]
        if self.kind(base) not in (Kind.FIELD, Kind.MOMENTUM):
            raise errors.JetOrderError("'%s' is not a field or momentum" % name)
        slots = self.coordinate_names()
        if len(orders) != len(slots):
            raise errors.JetOrderError("Jet orders %s do not match coordinates %s" % (orders, slots))
        parts = []
        for slot, count in zip(slots, orders):
            parts.extend([slot] * count)
        jet_name = name + "_" + "_".join(parts)
        with self._lock:
            symbol = self._jets.get((name, orders))
            if symbol is not None:
                return symbol
        try:
            return self.declare(jet_name, Kind.JET, index=self._info[base].index, field=name, orders=orders)
        except errors.DuplicateDeclaration:
            # Another thread registered it first
            symbol = self._jets.get((name, orders))
            if symbol is None:
                raise
            return symbol

    def gauged(self, jet):
        """ Companion of a jet coordinate: the jet of the field before restriction,
        evaluated along a gauge section tau = h(x). Printed as d_h(y, x).
        """
        info = self._info.get(jet)
        if info is None or info.kind != Kind.JET:
            raise errors.JetOrderError("'%s' is not a jet coordinate" % jet)
        with self._lock:
            symbol = self._gauged.get(jet)
            if symbol is None:
                symbol = sp.Symbol(info.name + "|h")
                self._by_name[symbol.name] = symbol
                self._info[symbol] = _info(symbol.name, Kind.GAUGED, index=info.index, field=info.field,
                                           orders=info.orders)
                self._gauged[jet] = symbol
            return symbol

    def jet_from_coords(self, field, coords):
        """ Jet coordinate for d(field, c1, ..., ck), repetition giving the order
        """
        slots = self.coordinate_names()
        orders = [0] * len(slots)
        for coord in coords:
            if coord not in slots:
                raise errors.UndeclaredSymbol("'%s' is not a coordinate" % coord)
            orders[slots.index(coord)] += 1
        return self.jet(field, orders)

    def field_of(self, symbol):
        """ Underlying field/momentum symbol of a jet coordinate (or the symbol itself)
        """
        info = self._info.get(symbol)
        if info is not None and info.kind == Kind.JET:
            return self._by_name[info.field]
        return symbol

    def orders_of(self, symbol):
        info = self._info.get(symbol)
        if info is not None and info.kind == Kind.JET:
            return info.orders
        return (0,) * len(self.coordinate_names())


def _is_cos_power(expr):
    return (expr.is_Pow and isinstance(expr.base, sp.cos)
            and expr.exp.is_Integer and abs(int(expr.exp)) >= 2)

def _fold_cos_power(expr):
    count = int(expr.exp)
    arg = expr.base.args[0]
    folded = (1 - sp.sin(arg)**2)**(abs(count) // 2) * sp.cos(arg)**(abs(count) % 2)
    return folded if count > 0 else 1/folded

def _canonical_pass(expr):
    expr = sp.expand(expr)
    if expr.has(sp.cos):
        expr = sp.expand(expr.replace(_is_cos_power, _fold_cos_power))
    return sp.cancel(sp.together(expr))

def simplify(expr):
    """ Canonical form: expanded numerator over expanded denominator, common factors
    cancelled, even powers of cosines rewritten through sines. Idempotent.
    """
    expr = sp.sympify(expr)
    if not isinstance(expr, sp.Expr) or expr.is_Atom:
        return expr
    for j in range(MAX_REWRITE_PASSES):
        new_expr = _canonical_pass(expr)
        if new_expr == expr:
            break
        expr = new_expr
    return expr

def is_zero(expr):
    return simplify(expr) == 0

def differentiate(expr, symbol):
    """ Partial derivative, all symbols (jets included) being independent coordinates
    """
    return simplify(sp.diff(sp.sympify(expr), symbol))

def substitute(expr, bindings):
    """ Simultaneous substitution {symbol: expression}, followed by simplify.
    Permutations such as {x: y, y: x} are legal; a symbol bound to an expression
    containing itself raises CyclicBinding.
    """
    expr = sp.sympify(expr)
    clean = {}
    for symbol, value in bindings.items():
        value = sp.sympify(value)
        if value == symbol:
            continue
        if symbol in value.free_symbols:
            raise errors.CyclicBinding("Binding for %s refers to itself: %s" % (symbol, value))
        clean[symbol] = value
    if not clean:
        return simplify(expr)
    return simplify(expr.xreplace(clean))

@functools.lru_cache(maxsize=4096)
def _lambdified(expr, symbols):
    return sp.lambdify(symbols, expr, modules="math")

def _checked_float(value, expr):
    if isinstance(value, complex):
        raise errors.DomainError("Complex value for %s" % expr)
    return float(value)

def eval_numeric(expr, env):
    """ Evaluate the canonical form of expr at env {symbol: float}
    """
    expr = simplify(expr)
    missing = expr.free_symbols - set(env)
    if missing:
        raise errors.UnboundSymbol("Unbound symbol(s): %s" % ", ".join(sorted(s.name for s in missing)))
    symbols = tuple(sorted(expr.free_symbols, key=sp.default_sort_key))
    func = _lambdified(expr, symbols)
    try:
        return _checked_float(func(*[float(env[s]) for s in symbols]), expr)
    except (ValueError, ZeroDivisionError, OverflowError) as excp:
        raise errors.DomainError("Cannot evaluate %s: %s" % (expr, excp))

def compile_numeric(exprs, symbols):
    """ Compile expressions once into a closure f(*values) -> list of floats.
    Evaluation errors surface as ValueError/ZeroDivisionError/OverflowError.
    """
    exprs = [sp.sympify(e) for e in exprs]
    symbols = tuple(symbols)
    extra = set().union(*[e.free_symbols for e in exprs]) - set(symbols) if exprs else set()
    if extra:
        raise errors.UnboundSymbol("Unbound symbol(s): %s" % ", ".join(sorted(s.name for s in extra)))
    func = sp.lambdify(symbols, exprs, modules="math")
    logging.debug("symexpr: compiled %d expressions over %s", len(exprs), [s.name for s in symbols])
    return func


class ModelPrinter(StrPrinter):
    """ Prints expressions in the model text syntax; output re-parses to an equal expression
    """
    def __init__(self, table=None):
        StrPrinter.__init__(self)
        self.table = table

    def _print_Symbol(self, expr):
        if self.table is not None:
            info = self.table.info(expr)
            if info is not None and info.kind in (Kind.JET, Kind.GAUGED):
                coords = []
                for slot, count in zip(self.table.coordinate_names(), info.orders):
                    coords.extend([slot] * count)
                prefix = "d_h" if info.kind == Kind.GAUGED else "d"
                return "%s(%s, %s)" % (prefix, info.field, ", ".join(coords))
        return expr.name

    def _print_ImaginaryUnit(self, expr):
        # sqrt of a negative constant evaluates to a multiple of I
        return "sqrt(-1)"

    def _print_log(self, expr):
        return "ln(%s)" % self._print(expr.args[0])

    def _print_Exp1(self, expr):
        return "exp(1)"

    def _print_Pow(self, expr, rational=False):
        return StrPrinter._print_Pow(self, expr, rational=rational).replace("**", "^")

def to_text(expr, table=None):
    return ModelPrinter(table).doprint(sp.sympify(expr))


Token = collections.namedtuple("Token", "type value line column")

TOKEN_TYPES = [
    ("NUMBER", r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?"),
    ("STRING", r'"[^"\n]*"'),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("OP", r"[-+*/^(),={}:]"),
    ("NEWLINE", r"\n"),
    ("SKIP", r"[ \t\r]+"),
    ("COMMENT", r"#[^\n]*"),
    ("MISMATCH", r"."),
]

TOKEN_RE = re.compile("|".join("(?P<%s>%s)" % pair for pair in TOKEN_TYPES))

def tokenize(text):
    """ Returns list of tokens with 1-based line/column, newlines and comments dropped
    """
    tokens = []
    line = 1
    line_start = 0
    for match in TOKEN_RE.finditer(text):
        kind = match.lastgroup
        value = match.group()
        column = match.start() - line_start + 1
        if kind == "NEWLINE":
            line += 1
            line_start = match.end()
            continue
        if kind in ("SKIP", "COMMENT"):
            continue
        if kind == "MISMATCH":
            raise errors.ModelSyntaxError("Unexpected character %r" % value, line, column)
        tokens.append(Token(kind, value, line, column))
    return tokens

def parse_number(text):
    """ Exact value of a numeric literal; decimals and exponents become rationals
    """
    if re.match(r"^\d+$", text):
        return sp.Integer(int(text))
    value = fractions.Fraction(text)
    return sp.Rational(value.numerator, value.denominator)

class ExpressionParser(object):
    """ Recursive descent parser for infix expressions over a token list.
    Resolves identifiers through the symbol table; d(f, c1, ..., ck) yields jet coordinates,
    and with gauged=True d_h(f, c1, ..., ck) yields their gauge companions.
    """
    def __init__(self, tokens, table, pos=0, gauged=False):
        self.tokens = tokens
        self.table = table
        self.pos = pos
        self.gauged = gauged

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def at_end_location(self):
        if self.tokens:
            last = self.tokens[-1]
            return last.line, last.column + len(last.value)
        return 1, 1

    def error(self, message, token=None):
        token = token or self.peek()
        if token is None:
            line, column = self.at_end_location()
            return errors.ModelSyntaxError(message + " (end of input)", line, column)
        return errors.ModelSyntaxError(message, token.line, token.column)

    def match(self, value):
        token = self.peek()
        if token is not None and token.type == "OP" and token.value == value:
            self.pos += 1
            return token
        return None

    def expect(self, value):
        token = self.match(value)
        if token is None:
            current = self.peek()
            raise self.error("Expected '%s' but found %s" % (value, repr(current.value) if current else "nothing"))
        return token

    def expect_ident(self):
        token = self.peek()
        if token is None or token.type != "IDENT":
            raise self.error("Expected identifier")
        self.pos += 1
        return token

    def parse(self):
        return self.parse_sum()

    def parse_sum(self):
        expr = self.parse_product()
        while True:
            if self.match("+"):
                expr = expr + self.parse_product()
            elif self.match("-"):
                expr = expr - self.parse_product()
            else:
                return expr

    def parse_product(self):
        expr = self.parse_unary()
        while True:
            if self.match("*"):
                expr = expr * self.parse_unary()
            elif self.match("/"):
                expr = expr / self.parse_unary()
            else:
                return expr

    def parse_unary(self):
        if self.match("-"):
            return -self.parse_unary()
        if self.match("+"):
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        if self.match("^"):
            # Right associative; exponent may carry a sign
            return base ** self.parse_unary()
        return base

    def parse_atom(self):
        token = self.peek()
        if token is None:
            raise self.error("Expected expression")
        if token.type == "NUMBER":
            self.pos += 1
            return parse_number(token.value)
        if token.type == "OP" and token.value == "(":
            self.pos += 1
            expr = self.parse_sum()
            self.expect(")")
            return expr
        if token.type == "IDENT":
            self.pos += 1
            following = self.peek()
            if following is not None and following.type == "OP" and following.value == "(":
                return self.parse_call(token)
            return self.resolve(token)
        raise self.error("Unexpected %s" % repr(token.value), token)

    def parse_call(self, name_token):
        self.expect("(")
        if name_token.value == "d" or (self.gauged and name_token.value == "d_h"):
            field = self.expect_ident()
            coords = []
            while self.match(","):
                coords.append(self.expect_ident())
            self.expect(")")
            jet = self.resolve_jet(field, coords)
            if name_token.value == "d_h":
                if self.table.kind(jet) != Kind.JET:
                    raise errors.ModelSyntaxError("d_h needs at least one coordinate",
                                                  name_token.line, name_token.column)
                return self.table.gauged(jet)
            return jet
        func = BUILTINS.get(name_token.value)
        if func is None:
            raise errors.UndeclaredSymbol("Unknown function '%s'" % name_token.value,
                                          name_token.line, name_token.column)
        arg = self.parse_sum()
        self.expect(")")
        return func(arg)

    def resolve(self, token):
        symbol = self.table.get(token.value)
        if symbol is None:
            raise errors.UndeclaredSymbol("Undeclared symbol '%s'" % token.value, token.line, token.column)
        return symbol

    def resolve_jet(self, field, coords):
        info = self.table.info(self.table.get(field.value)) if field.value in self.table else None
        if info is None or info.kind not in (Kind.FIELD, Kind.MOMENTUM):
            raise errors.UndeclaredSymbol("Undeclared field '%s'" % field.value, field.line, field.column)
        slots = self.table.coordinate_names()
        for coord in coords:
            if coord.value not in slots:
                raise errors.UndeclaredSymbol("Undeclared coordinate '%s'" % coord.value, coord.line, coord.column)
        return self.table.jet_from_coords(field.value, [c.value for c in coords])

def parse_expression(text, table, gauged=False):
    """ Parse expression text against a symbol table; result is simplified
    """
    parser = ExpressionParser(tokenize(text), table, gauged=gauged)
    expr = parser.parse()
    if parser.peek() is not None:
        raise parser.error("Unexpected %s" % repr(parser.peek().value))
    return simplify(expr)
