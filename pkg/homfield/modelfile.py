"""
modelfile: reader and printer for the .model text format

    model "oscillator"
    base dim 1 coords (t)
    line tau
    field y
    param k = 1
    init y = 1
    lagrangian L = 1/2*d(y, tau)^2 - k/2*y^2
    gauge h = t
    connection gamma { t = 1 }

Statements are read in two passes: the first collects declarations and the
token spans of expressions, the second parses the expressions against the
symbol table of the model, so declarations may appear in any order.
"""

import collections
import logging

import sympy as sp

from . import errors
from .bundles import ConnectionGamma, ConnectionTheta
from .hamilton import MOMENTUM_PREFIX, HamiltonianSystem, LagrangianModel, legendre, phase_space
from .jetcalc import DEFAULT_LINE
from .symexpr import BUILTINS, ExpressionParser, parse_number, simplify, to_text, tokenize

KEYWORDS = ("model", "base", "line", "field", "param", "init",
            "lagrangian", "hamiltonian", "gauge", "connection")

RESERVED = frozenset(["d"] + list(BUILTINS) + list(KEYWORDS))

ExprSpan = collections.namedtuple("ExprSpan", "name keyword start end")

class _Skimmer(ExpressionParser):
    """ Syntax-only pass over an expression; symbols are resolved later
    """
    def __init__(self, tokens, pos=0):
        ExpressionParser.__init__(self, tokens, None, pos=pos)

    def resolve(self, token):
        return sp.Integer(1)

    def parse_call(self, name_token):
        self.expect("(")
        if name_token.value == "d":
            self.expect_ident()
            while self.match(","):
                self.expect_ident()
        else:
            self.parse_sum()
        self.expect(")")
        return sp.Integer(1)


class ModelFile(object):
    """ A parsed model: declarations, parsed expressions and the jet space they live on
    """
    def __init__(self, name, space, parameters, initial, lagrangian=None, hamiltonian=None,
                 gauge=None, connections=None):
        self.name = name
        self.space = space
        self.parameters = parameters
        self.initial = initial
        self.lagrangian = lagrangian
        self.hamiltonian = hamiltonian
        self.gauge = gauge
        self.connections = connections or collections.OrderedDict()

    @property
    def table(self):
        return self.space.table

    def coordinate_names(self):
        return [s.name for s in self.space.base]

    def field_names(self):
        return [s.name for s in self.space.fields]

    def gamma(self):
        for kind, entries in self.connections.values():
            if kind == "gamma":
                return ConnectionGamma(self.space, entries)
        return None

    def theta(self):
        for kind, entries in self.connections.values():
            if kind == "theta":
                spatial = {}
                tau = {}
                for (field, coord), expr in entries.items():
                    if coord == self.space.line.name:
                        tau[self.table[field]] = expr
                    else:
                        spatial[(self.table[field], coord)] = expr
                return ConnectionTheta(self.space, spatial, tau)
        return None

    def lagrangian_model(self):
        if self.lagrangian is None:
            raise errors.DerivationError("Model %s has no lagrangian" % self.name)
        return LagrangianModel(self.space, self.lagrangian[1], name=self.name, parameters=self.parameters)

    def system(self):
        """ HamiltonianSystem, through the Legendre map when the model gives a Lagrangian
        """
        if self.lagrangian is not None:
            return legendre(self.lagrangian_model())
        return HamiltonianSystem(self.space, self.hamiltonian[1], name=self.name, parameters=self.parameters)

    def initial_state(self, overrides=None):
        """ (y, p) values: declared inits, then overrides {name: value}; missing entries are 0
        """
        names = self.field_names() + [MOMENTUM_PREFIX + f for f in self.field_names()]
        values = dict((name, float(value)) for name, value in self.initial.items())
        for name, value in (overrides or {}).items():
            if name not in names:
                raise errors.UsageError("Unknown initial value name '%s'; expected one of %s" % (name, ", ".join(names)))
            values[name] = float(value)
        return [values.get(name, 0.0) for name in names]

    def text(self, expr):
        return to_text(expr, self.table)


class _ModelReader(object):
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.cursor = _Skimmer(self.tokens)
        self.names = {}
        self.name_tokens = {}
        self.name = None
        self.base = None
        self.line = None
        self.fields = []
        self.params = collections.OrderedDict()
        self.inits = collections.OrderedDict()
        self.exprs = collections.OrderedDict()
        self.connections = []

    def keyword(self):
        token = self.cursor.peek()
        if token is None or token.type != "IDENT" or token.value not in KEYWORDS:
            raise self.cursor.error("Expected a declaration keyword (%s)" % ", ".join(KEYWORDS))
        self.cursor.pos += 1
        return token

    def expect_word(self, word):
        token = self.cursor.peek()
        if token is None or token.type != "IDENT" or token.value != word:
            raise self.cursor.error("Expected '%s'" % word)
        self.cursor.pos += 1
        return token

    def declare(self, token, kind):
        if token.value in RESERVED:
            raise errors.ModelSyntaxError("'%s' is a reserved name" % token.value, token.line, token.column)
        if token.value in self.names:
            raise errors.DuplicateDeclaration("'%s' already declared as %s" % (token.value, self.names[token.value]),
                                              token.line, token.column)
        self.names[token.value] = kind
        self.name_tokens[token.value] = token

    def number(self):
        sign = -1 if self.cursor.match("-") else 1
        token = self.cursor.peek()
        if token is None or token.type != "NUMBER":
            raise self.cursor.error("Expected number")
        self.cursor.pos += 1
        value = parse_number(token.value)
        if self.cursor.match("/"):
            token = self.cursor.peek()
            if token is None or token.type != "NUMBER":
                raise self.cursor.error("Expected number")
            self.cursor.pos += 1
            denominator = parse_number(token.value)
            if denominator == 0:
                raise errors.ModelSyntaxError("Zero denominator", token.line, token.column)
            value = value / denominator
        return sign * value

    def skim(self):
        start = self.cursor.pos
        self.cursor.parse()
        return start, self.cursor.pos

    def read(self):
        first = self.cursor.peek()
        if first is None or first.type != "IDENT" or first.value != "model":
            raise self.cursor.error("Model file must start with 'model \"name\"'")
        while self.cursor.peek() is not None:
            token = self.keyword()
            getattr(self, "read_" + token.value)(token)
        return self

    def read_model(self, token):
        if self.name is not None:
            raise errors.DuplicateDeclaration("Second model statement", token.line, token.column)
        name = self.cursor.peek()
        if name is None or name.type != "STRING":
            raise self.cursor.error("Expected model name string")
        self.cursor.pos += 1
        self.name = name.value[1:-1]

    def read_base(self, token):
        if self.base is not None:
            raise errors.DuplicateDeclaration("Second base statement", token.line, token.column)
        self.expect_word("dim")
        dim = self.cursor.peek()
        if dim is None or dim.type != "NUMBER" or not dim.value.isdigit():
            raise self.cursor.error("Expected integer dimension")
        self.cursor.pos += 1
        self.expect_word("coords")
        self.cursor.expect("(")
        coords = [self.cursor.expect_ident()]
        while self.cursor.match(","):
            coords.append(self.cursor.expect_ident())
        self.cursor.expect(")")
        if int(dim.value) != len(coords):
            raise errors.ModelSyntaxError("Dimension %s does not match %d coordinates" % (dim.value, len(coords)),
                                          dim.line, dim.column)
        for coord in coords:
            self.declare(coord, "coordinate")
        self.base = [c.value for c in coords]

    def read_line(self, token):
        if self.line is not None:
            raise errors.DuplicateDeclaration("Second line statement", token.line, token.column)
        name = self.cursor.expect_ident()
        self.declare(name, "line coordinate")
        self.line = name.value

    def read_field(self, token):
        name = self.cursor.expect_ident()
        self.declare(name, "field")
        momentum = MOMENTUM_PREFIX + name.value
        if momentum in self.names:
            raise errors.DuplicateDeclaration("'%s' is the momentum of field %s" % (momentum, name.value),
                                              name.line, name.column)
        self.names[momentum] = "momentum"
        self.fields.append(name.value)

    def read_param(self, token):
        name = self.cursor.expect_ident()
        self.declare(name, "parameter")
        self.cursor.expect("=")
        self.params[name.value] = self.number()

    def read_init(self, token):
        name = self.cursor.expect_ident()
        if name.value in self.inits:
            raise errors.DuplicateDeclaration("Second init for %s" % name.value, name.line, name.column)
        self.cursor.expect("=")
        self.inits[name.value] = (name, self.number())

    def _read_expression(self, token):
        if token.value in self.exprs:
            raise errors.DuplicateDeclaration("Second %s statement" % token.value, token.line, token.column)
        if token.value in ("lagrangian", "hamiltonian"):
            other = "hamiltonian" if token.value == "lagrangian" else "lagrangian"
            if other in self.exprs:
                raise errors.ModelSyntaxError("Model may declare a lagrangian or a hamiltonian, not both",
                                              token.line, token.column)
        name = self.cursor.expect_ident()
        self.cursor.expect("=")
        start, end = self.skim()
        self.exprs[token.value] = ExprSpan(name.value, token, start, end)

    read_lagrangian = read_hamiltonian = read_gauge = _read_expression

    def read_connection(self, token):
        name = self.cursor.expect_ident()
        self.cursor.expect("{")
        entries = []
        while not self.cursor.match("}"):
            key = self.cursor.expect_ident()
            self.cursor.expect("=")
            start, end = self.skim()
            entries.append((key, start, end))
        self.connections.append((name, entries))


def _connection_key(reader, key):
    """ ('gamma', coord) or ('theta', (field, coord)) for a connection entry key
    """
    base = reader.base or []
    if key.value in base:
        return "gamma", key.value
    line = reader.line or DEFAULT_LINE
    for field in reader.fields:
        for coord in base + [line]:
            if key.value == field + "_" + coord:
                return "theta", (field, coord)
    raise errors.UndeclaredSymbol("Connection key '%s' is neither a base coordinate nor <field>_<coordinate>"
                                  % key.value, key.line, key.column)

def parse_model(text):
    """ Parse model text into a ModelFile; errors carry line and column
    """
    reader = _ModelReader(text).read()
    if "lagrangian" not in reader.exprs and "hamiltonian" not in reader.exprs:
        line, column = reader.cursor.at_end_location()
        raise errors.ModelSyntaxError("Model declares neither a lagrangian nor a hamiltonian", line, column)

    if reader.line is None and DEFAULT_LINE in reader.names:
        token = reader.name_tokens[DEFAULT_LINE]
        raise errors.DuplicateDeclaration("'%s' is the default line coordinate" % DEFAULT_LINE, token.line, token.column)

    space = phase_space(reader.base or [], reader.fields, line=reader.line or DEFAULT_LINE,
                        parameters=list(reader.params))
    table = space.table

    def parse_span(start, end):
        parser = ExpressionParser(reader.tokens, table, pos=start)
        expr = parser.parse()
        if parser.pos != end:
            raise parser.error("Unexpected token")
        return simplify(expr)

    initial = collections.OrderedDict()
    for name, (token, value) in reader.inits.items():
        if reader.names.get(name) not in ("field", "momentum"):
            raise errors.UndeclaredSymbol("init for undeclared field or momentum '%s'" % name, token.line, token.column)
        initial[name] = value

    exprs = {}
    for keyword, span in reader.exprs.items():
        exprs[keyword] = (span.name, parse_span(span.start, span.end))

    connections = collections.OrderedDict()
    for name, entries in reader.connections:
        if name.value in connections:
            raise errors.DuplicateDeclaration("Second connection '%s'" % name.value, name.line, name.column)
        kind = None
        values = collections.OrderedDict()
        for key, start, end in entries:
            key_kind, slot = _connection_key(reader, key)
            if kind is not None and key_kind != kind:
                raise errors.ModelSyntaxError("Connection '%s' mixes Gamma and A coefficients" % name.value,
                                              key.line, key.column)
            if slot in values:
                raise errors.DuplicateDeclaration("Second coefficient %s" % key.value, key.line, key.column)
            kind = key_kind
            values[slot] = parse_span(start, end)
        if kind is not None and any(kind == other for other, e in connections.values()):
            raise errors.DuplicateDeclaration("Second %s connection" % kind, name.line, name.column)
        connections[name.value] = (kind or "gamma", values)

    model = ModelFile(reader.name, space, reader.params, initial,
                      lagrangian=exprs.get("lagrangian"), hamiltonian=exprs.get("hamiltonian"),
                      gauge=exprs.get("gauge"), connections=connections)
    if model.gauge is not None:
        extra = model.gauge[1].free_symbols - set(space.base) - set(space.parameters)
        if extra:
            token = reader.exprs["gauge"].keyword
            raise errors.ModelSyntaxError("Gauge section may only use base coordinates and parameters",
                                          token.line, token.column)
    # Build the connections now so invalid coefficients are reported at parse time
    model.gamma()
    model.theta()
    logging.info("modelfile: parsed model %s with fields %s", model.name, model.field_names())
    return model

def read_model(path):
    with open(path) as f:
        return parse_model(f.read())


def print_model(model):
    """ Canonical text of a ModelFile; parse(print_model(m)) describes the same model
    """
    text = model.text
    lines = ['model "%s"' % model.name]
    if model.space.base:
        lines.append("base dim %d coords (%s)" % (len(model.space.base), ", ".join(model.coordinate_names())))
    lines.append("line %s" % model.space.line.name)
    for name in model.field_names():
        lines.append("field %s" % name)
    for name, value in model.parameters.items():
        lines.append("param %s = %s" % (name, to_text(value)))
    for name, value in model.initial.items():
        lines.append("init %s = %s" % (name, to_text(value)))
    if model.lagrangian is not None:
        lines.append("lagrangian %s = %s" % (model.lagrangian[0], text(model.lagrangian[1])))
    if model.hamiltonian is not None:
        lines.append("hamiltonian %s = %s" % (model.hamiltonian[0], text(model.hamiltonian[1])))
    if model.gauge is not None:
        lines.append("gauge %s = %s" % (model.gauge[0], text(model.gauge[1])))
    for name, (kind, entries) in model.connections.items():
        lines.append("connection %s {" % name)
        for slot, expr in entries.items():
            key = slot if kind == "gamma" else "%s_%s" % slot
            lines.append("    %s = %s" % (key, text(expr)))
        lines.append("}")
    return "\n".join(lines) + "\n"
