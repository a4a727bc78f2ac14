"""
jetcalc: coordinate calculus on the jet spaces of the composite bundle Y -> Theta -> X

The line coordinate tau is kept as the last derivative slot next to the base
coordinates x^lambda, so D_tau is a total derivative like D_lambda.
"""

import collections
import itertools
import logging
import math

import sympy as sp

from . import errors
from .symexpr import Kind, SymbolTable, simplify, to_text

DEFAULT_LINE = "tau"

class MultiIndex(collections.namedtuple("MultiIndex", "entries tau")):
    """ Derivative orders (alpha_1, ..., alpha_n) along the base plus the tau-order
    """
    __slots__ = ()

    def __new__(cls, entries, tau=0):
        entries = tuple(int(a) for a in entries)
        if any(a < 0 for a in entries) or tau < 0:
            raise errors.JetOrderError("Negative multi-index entry: %s, %d" % (entries, tau))
        return super(MultiIndex, cls).__new__(cls, entries, int(tau))

    @classmethod
    def from_orders(cls, orders):
        return cls(orders[:-1], orders[-1])

    @classmethod
    def zero(cls, n):
        return cls((0,) * n, 0)

    @property
    def n(self):
        return len(self.entries)

    def order(self):
        """ |alpha|, the base part only
        """
        return sum(self.entries)

    def total_order(self):
        return sum(self.entries) + self.tau

    def orders(self):
        return self.entries + (self.tau,)

    def shift(self, direction):
        """ alpha + lambda; direction n is the tau slot
        """
        if direction == self.n:
            return MultiIndex(self.entries, self.tau + 1)
        if not 0 <= direction < self.n:
            raise errors.JetOrderError("No direction %d for multi-index of dimension %d" % (direction, self.n))
        entries = list(self.entries)
        entries[direction] += 1
        return MultiIndex(entries, self.tau)


class JetSpace(object):
    """ Jet coordinates (x^lambda, tau, y^i_alpha) of a bundle with n base coordinates and
    fields (and, on the Legendre side, momenta) over them, up to order `order`.
    Higher jets are registered on demand when total derivatives need them.
    """
    def __init__(self, coords, fields, line=DEFAULT_LINE, order=2, parameters=(), momenta=(),
                 assumptions=None, table=None):
        assumptions = assumptions or {}
        self.table = table if table is not None else SymbolTable()
        self.order = order
        self.base = [self.table.declare(name, Kind.BASE, index=j, **assumptions.get(name, {}))
                     for j, name in enumerate(coords)]
        self.line = self.table.declare(line, Kind.LINE, index=len(coords), **assumptions.get(line, {}))
        self.fields = [self.table.declare(name, Kind.FIELD, index=j, **assumptions.get(name, {}))
                       for j, name in enumerate(fields)]
        self.momenta = []
        for j, (name, field) in enumerate(momenta):
            self.momenta.append(self.table.declare(name, Kind.MOMENTUM, index=j, field=field,
                                                   **assumptions.get(name, {})))
        self.parameters = [self.table.declare(name, Kind.PARAMETER, **assumptions.get(name, {}))
                           for name in parameters]

    @property
    def n(self):
        return len(self.base)

    @property
    def m(self):
        return len(self.fields)

    def directions(self):
        return self.base + [self.line]

    def direction_index(self, direction):
        """ Accepts an index (n for tau), a coordinate symbol or a coordinate name
        """
        if isinstance(direction, int):
            if not 0 <= direction <= self.n:
                raise errors.JetOrderError("No direction %d" % direction)
            return direction
        names = [s.name for s in self.directions()]
        name = direction if isinstance(direction, str) else direction.name
        if name not in names:
            raise errors.JetOrderError("'%s' is not a base or line coordinate" % name)
        return names.index(name)

    def jet(self, field, multi_index):
        if isinstance(multi_index, MultiIndex):
            multi_index = multi_index.orders()
        return self.table.jet(field, multi_index)

    def velocity(self, field):
        """ y^i_tau (the 'dot' derivative)
        """
        return self.jet(field, (0,) * self.n + (1,))

    def multi_index(self, symbol):
        return MultiIndex.from_orders(self.table.orders_of(symbol))

    def is_jet_coordinate(self, symbol):
        return self.table.kind(symbol) in (Kind.FIELD, Kind.JET, Kind.MOMENTUM)

    def field_of(self, symbol):
        return self.table.field_of(symbol)

    def shift(self, symbol, direction):
        """ y^i_alpha -> y^i_{alpha+lambda}
        """
        index = self.direction_index(direction)
        return self.jet(self.field_of(symbol), self.multi_index(symbol).shift(index))

    def coordinates(self, order=None, include_momenta=False):
        """ All jet coordinates of fields with total order <= order (default: the space order)
        """
        order = self.order if order is None else order
        owners = self.fields + (self.momenta if include_momenta else [])
        result = []
        for field in owners:
            for total in range(order + 1):
                for orders in _compositions(total, self.n + 1):
                    result.append(self.jet(field, orders))
        return result

    def jet_order(self, expr):
        """ Highest total derivative order of jet coordinates in expr
        """
        orders = [self.multi_index(s).total_order()
                  for s in sp.sympify(expr).free_symbols if self.is_jet_coordinate(s)]
        return max(orders) if orders else 0

    def volume_form(self):
        """ omega-hat = d^1 ^ ... ^ d^n ^ dtau
        """
        return DifferentialForm({tuple(self.directions()): sp.Integer(1)})

    def volume_slot(self, direction):
        """ omega-hat_lambda = d_lambda _| omega-hat
        """
        coord = self.directions()[self.direction_index(direction)]
        return interior_product({coord: sp.Integer(1)}, self.volume_form())

    def coordinate_count(self, order=None):
        """ Number of jet coordinates of order <= r for n+1 derivative directions
        """
        order = self.order if order is None else order
        return self.m * math.comb(self.n + 1 + order, order)

    def text(self, expr):
        return to_text(expr, self.table)

def _compositions(total, slots):
    """ All tuples of `slots` non-negative integers summing to total
    """
    if slots == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, slots - 1):
            yield (first,) + rest


def total_derivative(space, expr, direction):
    """ D_lambda = d_lambda + y^j_{alpha+lambda} d_j^alpha (same for D_tau)
    """
    index = space.direction_index(direction)
    expr = sp.sympify(expr)
    result = sp.diff(expr, space.directions()[index])
    for symbol in expr.free_symbols:
        if space.is_jet_coordinate(symbol):
            result += space.shift(symbol, index) * sp.diff(expr, symbol)
    return simplify(result)

def iterated_total_derivative(space, expr, multi_index):
    for direction, count in enumerate(multi_index.orders()):
        for j in range(count):
            expr = total_derivative(space, expr, direction)
    return expr

def prolong(space, section, order):
    """ Jet prolongation of a section {field: expression in (x, tau)}:
    y^i_alpha -> d^alpha d_tau^k section^i for all total orders <= order (order 0 included)
    """
    allowed = set(space.directions()) | set(space.parameters)
    result = collections.OrderedDict()
    for field, expr in section.items():
        expr = sp.sympify(expr)
        extra = expr.free_symbols - allowed
        if extra:
            raise errors.DerivationError("Section for %s depends on %s" % (field, sorted(s.name for s in extra)))
        for total in range(order + 1):
            for orders in _compositions(total, space.n + 1):
                wrt = [(coord, k) for coord, k in zip(space.directions(), orders) if k]
                value = sp.diff(expr, *wrt) if wrt else expr
                result[space.jet(field, orders)] = simplify(value)
    return result

def euler_lagrange(space, lagrangian, field, max_order=2):
    """ Sum over jets y^i_alpha of (-1)^|alpha| D_alpha (dL/dy^i_alpha), |alpha| counting tau too
    """
    lagrangian = sp.sympify(lagrangian)
    jets = [s for s in lagrangian.free_symbols
            if space.is_jet_coordinate(s) and space.field_of(s) == field]
    result = sp.Integer(0)
    for jet in sorted(jets, key=space.table.sort_key):
        multi_index = space.multi_index(jet)
        if multi_index.total_order() > max_order:
            raise errors.JetOrderError("Euler-Lagrange operator supports jets up to order %d, found %s"
                                       % (max_order, jet))
        term = iterated_total_derivative(space, sp.diff(lagrangian, jet), multi_index)
        result += (-1)**multi_index.total_order() * term
    return simplify(result)


def _sorted_with_sign(diffs):
    """ Sort differentials canonically, returning (sign, tuple); sign 0 on a repeated factor
    """
    items = list(diffs)
    if len(set(items)) != len(items):
        return 0, ()
    keys = [sp.default_sort_key(item) for item in items]
    sign = 1
    # Insertion sort counting transpositions
    for j in range(1, len(items)):
        k = j
        while k > 0 and keys[k-1] > keys[k]:
            keys[k-1], keys[k] = keys[k], keys[k-1]
            items[k-1], items[k] = items[k], items[k-1]
            sign = -sign
            k -= 1
    return sign, tuple(items)

class DifferentialForm(object):
    """ Exterior form: map from canonically ordered tuples of coordinate differentials to
    coefficients. Immutable; coefficients are kept simplified and zero terms dropped.
    """
    __slots__ = ("terms", "degree")

    def __init__(self, terms=None, degree=None):
        collected = {}
        for diffs, coeff in (terms or {}).items():
            sign, key = _sorted_with_sign(diffs)
            if not sign:
                continue
            collected[key] = collected.get(key, sp.Integer(0)) + sign * sp.sympify(coeff)
        clean = {}
        for key, coeff in collected.items():
            coeff = simplify(coeff)
            if coeff != 0:
                clean[key] = coeff
        degrees = set(len(key) for key in clean)
        if len(degrees) > 1:
            raise errors.DerivationError("Form is not homogeneous: degrees %s" % sorted(degrees))
        self.terms = clean
        self.degree = degrees.pop() if degrees else degree

    @classmethod
    def scalar(cls, expr):
        return cls({(): expr}, degree=0)

    @classmethod
    def differential(cls, symbol):
        return cls({(symbol,): sp.Integer(1)}, degree=1)

    def is_zero(self):
        return not self.terms

    def coefficient(self, *diffs):
        sign, key = _sorted_with_sign(diffs)
        return sign * self.terms.get(key, sp.Integer(0)) if sign else sp.Integer(0)

    def free_symbols(self):
        symbols = set()
        for key, coeff in self.terms.items():
            symbols.update(key)
            symbols.update(coeff.free_symbols)
        return symbols

    def map_coefficients(self, func):
        return DifferentialForm(dict((key, func(coeff)) for key, coeff in self.terms.items()), degree=self.degree)

    def __add__(self, other):
        terms = dict(self.terms)
        for key, coeff in other.terms.items():
            terms[key] = terms.get(key, sp.Integer(0)) + coeff
        return DifferentialForm(terms, degree=self.degree if self.degree is not None else other.degree)

    def __neg__(self):
        return self.map_coefficients(lambda c: -c)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, expr):
        if isinstance(expr, DifferentialForm):
            return self.wedge(expr)
        return self.map_coefficients(lambda c: c * expr)

    __rmul__ = __mul__

    def wedge(self, other):
        terms = {}
        for key1, coeff1 in self.terms.items():
            for key2, coeff2 in other.terms.items():
                sign, key = _sorted_with_sign(key1 + key2)
                if sign:
                    terms[key] = terms.get(key, sp.Integer(0)) + sign * coeff1 * coeff2
        degree = None
        if self.degree is not None and other.degree is not None:
            degree = self.degree + other.degree
        return DifferentialForm(terms, degree=degree)

    def __eq__(self, other):
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        return (self - other).is_zero()

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def to_text(self, table=None):
        if not self.terms:
            return "0"
        parts = []
        for key in sorted(self.terms, key=lambda k: [sp.default_sort_key(s) for s in k]):
            diffs = "^".join("d" + to_text(s, table) for s in key)
            coeff = to_text(self.terms[key], table)
            parts.append("(%s)*%s" % (coeff, diffs) if diffs else coeff)
        return " + ".join(parts)

    def __repr__(self):
        return "DifferentialForm(%s)" % self.to_text()

def wedge(*forms):
    result = DifferentialForm.scalar(1)
    for form in forms:
        result = result.wedge(form)
    return result

def exterior_derivative(form, coordinates=None, constants=()):
    """ d(c dx^K) = sum_s dc/ds ds ^ dx^K, over `coordinates` if given, else over all
    free symbols of the coefficients except `constants`
    """
    terms = {}
    constants = set(constants)
    for key, coeff in form.terms.items():
        wrt = coordinates if coordinates is not None else sorted(coeff.free_symbols - constants,
                                                                 key=sp.default_sort_key)
        for symbol in wrt:
            partial = sp.diff(coeff, symbol)
            if partial == 0:
                continue
            sign, new_key = _sorted_with_sign((symbol,) + key)
            if sign:
                terms[new_key] = terms.get(new_key, sp.Integer(0)) + sign * partial
    degree = form.degree + 1 if form.degree is not None else None
    return DifferentialForm(terms, degree=degree)

def interior_product(vector, form):
    """ V _| form for a vector {coordinate: component}
    """
    terms = {}
    for key, coeff in form.terms.items():
        for j, symbol in enumerate(key):
            component = vector.get(symbol)
            if component is None:
                continue
            new_key = key[:j] + key[j+1:]
            terms[new_key] = terms.get(new_key, sp.Integer(0)) + (-1)**j * component * coeff
    degree = form.degree - 1 if form.degree else None
    return DifferentialForm(terms, degree=degree)


def contact_form(space, symbol):
    """ theta^j_alpha = d^j_alpha - y^j_{alpha+lambda} d^lambda - y^j_{alpha+tau} dtau
    """
    form = DifferentialForm.differential(symbol)
    for direction, coord in enumerate(space.directions()):
        form = form - DifferentialForm.differential(coord) * space.shift(symbol, direction)
    return form

ContactSplit = collections.namedtuple("ContactSplit", "horizontal contact coefficients")

def contact_decompose(space, form, order):
    """ Split a 1-form on J_{order-1} (pulled back to J_order) into its horizontal part,
    spanned by d^lambda and dtau, and its contact part, spanned by the theta^j_alpha.
    coefficients maps each y^j_alpha to its theta^j_alpha coefficient.
    """
    if order < 1:
        raise errors.OrderTooLow("Contact decomposition needs jet order >= 1")
    if form.degree not in (None, 1):
        raise errors.DerivationError("Contact decomposition of a %d-form" % form.degree)
    directions = space.directions()
    horizontal = DifferentialForm(degree=1)
    contact = DifferentialForm(degree=1)
    coefficients = collections.OrderedDict()
    for (symbol,), coeff in sorted(form.terms.items(), key=lambda kv: space.table.sort_key(kv[0][0])):
        if symbol in directions:
            horizontal = horizontal + DifferentialForm.differential(symbol) * coeff
        elif space.is_jet_coordinate(symbol):
            if space.multi_index(symbol).total_order() > order - 1:
                raise errors.OrderTooLow("d%s does not live on J_%d" % (symbol, order - 1))
            theta = contact_form(space, symbol)
            contact = contact + theta * coeff
            horizontal = horizontal + (DifferentialForm.differential(symbol) - theta) * coeff
            coefficients[symbol] = coeff
        else:
            raise errors.DerivationError("d%s is not a coordinate differential of the jet space" % symbol)
    logging.debug("jetcalc: contact split of %d terms", len(form.terms))
    return ContactSplit(horizontal, contact, coefficients)

def pullback_by_section(space, form, section, order):
    """ Pull back a form on J_order along the prolongation of a section; the result
    lives on the (x, tau) coordinates only.
    """
    values = prolong(space, section, order)
    directions = space.directions()
    result = DifferentialForm.scalar(0) if form.degree == 0 else DifferentialForm(degree=form.degree)
    for key, coeff in form.terms.items():
        term = DifferentialForm.scalar(coeff.xreplace(values))
        for symbol in key:
            if symbol in directions:
                term = term.wedge(DifferentialForm.differential(symbol))
            else:
                value = values.get(symbol)
                if value is None:
                    raise errors.OrderTooLow("Prolongation of order %d does not cover %s" % (order, symbol))
                term = term.wedge(exterior_derivative(DifferentialForm.scalar(value), coordinates=directions))
        result = result + term
    return result
