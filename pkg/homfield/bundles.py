"""
bundles: connections on the composite bundle Y -> Theta -> X in coefficient form

A connection is stored only through its coefficient functions (the section of
the affine jet bundle J_1 -> Y); every statement used here is a coordinate identity.
"""

import collections
import logging

import sympy as sp

from . import errors
from .jetcalc import exterior_derivative, interior_product, prolong
from .symexpr import Kind, simplify, substitute

def _check_section(space, h):
    h = sp.sympify(h)
    allowed = set(space.base) | set(space.parameters)
    extra = h.free_symbols - allowed
    if extra:
        raise errors.InvalidConnection("Section h must depend on base coordinates only; found %s"
                                       % sorted(s.name for s in extra))
    return h


class ConnectionTheta(object):
    """ Connection gamma_Theta on Y -> Theta: coefficients A^i_lambda(x, tau, y) and
    A^i_tau(x, tau, y). Missing coefficients are zero.
    """
    def __init__(self, space, spatial=None, tau=None):
        self.space = space
        self.spatial = {}
        self.tau = {}
        for (field, direction), expr in (spatial or {}).items():
            index = space.direction_index(direction)
            if index == space.n:
                raise errors.InvalidConnection("Use the tau coefficients for the line direction")
            self.spatial[(field, index)] = self._checked(sp.sympify(expr))
        for field, expr in (tau or {}).items():
            self.tau[field] = self._checked(sp.sympify(expr))

    def _checked(self, expr):
        for symbol in expr.free_symbols:
            kind = self.space.table.kind(symbol)
            if kind in (Kind.JET, Kind.MOMENTUM):
                raise errors.InvalidConnection("Connection coefficient %s uses %s" % (expr, symbol))
        return simplify(expr)

    def A(self, field, direction):
        index = self.space.direction_index(direction)
        if index == self.space.n:
            return self.tau.get(field, sp.Integer(0))
        return self.spatial.get((field, index), sp.Integer(0))

class ConnectionGamma(object):
    """ Connection Gamma on the line bundle Theta -> X: coefficients Gamma_lambda(x, tau)
    """
    def __init__(self, space, coefficients=None):
        self.space = space
        self.coefficients = {}
        for direction, expr in (coefficients or {}).items():
            index = space.direction_index(direction)
            expr = sp.sympify(expr)
            for symbol in expr.free_symbols:
                if space.table.kind(symbol) in (Kind.FIELD, Kind.JET, Kind.MOMENTUM):
                    raise errors.InvalidConnection("Gamma coefficient %s uses field symbol %s" % (expr, symbol))
            self.coefficients[index] = simplify(expr)

    def Gamma(self, direction):
        return self.coefficients.get(self.space.direction_index(direction), sp.Integer(0))

class CompositeConnection(object):
    """ gamma = gamma_Theta o Gamma, projectable over Gamma
    """
    def __init__(self, theta, gamma, coefficients):
        self.theta = theta
        self.gamma = gamma
        self.coefficients = coefficients

    def check(self):
        """ gamma^i_lambda == A^i_lambda + A^i_tau Gamma_lambda
        """
        return self.coefficients == compose_connection(self.theta, self.gamma).coefficients

class PullbackConnection(object):
    """ Connection gamma_h induced on the subbundle Y_h = h*Y -> X
    """
    def __init__(self, theta, h, coefficients):
        self.theta = theta
        self.h = h
        self.coefficients = coefficients


def compose_connection(theta, gamma):
    space = theta.space
    coefficients = collections.OrderedDict()
    for field in space.fields:
        for index in range(space.n):
            coefficients[(field, index)] = simplify(theta.A(field, index) + theta.A(field, space.n) * gamma.Gamma(index))
    return CompositeConnection(theta, gamma, coefficients)

def pullback_connection(theta, h):
    """ gamma_h^i_lambda = A^i_lambda(x, h(x), y) + A^i_tau(x, h(x), y) d_lambda h
    """
    space = theta.space
    h = _check_section(space, h)
    on_h = {space.line: h}
    coefficients = collections.OrderedDict()
    for field in space.fields:
        for index, coord in enumerate(space.base):
            value = theta.A(field, index) + theta.A(field, space.n) * sp.diff(h, coord)
            coefficients[(field, index)] = substitute(value, on_h)
    return PullbackConnection(theta, h, coefficients)

def restrict_connection(composite, h):
    """ Composite connection coefficients restricted to tau = h(x)
    """
    space = composite.theta.space
    h = _check_section(space, h)
    return collections.OrderedDict((key, substitute(value, {space.line: h}))
                                   for key, value in composite.coefficients.items())

def integrality_defects(gamma, h):
    """ d_lambda h - Gamma_lambda(x, h(x)) for each base direction
    """
    space = gamma.space
    h = _check_section(space, h)
    return [substitute(sp.diff(h, coord) - gamma.Gamma(index), {space.line: h})
            for index, coord in enumerate(space.base)]

def is_reducible(theta, gamma, h):
    """ gamma_Theta o Gamma reduces to gamma_h iff h is an integral section of Gamma
    """
    return all(defect == 0 for defect in integrality_defects(gamma, h))

def vertical_components(theta):
    """ The first order operator on J_1 Y: y^i_lambda-hat - A^i_lambda-hat for lambda-hat in (x, tau)
    """
    space = theta.space
    components = collections.OrderedDict()
    for field in space.fields:
        for index in range(space.n + 1):
            orders = [0] * (space.n + 1)
            orders[index] = 1
            components[(field, index)] = simplify(space.jet(field, orders) - theta.A(field, index))
    return components

def vertical_covariant_differential(theta, section, h):
    """ Delta^i_lambda of a section over Theta, restricted along tau = h(x):
    (y^i_lambda - A^i_lambda) + (y^i_tau - A^i_tau) d_lambda h on the prolonged section.
    """
    space = theta.space
    h = _check_section(space, h)
    values = dict(prolong(space, section, 1))
    components = vertical_components(theta)
    result = collections.OrderedDict()
    for field in space.fields:
        for index, coord in enumerate(space.base):
            value = components[(field, index)] + components[(field, space.n)] * sp.diff(h, coord)
            # Section values first, then tau = h (section values may contain tau)
            value = sp.sympify(value).xreplace(values)
            result[(field, index)] = substitute(value, {space.line: h})
    return result

def restrict_section(space, section, h):
    """ phi = s o h on Y_h
    """
    h = _check_section(space, h)
    return collections.OrderedDict((field, substitute(expr, {space.line: h})) for field, expr in section.items())

def covariant_differential(pullback, restricted):
    """ d_lambda phi^i - gamma_h^i_lambda(x, phi) for a section phi of Y_h -> X
    """
    space = pullback.theta.space
    on_phi = dict(restricted)
    result = collections.OrderedDict()
    for field in space.fields:
        phi = sp.sympify(restricted.get(field, field))
        for index, coord in enumerate(space.base):
            gamma_h = sp.sympify(pullback.coefficients[(field, index)]).xreplace(on_phi)
            result[(field, index)] = simplify(sp.diff(phi, coord) - gamma_h)
    return result

def splitting_projectors(theta):
    """ Projectors on VY = V_Theta Y + gamma_Theta(V Theta), in the basis (d_tau, d_1, ..., d_m).
    Returns (horizontal, vertical) sympy matrices.
    """
    space = theta.space
    size = space.m + 1
    lift = sp.zeros(size, size)
    lift[0, 0] = sp.Integer(1)
    for row, field in enumerate(space.fields, start=1):
        lift[row, 0] = theta.A(field, space.n)
    vertical = sp.eye(size) - lift
    return lift, vertical

def check_splitting(theta):
    """ Projectors are idempotent, complementary and sum to the identity
    """
    horizontal, vertical = splitting_projectors(theta)
    size = horizontal.shape[0]
    checks = [horizontal * horizontal - horizontal,
              vertical * vertical - vertical,
              horizontal * vertical,
              vertical * horizontal,
              horizontal + vertical - sp.eye(size)]
    return all(simplify(entry) == 0 for matrix in checks for entry in matrix)

def hamiltonian_connection_check(gamma, omega):
    """ gamma is a Hamiltonian connection iff gamma _| Omega is closed.
    gamma: {coordinate: component} on Pi_Theta (the tau component is normally 1).
    """
    coordinates = set(gamma)
    for key in omega.terms:
        coordinates.update(key)
    contracted = interior_product(gamma, omega)
    closed = exterior_derivative(contracted, coordinates=sorted(coordinates, key=sp.default_sort_key)).is_zero()
    logging.debug("bundles: hamiltonian connection check -> %s", closed)
    return closed
