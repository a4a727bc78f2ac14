"""
hamilton: homogeneous Hamiltonian formalism

Legendre map to a formal Hamiltonian H(x, tau, y, p), the covariant formal
Hamilton equations along the line coordinate tau
    dy/dtau = dH/dp,  dp/dtau = -dH/dy,  dH/dtau = partial_tau H (monitor),
the Liouville, polysymplectic and Hamiltonian forms, and the reduction along a
gauge section tau = h(x) to the Hamilton-De Donder equations.
"""

import collections
import logging
import warnings

import sympy as sp

from . import errors
from .about import version
from .bundles import ConnectionTheta, hamiltonian_connection_check, is_reducible
from .jetcalc import (DifferentialForm, JetSpace, euler_lagrange, exterior_derivative, interior_product,
                      prolong, total_derivative, wedge)
from .symexpr import Kind, differentiate, simplify, substitute, to_text

MOMENTUM_PREFIX = "p_"

def phase_space(coords, fields, line="tau", order=2, parameters=(), assumptions=None):
    """ Jet space with a conjugate momentum p_<field> declared for every field
    """
    return JetSpace(coords, fields, line=line, order=order, parameters=parameters,
                    momenta=[(MOMENTUM_PREFIX + name, name) for name in fields],
                    assumptions=assumptions)

def momentum_of(space, field):
    for momentum in space.momenta:
        if space.table.info(momentum).field == field.name:
            return momentum
    raise errors.DerivationError("No momentum declared for field %s" % field)


class LagrangianModel(object):
    """ Lagrangian L(x, tau, y, ydot, spatial jets) on a phase space
    """
    def __init__(self, space, lagrangian, name="", parameters=None):
        self.space = space
        self.name = name
        self.parameters = dict(parameters or {})
        self.lagrangian = simplify(lagrangian)
        for symbol in self.lagrangian.free_symbols:
            kind = space.table.kind(symbol)
            if kind == Kind.MOMENTUM:
                raise errors.DerivationError("Lagrangian contains momentum %s" % symbol)
            if kind == Kind.JET and space.multi_index(symbol).tau > 1:
                raise errors.JetOrderError("Lagrangian uses tau-order %d jet %s"
                                           % (space.multi_index(symbol).tau, symbol))

    def velocities(self):
        return [self.space.velocity(field) for field in self.space.fields]


EvolutionSystem = collections.namedtuple("EvolutionSystem", "equations monitor")

class HamiltonianSystem(object):
    """ Fields, momenta, formal Hamiltonian and the derived evolution equations in tau.
    The derived expressions are computed once at construction.
    """
    def __init__(self, space, hamiltonian, name="", lagrangian=None, momentum_relations=None,
                 velocity_solution=None, parameters=None, notes=()):
        self.space = space
        self.name = name
        self.hamiltonian = simplify(hamiltonian)
        self.lagrangian = lagrangian
        self.momentum_relations = collections.OrderedDict(momentum_relations or {})
        self.velocity_solution = collections.OrderedDict(velocity_solution or {})
        self.parameters = dict(parameters or {})
        self.notes = list(notes)
        for symbol in self.hamiltonian.free_symbols:
            if space.table.kind(symbol) == Kind.JET and space.multi_index(symbol).tau:
                raise errors.DerivationError("Hamiltonian may not depend on tau-jets: %s" % symbol)
        self.y_equations = [euler_lagrange(space, self.hamiltonian, momentum) for momentum in self.momenta]
        self.p_equations = [simplify(-euler_lagrange(space, self.hamiltonian, field)) for field in self.fields]
        self.monitor = differentiate(self.hamiltonian, space.line)

    @property
    def fields(self):
        return self.space.fields

    @property
    def momenta(self):
        return [momentum_of(self.space, field) for field in self.space.fields]

    def state_symbols(self):
        return self.fields + self.momenta

    def spatial_directions(self):
        """ Base directions in which the Hamiltonian carries jets
        """
        directions = set()
        for symbol in self.hamiltonian.free_symbols:
            if self.space.table.kind(symbol) == Kind.JET:
                directions.update(j for j, a in enumerate(self.space.multi_index(symbol).entries) if a)
        return sorted(directions)

    def is_pointwise(self):
        return not self.spatial_directions()

    def flow(self):
        """ {y: dy/dtau, p: dp/dtau}
        """
        return collections.OrderedDict(list(zip(self.fields, self.y_equations)) +
                                       list(zip(self.momenta, self.p_equations)))

    def text(self, expr):
        return to_text(expr, self.space.table)


def _solve_affine(relations, unknowns, targets, what):
    """ Solve relations(unknowns) = targets, the relations being affine in the unknowns
    """
    size = len(unknowns)
    jacobian = sp.Matrix(size, size, lambda i, j: differentiate(relations[i], unknowns[j]))
    for entry in jacobian:
        if any(sp.diff(entry, u) != 0 for u in unknowns):
            raise errors.UnsupportedLegendre("%s relations are not affine in %s" % (what, [u.name for u in unknowns]))
    determinant = simplify(jacobian.det())
    if determinant == 0:
        raise errors.DegenerateLegendre("Singular %s Hessian; constrained systems are not supported" % what)
    at_zero = dict((u, sp.Integer(0)) for u in unknowns)
    offsets = sp.Matrix([substitute(r, at_zero) for r in relations])
    solution = jacobian.LUsolve(sp.Matrix(targets) - offsets)
    return collections.OrderedDict((u, simplify(s)) for u, s in zip(unknowns, solution))

def legendre(model):
    """ p_i = dL/dydot^i, velocities eliminated by a linear solve, H = p_i ydot^i - L
    """
    space = model.space
    velocities = model.velocities()
    if not velocities:
        raise errors.DegenerateLegendre("No fields, nothing to transform")
    momenta = [momentum_of(space, field) for field in space.fields]
    relations = [differentiate(model.lagrangian, v) for v in velocities]
    solution = _solve_affine(relations, velocities, momenta, "velocity")
    hamiltonian = substitute(sum(p * v for p, v in zip(momenta, velocities)) - model.lagrangian, solution)
    logging.info("hamilton: Legendre map for %s: H = %s", model.name or "model", hamiltonian)
    return HamiltonianSystem(space, hamiltonian, name=model.name, lagrangian=model.lagrangian,
                             momentum_relations=zip(momenta, relations), velocity_solution=solution,
                             parameters=model.parameters)

def inverse_legendre(system):
    """ Inverse map: ydot = dH/dp solved for p, L = p ydot - H
    """
    space = system.space
    velocities = [space.velocity(field) for field in system.fields]
    relations = [differentiate(system.hamiltonian, p) for p in system.momenta]
    solution = _solve_affine(relations, system.momenta, velocities, "momentum")
    return substitute(sum(p * v for p, v in zip(system.momenta, velocities)) - system.hamiltonian, solution)

def hamilton_equations(system):
    """ ydot^i = dH/dp_i, pdot_i = -dH/dy^i (variational in spatial jets); dH/dtau as monitor
    """
    space = system.space
    equations = []
    for field, rhs in zip(system.fields, system.y_equations):
        equations.append((space.velocity(field), rhs))
    for momentum, rhs in zip(system.momenta, system.p_equations):
        equations.append((space.velocity(momentum), rhs))
    return EvolutionSystem(equations, system.monitor)

def flow_derivative(system, expr):
    """ d/dtau of a point function of (x, tau, y, p) along the Hamilton flow
    """
    expr = sp.sympify(expr)
    result = sp.diff(expr, system.space.line)
    for symbol, rate in system.flow().items():
        result += sp.diff(expr, symbol) * rate
    return simplify(result)

def on_shell(system, expr):
    """ Replace ydot^i and yddot^i by their values along the Hamilton flow
    """
    space = system.space
    first = collections.OrderedDict()
    second = collections.OrderedDict()
    for field, rate in zip(system.fields, system.y_equations):
        first[space.velocity(field)] = rate
        second[space.jet(field, (0,) * space.n + (2,))] = flow_derivative(system, rate)
    bindings = dict(first)
    bindings.update(second)
    return substitute(expr, bindings)

def energy_rate(system):
    """ Total tau-derivative of H along the flow. For pointwise Hamiltonians it reduces to
    partial_tau H: the bracket terms dH/dy dH/dp - dH/dp dH/dy cancel.
    """
    space = system.space
    hamiltonian = system.hamiltonian
    result = sp.diff(hamiltonian, space.line)
    flow = system.flow()
    for symbol in hamiltonian.free_symbols:
        if not space.is_jet_coordinate(symbol):
            continue
        owner = space.field_of(symbol)
        rate = flow.get(owner)
        if rate is None:
            continue
        multi_index = space.multi_index(symbol)
        for direction, count in enumerate(multi_index.entries):
            for j in range(count):
                rate = total_derivative(space, rate, direction)
        result += sp.diff(hamiltonian, symbol) * rate
    return simplify(result)

def hamiltonian_lagrangian(system):
    """ L_H = p_i ydot^i - H
    """
    space = system.space
    return simplify(sum(p * space.velocity(y) for y, p in zip(system.fields, system.momenta)) - system.hamiltonian)


def phase_coordinates(system):
    return system.fields + system.momenta + [system.space.line]

def liouville_form(system):
    """ theta_Y = p_i d^i ^ omega-hat
    """
    space = system.space
    form = DifferentialForm(degree=space.n + 2)
    for field, momentum in zip(system.fields, system.momenta):
        form = form + DifferentialForm.differential(field).wedge(space.volume_form()) * momentum
    return form

def polysymplectic_form(system, reduced=False):
    """ Omega_Y = dp_i ^ d^i ^ omega-hat, or dp_i ^ d^i ^ dtau when reduced
    """
    space = system.space
    tail = DifferentialForm.differential(space.line) if reduced else space.volume_form()
    form = DifferentialForm(degree=tail.degree + 2)
    for field, momentum in zip(system.fields, system.momenta):
        form = form + wedge(DifferentialForm.differential(momentum), DifferentialForm.differential(field), tail)
    return form

def hamiltonian_form(system):
    """ Poincare-Cartan form of L_H: H = p_i d^i - H dtau
    """
    space = system.space
    form = DifferentialForm.differential(space.line) * (-system.hamiltonian)
    for field, momentum in zip(system.fields, system.momenta):
        form = form + DifferentialForm.differential(field) * momentum
    return form

def phase_differential(system, form):
    """ d = d_i d^i + dbar^i dp_i + d_tau dtau, the total differential on the Legendre side
    """
    return exterior_derivative(form, coordinates=phase_coordinates(system))

def hamiltonian_connection(system):
    """ gamma_H = d_tau + dH/dp_i d_i - dH/dy^i dbar^i as {coordinate: component}
    """
    space = system.space
    gamma = collections.OrderedDict([(space.line, sp.Integer(1))])
    for field, momentum in zip(system.fields, system.momenta):
        gamma[field] = differentiate(system.hamiltonian, momentum)
    for field, momentum in zip(system.fields, system.momenta):
        gamma[momentum] = simplify(-differentiate(system.hamiltonian, field))
    return gamma

def check_hamiltonian_connection(system):
    """ gamma_H is Hamiltonian and gamma_H _| Omega_Y == dH
    """
    gamma = hamiltonian_connection(system)
    omega = polysymplectic_form(system, reduced=True)
    closed = hamiltonian_connection_check(gamma, omega)
    matches = interior_product(gamma, omega) == phase_differential(system, hamiltonian_form(system))
    return closed and matches


GaugeEquation = collections.namedtuple("GaugeEquation", "owner direction lhs rhs")

class ReducedSystem(object):
    """ Equations of the system restricted along tau = h(x); lhs are jets d(owner, x^lambda)
    of the restricted section. Where h depends on a direction the field carries jets in,
    rhs jets of the field before restriction appear as their gauge companions d_h(owner, ...).
    """
    def __init__(self, system, h, equations):
        self.system = system
        self.h = h
        self.equations = equations

    def gauged_symbols(self):
        table = self.system.space.table
        found = set()
        for eq in self.equations:
            found.update(s for s in eq.rhs.free_symbols if table.kind(s) == Kind.GAUGED)
        return sorted(found, key=table.sort_key)

    def residuals(self, section=None, unrestricted=None):
        """ lhs - rhs evaluated on a section {field or momentum: expression in x}.
        Given the unrestricted section {field or momentum: expression in (x, tau)} the
        restricted one is derived from it and gauge companions take its jets along tau = h.
        """
        space = self.system.space
        on_h = {space.line: self.h}
        if section is None:
            if unrestricted is None:
                raise errors.UsageError("residuals need a section")
            section = dict((owner, substitute(expr, on_h)) for owner, expr in unrestricted.items())
        values = prolong(space, section, 2)
        gauged = self.gauged_symbols()
        if gauged:
            if unrestricted is None:
                raise errors.DerivationError("Reduced equations use %s; the unrestricted section is needed"
                                             % ", ".join(space.text(s) for s in gauged))
            table = space.table
            order = max(sum(table.info(s).orders) for s in gauged)
            ambient = prolong(space, unrestricted, order)
            for symbol in gauged:
                info = table.info(symbol)
                values[symbol] = substitute(ambient[space.jet(info.field, info.orders)], on_h)
        return [substitute(eq.lhs - eq.rhs, values) for eq in self.equations]

def _gauge_companions(space, expr, moved):
    """ Jets along a direction h depends on differ from those of the restricted section
    """
    table = space.table
    bindings = {}
    for symbol in expr.free_symbols:
        if table.kind(symbol) == Kind.JET and any(table.orders_of(symbol)[j] for j in moved):
            bindings[symbol] = table.gauged(symbol)
    return expr.xreplace(bindings) if bindings else expr

def restrict_to_gauge(system, h, sigma=None, gamma=None, theta=None):
    """ Along tau = h(x) the total derivative is D_lambda + d_lambda h D_tau; D_tau is
    replaced by the Hamilton equations. Rows that reduce to identities are dropped.
    If a Gamma connection is given and h is not one of its integral sections a
    NonIntegralSection warning is issued.
    """
    space = system.space
    h = sp.sympify(h)
    extra = h.free_symbols - set(space.base) - set(space.parameters)
    if extra:
        raise errors.DerivationError("Gauge section must depend on base coordinates only; found %s"
                                     % sorted(s.name for s in extra))
    if gamma is not None and not is_reducible(theta or ConnectionTheta(space), gamma, h):
        message = "Section tau = %s is not an integral section of Gamma" % to_text(h, space.table)
        logging.warning("hamilton: %s", message)
        warnings.warn(message, errors.NonIntegralSection)
    spatial = system.spatial_directions()
    moved = [j for j, coord in enumerate(space.base) if simplify(sp.diff(h, coord)) != 0]
    on_h = {space.line: h}
    equations = []
    owners = list(zip(system.fields, system.y_equations)) + list(zip(system.momenta, system.p_equations))
    for owner, rate in owners:
        for index, coord in enumerate(space.base):
            unit = [0] * (space.n + 1)
            unit[index] = 1
            lhs = space.jet(owner, unit)
            explicit = lhs if index in spatial else sp.Integer(0)
            rhs = substitute(_gauge_companions(space, explicit + sp.diff(h, coord) * rate, moved), on_h)
            if simplify(lhs - rhs) == 0:
                continue
            equations.append(GaugeEquation(owner, index, lhs, rhs))
    reduced = ReducedSystem(system, h, equations)
    if sigma is not None and not reduced.gauged_symbols():
        residuals = reduced.residuals(sigma)
        if any(r != 0 for r in residuals):
            logging.warning("hamilton: section does not solve the reduced equations: %s", residuals)
    return reduced


def equation_report(system, reduced=None):
    """ Structured report: momenta, Hamiltonian, evolution equations, monitor
    """
    text = system.text
    doc = collections.OrderedDict()
    doc["version"] = version
    doc["model"] = system.name
    doc["fields"] = [f.name for f in system.fields]
    doc["momenta"] = collections.OrderedDict((p.name, text(rel)) for p, rel in system.momentum_relations.items())
    doc["velocities"] = collections.OrderedDict((text(v), text(s)) for v, s in system.velocity_solution.items())
    doc["hamiltonian"] = text(system.hamiltonian)
    evolution = hamilton_equations(system)
    doc["equations"] = [collections.OrderedDict([("lhs", text(lhs)), ("rhs", text(rhs))])
                        for lhs, rhs in evolution.equations]
    doc["monitor"] = text(evolution.monitor)
    if not system.is_pointwise():
        doc["notes"] = ["pdot uses the variational derivative in directions %s"
                        % ", ".join(system.space.base[j].name for j in system.spatial_directions())]
    if system.notes:
        doc.setdefault("notes", []).extend(system.notes)
    if reduced is not None:
        doc["gauge"] = text(reduced.h)
        doc["reduced"] = [collections.OrderedDict([("lhs", text(eq.lhs)), ("rhs", text(eq.rhs))])
                          for eq in reduced.equations]
    return doc

def format_report(doc):
    lines = ["# homfield %s" % doc.get("version", version)]
    lines.append("model %s" % doc.get("model", ""))
    for name, relation in doc.get("momenta", {}).items():
        lines.append("momentum %s = %s" % (name, relation))
    for velocity, value in doc.get("velocities", {}).items():
        lines.append("velocity %s = %s" % (velocity, value))
    lines.append("hamiltonian H = %s" % doc["hamiltonian"])
    for eq in doc.get("equations", []):
        lines.append("equation %s = %s" % (eq["lhs"], eq["rhs"]))
    lines.append("monitor d(H, tau) = %s" % doc["monitor"])
    if "gauge" in doc:
        lines.append("gauge tau = %s" % doc["gauge"])
        for eq in doc.get("reduced", []):
            lines.append("reduced %s = %s" % (eq["lhs"], eq["rhs"]))
    for note in doc.get("notes", []):
        lines.append("note %s" % note)
    return "\n".join(lines) + "\n"
