"""
gravity: parametrized Hilbert-Einstein Lagrangian on reduced metric ansatze

The metric functions of an ansatz are fields of a jet space whose evolution
coordinate is tau; derivatives along tau are total derivatives, so curvature
expressions come out in jet coordinates d(a, tau), d(a, tau, tau).
The second order Lagrangian r*sqrt|det g| is reduced to first order by
subtracting a total tau-derivative, then Legendre transformed.
"""

import collections
import logging

import sympy as sp

from . import errors
from .evolve import OdeSystem, integrate, monitor_energy, require_drift
from .hamilton import LagrangianModel, legendre, phase_space
from .jetcalc import total_derivative
from .symexpr import Kind, differentiate, eval_numeric, simplify, substitute, to_text

SIGNATURE = "(-,+,+,+)"
VOLUME_CONVENTION = "sqrt(|det g|)"

class MetricAnsatz(object):
    """ Metric components g_{mu nu} over the metric coordinates `coords`.
    Metric functions (the fields of `space`) depend on tau only.
    """
    def __init__(self, name, space, coords, components, signature=SIGNATURE):
        self.name = name
        self.space = space
        self.coords = list(coords)
        self.metric = sp.Matrix(components).applyfunc(simplify)
        self.signature = signature
        size = len(self.coords)
        if self.metric.shape != (size, size):
            raise errors.DerivationError("Metric of shape %s for %d coordinates" % (self.metric.shape, size))
        if any(simplify(entry) != 0 for entry in self.metric - self.metric.T):
            raise errors.DerivationError("Metric %s is not symmetric" % name)
        if self.is_diagonal():
            for j in range(size):
                if self.metric[j, j] == 0:
                    raise errors.SingularMetric("Diagonal component g_%d%d of %s is zero" % (j, j, name))
        self.determinant = simplify(self.metric.det())
        if self.determinant == 0:
            raise errors.SingularMetric("Metric %s is singular" % name)
        if self.is_diagonal():
            self.inverse = sp.diag(*[1 / self.metric[j, j] for j in range(size)])
        else:
            self.inverse = self.metric.inv().applyfunc(simplify)

    @property
    def dimension(self):
        return len(self.coords)

    @property
    def fields(self):
        return self.space.fields

    def is_diagonal(self):
        return self.metric.is_diagonal()

    def derivative(self, expr, coord):
        if coord == self.space.line:
            return total_derivative(self.space, expr, self.space.line)
        return simplify(sp.diff(expr, coord))

    def volume(self):
        return simplify(sp.sqrt(sp.Abs(self.determinant)))

    def text(self, expr):
        return to_text(expr, self.space.table)


def minkowski():
    space = phase_space(["x1", "x2", "x3"], [])
    return MetricAnsatz("minkowski", space, [space.line] + space.base, sp.diag(-1, 1, 1, 1))

def sphere2():
    """ 2-sphere of constant radius a in coordinates (theta, phi)
    """
    space = phase_space(["theta", "phi"], [], parameters=["a"], assumptions={"a": {"positive": True}})
    theta = space.base[0]
    a = space.table["a"]
    return MetricAnsatz("sphere2", space, space.base, sp.diag(a**2, a**2 * sp.sin(theta)**2), signature="(+,+)")

def frw():
    """ Flat FRW with scale factor a(tau), tau playing the time coordinate
    """
    space = phase_space(["x1", "x2", "x3"], ["a"], assumptions={"a": {"positive": True}})
    a = space.fields[0]
    return MetricAnsatz("frw", space, [space.line] + space.base, sp.diag(-1, a**2, a**2, a**2))

def bianchi1():
    """ Diagonal Bianchi I with scale factors a1, a2, a3 of tau
    """
    names = ["a1", "a2", "a3"]
    space = phase_space(["x1", "x2", "x3"], names, assumptions=dict((n, {"positive": True}) for n in names))
    scales = [f**2 for f in space.fields]
    return MetricAnsatz("bianchi1", space, [space.line] + space.base, sp.diag(-1, *scales))

ANSATZE = collections.OrderedDict([("minkowski", minkowski),
                                   ("sphere2", sphere2),
                                   ("frw", frw),
                                   ("bianchi1", bianchi1)])

def make_ansatz(name):
    factory = ANSATZE.get(name)
    if factory is None:
        raise errors.UsageError("Unknown ansatz '%s'; choose from %s" % (name, ", ".join(ANSATZE)))
    return factory()


def christoffel(g):
    """ Gamma[l][m][n] = 1/2 g^{lr} (d_m g_{rn} + d_n g_{rm} - d_r g_{mn})
    """
    size = g.dimension
    partial = [[[g.derivative(g.metric[i, j], g.coords[k]) for k in range(size)]
                for j in range(size)] for i in range(size)]
    gamma = [[[sp.Integer(0)] * size for m in range(size)] for l in range(size)]
    for l in range(size):
        for m in range(size):
            for n in range(m, size):
                value = sum(g.inverse[l, r] * (partial[r][n][m] + partial[r][m][n] - partial[m][n][r])
                            for r in range(size)) / 2
                gamma[l][m][n] = gamma[l][n][m] = simplify(value)
    return gamma

def ricci(g, gamma=None):
    """ R_{mn} = d_l G^l_{mn} - d_n G^l_{ml} + G^l_{lr} G^r_{mn} - G^l_{nr} G^r_{ml}
    """
    gamma = gamma if gamma is not None else christoffel(g)
    size = g.dimension
    result = sp.zeros(size, size)
    for m in range(size):
        for n in range(size):
            value = sp.Integer(0)
            for l in range(size):
                value += g.derivative(gamma[l][m][n], g.coords[l]) - g.derivative(gamma[l][m][l], g.coords[n])
                for r in range(size):
                    value += gamma[l][l][r] * gamma[r][m][n] - gamma[l][n][r] * gamma[r][m][l]
            result[m, n] = simplify(value)
    return result

def scalar_curvature(g, ricci_tensor=None):
    ricci_tensor = ricci_tensor if ricci_tensor is not None else ricci(g)
    size = g.dimension
    return simplify(sum(g.inverse[m, n] * ricci_tensor[m, n] for m in range(size) for n in range(size)))

def einstein_tensor(g, gamma=None):
    gamma = gamma if gamma is not None else christoffel(g)
    ricci_tensor = ricci(g, gamma)
    curvature = scalar_curvature(g, ricci_tensor)
    return (ricci_tensor - g.metric * curvature / 2).applyfunc(simplify)

def einstein_divergence(g):
    """ nabla^m G_{mn} for each n; identically zero by the contracted Bianchi identity
    """
    gamma = christoffel(g)
    einstein = einstein_tensor(g, gamma)
    size = g.dimension
    result = []
    for n in range(size):
        value = sp.Integer(0)
        for m in range(size):
            for a in range(size):
                if g.inverse[m, a] == 0:
                    continue
                covariant = g.derivative(einstein[m, n], g.coords[a])
                for l in range(size):
                    covariant -= gamma[l][a][m] * einstein[l, n] + gamma[l][a][n] * einstein[m, l]
                value += g.inverse[m, a] * covariant
        result.append(simplify(value))
    return result

def he_lagrangian(g):
    """ L_HE = r sqrt|det g|
    """
    return simplify(scalar_curvature(g) * g.volume())


ReducedOrder = collections.namedtuple("ReducedOrder", "lagrangian boundary first_order coefficients")

def reduce_order(space, lagrangian):
    """ For L = c_k(q, tau) qddot^k + rest, subtract D_tau F with F = c_k qdot^k.
    The result is first order; coefficients depending on velocities are rejected.
    """
    lagrangian = simplify(lagrangian)
    accelerations = [space.jet(f, (0,) * space.n + (2,)) for f in space.fields]
    velocities = [space.velocity(f) for f in space.fields]
    coefficients = collections.OrderedDict()
    boundary = sp.Integer(0)
    for field, acceleration, velocity in zip(space.fields, accelerations, velocities):
        coefficient = differentiate(lagrangian, acceleration)
        for symbol in coefficient.free_symbols:
            if space.table.kind(symbol) == Kind.JET:
                raise errors.OrderReductionError("Coefficient of %s depends on %s"
                                                 % (to_text(acceleration, space.table), to_text(symbol, space.table)))
        coefficients[field] = coefficient
        boundary += coefficient * velocity
    boundary = simplify(boundary)
    first_order = simplify(lagrangian - total_derivative(space, boundary, space.line))
    for acceleration in accelerations:
        if acceleration in first_order.free_symbols:
            raise errors.OrderReductionError("Lagrangian is not linear in %s" % to_text(acceleration, space.table))
    return ReducedOrder(lagrangian, boundary, first_order, coefficients)

def formal_gravity_hamiltonian(g):
    """ L_HE, order reduction, Legendre map. The returned system carries the boundary
    term F (discarded as D_tau F) and the reduction in `notes`.
    """
    if not g.fields:
        raise errors.DegenerateLegendre("Ansatz %s has no dynamical metric functions" % g.name)
    reduction = reduce_order(g.space, he_lagrangian(g))
    logging.info("gravity: %s reduced Lagrangian %s", g.name, g.text(reduction.first_order))
    model = LagrangianModel(g.space, reduction.first_order, name=g.name)
    system = legendre(model)
    system.notes.append("L_HE = %s" % g.text(reduction.lagrangian))
    system.notes.append("boundary term d(F, tau) with F = %s" % g.text(reduction.boundary))
    system.notes.append("volume %s, signature %s" % (VOLUME_CONVENTION, g.signature))
    system.reduction = reduction
    return system

def initial_state(system, positions, rates):
    """ State vector (q, p) from metric function values and their tau-rates
    """
    env = {}
    for field in system.fields:
        env[field] = float(positions[field.name])
        env[system.space.velocity(field)] = float(rates[field.name])
    momenta = [eval_numeric(system.momentum_relations[p], env) for p in system.momenta]
    return [env[f] for f in system.fields] + momenta

def check_energy_conservation(system, initial, span, method="midpoint", step=1.0e-4, tolerance=1.0e-6, stride=1):
    """ Integrate and require relative drift of the formal energy below tolerance
    """
    ode = OdeSystem.from_hamiltonian(system)
    trajectory = integrate(ode, initial, span[0], span[1], method=method, step=step, stride=stride)
    report = require_drift(monitor_energy(trajectory, ode), tolerance)
    logging.info("gravity: %s energy %.17g drift %.3g", system.name, report.initial, report.max_rel_drift)
    return trajectory, report

def gravity_report(g, system):
    text = g.text
    reduction = system.reduction
    doc = collections.OrderedDict()
    doc["ansatz"] = g.name
    doc["signature"] = g.signature
    doc["volume"] = VOLUME_CONVENTION
    doc["metric"] = [text(g.metric[j, j]) for j in range(g.dimension)] if g.is_diagonal() else \
        [[text(e) for e in row] for row in g.metric.tolist()]
    doc["lagrangian"] = text(reduction.lagrangian)
    doc["boundary"] = text(reduction.boundary)
    doc["reduced"] = text(reduction.first_order)
    doc["momenta"] = collections.OrderedDict((p.name, text(rel)) for p, rel in system.momentum_relations.items())
    doc["hamiltonian"] = text(system.hamiltonian)
    doc["monitor"] = text(system.monitor)
    return doc
