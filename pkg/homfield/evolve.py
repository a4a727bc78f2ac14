"""
evolve: fixed-step integration of the formal evolution equations in tau

Right-hand sides are compiled once from the symbolic equations; the loop then
works on numpy state vectors. Two methods: classical rk4 and the implicit
midpoint rule (symplectic, solved by fixed-point iteration).
"""

import collections
import csv
import json
import logging
import math

import numpy as np
import sympy as sp

from . import errors
from .hamilton import HamiltonianSystem, hamilton_equations
from .jetcalc import euler_lagrange
from .symexpr import Kind, compile_numeric, differentiate, simplify, substitute

METHODS = {"rk4": "rk4", "midpoint": "midpoint", "implicit-midpoint": "midpoint"}

MIDPOINT_TOLERANCE = 1.0e-13
MIDPOINT_MAX_ITERATIONS = 50

def _bind_parameters(space, parameters):
    bindings = {}
    for key, value in (parameters or {}).items():
        symbol = space.table[key] if isinstance(key, str) else key
        if isinstance(value, sp.Basic):
            bindings[symbol] = value
        elif isinstance(value, int):
            bindings[symbol] = sp.Integer(value)
        else:
            bindings[symbol] = sp.Float(value)
    return bindings

class OdeSystem(object):
    """ State symbols, compiled right-hand sides, and the compiled energy and monitor
    (partial_tau H) when a Hamiltonian is known.
    The independent variable s maps to tau = pivot + direction*(s - pivot).
    """
    def __init__(self, line, states, rhs, energy=None, monitor=None, direction=1, pivot=0.0, name=""):
        if len(states) != len(rhs):
            raise errors.DerivationError("%d right-hand sides for %d states" % (len(rhs), len(states)))
        self.line = line
        self.states = list(states)
        self.names = [s.name for s in self.states]
        self.rhs_exprs = [simplify(e) for e in rhs]
        self.energy_expr = simplify(energy) if energy is not None else None
        self.monitor_expr = simplify(monitor) if monitor is not None else None
        self.direction = direction
        self.pivot = float(pivot)
        self.name = name
        arguments = [line] + self.states
        self._rhs = compile_numeric(self.rhs_exprs, arguments)
        self._energy = compile_numeric([self.energy_expr], arguments) if energy is not None else None
        self._monitor = compile_numeric([self.monitor_expr], arguments) if monitor is not None else None
        used = set().union(*[e.free_symbols for e in self.rhs_exprs]) if self.rhs_exprs else set()
        self.explicit_tau = line in used

    @property
    def dimension(self):
        return len(self.states)

    @classmethod
    def from_hamiltonian(cls, system, parameters=None):
        """ ydot = dH/dp, pdot = -dH/dy with parameters bound to numbers
        """
        if not system.is_pointwise():
            raise errors.DerivationError("Hamiltonian depends on spatial jets; fix the spatial modes first")
        values = dict(system.parameters)
        values.update(parameters or {})
        bindings = _bind_parameters(system.space, values)
        evolution = hamilton_equations(system)
        rhs = [substitute(expr, bindings) for lhs, expr in evolution.equations]
        return cls(system.space.line, system.state_symbols(), rhs,
                   energy=substitute(system.hamiltonian, bindings),
                   monitor=substitute(evolution.monitor, bindings), name=system.name)

    @classmethod
    def from_lagrangian(cls, model, parameters=None):
        """ First order system in (y, ydot) from the Euler-Lagrange equations solved for yddot.
        The energy is ydot dL/dydot - L, the monitor -partial_tau L.
        """
        space = model.space
        for symbol in model.lagrangian.free_symbols:
            if space.table.kind(symbol) == Kind.JET and space.multi_index(symbol).order():
                raise errors.DerivationError("Lagrangian depends on spatial jets; fix the spatial modes first")
        values = dict(model.parameters)
        values.update(parameters or {})
        bindings = _bind_parameters(space, values)
        velocities = model.velocities()
        accelerations = [space.jet(f, (0,) * space.n + (2,)) for f in space.fields]
        equations = [euler_lagrange(space, model.lagrangian, f) for f in space.fields]
        size = len(accelerations)
        matrix = sp.Matrix(size, size, lambda i, j: differentiate(equations[i], accelerations[j]))
        if simplify(matrix.det()) == 0:
            raise errors.DegenerateLegendre("Euler-Lagrange equations cannot be solved for accelerations")
        offsets = sp.Matrix([substitute(e, dict((a, 0) for a in accelerations)) for e in equations])
        solved = matrix.LUsolve(-offsets)
        rhs = list(velocities) + [substitute(a, bindings) for a in solved]
        energy = sum(v * differentiate(model.lagrangian, v) for v in velocities) - model.lagrangian
        monitor = -sp.diff(model.lagrangian, space.line)
        return cls(space.line, space.fields + velocities, rhs,
                   energy=substitute(energy, bindings), monitor=substitute(monitor, bindings), name=model.name)

    def reversed(self, pivot):
        """ Same equations run backwards: s in [pivot, ...] covers tau in [..., pivot]
        """
        return OdeSystem(self.line, self.states, self.rhs_exprs, energy=self.energy_expr,
                         monitor=self.monitor_expr, direction=-self.direction, pivot=pivot, name=self.name)

    def tau(self, s):
        return self.pivot + self.direction * (s - self.pivot)

    def _call(self, func, s, state):
        try:
            values = func(self.tau(s), *state)
        except (ValueError, ZeroDivisionError, OverflowError, TypeError) as excp:
            raise errors.NonFiniteState("Evaluation failed at tau=%g: %s" % (self.tau(s), excp))
        try:
            return np.array(values, dtype=float)
        except TypeError as excp:
            raise errors.NonFiniteState("Complex value at tau=%g: %s" % (self.tau(s), excp))

    def rhs(self, s, state):
        return self.direction * self._call(self._rhs, s, state)

    def energy(self, s, state):
        if self._energy is None:
            return float("nan")
        return float(self._call(self._energy, s, state)[0])

    def monitor(self, s, state):
        """ dH/d(s) predicted by partial_tau H
        """
        if self._monitor is None:
            return float("nan")
        return self.direction * float(self._call(self._monitor, s, state)[0])


class Trajectory(object):
    """ Sampled solution: taus (k,), states (k, d), energies (k,)
    """
    def __init__(self, names, taus, states, energies, method, step, steps, stride):
        self.names = list(names)
        self.taus = np.asarray(taus, dtype=float)
        self.states = np.asarray(states, dtype=float)
        self.energies = np.asarray(energies, dtype=float)
        self.method = method
        self.step = step
        self.steps = steps
        self.stride = stride

    def __len__(self):
        return len(self.taus)

    @property
    def final(self):
        return self.states[-1]

    def column(self, name):
        return self.states[:, self.names.index(name)]

    def metadata(self):
        return collections.OrderedDict([("method", self.method), ("step", self.step),
                                        ("steps", self.steps), ("stride", self.stride),
                                        ("samples", len(self))])

def _rk4_step(system, s, state, h):
    k1 = system.rhs(s, state)
    k2 = system.rhs(s + h/2, state + h/2 * k1)
    k3 = system.rhs(s + h/2, state + h/2 * k2)
    k4 = system.rhs(s + h, state + h * k3)
    return state + h/6 * (k1 + 2*k2 + 2*k3 + k4)

def _midpoint_step(system, s, state, h):
    guess = state + h * system.rhs(s, state)
    for iteration in range(MIDPOINT_MAX_ITERATIONS):
        new = state + h * system.rhs(s + h/2, (state + guess) / 2)
        change = np.max(np.abs(new - guess)) if len(new) else 0.0
        guess = new
        if not np.all(np.isfinite(guess)):
            break
        if change <= MIDPOINT_TOLERANCE * max(1.0, np.max(np.abs(guess))):
            return guess
    logging.warning("evolve: implicit midpoint iteration did not converge at tau=%g", system.tau(s))
    raise errors.FixedPointDivergence("Implicit midpoint iteration did not converge in %d iterations at tau=%g"
                                      % (MIDPOINT_MAX_ITERATIONS, system.tau(s)))

STEPPERS = {"rk4": _rk4_step, "midpoint": _midpoint_step}

def step_count(tau0, tau1, step):
    """ N = round(span/step), at least one step
    """
    return max(1, int(round((tau1 - tau0) / step)))

def integrate(system, initial, tau0, tau1, method="rk4", step=1.0e-3, stride=1):
    """ Integrate from tau0 to tau1 with N = round(span/step) steps of size span/N.
    Samples every `stride` steps; the final state is always sampled.
    """
    if method not in METHODS:
        raise errors.UsageError("Unknown method '%s'; use rk4 or midpoint" % method)
    if not step > 0:
        raise errors.UsageError("Step must be positive: %s" % step)
    if not tau1 > tau0:
        raise errors.UsageError("Empty integration span [%s, %s]" % (tau0, tau1))
    if stride < 1:
        raise errors.UsageError("Stride must be >= 1: %s" % stride)
    method = METHODS[method]
    stepper = STEPPERS[method]
    state = np.array(initial, dtype=float)
    if state.shape != (system.dimension,):
        raise errors.UsageError("Initial state has %d entries, system has %d states"
                                % (state.size, system.dimension))
    steps = step_count(tau0, tau1, step)
    h = (tau1 - tau0) / steps
    logging.info("evolve: %s %s steps=%d h=%.6g tau=[%g, %g]", system.name or "system", method, steps, h, tau0, tau1)
    taus = [tau0]
    states = [state.copy()]
    energies = [system.energy(tau0, state)]
    for n in range(1, steps + 1):
        s = tau0 + (n - 1) * h
        state = stepper(system, s, state, h)
        if not np.all(np.isfinite(state)):
            raise errors.NonFiniteState("Non-finite state at tau=%g" % system.tau(tau0 + n * h))
        if n % stride == 0 or n == steps:
            s_new = tau0 + n * h
            taus.append(s_new)
            states.append(state.copy())
            energies.append(system.energy(s_new, state))
    return Trajectory(system.names, taus, states, energies, method, h, steps, stride)


class EnergyReport(collections.namedtuple("EnergyReport",
                                          "initial max_abs_drift max_rel_drift max_rate_error monotone samples")):
    """ Conservation metrics of a trajectory: drift of H and the residual of dH/dtau = partial_tau H
    """
    __slots__ = ()

    def to_dict(self):
        return collections.OrderedDict((k, (bool(v) if k == "monotone" else v)) for k, v in self._asdict().items())

def monitor_energy(trajectory, system):
    """ Drift of H from its initial value (absolute and relative) and the largest deviation
    of the central difference of H from the predicted rate partial_tau H.
    Relative drift is taken against |H(tau0)|, or equals the absolute drift when H(tau0) = 0.
    """
    if isinstance(system, HamiltonianSystem):
        system = OdeSystem.from_hamiltonian(system)
    energies = trajectory.energies
    if not len(energies) or np.any(np.isnan(energies)):
        raise errors.NumericError("Trajectory carries no energy values")
    initial = float(energies[0])
    drift = np.abs(energies - initial)
    max_abs = float(np.max(drift))
    max_rel = max_abs / abs(initial) if initial != 0 else max_abs
    rate_error = 0.0
    taus = trajectory.taus
    for k in range(1, len(taus) - 1):
        difference = (energies[k+1] - energies[k-1]) / (taus[k+1] - taus[k-1])
        predicted = system.monitor(taus[k], trajectory.states[k])
        rate_error = max(rate_error, abs(difference - predicted))
    increments = np.diff(energies)
    monotone = bool(np.all(increments >= 0) or np.all(increments <= 0))
    return EnergyReport(initial, max_abs, float(max_rel), float(rate_error), monotone, len(taus))

def require_drift(report, tolerance):
    if report.max_rel_drift > tolerance:
        logging.warning("evolve: relative energy drift %.3g exceeds %.3g", report.max_rel_drift, tolerance)
        raise errors.EnergyDriftError("Relative energy drift %.3g exceeds tolerance %.3g"
                                      % (report.max_rel_drift, tolerance))
    return report

def observed_order(errors_by_step, ratio=2.0):
    """ log(e_k/e_{k+1})/log(ratio) for errors at successively divided steps
    """
    orders = []
    for coarse, fine in zip(errors_by_step, errors_by_step[1:]):
        if coarse <= 0 or fine <= 0:
            orders.append(float("inf"))
        else:
            orders.append(math.log(coarse / fine) / math.log(ratio))
    return orders


def write_csv(trajectory, stream):
    """ Header tau,<states>,H; values with 17 significant digits
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["tau"] + trajectory.names + ["H"])
    for tau, state, energy in zip(trajectory.taus, trajectory.states, trajectory.energies):
        writer.writerow(["%.17g" % value for value in [tau] + list(state) + [energy]])

def write_json(trajectory, stream, report=None):
    doc = collections.OrderedDict()
    doc["metadata"] = trajectory.metadata()
    doc["columns"] = ["tau"] + trajectory.names + ["H"]
    doc["rows"] = [[float(tau)] + [float(v) for v in state] + [float(energy)]
                   for tau, state, energy in zip(trajectory.taus, trajectory.states, trajectory.energies)]
    if report is not None:
        doc["energy"] = report.to_dict()
    json.dump(doc, stream, indent=1)
    stream.write("\n")
