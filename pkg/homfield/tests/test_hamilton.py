import unittest

import sympy as sp

from homfield import errors
from homfield.bundles import ConnectionGamma, hamiltonian_connection_check
from homfield.hamilton import (HamiltonianSystem, LagrangianModel, check_hamiltonian_connection, energy_rate,
                               equation_report, format_report, hamilton_equations, hamiltonian_connection,
                               hamiltonian_form, hamiltonian_lagrangian, inverse_legendre, legendre, liouville_form,
                               momentum_of, on_shell, phase_differential, phase_space, polysymplectic_form,
                               restrict_to_gauge)
from homfield.jetcalc import DifferentialForm, euler_lagrange, exterior_derivative, total_derivative
from homfield.symexpr import parse_expression

from . import BaseTestCase


def point_system(hamiltonian_of, fields=("y",)):
    """ System on a space without base coordinates; hamiltonian_of(tau, fields, momenta)
    """
    space = phase_space([], list(fields))
    momenta = [momentum_of(space, field) for field in space.fields]
    return HamiltonianSystem(space, hamiltonian_of(space.line, space.fields, momenta))


class LegendreTest(BaseTestCase):
    def setUp(self):
        self.space = phase_space([], ["y"])
        self.y, = self.space.fields
        self.ydot = self.space.velocity(self.y)
        self.p = momentum_of(self.space, self.y)

    def test_oscillator(self):
        system = legendre(LagrangianModel(self.space, self.ydot**2/2 - self.y**2/2, name="oscillator"))
        self.assertExprEqual(system.hamiltonian, self.p**2/2 + self.y**2/2)
        self.assertExprEqual(system.momentum_relations[self.p], self.ydot)
        self.assertExprEqual(system.velocity_solution[self.ydot], self.p)
        equations = hamilton_equations(system).equations
        self.assertEqual([lhs for lhs, rhs in equations], [self.ydot, self.space.velocity(self.p)])
        self.assertExprEqual(equations[1][1], -self.y)
        self.assertExprZero(system.monitor)

    def test_euler_lagrange_matches_hamilton(self):
        y, ydot, tau = self.y, self.ydot, self.space.line
        for lagrangian in [ydot**2/2, ydot**2/2 - y**2/2, ydot**2/2 - y**4/4, (1 + tau)*ydot**2/2]:
            system = legendre(LagrangianModel(self.space, lagrangian))
            self.assertExprZero(on_shell(system, euler_lagrange(self.space, lagrangian, y)),
                                "Euler-Lagrange does not vanish on the flow of %s" % lagrangian)

    def test_inverse(self):
        y, ydot, tau = self.y, self.ydot, self.space.line
        for lagrangian in [ydot**2/2 - y**2/2, (1 + tau)*ydot**2/2 + y*ydot]:
            system = legendre(LagrangianModel(self.space, lagrangian))
            self.assertExprEqual(inverse_legendre(system), lagrangian)

    def test_degenerate(self):
        self.assertRaises(errors.DegenerateLegendre, legendre, LagrangianModel(self.space, self.y*self.ydot))
        self.assertRaises(errors.DegenerateLegendre, legendre, LagrangianModel(phase_space([], []), 1))

    def test_unsupported(self):
        self.assertRaises(errors.UnsupportedLegendre, legendre, LagrangianModel(self.space, self.ydot**4))

    def test_jet_order(self):
        yddot = self.space.jet(self.y, (2,))
        self.assertRaises(errors.JetOrderError, LagrangianModel, self.space, yddot**2)
        self.assertRaises(errors.DerivationError, LagrangianModel, self.space, self.p*self.ydot)


class FormsTest(BaseTestCase):
    def test_liouville_differential(self):
        for fields in (["y"], ["y1", "y2"], ["y1", "y2", "y3"]):
            space = phase_space(["x"], fields)
            momenta = [momentum_of(space, field) for field in space.fields]
            system = HamiltonianSystem(space, sum(p**2 for p in momenta)/2)
            omega = polysymplectic_form(system)
            self.assertEqual(exterior_derivative(liouville_form(system)), omega)
            self.assertEqual(omega.degree, 4)
            self.assertTrue(exterior_derivative(omega).is_zero())

    def test_hamiltonian_connections(self):
        hamiltonians = [
            lambda tau, ys, ps: ps[0]**2/2 + ys[0]**2/2,
            lambda tau, ys, ps: ps[0]**2/2 + ys[0]**4/4,
            lambda tau, ys, ps: ps[0]**2/(2*(1 + tau)),
            lambda tau, ys, ps: ps[0]**2*(1 + tau)/2 + ys[0]**2/2,
            lambda tau, ys, ps: (ps[0]**2 + ps[1]**2)/2 + ys[0]*ys[1],
        ]
        for j, hamiltonian_of in enumerate(hamiltonians):
            fields = ("y1", "y2") if j == 4 else ("y",)
            system = point_system(hamiltonian_of, fields)
            self.assertTrue(check_hamiltonian_connection(system))

    def test_perturbed_connection_is_not_hamiltonian(self):
        system = point_system(lambda tau, ys, ps: ps[0]**2/2 + ys[0]**2/2)
        p, = system.momenta
        omega = polysymplectic_form(system, reduced=True)
        gamma = hamiltonian_connection(system)
        self.assertTrue(hamiltonian_connection_check(gamma, omega))
        gamma[p] = gamma[p] + p
        self.assertFalse(hamiltonian_connection_check(gamma, omega))

    def test_hamiltonian_lagrangian(self):
        systems = [point_system(lambda tau, ys, ps: ps[0]**2*(1 + tau)/2 + ys[0]**4/4)]
        space = phase_space(["x"], ["phi"])
        phi, = space.fields
        p = momentum_of(space, phi)
        systems.append(HamiltonianSystem(space, p**2/2 + space.jet(phi, (1, 0))**2/2 + phi**3))
        for system in systems:
            space = system.space
            lagrangian = hamiltonian_lagrangian(system)
            for field, momentum, y_rate, p_rate in zip(system.fields, system.momenta,
                                                       system.y_equations, system.p_equations):
                self.assertExprEqual(euler_lagrange(space, lagrangian, momentum), space.velocity(field) - y_rate)
                self.assertExprEqual(euler_lagrange(space, lagrangian, field), p_rate - space.velocity(momentum))

    def test_hamiltonian_form_differential(self):
        system = point_system(lambda tau, ys, ps: ps[0]**2*(1 + tau)/2 + sp.sin(ys[0]))
        dtau = DifferentialForm.differential(system.space.line)
        dh = phase_differential(system, DifferentialForm.scalar(system.hamiltonian))
        self.assertEqual(phase_differential(system, hamiltonian_form(system)),
                         polysymplectic_form(system, reduced=True) - dh.wedge(dtau))

    def test_energy_rate(self):
        for hamiltonian_of in [lambda tau, ys, ps: ps[0]**2*(1 + tau)/2 + ys[0]**2/2,
                               lambda tau, ys, ps: ps[0]**2/2 + tau*ys[0],
                               lambda tau, ys, ps: ps[0]**2/2 + ys[0]**2/2]:
            system = point_system(hamiltonian_of)
            self.assertExprEqual(energy_rate(system), system.monitor)

    def test_energy_rate_with_spatial_jets(self):
        space = phase_space(["x"], ["phi"])
        phi, = space.fields
        p = momentum_of(space, phi)
        phi_x = space.jet(phi, (1, 0))
        system = HamiltonianSystem(space, p**2/2 + phi_x**2/2)
        self.assertFalse(system.is_pointwise())
        self.assertExprEqual(energy_rate(system), total_derivative(space, p*phi_x, "x"))


class GaugeTest(BaseTestCase):
    def mechanics(self, w=None):
        space = phase_space(["t"], ["q"], parameters=["w"])
        q, = space.fields
        w = space.parameters[0] if w is None else w
        qdot = space.velocity(q)
        lagrangian = qdot**2/2 - w**2*q**2/2 + space.line*q
        return legendre(LagrangianModel(space, lagrangian, name="mechanics"))

    def test_mechanics_rows(self):
        system = self.mechanics()
        space = system.space
        t, = space.base
        q, = system.fields
        p, = system.momenta
        w, = space.parameters
        reduced = restrict_to_gauge(system, t, gamma=ConnectionGamma(space, {"t": 1}))
        self.assertEqual(len(reduced.equations), 2)
        first, second = reduced.equations
        self.assertEqual(first.lhs, space.jet(q, (1, 0)))
        self.assertExprEqual(first.rhs, p)
        self.assertEqual(second.lhs, space.jet(p, (1, 0)))
        self.assertExprEqual(second.rhs, t - w**2*q)

    def test_mechanics_solution(self):
        system = self.mechanics(w=1)
        t, = system.space.base
        q, = system.fields
        p, = system.momenta
        reduced = restrict_to_gauge(system, t)
        for residual in reduced.residuals({q: sp.cos(t) + t, p: 1 - sp.sin(t)}):
            self.assertExprZero(residual)
        residuals = reduced.residuals({q: sp.cos(t), p: -sp.sin(t)})
        self.assertFalse(all(residual == 0 for residual in residuals))

    def test_wave(self):
        space = phase_space(["t", "x"], ["phi"])
        phi, = space.fields
        lagrangian = space.velocity(phi)**2/2 - space.jet(phi, (0, 1, 0))**2/2
        system = legendre(LagrangianModel(space, lagrangian, name="wave11"))
        p, = system.momenta
        t = space.base[0]
        reduced = restrict_to_gauge(system, t)
        rows = [(eq.lhs, eq.rhs) for eq in reduced.equations]
        self.assertEqual(len(rows), 2)
        self.assertEqual(rows[0][0], space.jet(phi, (1, 0, 0)))
        self.assertExprEqual(rows[0][1], p)
        self.assertEqual(rows[1][0], space.jet(p, (1, 0, 0)))
        self.assertExprEqual(rows[1][1], space.jet(phi, (0, 2, 0)))

    def test_wave_tilted_section(self):
        space = phase_space(["t", "x"], ["phi"])
        phi, = space.fields
        table = space.table
        t, x = space.base
        tau = space.line
        lagrangian = space.velocity(phi)**2/2 - space.jet(phi, (0, 1, 0))**2/2
        system = legendre(LagrangianModel(space, lagrangian, name="wave11"))
        p, = system.momenta
        reduced = restrict_to_gauge(system, t + x/2)
        rows = [(eq.lhs, eq.rhs) for eq in reduced.equations]
        phi_x = table.gauged(space.jet(phi, (0, 1, 0)))
        phi_xx = table.gauged(space.jet(phi, (0, 2, 0)))
        p_x = table.gauged(space.jet(p, (0, 1, 0)))
        self.assertEqual([lhs for lhs, rhs in rows],
                         [space.jet(phi, (1, 0, 0)), space.jet(phi, (0, 1, 0)),
                          space.jet(p, (1, 0, 0)), space.jet(p, (0, 1, 0))])
        self.assertExprEqual(rows[0][1], p)
        self.assertExprEqual(rows[1][1], phi_x + p/2)
        self.assertExprEqual(rows[2][1], phi_xx)
        self.assertExprEqual(rows[3][1], p_x + phi_xx/2)
        for lhs, rhs in rows:
            self.assertNotIn(lhs, rhs.free_symbols)
            self.assertExprEqual(parse_expression(system.text(rhs), table, gauged=True), rhs)
        self.assertEqual(reduced.gauged_symbols(), sorted([phi_x, phi_xx, p_x], key=table.sort_key))
        travelling = {phi: sp.sin(x - tau), p: -sp.cos(x - tau)}
        for residual in reduced.residuals(unrestricted=travelling):
            self.assertExprZero(residual)
        wrong = {phi: sp.sin(x - tau), p: sp.cos(x - tau)}
        self.assertFalse(all(residual == 0 for residual in reduced.residuals(unrestricted=wrong)))
        self.assertRaises(errors.DerivationError, reduced.residuals, {phi: sp.sin(x/2 - t), p: -sp.cos(x/2 - t)})

    def test_constant_section(self):
        system = self.mechanics()
        space = system.space
        q, = system.fields
        p, = system.momenta
        w, = space.parameters
        for h in (sp.Integer(1), w):
            reduced = restrict_to_gauge(system, h)
            self.assertEqual([eq.lhs for eq in reduced.equations], [space.jet(q, (1, 0)), space.jet(p, (1, 0))])
            self.assertTrue(all(eq.rhs == 0 for eq in reduced.equations))
            self.assertEqual(reduced.gauged_symbols(), [])
            for residual in reduced.residuals({q: sp.Integer(3), p: -w}):
                self.assertExprZero(residual)

    def test_non_integral_section(self):
        system = self.mechanics()
        t, = system.space.base
        with self.assertWarns(errors.NonIntegralSection):
            restrict_to_gauge(system, t, gamma=ConnectionGamma(system.space, {"t": 2}))

    def test_section_depends_on_field(self):
        system = self.mechanics()
        q, = system.fields
        self.assertRaises(errors.DerivationError, restrict_to_gauge, system, q)


class ReportTest(BaseTestCase):
    def test_deterministic(self):
        space = phase_space([], ["y"])
        y, = space.fields
        model = LagrangianModel(space, space.velocity(y)**2/2 - y**2/2, name="oscillator")
        first = format_report(equation_report(legendre(model)))
        second = format_report(equation_report(legendre(model)))
        self.assertEqual(first, second)
        lines = first.splitlines()
        self.assertTrue(lines[0].startswith("# homfield "))
        self.assertEqual(lines[1], "model oscillator")
        self.assertIn("equation d(y, tau) = p_y", lines)
        self.assertIn("monitor d(H, tau) = 0", lines)

    def test_spatial_note(self):
        space = phase_space(["x"], ["phi"])
        phi, = space.fields
        p = momentum_of(space, phi)
        doc = equation_report(HamiltonianSystem(space, p**2/2 + space.jet(phi, (1, 0))**2/2))
        self.assertEqual(doc["notes"], ["pdot uses the variational derivative in directions x"])


if __name__ == "__main__":
    unittest.main()
