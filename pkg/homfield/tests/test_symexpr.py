import random
import unittest

import sympy as sp

from homfield import errors
from homfield.jetcalc import JetSpace
from homfield.symexpr import (Kind, SymbolTable, compile_numeric, differentiate, eval_numeric, is_zero,
                              parse_expression, simplify, substitute, to_text, tokenize)

from . import BaseTestCase


def random_expression(rng, symbols, depth=3):
    """ Polynomial in the symbols, sin, cos, exp and sqrt(u^2 + 1); defined everywhere
    """
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.6:
            return rng.choice(symbols)
        return sp.Rational(rng.randint(-5, 5), rng.randint(1, 4))
    first = random_expression(rng, symbols, depth - 1)
    choice = rng.randint(0, 6)
    if choice == 0:
        return first + random_expression(rng, symbols, depth - 1)
    if choice == 1:
        return first * random_expression(rng, symbols, depth - 1)
    if choice == 2:
        return first**rng.randint(2, 3)
    if choice == 3:
        return sp.sin(first)
    if choice == 4:
        return sp.cos(first)
    if choice == 5:
        return sp.exp(rng.choice(symbols))
    return sp.sqrt(first**2 + 1)

def random_env(rng, symbols):
    return dict((s, rng.uniform(-1.0, 1.0)) for s in symbols)

def raw_value(expr, env):
    symbols = sorted(env, key=sp.default_sort_key)
    return float(sp.lambdify(symbols, expr, modules="math")(*[env[s] for s in symbols]))


class SymbolTableTest(BaseTestCase):
    def setUp(self):
        self.space = JetSpace(["x"], ["y"])
        self.table = self.space.table

    def test_duplicate(self):
        self.assertRaises(errors.DuplicateDeclaration, self.table.declare, "y", Kind.FIELD)

    def test_undeclared(self):
        self.assertRaises(errors.UndeclaredSymbol, self.table.__getitem__, "z")

    def test_jet_names(self):
        jet = self.table.jet("y", (1, 1))
        self.assertEqual(jet.name, "y_x_tau")
        self.assertEqual(self.table.kind(jet), Kind.JET)
        self.assertIs(self.table.jet("y", (1, 1)), jet)
        self.assertIs(self.table.jet("y", (0, 0)), self.table["y"])
        self.assertEqual(self.table.orders_of(jet), (1, 1))
        self.assertEqual(self.table.field_of(jet), self.table["y"])

    def test_jet_errors(self):
        self.assertRaises(errors.JetOrderError, self.table.jet, "y", (1,))
        self.assertRaises(errors.JetOrderError, self.table.jet, "x", (1, 0))
        self.assertRaises(errors.JetOrderError, self.table.jet, "y", (-1, 0))


class SimplifyTest(BaseTestCase):
    def setUp(self):
        self.x, self.y = sp.symbols("x y")

    def test_canonical(self):
        x, y = self.x, self.y
        self.assertEqual(simplify((x + y)**2 - x**2 - 2*x*y), y**2)
        self.assertEqual(simplify(x/y + 1), simplify((x + y)/y))

    def test_idempotent(self):
        x, y = self.x, self.y
        for expr in [(x + 1)**3/(x - y), sp.sin(x)**2 + sp.cos(x)**3, sp.sqrt(x)*x + 1/x]:
            once = simplify(expr)
            self.assertEqual(simplify(once), once)

    def test_trigonometric(self):
        x = self.x
        self.assertEqual(simplify(sp.sin(x)**2 + sp.cos(x)**2), 1)
        self.assertTrue(is_zero(sp.cos(x)**4 - (1 - sp.sin(x)**2)**2))

    def test_differentiate(self):
        x, y = self.x, self.y
        self.assertEqual(differentiate(x**2*y, x), 2*x*y)


class SubstituteTest(BaseTestCase):
    def setUp(self):
        self.x, self.y = sp.symbols("x y")

    def test_simultaneous(self):
        x, y = self.x, self.y
        self.assertEqual(substitute(x - 2*y, {x: y, y: x}), y - 2*x)

    def test_cyclic(self):
        x = self.x
        self.assertRaises(errors.CyclicBinding, substitute, x**2, {x: x + 1})

    def test_identity_binding(self):
        x = self.x
        self.assertEqual(substitute(x**2, {x: x}), x**2)


class NumericTest(BaseTestCase):
    def setUp(self):
        self.x = sp.Symbol("x")

    def test_eval(self):
        x = self.x
        self.assertAlmostEqual(eval_numeric(sp.sqrt(x) + sp.exp(x), {x: 4.0}), 2.0 + 54.598150033144236)

    def test_domain(self):
        x = self.x
        self.assertRaises(errors.DomainError, eval_numeric, sp.sqrt(x), {x: -1.0})
        self.assertRaises(errors.DomainError, eval_numeric, sp.log(x), {x: 0.0})
        self.assertRaises(errors.DomainError, eval_numeric, 1/x, {x: 0.0})

    def test_unbound(self):
        x, y = self.x, sp.Symbol("y")
        self.assertRaises(errors.UnboundSymbol, eval_numeric, x + y, {x: 1.0})
        self.assertRaises(errors.UnboundSymbol, compile_numeric, [x + y], [x])

    def test_compile(self):
        x, y = self.x, sp.Symbol("y")
        func = compile_numeric([x*y, x + 1], [x, y])
        self.assertEqual(list(func(2.0, 3.0)), [6.0, 3.0])


class PropertyTest(BaseTestCase):
    def setUp(self):
        self.rng = random.Random(1729)
        self.symbols = list(sp.symbols("x y k"))

    def assertClose(self, first, second):
        self.assertLessEqual(abs(first - second), 1.0e-8 * max(1.0, abs(second)), "%r != %r" % (first, second))

    def test_simplify_idempotent_and_value_preserving(self):
        for trial in range(60):
            expr = random_expression(self.rng, self.symbols)
            once = simplify(expr)
            self.assertEqual(simplify(once), once, "simplify not idempotent on %s" % expr)
            for point in range(3):
                env = random_env(self.rng, self.symbols)
                self.assertClose(eval_numeric(once, env), raw_value(expr, env))

    def test_evaluation_homomorphism(self):
        for trial in range(30):
            first = random_expression(self.rng, self.symbols)
            second = random_expression(self.rng, self.symbols)
            env = random_env(self.rng, self.symbols)
            a, b = eval_numeric(first, env), eval_numeric(second, env)
            self.assertClose(eval_numeric(first + second, env), a + b)
            self.assertClose(eval_numeric(first * second, env), a * b)

    def test_leibniz_rule(self):
        x = self.symbols[0]
        for trial in range(20):
            first = random_expression(self.rng, self.symbols, depth=2)
            second = random_expression(self.rng, self.symbols, depth=2)
            product_rule = differentiate(first, x)*second + first*differentiate(second, x)
            self.assertTrue(is_zero(differentiate(first*second, x) - product_rule))

    def test_derivative_matches_finite_difference(self):
        x, y, k = self.symbols
        expr = sp.sin(k*x)
        derivative = differentiate(expr, x)
        self.assertExprEqual(derivative, k*sp.cos(k*x))
        step = 1.0e-6
        for point in range(10):
            env = {x: self.rng.uniform(-3.0, 3.0), k: self.rng.uniform(-3.0, 3.0)}
            forward = dict(env)
            forward[x] += step
            backward = dict(env)
            backward[x] -= step
            estimate = (eval_numeric(expr, forward) - eval_numeric(expr, backward)) / (2*step)
            exact = eval_numeric(derivative, env)
            self.assertLess(abs(estimate - exact), 1.0e-6 * max(1.0, abs(exact)))

    def test_binomial_cancels(self):
        a, b = sp.symbols("a b")
        expr = (a + b)**2 - a**2 - 2*a*b - b**2
        self.assertEqual(simplify(expr), 0)
        for trial in range(20):
            bindings = {a: sp.Integer(self.rng.randint(-50, 50)), b: sp.Integer(self.rng.randint(-50, 50))}
            self.assertEqual(expr.xreplace(bindings), 0)
            self.assertEqual(eval_numeric(expr, bindings), 0.0)

    def test_independent_jets(self):
        space = JetSpace([], ["y"])
        y, = space.fields
        self.assertEqual(differentiate(space.velocity(y)**2, y), 0)


class ParserTest(BaseTestCase):
    def setUp(self):
        self.space = JetSpace(["x"], ["y"], parameters=["k"])
        self.table = self.space.table
        self.y = self.table["y"]

    def parse(self, text):
        return parse_expression(text, self.table)

    def test_precedence(self):
        y = self.y
        self.assertEqual(self.parse("2^3^2"), 512)
        self.assertExprEqual(self.parse("-y^2"), -y**2)
        self.assertExprEqual(self.parse("1 + 2*y/4"), 1 + y/2)
        self.assertExprEqual(self.parse("y^-1"), 1/y)

    def test_functions(self):
        y = self.y
        self.assertExprEqual(self.parse("sqrt(y) + ln(y) + exp(y)"), sp.sqrt(y) + sp.log(y) + sp.exp(y))
        self.assertRaises(errors.UndeclaredSymbol, self.parse, "foo(y)")

    def test_jets(self):
        expr = self.parse("d(y, x, tau) + d(y, tau, x)")
        jet = self.table.jet("y", (1, 1))
        self.assertExprEqual(expr, 2*jet)
        self.assertEqual(to_text(jet, self.table), "d(y, x, tau)")

    def test_print_round_trip(self):
        for text in ["k*y^2/2 - sin(y)*d(y, x)", "exp(1) + ln(y)", "sqrt(1 + d(y, tau)^2)",
                     "4*sqrt(-2)", "y*sqrt(-1) - sqrt(-3)", "0.125*y + 2.5e-1"]:
            expr = self.parse(text)
            self.assertExprEqual(self.parse(to_text(expr, self.table)), expr, text)

    def test_imaginary_unit_text(self):
        self.assertEqual(to_text(self.parse("sqrt(-1)"), self.table), "sqrt(-1)")

    def test_decimals_are_exact(self):
        self.assertEqual(self.parse("0.1 + 0.2 - 0.3"), 0)
        self.assertEqual(self.parse("1.5e-3"), sp.Rational(3, 2000))
        self.assertEqual(self.parse(".5*y"), self.y/2)
        self.assertTrue(self.parse("0.1").is_Rational)

    def test_gauged_jets(self):
        jet = self.table.jet("y", (2, 0))
        companion = self.table.gauged(jet)
        self.assertIs(self.table.gauged(jet), companion)
        self.assertEqual(self.table.kind(companion), Kind.GAUGED)
        self.assertEqual(to_text(companion, self.table), "d_h(y, x, x)")
        self.assertEqual(parse_expression("d_h(y, x, x) + y", self.table, gauged=True), companion + self.y)
        self.assertRaises(errors.UndeclaredSymbol, self.parse, "d_h(y, x, x)")
        self.assertRaises(errors.JetOrderError, self.table.gauged, self.y)

    def test_locations(self):
        try:
            self.parse("y +\n  z")
        except errors.UndeclaredSymbol as excp:
            self.assertEqual((excp.line, excp.column), (2, 3))
        else:
            self.fail("UndeclaredSymbol not raised")
        try:
            tokenize("y + $")
        except errors.ModelSyntaxError as excp:
            self.assertEqual((excp.line, excp.column), (1, 5))
        else:
            self.fail("ModelSyntaxError not raised")

    def test_trailing_tokens(self):
        self.assertRaises(errors.ModelSyntaxError, self.parse, "y y")
        self.assertRaises(errors.ModelSyntaxError, self.parse, "(y")


if __name__ == "__main__":
    unittest.main()
