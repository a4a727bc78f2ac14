import os
import unittest

import sympy as sp

from homfield.symexpr import simplify

TESTS_DIR = os.path.dirname(__file__)
MODELS_DIR = os.path.join(TESTS_DIR, "models")
BAD_MODELS_DIR = os.path.join(MODELS_DIR, "bad")
GOLDEN_DIR = os.path.join(TESTS_DIR, "golden")
SAMPLE_MODELS_DIR = os.path.join(TESTS_DIR, "..", "models")

if not os.path.isdir(MODELS_DIR):
    raise IOError("Model corpus not found, cannot run tests")

def model_path(name, bad=False):
    return os.path.join(BAD_MODELS_DIR if bad else MODELS_DIR, name + ".model")

def sample_path(name):
    return os.path.join(SAMPLE_MODELS_DIR, name + ".model")


class BaseTestCase(unittest.TestCase):
    def assertExprEqual(self, first, second, msg=None):
        difference = simplify(sp.sympify(first) - sp.sympify(second))
        if difference != 0:
            self.fail(msg or "%s != %s (difference %s)" % (first, second, difference))

    def assertExprZero(self, expr, msg=None):
        self.assertExprEqual(expr, 0, msg)
