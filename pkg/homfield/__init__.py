#!/usr/bin/env python
#
# homfield: homogeneous Hamiltonian formalism for field theory
#
#  BSD License
#
"""
Symbolic derivation of the covariant formal Hamilton equations of a
Lagrangian on the composite bundle Y -> Theta -> X, their reduction along a
gauge section, and numerical integration of the evolution in tau.
"""

from .about import version as __version__
