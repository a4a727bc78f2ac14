#!/usr/bin/env python

from setuptools import setup

import homfield.about

requires = ["tornado", "sympy", "numpy"]

setup(name="homfield",
      packages=["homfield", "homfield.tests"],
      package_data={"homfield": ["models/*.model"],
                    "homfield.tests": ["models/*.model", "models/bad/*.model", "golden/*.txt"]},
      entry_points={"console_scripts":["homfield = homfield.cli:main",
                                       ]},
      install_requires=requires,
      include_package_data=True,
      test_suite="homfield.tests",
      version=homfield.about.version,
      description=homfield.about.description,
      url=homfield.about.url,
      author="homfield developers",
      license="BSD License",
      keywords=["hamiltonian", "field theory", "jet bundle", "polysymplectic",
                "symbolic", "computer algebra", "general relativity"],
      classifiers=[
      "Development Status :: 3 - Alpha",
      "Environment :: Console",
      "Intended Audience :: Science/Research",
      "License :: OSI Approved :: BSD License",
      "Operating System :: OS Independent",
      "Programming Language :: Python :: 3",
      "Topic :: Scientific/Engineering :: Mathematics",
      "Topic :: Scientific/Engineering :: Physics",
      ],
      long_description="""\
homfield: homogeneous Hamiltonian formalism for field theory
---------------------------------------------------------------------------

*homfield* derives the covariant formal Hamilton equations of a Lagrangian
whose fields evolve in an extra line coordinate tau, reduces them along a
gauge section tau = h(x), and integrates the evolution in tau while
monitoring the formal energy.
      """
     )
