"""
cli: homfield command line driver

    homfield derive MODEL [--format json]
    homfield simulate MODEL [--tau A:B] [--step H] [--method rk4|midpoint] [--out PATH] [--format csv|json]
                            [--init NAME=V,...] [--stride N] [--sweep NAME=v1,v2,...]
    homfield check MODEL
    homfield gravity ANSATZ [--a0 A] [--adot0 V] [--tau A:B] [--step H] [--out PATH]

Options may also be set in ~/.homfield/homfield.cfg, one section per command.
Errors are reported on stderr as a one line JSON document; the exit code
is 1 for usage, 2 for model file, 3 for derivation and 4 for numeric errors.
"""

import collections
import concurrent.futures
import json
import logging
import os
import sys

from . import about
from . import errors
from . import evolve
from . import gravity
from . import hamilton
from . import logconfig
from . import optconfig
from .bundles import ConnectionTheta, check_splitting, is_reducible
from .jetcalc import euler_lagrange, exterior_derivative
from .modelfile import read_model
from .symexpr import is_zero

COMMANDS = ("derive", "simulate", "check", "gravity")

CONFIG_FILE = os.path.join("~", ".homfield", "homfield.cfg")

DEFAULTS = {"simulate": {"tau": "0:10", "step": 1.0e-3, "method": "rk4", "format": "csv"},
            "gravity": {"tau": "0:1", "step": 1.0e-4, "method": "midpoint", "format": "json"},
            "derive": {"format": "text"},
            "check": {"format": "text"}}

USAGE = "usage: homfield (%s) [-h ... options] MODEL|ANSATZ" % "|".join(COMMANDS)

def make_parser():
    config_file = os.path.expanduser(CONFIG_FILE)
    if not os.path.isfile(config_file):
        config_file = None
    parser = optconfig.OptConfig(usage=USAGE, config_file=config_file)

    parser.add_option("loglevel", default="warning",
                      help="Logging level: debug/info/warning/error/none (default: warning)")
    parser.add_option("logfile", default="",
                      help="Log file (default: stderr)")
    parser.add_option("tau", help="Integration span A:B")
    parser.add_option("step", opt_type="float", help="Step size")
    parser.add_option("method", help="Integrator: rk4/midpoint")
    parser.add_option("stride", opt_type="int", default=1,
                      help="Sample every N steps (default: 1)")
    parser.add_option("out", default="",
                      help="Output file (default: stdout)")
    parser.add_option("format", help="Output format: csv/json for trajectories, text/json for reports")
    parser.add_option("init", default="",
                      help="Initial values NAME=V,... (fields and momenta p_<field>)")
    parser.add_option("sweep", default="",
                      help="Parameter sweep NAME=v1,v2,...; runs concurrently, one output file per value")
    parser.add_option("workers", opt_type="int", default=4,
                      help="Concurrent sweep runs (default: 4)")
    parser.add_option("tolerance", opt_type="float", default=1.0e-6,
                      help="Relative energy drift tolerance (default: 1e-6)")
    for name in ("a0", "a1", "a2", "a3"):
        parser.add_option(name, opt_type="float", default=1.0, help="Initial scale factor %s" % name)
    for name in ("adot0", "adot1", "adot2", "adot3"):
        parser.add_option(name, opt_type="float", help="Initial rate of the scale factor (%s)" % name)
    return parser

def option(parser, command, name):
    return parser.getopt(name, default=DEFAULTS.get(command, {}).get(name))

def parse_span(text):
    try:
        start, end = [float(v) for v in text.split(":")]
    except ValueError:
        raise errors.UsageError("Invalid span '%s'; expected A:B" % text)
    if not end > start:
        raise errors.UsageError("Empty span '%s'" % text)
    return start, end

def parse_assignments(text):
    values = collections.OrderedDict()
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, sep, value = item.partition("=")
        try:
            values[name.strip()] = float(value)
        except ValueError:
            raise errors.UsageError("Invalid assignment '%s'; expected NAME=VALUE" % item)
        if not sep or not name.strip():
            raise errors.UsageError("Invalid assignment '%s'; expected NAME=VALUE" % item)
    return values

def parse_sweep(text):
    name, sep, values = text.partition("=")
    try:
        numbers = [float(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise errors.UsageError("Invalid sweep '%s'; expected NAME=v1,v2,..." % text)
    if not sep or not name.strip() or not numbers:
        raise errors.UsageError("Invalid sweep '%s'; expected NAME=v1,v2,..." % text)
    return name.strip(), numbers

def sweep_path(path, name, value):
    stem, ext = os.path.splitext(path)
    return "%s.%s-%s%s" % (stem, name, "%g" % value, ext)

def load_model(path):
    try:
        return read_model(path)
    except (IOError, OSError) as excp:
        raise errors.UsageError("Cannot read model file %s: %s" % (path, excp))

def write_output(path, writer):
    if path:
        with open(path, "w") as f:
            writer(f)
    else:
        writer(sys.stdout)


def cmd_derive(model):
    """ Equation report, with the gauge reduced equations when the model gives a gauge
    """
    system = model.system()
    reduced = None
    if model.gauge is not None:
        reduced = hamilton.restrict_to_gauge(system, model.gauge[1], gamma=model.gamma(), theta=model.theta())
    return hamilton.equation_report(system, reduced)

def run_simulation(ode, initial, span, method, step, stride):
    trajectory = evolve.integrate(ode, initial, span[0], span[1], method=method, step=step, stride=stride)
    return trajectory, evolve.monitor_energy(trajectory, ode)

def cmd_simulate(model, span, method="rk4", step=1.0e-3, stride=1, init=None, parameters=None):
    """ Integrate the Hamilton equations; returns (trajectory, energy report)
    """
    system = model.system()
    ode = evolve.OdeSystem.from_hamiltonian(system, parameters)
    return run_simulation(ode, model.initial_state(init), span, method, step, stride)

def cmd_sweep(model, name, values, span, method="rk4", step=1.0e-3, stride=1, init=None, workers=4):
    """ One independent simulation per parameter value, run concurrently.
    Returns [(value, trajectory, report)] in the order of values.
    """
    if name not in model.parameters:
        raise errors.UsageError("Sweep parameter '%s' is not a declared param" % name)
    system = model.system()
    initial = model.initial_state(init)
    # Symbolic compilation stays in this thread; workers only integrate
    odes = [evolve.OdeSystem.from_hamiltonian(system, {name: value}) for value in values]
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        futures = [executor.submit(run_simulation, ode, initial, span, method, step, stride) for ode in odes]
        results = [future.result() for future in futures]
    return [(value,) + result for value, result in zip(values, results)]

def cmd_check(model):
    """ Invariant suite for a model: name -> passed
    """
    system = model.system()
    space = system.space
    results = collections.OrderedDict()
    results["hamiltonian_connection"] = hamilton.check_hamiltonian_connection(system)
    liouville = hamilton.liouville_form(system)
    omega = hamilton.polysymplectic_form(system)
    results["liouville_differential"] = exterior_derivative(liouville) == omega
    results["polysymplectic_closed"] = exterior_derivative(omega).is_zero()
    if system.is_pointwise():
        results["energy_rate"] = is_zero(hamilton.energy_rate(system) - system.monitor)
    if model.lagrangian is not None:
        lagrangian = model.lagrangian[1]
        if system.is_pointwise():
            results["euler_lagrange_on_shell"] = all(
                is_zero(hamilton.on_shell(system, euler_lagrange(space, lagrangian, field)))
                for field in system.fields)
        results["inverse_legendre"] = is_zero(hamilton.inverse_legendre(system) - lagrangian)
    if model.theta() is not None:
        results["splitting"] = check_splitting(model.theta())
    if model.gauge is not None and model.gamma() is not None:
        results["integral_gauge"] = is_reducible(model.theta() or ConnectionTheta(space),
                                                 model.gamma(), model.gauge[1])
    return results

def gravity_values(parser, command, fields):
    """ Initial scale factors and rates from --a0/--adot0 (one function) or --aK/--adotK
    """
    positions = {}
    rates = {}
    for j, field in enumerate(fields):
        key = "0" if len(fields) == 1 else str(j + 1)
        positions[field.name] = option(parser, command, "a" + key)
        rate = option(parser, command, "adot" + key)
        rates[field.name] = 1.0 if rate is None else rate
    return positions, rates

def cmd_gravity(name, span, method="midpoint", step=1.0e-4, tolerance=1.0e-6, stride=1, initial=None,
                rates=None):
    """ Derivation report, trajectory and conservation report for a metric ansatz.
    initial/rates map metric function names to values (defaults 1).
    """
    g = gravity.make_ansatz(name)
    system = gravity.formal_gravity_hamiltonian(g)
    positions = dict((f.name, 1.0) for f in system.fields)
    positions.update(initial or {})
    velocities = dict((f.name, 1.0) for f in system.fields)
    velocities.update(rates or {})
    state = gravity.initial_state(system, positions, velocities)
    trajectory, report = gravity.check_energy_conservation(system, state, span, method=method, step=step,
                                                           tolerance=tolerance, stride=stride)
    doc = gravity.gravity_report(g, system)
    doc["energy"] = report.to_dict()
    doc["run"] = trajectory.metadata()
    return doc, trajectory


def main(args=None):
    args = sys.argv[1:] if args is None else args
    try:
        return run(args)
    except errors.HomfieldError as excp:
        sys.stderr.write(json.dumps(excp.to_dict()) + "\n")
        return excp.exit_code

def run(args):
    parser = make_parser()
    cmd_args = parser.parse_args(args)
    if len(cmd_args) != 2 or cmd_args[0] not in COMMANDS:
        raise errors.UsageError(USAGE)
    command, target = cmd_args
    parser.set_section(command)
    logconfig.setup_logging(parser.getopt("loglevel"), parser.getopt("logfile") or None)
    logging.info("cli: homfield %s %s %s", about.version, command, target)

    out = parser.getopt("out")
    fmt = option(parser, command, "format")
    stride = parser.getopt("stride")

    if command == "derive":
        doc = cmd_derive(load_model(target))
        if fmt == "json":
            write_output(out, lambda f: f.write(json.dumps(doc, indent=1) + "\n"))
        else:
            write_output(out, lambda f: f.write(hamilton.format_report(doc)))
        return 0

    if command == "check":
        results = cmd_check(load_model(target))
        if fmt == "json":
            write_output(out, lambda f: f.write(json.dumps(results, indent=1) + "\n"))
        else:
            write_output(out, lambda f: f.write("".join("%s %s\n" % (name, "ok" if passed else "FAILED")
                                                        for name, passed in results.items())))
        failed = [name for name, passed in results.items() if not passed]
        if failed:
            raise errors.DerivationError("Invariant checks failed: %s" % ", ".join(failed))
        return 0

    span = parse_span(option(parser, command, "tau"))
    method = option(parser, command, "method")
    step = option(parser, command, "step")
    if method not in evolve.METHODS:
        raise errors.UsageError("Unknown method '%s'; use rk4 or midpoint" % method)

    if command == "gravity":
        positions, rates = gravity_values(parser, command, gravity.make_ansatz(target).fields)
        doc, trajectory = cmd_gravity(target, span, method=method, step=step,
                                      tolerance=parser.getopt("tolerance"), stride=stride,
                                      initial=positions, rates=rates)
        if out:
            write_output(out, lambda f: evolve.write_csv(trajectory, f))
        sys.stdout.write(json.dumps(doc, indent=1) + "\n")
        return 0

    if fmt not in ("csv", "json"):
        raise errors.UsageError("Invalid trajectory format '%s'; use csv or json" % fmt)
    model = load_model(target)
    init = parse_assignments(parser.getopt("init"))
    writer = evolve.write_csv if fmt == "csv" else evolve.write_json

    def emit(path, trajectory, report):
        if fmt == "csv":
            write_output(path, lambda f: writer(trajectory, f))
            sys.stderr.write(json.dumps(report.to_dict()) + "\n")
        else:
            write_output(path, lambda f: writer(trajectory, f, report))

    sweep = parser.getopt("sweep")
    if sweep:
        if not out:
            raise errors.UsageError("--sweep needs --out to name the per-run output files")
        name, values = parse_sweep(sweep)
        for value, trajectory, report in cmd_sweep(model, name, values, span, method=method, step=step,
                                                   stride=stride, init=init, workers=parser.getopt("workers")):
            emit(sweep_path(out, name, value), trajectory, report)
        return 0

    trajectory, report = cmd_simulate(model, span, method=method, step=step, stride=stride, init=init)
    emit(out, trajectory, report)
    return 0

if __name__ == "__main__":
    sys.exit(main())
