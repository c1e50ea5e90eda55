#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
The main downclosed console script.

It is important to import necessary things at the method level to make
importing this file as fast as possible. Otherwise using the command line
interface feels sluggish and slow.


All functions starting with "dc_" will automatically be available as
subcommands to the main "downclosed" command. Underscores in the function
name separate the words of the command, so ``dc_prophet_verify`` is called
as

downclosed prophet verify

A decorator to determine the category of a function is provided.

The help for every function can be accessed either via

downclosed help prophet verify

or

downclosed prophet verify --help


Each function will be passed a parser and args. It is the function author's
responsibility to add any arguments and call

parser.parse_args(args)

when done.

Exit codes: 0 success, 1 unexpected error, 2 input error, 3 capacity
exceeded, 4 invariant violated.

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import os

os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")

import argparse
import colorama
import difflib
import sys
import traceback

import downclosed
from downclosed import DownClosedError, DownClosedInputError


FCT_PREFIX = "dc_"


# Documentation for the subcommand groups.
COMMAND_GROUP_DOCS = {
    "Secretary": (
        "Online selection under a downward-closed constraint with an XOS "
        "objective and random arrival order."
    ),
    "Prophet": (
        "The layered tree construction separating online selection from "
        "the hindsight optimum."
    ),
    "Probing": (
        "The block tree construction separating adaptive from "
        "non-adaptive probing."
    ),
    "Oracles": (
        "Exhaustive reference answers for tiny instances."
    ),
    "Experiments": (
        "Configuration driven runs writing CSV files with provenance."
    ),
}


def command_group(group_name):
    """
    Decorator to be able to logically group commands.
    """
    def wrapper(func):
        func.group_name = group_name
        return func
    return wrapper


class DownClosedCommandLineException(DownClosedInputError):
    pass


# Alternative spellings of commands.
COMMAND_ALIASES = {
    "oracle_opt_online": "oracle_online",
    "oracle_opt_adaptive": "oracle_adaptive"}


def _add_instance_argument(parser, help):
    """
    Instance files are accepted positionally or with ``--instance``.
    """
    parser.add_argument("instance", nargs="?", help=help)
    parser.add_argument("--instance", dest="instance_flag",
                        metavar="INSTANCE", help=help)


def _get_instance(args, required=True):
    if args.instance and args.instance_flag and \
            args.instance != args.instance_flag:
        raise DownClosedCommandLineException(
            "Two different instance files given.")
    instance = args.instance or args.instance_flag
    if instance is None and required:
        raise DownClosedCommandLineException("An instance file is required.")
    return instance


def _get_session(args):
    """
    Session configured by the global command line flags.
    """
    from downclosed.components.session import Session
    return Session(output_folder=os.getcwd(), seed=args.seed,
                   threads=args.threads, strict=args.strict,
                   debug=args.debug, quiet=args.quiet)


def _add_construction_arguments(parser, kind):
    """
    Flags shared by the prophet and probing commands.
    """
    parser.add_argument("--instance", help="descriptor file written by "
                        "'downclosed %s gen'. Overrides the construction "
                        "parameters." % kind)
    parser.add_argument("--L", type=int, default=2, help="number of layers")
    parser.add_argument("--p", type=int, default=10 ** 4,
                        help="alphabet size of the codes")
    parser.add_argument("--mode", choices=["desk", "asymptotic"],
                        default="desk", help="parameter regime")
    parser.add_argument("--activation-prob",
                        help="activation probability, e.g. '1/2'. Defaults "
                             "to 2/L^2")
    parser.add_argument("--node-cap", type=int,
                        help="largest node count that may be materialized")
    parser.add_argument("--instance-seed", type=int,
                        help="seed of the construction itself. Derived from "
                             "--seed if not given")
    if kind == "prophet":
        parser.add_argument("--branching", help="children per node, one "
                            "value or a comma separated list per layer")
        parser.add_argument("--subset-sizes", help="element set size per "
                            "layer, comma separated")
        parser.add_argument("--first-family-sizes", help="size of the first "
                            "code family per layer, comma separated")
        parser.add_argument("--duplicate-second-family", action="store_true",
                            help="deliberately break the code to test the "
                                 "verification")
        parser.add_argument("--permute-arrivals", action="store_true",
                            help="shuffle the arrival order within layers")
    else:
        parser.add_argument("--arities", "--arity",
                            help="block arity per layer, comma separated. "
                                 "Defaults to L^2")
        parser.add_argument("--depths", help="block depth per layer, comma "
                            "separated")
        parser.add_argument("--family-sizes", help="code family size per "
                            "layer, comma separated")


def _construction_parameters(args, kind):
    """
    The construction flags as an ordered parameter dictionary, as they
    appear in experiment files.
    """
    import collections
    from downclosed.experiment_xml import parse_value

    names = ["L", "p", "mode", "activation_prob", "node_cap"]
    if kind == "prophet":
        names += ["branching", "subset_sizes", "first_family_sizes"]
    else:
        names += ["arities", "depths", "family_sizes"]
    parameters = collections.OrderedDict()
    for name in names:
        value = getattr(args, name)
        if value is None:
            continue
        parameters[name] = parse_value(value) if isinstance(value, str) \
            and name not in ("mode",) else value
    if kind == "prophet":
        for name in ("duplicate_second_family", "permute_arrivals"):
            if getattr(args, name):
                parameters[name] = True
    if args.instance_seed is not None:
        parameters["instance_seed"] = args.instance_seed
    return parameters


def _print_csv(filename, max_rows=40):
    """
    Shows a result CSV as a table.
    """
    import csv
    from prettytable import PrettyTable

    with open(filename, "rt", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    # Drop columns that are empty everywhere.
    keep = [_i for _i in range(len(header))
            if any(_r[_i] for _r in body) or header[_i] == "point"]
    tab = PrettyTable([header[_i] for _i in keep])
    for row in body[:max_rows]:
        tab.add_row([row[_i] for _i in keep])
    print(tab)
    if len(body) > max_rows:
        print("... %i more rows in '%s'." % (len(body) - max_rows,
                                            os.path.relpath(filename)))


def _run_config(args, kind, operation, parameters, trials,
                instance_file=None, default_out=None):
    """
    Runs a command line experiment through the configuration machinery so
    that its CSV gets a provenance sidecar like every other experiment.
    """
    from downclosed.experiment_xml import ExperimentConfig

    config = ExperimentConfig(
        kind=kind, operation=operation, parameters=parameters,
        instance_file=instance_file, trials=trials, seed=args.seed,
        output=args.out or default_out or "%s_%s.csv" % (kind, operation),
        threads=args.threads, strict=args.strict,
        plot=getattr(args, "plot", False))
    session = _get_session(args)
    result = session.comm.experiments.run_experiment(config)
    _print_csv(result["csv"])
    if result["failures"]:
        raise DownClosedError("%i sweep point(s) failed. See the error "
                              "column of '%s'." % (result["failures"],
                                                   result["csv"]))
    return result


def _check_violation_columns(filename, columns):
    import csv
    with open(filename, "rt", newline="") as fh:
        rows = list(csv.DictReader(fh))
    total = sum(int(_r[_c] or 0) for _r in rows for _c in columns)
    if total:
        raise downclosed.DownClosedInvariantError(
            "%i sampled pairs violate their intersection bound." % total)


@command_group("Secretary")
def dc_secretary_gen(parser, args):
    """
    Generate an explicit secretary instance file.
    """
    parser.add_argument("n", type=int, help="number of elements")
    parser.add_argument("--generator", choices=["random", "partition"],
                        default="random",
                        help="random dyadic clauses with a random family, or "
                             "the hidden group family")
    parser.add_argument("--clauses", type=int, default=3,
                        help="number of clauses of the random generator")
    parser.add_argument("--group-size", type=int,
                        help="group size of the partition generator")
    args = parser.parse_args(args)

    session = _get_session(args)
    instance = session.comm.instances.generate_secretary(
        args.generator, args.n, clauses=args.clauses,
        group_size=args.group_size)
    session.comm.instances.save_secretary(
        instance.f, instance.oracle, args.out or "secretary_instance.json")


@command_group("Secretary")
def dc_secretary_run(parser, args):
    """
    Run the secretary algorithm on random arrival orders.
    """
    _add_instance_argument(
        parser, "instance file. Without one, an instance is generated from "
        "--n and --generator")
    parser.add_argument("--n", type=int, help="size of a generated instance")
    parser.add_argument("--generator", choices=["random", "partition"],
                        default="partition")
    parser.add_argument("--per-trial", action="store_true",
                        help="write one row per trial instead of a summary")
    parser.add_argument("--compare", action="store_true",
                        help="compare the implementable algorithm with the "
                             "analysis variant on shared randomness")
    parser.add_argument("--claim", action="store_true",
                        help="measure how often the first third of the "
                             "order keeps less than a quarter of the optimum")
    parser.add_argument("--plot", action="store_true")
    args = parser.parse_args(args)

    if sum([args.per_trial, args.compare, args.claim]) > 1:
        raise DownClosedCommandLineException(
            "--per-trial, --compare and --claim are mutually exclusive.")
    instance = _get_instance(args, required=False)
    if instance is None and args.n is None:
        raise DownClosedCommandLineException(
            "Either an instance file or --n is required.")
    operation = "summary"
    if args.per_trial:
        operation = "run"
    elif args.compare:
        operation = "compare"
    elif args.claim:
        operation = "claim"
    parameters = {}
    if instance is None:
        parameters = {"n": args.n, "generator": args.generator}
    _run_config(args, "secretary", operation, parameters,
                args.trials or 1000, instance_file=instance)


@command_group("Prophet")
def dc_prophet_gen(parser, args):
    """
    Generate a prophet construction and write its descriptor.
    """
    _add_construction_arguments(parser, "prophet")
    parser.add_argument("--lazy", action="store_true",
                        help="do not materialize the tree")
    args = parser.parse_args(args)

    session = _get_session(args)
    parameters = _construction_parameters(args, "prophet")
    seed = parameters.pop("instance_seed", None)
    params = session.comm.prophet.get_params(**parameters)
    instance = session.comm.prophet.generate(
        params, seed=seed, materialize=False if args.lazy else None)
    print(instance)
    session.comm.instances.save_descriptor(
        "prophet", instance, args.out or "prophet_instance.json")


@command_group("Prophet")
def dc_prophet_verify(parser, args):
    """
    Sample node pairs and check the intersection bounds of the codes.
    """
    _add_construction_arguments(parser, "prophet")
    args = parser.parse_args(args)

    result = _run_config(args, "prophet", "verify",
                         _construction_parameters(args, "prophet"),
                         args.trials or 10 ** 4,
                         instance_file=args.instance)
    _check_violation_columns(result["csv"], ["same_violations",
                                             "different_violations"])


@command_group("Prophet")
def dc_prophet_simulate(parser, args):
    """
    Estimate hindsight optimum versus the online policies.
    """
    _add_construction_arguments(parser, "prophet")
    parser.add_argument("--policies", nargs="+",
                        help="policies, e.g. greedy-commit "
                             "'layer-threshold(1/4)' 'skip-small-layers(1)'")
    parser.add_argument("--plot", action="store_true")
    args = parser.parse_args(args)

    parameters = _construction_parameters(args, "prophet")
    if args.policies:
        parameters["policies"] = args.policies
    _run_config(args, "prophet", "simulate", parameters,
                args.trials or 2000, instance_file=args.instance)


@command_group("Prophet")
def dc_prophet_exact(parser, args):
    """
    Exact policy, optimal online and hindsight values of a tiny instance.
    """
    _add_construction_arguments(parser, "prophet")
    parser.add_argument("--policies", nargs="+")
    args = parser.parse_args(args)

    from prettytable import PrettyTable

    session = _get_session(args)
    if args.instance:
        instance = session.comm.instances.load_construction(args.instance,
                                                            "prophet")
    else:
        parameters = _construction_parameters(args, "prophet")
        seed = parameters.pop("instance_seed", None)
        instance = session.comm.prophet.generate(
            session.comm.prophet.get_params(**parameters), seed=seed)
    result = session.comm.prophet.exact_comparison(instance, args.policies)
    tab = PrettyTable(["Strategy", "Expected value", "Exact"])
    tab.align["Strategy"] = "l"
    for name, value in result.items():
        tab.add_row([name, "%.6f" % value, str(value)])
    print(tab)


@command_group("Probing")
def dc_probing_gen(parser, args):
    """
    Generate a probing construction and write its descriptor.
    """
    _add_construction_arguments(parser, "probing")
    parser.add_argument("--lazy", action="store_true",
                        help="do not materialize the tree")
    args = parser.parse_args(args)

    session = _get_session(args)
    parameters = _construction_parameters(args, "probing")
    seed = parameters.pop("instance_seed", None)
    params = session.comm.probing.get_params(**parameters)
    instance = session.comm.probing.generate(
        params, seed=seed, materialize=False if args.lazy else None)
    print(instance)
    session.comm.instances.save_descriptor(
        "probing", instance, args.out or "probing_instance.json")


@command_group("Probing")
def dc_probing_verify(parser, args):
    """
    Sample path/caterpillar pairs and check the overlap bounds.
    """
    _add_construction_arguments(parser, "probing")
    args = parser.parse_args(args)

    result = _run_config(args, "probing", "verify",
                         _construction_parameters(args, "probing"),
                         args.trials or 10 ** 4,
                         instance_file=args.instance)
    _check_violation_columns(result["csv"], ["cross_violations",
                                             "same_violations"])


@command_group("Probing")
def dc_probing_greedy(parser, args):
    """
    Compare adaptive greedy's per level success rate with the binomial model.
    """
    _add_construction_arguments(parser, "probing")
    args = parser.parse_args(args)

    _run_config(args, "probing", "greedy",
                _construction_parameters(args, "probing"),
                args.trials or 10 ** 4, instance_file=args.instance)


@command_group("Probing")
def dc_probing_simulate(parser, args):
    """
    Estimate adaptive greedy versus the best sampled caterpillar.
    """
    _add_construction_arguments(parser, "probing")
    parser.add_argument("--caterpillars", type=int, default=16,
                        help="number of non-adaptive strategies to sample")
    parser.add_argument("--plot", action="store_true")
    args = parser.parse_args(args)

    parameters = _construction_parameters(args, "probing")
    parameters["caterpillars"] = args.caterpillars
    _run_config(args, "probing", "simulate", parameters,
                args.trials or 2000, instance_file=args.instance)


@command_group("Probing")
def dc_probing_exact(parser, args):
    """
    Exact adaptive and non-adaptive optima of a tiny instance.
    """
    _add_construction_arguments(parser, "probing")
    args = parser.parse_args(args)

    session = _get_session(args)
    if args.instance:
        instance = session.comm.instances.load_construction(args.instance,
                                                            "probing")
    else:
        parameters = _construction_parameters(args, "probing")
        seed = parameters.pop("instance_seed", None)
        instance = session.comm.probing.generate(
            session.comm.probing.get_params(**parameters), seed=seed)
    result = session.comm.probing.exact_gap(instance)
    for name in ("adaptive", "nonadaptive", "gap"):
        print("%12s: %s" % (name, result[name]))
    print("%12s: %s" % ("probed", " ".join(str(_i)
                                           for _i in result["probed"])))


@command_group("Oracles")
def dc_oracle_offline(parser, args):
    """
    Exhaustive offline optimum of a secretary instance file.
    """
    _add_instance_argument(parser, "secretary instance file")
    args = parser.parse_args(args)

    session = _get_session(args)
    instance = session.comm.instances.load_secretary(_get_instance(args))
    result = session.comm.oracles.offline(instance.f, instance.oracle)
    print("Optimal set: {%s}" % ", ".join(str(_i)
                                          for _i in result["selection"]))
    print("Value: %s" % result["value"])


@command_group("Oracles")
def dc_oracle_online(parser, args):
    """
    Optimal online value and expected hindsight optimum of a prophet file.
    """
    _add_instance_argument(parser, "prophet descriptor file")
    args = parser.parse_args(args)

    session = _get_session(args)
    instance = session.comm.instances.load_construction(
        _get_instance(args), "prophet")
    for name, value in session.comm.oracles.online_prophet(
            instance).items():
        print("%16s: %s (%.6f)" % (name, value, value))


@command_group("Oracles")
def dc_oracle_adaptive(parser, args):
    """
    Exact adaptivity gap of a probing descriptor file.
    """
    _add_instance_argument(parser, "probing descriptor file")
    args = parser.parse_args(args)

    session = _get_session(args)
    instance = session.comm.instances.load_construction(
        _get_instance(args), "probing")
    for name, value in session.comm.oracles.adaptive_probing(
            instance).items():
        print("%12s: %s" % (name, value))


@command_group("Oracles")
def dc_oracle_crosscheck(parser, args):
    """
    Check the constrained optimum solvers against exhaustive enumeration.
    """
    args = parser.parse_args(args)
    args.strict = True
    _run_config(args, "oracle", "crosscheck", {}, args.trials or 1000)


@command_group("Experiments")
def dc_experiment_run(parser, args):
    """
    Run an experiment configuration or re-run a provenance sidecar.
    """
    parser.add_argument("--config", required=True,
                        help="experiment XML file or provenance sidecar")
    args = parser.parse_args(args)

    from downclosed.experiment_xml import ExperimentConfig

    config = ExperimentConfig.from_file(args.config)
    # Command line flags override the file.
    if args.trials is not None:
        config.trials = args.trials
    if args.out is not None:
        config.output = args.out
    if args.threads is not None:
        config.threads = args.threads
    if args.strict:
        config.strict = True
    session = _get_session(args)
    result = session.comm.experiments.run_experiment(config)
    _print_csv(result["csv"])
    if result["failures"]:
        raise DownClosedError("%i sweep point(s) failed." %
                              result["failures"])


@command_group("Experiments")
def dc_experiment_list(parser, args):
    """
    List the experiment kinds and operations a configuration can name.
    """
    args = parser.parse_args(args)

    from downclosed.components.experiments import COLUMNS
    for (kind, operation), columns in COLUMNS.items():
        print("%s%10s %-10s%s %s" % (colorama.Fore.YELLOW, kind, operation,
                                     colorama.Style.RESET_ALL,
                                     ", ".join(columns)))


def _get_cmd_description(fct):
    """
    Convenience function extracting the first line of a docstring.
    """
    try:
        return fct.__doc__.strip().split("\n")[0].strip()
    except AttributeError:
        return ""


def _command_name(fct_name):
    return fct_name.replace("_", " ")


def _print_generic_help(fcts):
    """
    Small helper function printing a generic help message.
    """
    print(80 * "#")
    header = ("{default_style}downclosed{reset_style} - online selection "
              "under downward-closed constraints  [Version {version}]"
              .format(
                  default_style=colorama.Style.BRIGHT + colorama.Fore.WHITE +
                  colorama.Back.BLACK,
                  reset_style=colorama.Style.RESET_ALL,
                  version=downclosed.__version__))
    print("    " + header)
    print(80 * "#")
    print("\n{cmd}usage: downclosed [--help] COMMAND [ARGS]{reset}\n".format(
        cmd=colorama.Style.BRIGHT + colorama.Fore.RED,
        reset=colorama.Style.RESET_ALL))

    # Group the functions. Functions with no group will be placed in the group
    # "Misc".
    fct_groups = {}
    for fct_name, fct in fcts.items():
        group_name = fct.group_name if hasattr(fct, "group_name") else "Misc"
        fct_groups.setdefault(group_name, {})
        fct_groups[group_name][fct_name] = fct

    # Print in a grouped manner.
    for group_name in sorted(fct_groups.keys()):
        print("{0:=>25s} Functions".format(" " + group_name))
        if group_name in COMMAND_GROUP_DOCS:
            print("    %s" % COMMAND_GROUP_DOCS[group_name])
        current_fcts = fct_groups[group_name]
        for name in sorted(current_fcts.keys()):
            print("%s  %22s: %s%s%s" % (colorama.Fore.YELLOW,
                  _command_name(name), colorama.Fore.BLUE,
                  _get_cmd_description(fcts[name]),
                  colorama.Style.RESET_ALL))
    print("\nTo get help for a specific function type")
    print("\tdownclosed help FUNCTION  or\n\tdownclosed FUNCTION --help")


def _get_argument_parser(fct, fct_name):
    """
    Helper function to create a proper argument parser with the global
    flags every command understands.
    """
    parser = argparse.ArgumentParser(
        prog="downclosed %s" % _command_name(fct_name),
        description=_get_cmd_description(fct))

    parser.add_argument("--seed", type=int, default=0,
                        help="master seed all randomness is derived from")
    parser.add_argument("--trials", type=int,
                        help="number of trials (sampled pairs for the "
                             "verification commands)")
    parser.add_argument("--out", help="output file")
    parser.add_argument("--threads", type=int,
                        help="worker processes. Defaults to all cores")
    parser.add_argument("--strict", action="store_true",
                        help="abort on the first failing row")
    parser.add_argument("--debug", action="store_true",
                        help="log per-phase diagnostics")
    parser.add_argument("--quiet", action="store_true",
                        help="only print warnings, errors and results")
    parser.add_argument(
        "--ipdb",
        help="If true, a debugger will be launched upon encountering an "
             "exception. Requires ipdb.",
        action="store_true")
    return parser


def _get_functions():
    """
    Get a dictionary of all CLI functions defined in this file.
    """
    fcts = {fct_name[len(FCT_PREFIX):]: fct for (fct_name, fct) in
            globals().items()
            if fct_name.startswith(FCT_PREFIX) and hasattr(fct, "__call__")}
    return fcts


def _resolve_command(args, fcts):
    """
    Maps the leading words of the argument list onto a function name.

    :returns: Tuple ``(function name or None, remaining arguments)``.
    """
    words = [_i.lower().replace("-", "_") for _i in args[:2]]
    if len(words) == 2:
        name = COMMAND_ALIASES.get("_".join(words), "_".join(words))
        if name in fcts:
            return name, args[2:]
    name = words[0].replace("-", "_")
    if name in fcts:
        return name, args[1:]
    return None, args[1:]


def main():
    """
    Main entry point for the downclosed command line interface.

    Essentially just dispatches the different commands to the corresponding
    functions. Also provides some convenience functionality like error catching
    and printing the help.
    """
    fcts = _get_functions()
    args = sys.argv[1:]

    if len(args) == 1 and args[0] == "--version":
        print("downclosed version %s" % downclosed.__version__)
        sys.exit(0)

    # Print the generic help/introduction.
    if not args or args == ["help"] or args == ["--help"]:
        _print_generic_help(fcts)
        sys.exit(0)

    # Map "downclosed help CMD" to "downclosed CMD --help"
    if args[0].lower() == "help":
        fct_name, _ = _resolve_command(args[1:], fcts)
        if fct_name is None:
            sys.stderr.write("downclosed: Invalid command. See "
                             "'downclosed --help'.\n")
            sys.exit(2)
        further_args = ["--help"]
    else:
        fct_name, further_args = _resolve_command(args, fcts)

    # Unknown function.
    if fct_name is None:
        attempted = " ".join(args[:2]).lower()
        sys.stderr.write("downclosed: '{fct_name}' is not a downclosed "
                         "command. See 'downclosed --help'.\n".format(
                             fct_name=attempted))
        # Attempt to fuzzy match commands.
        names = [_command_name(_i) for _i in fcts.keys()]
        close_matches = sorted(difflib.get_close_matches(attempted, names,
                                                         n=4))
        if len(close_matches) == 1:
            sys.stderr.write("\nDid you mean this?\n\t{match}\n".format(
                match=close_matches[0]))
        elif close_matches:
            sys.stderr.write(
                "\nDid you mean one of these?\n    {matches}\n".format(
                    matches="\n    ".join(close_matches)))
        sys.exit(2)

    func = fcts[fct_name]

    # Create a parser and pass it to the single function.
    parser = _get_argument_parser(func, fct_name)

    # Now actually call the function.
    try:
        func(parser, further_args)
    except DownClosedError as e:
        print(colorama.Fore.YELLOW + ("Error: %s\n" % str(e)) +
              colorama.Style.RESET_ALL)
        sys.exit(e.exit_code)
    except Exception:
        args, _ = parser.parse_known_args(further_args)
        # Launch ipdb debugger right at the exception point if desired.
        # Greatly eases debugging things. Requires ipdb to be installed.
        if args.ipdb:
            import ipdb  # NOQA
            _, _, tb = sys.exc_info()
            traceback.print_exc()
            ipdb.post_mortem(tb)
        else:
            print(colorama.Fore.RED)
            traceback.print_exc()
            print(colorama.Style.RESET_ALL)
        sys.exit(1)


if __name__ == "__main__":
    main()
