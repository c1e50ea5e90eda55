#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Test cases for the CLI interface.

Most tests run the real commands on instances small enough to finish in a
fraction of a second. Some are simple mock tests only asserting that the
proper methods are called.

In many cases ``patch.assert_called_once_with()`` and
``assert patch.call_count == 1`` is used. That is because it is really easy
to mistype the method and then mock just ignores it resulting in nothing
being actually tested.

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import collections
import csv
from fractions import Fraction
import os

import mock

from downclosed.experiment_xml import ExperimentConfig
from downclosed.scripts import downclosed_cli

from downclosed.tests.testing_helpers import cli  # NOQA
from downclosed.tests.testing_helpers import DATA

# Get a list of all available commands.
CMD_LIST = [key.replace("dc_", "").replace("_", " ")
            for (key, value) in downclosed_cli.__dict__.items()
            if (key.startswith("dc_") and callable(value))]

PROPHET = "--p 7 --branching 2,2 --subset-sizes 1,1 --threads 1"
PROBING = "--p 101 --arities 2,2 --depths 1,1 --threads 1"


def _read_csv(filename):
    with open(filename, "rt", newline="") as fh:
        return list(csv.DictReader(fh))


def test_test_sanity():
    """
    Quick test to test the tests...
    """
    assert len(CMD_LIST) >= 15
    assert "prophet verify" in CMD_LIST
    assert "experiment run" in CMD_LIST


def test_invocation_without_parameters(cli):
    """
    Tests the invocation without any parameters.
    """
    default_output = cli.run("downclosed")
    # Should be the same as if invoked with --help.
    assert default_output == cli.run("downclosed --help")
    # It should furthermore contain a list of all commands.
    for cmd in CMD_LIST:
        assert cmd in default_output.stdout


def test_help_messages(cli):
    for cmd in CMD_LIST:
        # Both invocations should work
        assert cli.run("downclosed %s --help" % cmd) == \
            cli.run("downclosed help %s" % cmd)
        help_string = cli.run("downclosed %s --help" % cmd).stdout
        assert help_string.startswith("usage: downclosed %s" % cmd)
        assert "show this help message and exit" in help_string
        # The global flags are available everywhere.
        assert "--seed" in help_string
        assert "--threads" in help_string


def test_command_tolerance(cli):
    """
    Upper and lowercase subcommands are not distinguished.
    """
    for command in ("oracle crosscheck", "ORACLE crosscheck",
                    "Oracle CrossCheck"):
        with mock.patch("downclosed.scripts.downclosed_cli."
                        "dc_oracle_crosscheck") as patch:
            cli.run("downclosed %s" % command)
        assert patch.call_count == 1


def test_unknown_and_fuzzy_commands(cli):
    out = cli.run("downclosed asdflkjaskldfj")
    assert cli.exit_code == 2
    assert out.stdout == ""
    assert out.stderr == ("downclosed: 'asdflkjaskldfj' is not a downclosed "
                          "command. See 'downclosed --help'.\n")

    out = cli.run("downclosed prophet verfy")
    assert cli.exit_code == 2
    assert "Did you mean" in out.stderr
    assert "prophet verify" in out.stderr


def test_cli_parsing_corner_cases(cli):
    out = cli.run("downclosed help --help")
    assert out.stdout == ""
    assert out.stderr == ("downclosed: Invalid command. See "
                          "'downclosed --help'.\n")
    assert cli.exit_code == 2


def test_version_str(cli):
    out = cli.run("downclosed --version")
    assert out.stdout.startswith("downclosed version ")
    assert cli.exit_code == 0


def test_input_errors_exit_with_two(cli):
    out = cli.run("downclosed prophet gen --L 0")
    assert cli.exit_code == 2
    assert "Error: At least one layer is required." in out.stdout

    out = cli.run("downclosed secretary run")
    assert cli.exit_code == 2
    assert "Either an instance file or --n is required." in out.stdout

    cli.run("downclosed secretary run --n 9 --compare --claim")
    assert cli.exit_code == 2

    cli.run("downclosed oracle offline does_not_exist.json")
    assert cli.exit_code == 2

    out = cli.run("downclosed oracle offline")
    assert cli.exit_code == 2
    assert "An instance file is required." in out.stdout


def test_capacity_errors_exit_with_three(cli):
    out = cli.run("downclosed prophet gen %s --node-cap 5" % PROPHET)
    assert cli.exit_code == 3
    assert "node cap" in out.stdout
    assert not os.path.exists(os.path.join(cli.folder,
                                           "prophet_instance.json"))

    # Lazy instances do not materialize anything.
    cli.run("downclosed prophet gen %s --node-cap 5 --lazy --quiet" %
            PROPHET)
    assert cli.exit_code == 0
    assert os.path.exists(os.path.join(cli.folder, "prophet_instance.json"))


def test_verification_failures_exit_with_four(cli):
    out = cli.run("downclosed prophet verify --p 101 --branching 2,2 "
                  "--subset-sizes 4,4 --duplicate-second-family --trials 20 "
                  "--threads 1 --quiet")
    assert cli.exit_code == 4
    assert "violate their intersection bound" in out.stdout
    rows = _read_csv(os.path.join(cli.folder, "prophet_verify.csv"))
    assert rows[0]["same_violations"] == "20"


def test_prophet_commands(cli):
    out = cli.run("downclosed prophet gen %s --instance-seed 4" % PROPHET)
    assert cli.exit_code == 0
    assert "Prophet construction, desk mode, L=2, p=7" in out.stdout
    descriptor = os.path.join(cli.folder, "prophet_instance.json")
    assert os.path.exists(descriptor)

    out = cli.run("downclosed prophet exact --instance prophet_instance.json")
    assert cli.exit_code == 0
    assert "hindsight" in out.stdout
    assert "optimal-online" in out.stdout
    assert "greedy-commit" in out.stdout

    out = cli.run("downclosed oracle online prophet_instance.json")
    assert cli.exit_code == 0
    assert "optimal-online" in out.stdout

    out = cli.run("downclosed oracle opt-online --instance "
                  "prophet_instance.json")
    assert cli.exit_code == 0
    assert "optimal-online" in out.stdout

    out = cli.run("downclosed oracle online prophet_instance.json "
                  "--instance other.json")
    assert cli.exit_code == 2
    assert "Two different instance files given." in out.stdout

    # A probing command refuses a prophet descriptor.
    cli.run("downclosed oracle adaptive prophet_instance.json")
    assert cli.exit_code == 2

    cli.run("downclosed prophet verify --p 10007 --branching 2,2 "
            "--subset-sizes 1,1 --trials 30 --threads 1 --quiet")
    assert cli.exit_code == 0
    rows = _read_csv(os.path.join(cli.folder, "prophet_verify.csv"))
    assert [_i["layer"] for _i in rows] == ["1", "2"]
    assert os.path.exists(os.path.join(
        cli.folder, "prophet_verify.csv.provenance.xml"))


def test_prophet_simulation(cli):
    out = cli.run("downclosed prophet simulate %s --trials 20 --plot "
                  "--policies greedy-commit skip-small-layers(1) "
                  "--out gap.csv --quiet" % PROPHET)
    assert cli.exit_code == 0
    assert "hindsight_mean" in out.stdout
    rows = _read_csv(os.path.join(cli.folder, "gap.csv"))
    assert len(rows) == 1
    assert rows[0]["trials"] == "20"
    assert rows[0]["best"] in ("greedy-commit", "skip-small-layers(1)")
    assert os.path.exists(os.path.join(cli.folder, "gap.png"))


def test_probing_commands(cli):
    cli.run("downclosed probing gen %s --instance-seed 2 --quiet" % PROBING)
    assert cli.exit_code == 0
    assert os.path.exists(os.path.join(cli.folder, "probing_instance.json"))

    out = cli.run("downclosed probing exact --instance probing_instance.json")
    assert cli.exit_code == 0
    for name in ("adaptive", "nonadaptive", "gap", "probed"):
        assert name in out.stdout

    out = cli.run("downclosed oracle adaptive probing_instance.json")
    assert cli.exit_code == 0
    assert "gap" in out.stdout

    out = cli.run("downclosed oracle opt-adaptive --instance "
                  "probing_instance.json")
    assert cli.exit_code == 0
    assert "gap" in out.stdout

    cli.run("downclosed probing greedy %s --trials 50 --quiet" % PROBING)
    assert cli.exit_code == 0
    rows = _read_csv(os.path.join(cli.folder, "probing_greedy.csv"))
    assert [_i["level"] for _i in rows] == ["0", "1"]

    cli.run("downclosed probing simulate %s --trials 10 --caterpillars 4 "
            "--quiet" % PROBING)
    assert cli.exit_code == 0
    rows = _read_csv(os.path.join(cli.folder, "probing_simulate.csv"))
    assert rows[0]["caterpillars"] == "4"

    cli.run("downclosed probing verify --p 10007 --arities 2,2 --depths 1,1 "
            "--trials 30 --threads 1 --quiet")
    assert cli.exit_code == 0


def test_secretary_commands(cli):
    cli.run("downclosed secretary gen 8 --generator partition --quiet")
    assert cli.exit_code == 0
    instance = os.path.join(cli.folder, "secretary_instance.json")
    assert os.path.exists(instance)

    out = cli.run("downclosed oracle offline secretary_instance.json")
    assert cli.exit_code == 0
    assert "Optimal set: {" in out.stdout
    assert "Value: " in out.stdout

    out = cli.run("downclosed secretary run --instance "
                  "secretary_instance.json --trials 20 --threads 1 --quiet")
    assert cli.exit_code == 0
    assert "mean_value" in out.stdout
    rows = _read_csv(os.path.join(cli.folder, "secretary_summary.csv"))
    assert rows[0]["n"] == "8" and rows[0]["trials"] == "20"

    cli.run("downclosed secretary run --n 9 --trials 5 --per-trial "
            "--threads 1 --quiet --out trials.csv")
    assert cli.exit_code == 0
    rows = _read_csv(os.path.join(cli.folder, "trials.csv"))
    assert [_i["trial"] for _i in rows] == ["0", "1", "2", "3", "4"]


def test_example_secretary_instance(cli):
    out = cli.run("downclosed oracle offline %s" %
                  os.path.join(DATA, "secretary_example.json"))
    assert cli.exit_code == 0
    assert "Optimal set: {2}" in out.stdout
    assert "Value: 2" in out.stdout


def test_oracle_crosscheck(cli):
    out = cli.run("downclosed oracle crosscheck --trials 20 --threads 1 "
                  "--quiet")
    assert cli.exit_code == 0
    assert "mismatches" in out.stdout
    rows = _read_csv(os.path.join(cli.folder, "oracle_crosscheck.csv"))
    assert rows == [collections.OrderedDict([
        ("point", "0"), ("queries", "20"), ("mismatches", "0"),
        ("error", "")])]


def test_experiment_run_and_rerun_from_provenance(cli):
    cli.run("downclosed experiment run --quiet --config %s" %
            os.path.join(DATA, "prophet_experiment.xml"))
    assert cli.exit_code == 0
    filename = os.path.join(cli.folder, "prophet_gap.csv")
    rows = _read_csv(filename)
    assert [_i["instance_seed"] for _i in rows] == ["1", "2"]
    assert all(_i["trials"] == "20" for _i in rows)

    # The sidecar alone reproduces the result file.
    cli.run("downclosed experiment run --quiet --out again.csv --config "
            "prophet_gap.csv.provenance.xml")
    assert cli.exit_code == 0
    with open(filename, "rb") as fh:
        first = fh.read()
    with open(os.path.join(cli.folder, "again.csv"), "rb") as fh:
        assert fh.read() == first


def test_experiment_run_reports_failed_points(cli):
    config = ExperimentConfig("prophet", "simulate",
                              parameters={"L": 2, "branching": [2, 2],
                                          "subset_sizes": [1, 1]},
                              sweep={"p": [1, 7]}, trials=5, threads=1,
                              output="partial.csv")
    config.write(os.path.join(cli.folder, "partial.xml"))
    out = cli.run("downclosed experiment run --quiet --config partial.xml")
    assert cli.exit_code == 1
    assert "1 sweep point(s) failed." in out.stdout
    rows = _read_csv(os.path.join(cli.folder, "partial.csv"))
    assert rows[0]["error"].startswith("DownClosedInputError: ")
    assert rows[1]["error"] == ""

    # Strict mode aborts instead.
    cli.run("downclosed experiment run --quiet --strict --config "
            "partial.xml")
    assert cli.exit_code == 2


def test_experiment_run_flags_override_the_file(cli):
    """
    Mock test: the command line flags end up in the configuration.
    """
    filename = os.path.join(cli.folder, "dummy.csv")
    with open(filename, "wt") as fh:
        fh.write("point,error\n0,\n")
    with mock.patch("downclosed.components.experiments."
                    "ExperimentsComponent.run_experiment") as patch:
        patch.return_value = {"csv": filename, "failures": 0}
        cli.run("downclosed experiment run --trials 3 --out x.csv "
                "--threads 2 --strict --config %s" %
                os.path.join(DATA, "prophet_experiment.xml"))
    assert cli.exit_code == 0
    assert patch.call_count == 1
    config = patch.call_args[0][0]
    assert config.trials == 3
    assert config.output == "x.csv"
    assert config.threads == 2
    assert config.strict is True
    assert config.parameters["activation_prob"] == Fraction(1, 2)


def test_oracle_offline_is_passed_the_instance(cli):
    with mock.patch("downclosed.components.oracles.OraclesComponent."
                    "offline") as patch:
        patch.return_value = collections.OrderedDict([
            ("selection", (0, 1)), ("value", Fraction(3, 2))])
        out = cli.run("downclosed oracle offline %s" %
                      os.path.join(DATA, "secretary_example.json"))
    assert patch.call_count == 1
    f, oracle = patch.call_args[0]
    assert f.n == 3 and oracle.n == 3
    assert "Optimal set: {0, 1}" in out.stdout


def test_experiment_list(cli):
    out = cli.run("downclosed experiment list")
    assert cli.exit_code == 0
    for word in ("secretary", "prophet", "probing", "oracle", "crosscheck",
                 "ratio_high"):
        assert word in out.stdout
