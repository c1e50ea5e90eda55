#!/usr/bin/env python
# -*- coding: utf-8 -*-
import csv
import hashlib
import os

from lxml import etree
import mock
import pytest

from downclosed import DownClosedInputError
from downclosed.components.experiments import (COLUMNS, format_cell,
                                               schema_name)
from downclosed.components.session import Session
from downclosed.experiment_xml import ExperimentConfig
from downclosed.tests.testing_helpers import DATA

from downclosed.tests.testing_helpers import session, communicator  # NOQA

PROPHET = {"L": 2, "p": 7, "branching": [2, 2], "subset_sizes": [1, 1]}
PROBING = {"L": 2, "p": 101, "arities": [2, 2], "depths": [1, 1]}


def _read(filename):
    with open(filename, "rt", newline="") as fh:
        return list(csv.DictReader(fh))


def test_column_layouts():
    assert schema_name("prophet", "verify") == "prophet-verify/1"
    assert format_cell(float("inf")) == "inf"
    assert format_cell([1, 2]) == "1 2"
    assert format_cell("x") == "x"
    assert len(COLUMNS) == 10


def test_results_and_provenance(communicator, tmpdir):
    config = ExperimentConfig.from_file(
        os.path.join(DATA, "prophet_experiment.xml"))
    result = communicator.experiments.run_experiment(config)
    assert result["failures"] == 0
    assert result["plot"] is None
    assert result["csv"] == os.path.join(str(tmpdir), "prophet_gap.csv")

    with open(result["csv"], "rb") as fh:
        content = fh.read()
    assert content.startswith(b"point,instance_seed,L,p,trials,")
    assert content.endswith(b",\n")
    rows = _read(result["csv"])
    assert [_i["point"] for _i in rows] == ["0", "1"]

    sidecar = etree.parse(result["provenance"]).getroot()
    assert sidecar.tag == "provenance"
    assert sidecar.find("csv_sha256").text == \
        hashlib.sha256(content).hexdigest()
    assert sidecar.find("csv_schema").text == "prophet-simulate/1"
    assert ExperimentConfig.from_file(result["provenance"]) == config

    # Same configuration, same bytes. The session seed does not matter.
    config.output = "again.csv"
    other = Session(output_folder=str(tmpdir), seed=1234, quiet=True)
    again = other.comm.experiments.run_experiment(config)
    with open(again["csv"], "rb") as fh:
        assert fh.read() == content


@pytest.mark.parametrize("kind, operation, parameters, trials", [
    ("secretary", "run", {"n": 9, "generator": "partition"}, 4),
    ("secretary", "summary", {"n": 9, "generator": "partition"}, 4),
    ("secretary", "compare", {"n": 9, "generator": "partition"}, 4),
    ("secretary", "claim", {"n": 9, "generator": "partition"}, 10),
    ("prophet", "verify", dict(PROPHET, p=10007), 20),
    ("probing", "simulate", dict(PROBING, caterpillars=2), 4),
    ("probing", "verify", dict(PROBING, p=10007), 20),
    ("probing", "greedy", PROBING, 20),
    ("oracle", "crosscheck", {}, 10)])
def test_every_operation_writes_its_columns(communicator, kind, operation,
                                            parameters, trials):
    config = ExperimentConfig(kind, operation, parameters=parameters,
                              trials=trials, seed=2, threads=1,
                              output="%s_%s.csv" % (kind, operation))
    result = communicator.experiments.run_experiment(config)
    assert result["failures"] == 0
    with open(result["csv"], "rt", newline="") as fh:
        header = next(csv.reader(fh))
    assert header == ["point"] + COLUMNS[(kind, operation)] + ["error"]
    rows = _read(result["csv"])
    assert rows and all(_i["error"] == "" for _i in rows)
    if operation == "run":
        assert len(rows) == trials


def test_secretary_experiments_from_instance_files(communicator):
    config = ExperimentConfig(
        "secretary", "summary", trials=5, threads=1,
        instance_file=os.path.join(DATA, "secretary_example.json"))
    rows = _read(communicator.experiments.run_experiment(config)["csv"])
    assert rows[0]["n"] == "3"
    assert rows[0]["offline_opt"] == "2.0"


def test_failing_points(communicator):
    config = ExperimentConfig("prophet", "simulate", parameters=PROPHET,
                              sweep={"L": [0, 2]}, trials=4, threads=1)
    result = communicator.experiments.run_experiment(config)
    assert result["failures"] == 1
    rows = _read(result["csv"])
    assert rows[0]["error"] == \
        "DownClosedInputError: At least one layer is required."
    assert rows[0]["ratio"] == ""
    assert rows[1]["error"] == ""

    config.strict = True
    with pytest.raises(DownClosedInputError):
        communicator.experiments.run_experiment(config)


def test_unexpected_errors_are_not_swallowed(communicator):
    config = ExperimentConfig("oracle", "crosscheck", trials=3)
    with mock.patch("downclosed.components.experiments.ExperimentsComponent."
                    "_oracle_crosscheck") as patch:
        patch.side_effect = ValueError("boom")
        with pytest.raises(ValueError):
            communicator.experiments.run_experiment(config)
    assert patch.call_count == 1


def test_invalid_experiments(communicator):
    with pytest.raises(DownClosedInputError) as e:
        communicator.experiments.run_experiment(
            ExperimentConfig("prophet", "dance"))
    assert "prophet simulate" in str(e.value)
    config = ExperimentConfig("oracle", "crosscheck")
    config.trials = 0
    with pytest.raises(DownClosedInputError):
        communicator.experiments.run_experiment(config)
    config = ExperimentConfig("secretary", "run", trials=2)
    result = communicator.experiments.run_experiment(config)
    assert result["failures"] == 1


def test_plots(communicator, tmpdir):
    config = ExperimentConfig("prophet", "simulate", parameters=PROPHET,
                              sweep={"p": [7, 11]}, trials=6, threads=1,
                              output="sweep.csv", plot=True)
    result = communicator.experiments.run_experiment(config)
    assert result["plot"] == os.path.join(str(tmpdir), "sweep.png")
    assert os.path.exists(result["plot"])

    # Nothing to plot without a ratio column.
    config = ExperimentConfig("oracle", "crosscheck", trials=3, threads=1,
                              plot=True)
    assert communicator.experiments.run_experiment(config)["plot"] is None
