#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Experiment component: runs an experiment configuration over its sweep and
writes the result CSV, the provenance sidecar and optionally a plot.

Every experiment runs in a session of its own seeded with the
configuration's seed, so a configuration alone determines the CSV bytes.

:license: GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import collections
import csv
from fractions import Fraction
import hashlib
import io
import math
import os
import time

from downclosed import DownClosedError, DownClosedInputError, __version__

from .component import Component

SCHEMA_VERSION = 1

# Column layout of every (kind, operation). Rows additionally start with the
# sweep point index and the swept parameters and end with an error column.
COLUMNS = collections.OrderedDict([
    (("secretary", "run"),
     ["trial", "seed", "branch", "degenerate", "selected", "value",
      "tau_alg", "drop_violations", "offline_opt", "ratio"]),
    (("secretary", "summary"),
     ["n", "inverse_log_n", "trials", "mean_value", "offline_opt", "ratio",
      "ratio_low", "ratio_high"]),
    (("secretary", "compare"),
     ["n", "trials", "implementable_mean", "implementable_low",
      "implementable_high", "analysis_mean", "analysis_low",
      "analysis_high", "overlapping"]),
    (("secretary", "claim"),
     ["n", "trials", "frequency", "violations", "max_element_share"]),
    (("prophet", "simulate"),
     ["L", "p", "trials", "hindsight_mean", "best", "best_mean", "ratio",
      "ratio_low", "ratio_high"]),
    (("prophet", "verify"),
     ["layer", "pairs", "max_same", "bound", "same_violations",
      "max_different", "bound_different", "different_violations",
      "union_bound"]),
    (("probing", "simulate"),
     ["L", "p", "trials", "caterpillars", "adaptive_mean", "best",
      "best_mean", "ratio", "ratio_low", "ratio_high", "lower_bound"]),
    (("probing", "verify"),
     ["layer", "pairs", "max_cross", "bound_cross", "cross_violations",
      "max_same", "bound_same", "same_violations", "cross_union_bound",
      "same_union_bound"]),
    (("probing", "greedy"),
     ["level", "layer", "height", "frequency", "active_fraction", "model",
      "sigma", "within_3_sigma"]),
    (("oracle", "crosscheck"),
     ["queries", "mismatches"]),
])

# Parameters consumed by the operations themselves. Everything else is a
# construction parameter.
OPERATION_KEYS = ("generator", "n", "clauses", "group_size", "policies",
                  "caterpillars", "instance_seed")


def schema_name(kind, operation):
    return "%s-%s/%i" % (kind, operation, SCHEMA_VERSION)


def format_cell(value):
    """
    Deterministic text of a CSV cell.

    >>> format_cell(Fraction(1, 3)), format_cell(True), format_cell(None)
    ('0.3333333333333333', 'true', '')
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, (Fraction, float)):
        value = float(value)
        if math.isinf(value):
            return "inf"
        return repr(value)
    if isinstance(value, (list, tuple)):
        return " ".join(format_cell(_i) for _i in value)
    return str(value)


def _construction_params(point):
    return dict((_k, _v) for _k, _v in point.items()
                if _k not in OPERATION_KEYS)


class ExperimentsComponent(Component):
    """
    :param communicator: The communicator instance.
    :param component_name: The name of this component for the communicator.
    """
    def __init__(self, communicator, component_name):
        super(ExperimentsComponent, self).__init__(communicator,
                                                   component_name)

    @staticmethod
    def list_operations():
        return ["%s %s" % _i for _i in COLUMNS.keys()]

    def run_experiment(self, config, output_folder=None):
        """
        Executes an :class:`~downclosed.experiment_xml.ExperimentConfig`.

        :param output_folder: Where relative output paths are resolved.
            Defaults to this session's output folder.
        :returns: Dictionary with the paths of the written files and the
            number of failed sweep points.
        """
        from downclosed.components.session import Session
        from downclosed.experiment_xml import provenance_xml

        key = (config.kind, config.operation)
        if key not in COLUMNS:
            raise DownClosedInputError(
                "Unknown experiment '%s %s'. Available: %s" % (
                    config.kind, config.operation,
                    ", ".join(self.list_operations())))
        if config.trials < 1:
            raise DownClosedInputError("An experiment needs at least one "
                                       "trial.")
        outer = self.comm.session
        session = Session(
            output_folder=output_folder or outer.paths["root"],
            seed=config.seed, threads=config.threads, strict=config.strict,
            debug=outer.debug, quiet=outer.quiet)
        logger = outer.logger
        logger.info(str(config).rstrip())

        start = time.time()
        points = config.sweep_points()
        sweep_names = [_i for _i in config.sweep.keys()
                       if _i not in COLUMNS[key]]
        header = ["point"] + sweep_names + COLUMNS[key] + ["error"]
        rows, failures = [], 0
        for index, point in session.progress(enumerate(points), len(points),
                                             "Sweep points: "):
            point_rows, error = self._run_point(session, config, point)
            if error is not None:
                failures += 1
                logger.error("Sweep point %i failed: %s" % (index, error))
                point_rows = [{"error": error}]
            for row in point_rows:
                full = dict(row)
                full["point"] = index
                for name in sweep_names:
                    full[name] = point[name]
                rows.append([format_cell(full.get(_i)) for _i in header])

        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        content = buf.getvalue().encode("utf-8")

        csv_filename = session.get_output_filename(config.output)
        with open(csv_filename, "wb") as fh:
            fh.write(content)
        sidecar = csv_filename + ".provenance.xml"
        with open(sidecar, "wb") as fh:
            fh.write(provenance_xml(
                config, __version__, time.time() - start,
                hashlib.sha256(content).hexdigest(),
                schema_name(*key)))
        logger.info("Wrote %i rows to '%s' (provenance in '%s')." % (
            len(rows), csv_filename, sidecar))

        plot_filename = None
        if config.plot:
            plot_filename = self.plot_results(
                header, rows, list(config.sweep.keys()), os.path.splitext(
                    csv_filename)[0] + os.path.extsep + "png")
        if failures:
            logger.warning("%i of %i sweep points failed." %
                           (failures, len(points)))
        return {"csv": csv_filename, "provenance": sidecar,
                "plot": plot_filename, "failures": failures}

    def _run_point(self, session, config, point):
        """
        Runs one sweep point. Module errors are returned as the error
        message, unless the session is strict.
        """
        from downclosed.tools.parallel_helpers import function_info

        handler = getattr(self, "_%s_%s" % (config.kind, config.operation))
        info = function_info()(handler)(session, config, point)
        for w in info.warnings:
            session.logger.warning(str(w.message))
        if info.exception is None:
            return info.result, None
        if session.strict or not isinstance(info.exception, DownClosedError):
            raise info.exception
        return None, "%s: %s" % (type(info.exception).__name__,
                                 info.exception)

    # Secretary operations.
    def _secretary_instance(self, session, config, point):
        if config.instance_file:
            return session.comm.instances.load_secretary(
                config.instance_file)
        if "n" not in point:
            raise DownClosedInputError(
                "Secretary experiments need an instance file or 'n'.")
        return session.comm.instances.generate_secretary(
            point.get("generator", "random"), int(point["n"]),
            clauses=int(point.get("clauses", 3)),
            group_size=point.get("group_size"))

    def _secretary_run(self, session, config, point):
        instance = self._secretary_instance(session, config, point)
        rows = session.comm.secretary.run(instance.f, instance.oracle,
                                          config.trials)
        for _i, row in enumerate(rows):
            row["trial"] = _i
        return rows

    def _secretary_summary(self, session, config, point):
        instance = self._secretary_instance(session, config, point)
        rows = session.comm.secretary.run(instance.f, instance.oracle,
                                          config.trials)
        summary = session.comm.secretary.summarize(rows)
        n = instance.f.n
        return [{
            "n": n, "inverse_log_n": 1.0 / math.log2(n) if n > 1 else None,
            "trials": len(rows), "mean_value": summary["value"].mean,
            "offline_opt": rows[0]["offline_opt"],
            "ratio": summary["ratio"].mean,
            "ratio_low": summary["ratio"].ci_low,
            "ratio_high": summary["ratio"].ci_high}]

    def _secretary_compare(self, session, config, point):
        instance = self._secretary_instance(session, config, point)
        a, b, overlapping = session.comm.secretary.compare_variants(
            instance.f, instance.oracle, config.trials)
        return [{
            "n": instance.f.n, "trials": config.trials,
            "implementable_mean": a.mean, "implementable_low": a.ci_low,
            "implementable_high": a.ci_high, "analysis_mean": b.mean,
            "analysis_low": b.ci_low, "analysis_high": b.ci_high,
            "overlapping": overlapping}]

    def _secretary_claim(self, session, config, point):
        instance = self._secretary_instance(session, config, point)
        result = session.comm.secretary.claim_frequency(
            instance.f, instance.oracle, config.trials)
        result["n"] = instance.f.n
        return [result]

    # Hardness constructions.
    def _construction(self, session, config, point, kind):
        if config.instance_file:
            return session.comm.instances.load_construction(
                config.instance_file, kind)
        component = getattr(session.comm, kind)
        params = component.get_params(**_construction_params(point))
        return component.generate(params, seed=point.get("instance_seed"))

    def _params(self, session, config, point, kind):
        if config.instance_file:
            return self._construction(session, config, point, kind).params
        return getattr(session.comm, kind).get_params(
            **_construction_params(point))

    @staticmethod
    def _simulation_seed(session, point, kind):
        if point.get("instance_seed") is None:
            return None
        return session.derive_seed(kind + "-simulate",
                                   int(point["instance_seed"]))

    def _prophet_simulate(self, session, config, point):
        params = self._params(session, config, point, "prophet")
        policies = point.get("policies")
        if isinstance(policies, str):
            policies = [policies]
        stats, _ = session.comm.prophet.simulate(
            params, config.trials, policies=policies,
            seed=self._simulation_seed(session, point, "prophet"))
        return [{
            "L": params.L, "p": params.p, "trials": stats.trials,
            "hindsight_mean": stats.benchmark.mean, "best": stats.best,
            "best_mean": stats.contenders[stats.best].mean,
            "ratio": stats.ratio, "ratio_low": stats.ratio_low,
            "ratio_high": stats.ratio_high}]

    def _prophet_verify(self, session, config, point):
        instance = self._construction(session, config, point, "prophet")
        reports = session.comm.prophet.verify(instance, config.trials)
        return [_i._asdict() for _i in reports]

    def _probing_simulate(self, session, config, point):
        params = self._params(session, config, point, "probing")
        caterpillars = int(point.get("caterpillars", 16))
        stats, _ = session.comm.probing.simulate(
            params, config.trials, caterpillars,
            seed=self._simulation_seed(session, point, "probing"))
        return [{
            "L": params.L, "p": params.p, "trials": stats.trials,
            "caterpillars": len(stats.contenders),
            "adaptive_mean": stats.benchmark.mean, "best": stats.best,
            "best_mean": stats.contenders[stats.best].mean,
            "ratio": stats.ratio, "ratio_low": stats.ratio_low,
            "ratio_high": stats.ratio_high,
            "lower_bound": stats.lower_bound}]

    def _probing_verify(self, session, config, point):
        instance = self._construction(session, config, point, "probing")
        reports = session.comm.probing.verify(instance, config.trials)
        return [_i._asdict() for _i in reports]

    def _probing_greedy(self, session, config, point):
        instance = self._construction(session, config, point, "probing")
        return session.comm.probing.greedy_statistics(instance,
                                                      config.trials)

    def _oracle_crosscheck(self, session, config, point):
        mismatches = session.comm.oracles.crosscheck(
            config.trials, raise_on_mismatch=session.strict)
        return [{"queries": config.trials, "mismatches": mismatches}]

    def plot_results(self, header, rows, sweep_names, filename):
        """
        Ratio against the first swept parameter (or the point index) with
        its confidence interval. Skipped for results without a ratio.
        """
        from matplotlib.figure import Figure

        if "ratio" not in header:
            self.comm.session.logger.warning(
                "Nothing to plot: the results have no ratio column.")
            return None
        x_name = sweep_names[0] if sweep_names else "point"
        if x_name not in header:
            x_name = "point"
        columns = dict((_j, _i) for _i, _j in enumerate(header))
        points = []
        for row in rows:
            if row[columns["error"]] or not row[columns["ratio"]]:
                continue
            try:
                x = float(row[columns[x_name]])
            except (KeyError, ValueError):
                x = float(row[columns["point"]])
            y = float(row[columns["ratio"]])
            if not math.isfinite(y):
                continue
            low = row[columns["ratio_low"]] if "ratio_low" in columns \
                else ""
            high = row[columns["ratio_high"]] if "ratio_high" in columns \
                else ""
            low = float(low) if low else y
            high = float(high) if high else y
            points.append((x, y, y - low, high - y))
        if not points:
            self.comm.session.logger.warning("Nothing to plot: no "
                                             "successful rows.")
            return None
        points.sort()
        fig = Figure(figsize=(6, 4))
        ax = fig.add_subplot(111)
        ax.errorbar([_i[0] for _i in points], [_i[1] for _i in points],
                    yerr=[[max(_i[2], 0) for _i in points],
                          [max(_i[3], 0) for _i in points]],
                    fmt="o-", capsize=3)
        ax.set_xlabel(x_name)
        ax.set_ylabel("ratio")
        ax.grid(True)
        fig.tight_layout()
        fig.savefig(filename, dpi=100)
        self.comm.session.logger.info("Wrote plot to '%s'." % filename)
        return filename
