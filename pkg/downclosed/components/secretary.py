#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Secretary component: repeated runs of the online algorithm and the
measurements built on top of them.

:license: GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import collections
import math

from downclosed import DownClosedInputError
from downclosed import secretary
from downclosed.tools import stats_helpers

from .component import Component


def secretary_trial(f, oracle, trial_seed, ideal=False, debug=False):
    """
    One run of the full pipeline on a fresh random order. Module level so it
    can be shipped to worker processes.
    """
    record = secretary.run_secretary_pipeline(f, oracle, trial_seed,
                                              ideal=ideal)
    row = collections.OrderedDict()
    row["seed"] = trial_seed
    row["branch"] = record.branch
    row["degenerate"] = record.degenerate
    row["selected"] = len(record.selection)
    row["value"] = record.value
    row["tau_alg"] = record.tau_alg
    row["drop_violations"] = sum(
        1 for _i in record.phases if _i.drop_violation)
    if debug:
        row["phases"] = record.phases
    return row


class SecretaryComponent(Component):
    """
    Component running the secretary algorithm on explicit instances.

    :param communicator: The communicator instance.
    :param component_name: The name of this component for the communicator.
    """
    def __init__(self, communicator, component_name):
        super(SecretaryComponent, self).__init__(communicator,
                                                 component_name)

    def _log_phases(self, trial, phases):
        logger = self.comm.session.logger
        for phase in phases:
            logger.debug(
                "Trial %i, scale %s: opt %s (%i at scale), %i selected "
                "before, %i in phase, threshold %s%s" % (
                    trial, phase.scale, phase.opt_value, phase.opt_c_count,
                    phase.alg_before, phase.alg_c_count,
                    phase.density_threshold,
                    " (drop violation)" if phase.drop_violation else ""))

    def run(self, f, oracle, trials, ideal=False, tag="secretary-run"):
        """
        Runs the pipeline on ``trials`` independent random orders.

        :returns: List of per-trial rows, each extended with the offline
            optimum and the ratio achieved.
        """
        if trials < 1:
            raise DownClosedInputError("At least one trial is required.")
        session = self.comm.session
        opt = secretary.offline_optimum(f, oracle).value
        session.logger.info("Running %i secretary trials on %s (offline "
                            "optimum %s)." % (trials, f, opt))
        arguments = [(f, oracle, session.derive_seed(tag, _i), ideal,
                      session.debug) for _i in range(trials)]
        rows = session.get_trial_map()(secretary_trial, arguments)
        for _i, row in enumerate(rows):
            if "phases" in row:
                self._log_phases(_i, row.pop("phases"))
            row["offline_opt"] = opt
            row["ratio"] = float(row["value"] / opt) if opt else 1.0
        violations = sum(_i["drop_violations"] for _i in rows)
        if violations:
            session.logger.warning(
                "%i phase transitions lost more invariant mass than their "
                "scale allows." % violations)
        return rows

    def summarize(self, rows):
        """
        Mean value and mean ratio with confidence intervals.
        """
        return collections.OrderedDict([
            ("value", stats_helpers.estimate_mean([_i["value"]
                                                   for _i in rows])),
            ("ratio", stats_helpers.estimate_mean([_i["ratio"]
                                                   for _i in rows]))])

    def compare_variants(self, f, oracle, trials, confidence=0.99):
        """
        Runs the implementable algorithm and the analysis variant on the
        same orders, coins and labels.

        :returns: Tuple ``(implementable estimate, analysis estimate,
            overlapping)``.
        """
        implementable = self.run(f, oracle, trials, ideal=False,
                                 tag="variants")
        analysis = self.run(f, oracle, trials, ideal=True, tag="variants")
        a = stats_helpers.estimate_mean([_i["value"] for _i in implementable],
                                        confidence=confidence)
        b = stats_helpers.estimate_mean([_i["value"] for _i in analysis],
                                        confidence=confidence)
        return a, b, a.overlaps(b)

    def claim_frequency(self, f, oracle, trials):
        """
        How often the first third of a random order keeps less than a
        quarter of the offline optimum.
        """
        share = secretary.max_element_share(f, oracle)
        frequency, violations, trials = \
            secretary.claim_sample_optimum_frequency(
                f, oracle, trials, self.comm.session.derive_seed("claim"))
        self.comm.session.logger.info(
            "Sample optimum below a quarter in %i of %i orders (largest "
            "element share %s)." % (violations, trials, share))
        return collections.OrderedDict([
            ("frequency", frequency), ("violations", violations),
            ("trials", trials), ("max_element_share", share)])

    def ratio_sweep(self, sizes, trials, group_size=None):
        """
        Mean achieved fraction of the offline optimum on hidden-group
        instances of growing size.

        :returns: Tuple ``(rows, slope)`` where the slope is fitted against
            ``1 / log2 n``.
        """
        rows = []
        for n in sizes:
            instance = self.comm.instances.generate_secretary(
                "partition", n, group_size=group_size,
                seed=self.comm.session.derive_seed("sweep-instance", n))
            estimate = self.summarize(self.run(
                instance.f, instance.oracle, trials,
                tag="sweep-%i" % n))["ratio"]
            rows.append(collections.OrderedDict([
                ("n", n), ("inverse_log_n", 1.0 / math.log2(n)),
                ("ratio", estimate.mean), ("ratio_low", estimate.ci_low),
                ("ratio_high", estimate.ci_high)]))
        slope = None
        if len(rows) >= 2:
            slope = stats_helpers.fit_slope([_i["inverse_log_n"]
                                             for _i in rows],
                                            [_i["ratio"] for _i in rows])
        return rows, slope
