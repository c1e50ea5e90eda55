#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Session component.

A session is the root of everything else: it owns the output folder, the
master seed, the parallelism settings and the logger, and it sets up and
registers all other components.

It is important to not import necessary things at the module level to make
importing this file as fast as possible. Otherwise using the command line
interface feels sluggish and slow.

:license: GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import functools
import os

from downclosed import DownClosedInputError, __version__
from downclosed.tools.colored_logger import ColoredLogger
from downclosed.tools.keyed_random import derive_seed

from .communicator import Communicator
from .component import Component
from .experiments import ExperimentsComponent
from .instances import InstancesComponent
from .oracles import OraclesComponent
from .probing import ProbingComponent
from .prophet import ProphetComponent
from .secretary import SecretaryComponent


class Session(Component):
    """
    Root component of a set of runs.

    :param output_folder: All result files end up here. Created if
        necessary. Defaults to the current working directory.
    :param seed: Master seed. Every random draw is keyed on it.
    :param threads: Worker processes for trial loops. ``None`` means all
        cores.
    :param strict: Abort experiments on the first failing row.
    :param debug: Log per-phase diagnostics.
    :param quiet: Only warnings and errors reach the screen.
    :param log_filename: Optional file receiving all log messages.
    """
    def __init__(self, output_folder=None, seed=0, threads=1, strict=False,
                 debug=False, quiet=False, log_filename=None):
        self.__setup_paths(output_folder)
        try:
            self.seed = int(seed)
        except (TypeError, ValueError):
            raise DownClosedInputError("The seed must be an integer.")
        if threads is not None and int(threads) < 1:
            raise DownClosedInputError("Threads must be positive.")
        self.threads = None if threads is None else int(threads)
        self.strict = bool(strict)
        self.debug = bool(debug)
        self.quiet = bool(quiet)
        self.logger = ColoredLogger(log_filename=log_filename, debug=debug,
                                    quiet=quiet)

        # Setup the communicator and register this component.
        self.__comm = Communicator()
        super(Session, self).__init__(self.__comm, "session")
        self.__setup_components()

    def __setup_paths(self, output_folder):
        root = os.path.abspath(output_folder or os.getcwd())
        if os.path.exists(root) and not os.path.isdir(root):
            raise DownClosedInputError("Output folder '%s' is a file." %
                                       root)
        self.paths = {"root": root}

    def __setup_components(self):
        InstancesComponent(communicator=self.comm,
                           component_name="instances")
        SecretaryComponent(communicator=self.comm,
                           component_name="secretary")
        ProphetComponent(communicator=self.comm, component_name="prophet")
        ProbingComponent(communicator=self.comm, component_name="probing")
        OraclesComponent(communicator=self.comm, component_name="oracles")
        ExperimentsComponent(communicator=self.comm,
                             component_name="experiments")

    def __str__(self):
        ret_str = "downclosed %s session\n" % __version__
        ret_str += "\tOutput folder: %s\n" % self.paths["root"]
        ret_str += "\tMaster seed: %i\n" % self.seed
        ret_str += "\tThreads: %s\n" % (
            "all cores" if self.threads is None else self.threads)
        if self.strict:
            ret_str += "\tStrict mode: abort on the first failing row\n"
        return ret_str

    def get_output_filename(self, filename):
        """
        Absolute path of a result file; relative names are placed inside
        the output folder, whose directories are created as needed.
        """
        if not os.path.isabs(filename):
            filename = os.path.join(self.paths["root"], filename)
        folder = os.path.dirname(filename)
        if folder and not os.path.exists(folder):
            os.makedirs(folder)
        return filename

    def derive_seed(self, tag, *index):
        """
        Seed for one purpose, derived from the master seed.

        >>> session = Session(seed=3, quiet=True)
        >>> session.derive_seed("prophet", 1) == session.derive_seed(
        ...     "prophet", 1)
        True
        """
        return derive_seed(self.seed, tag, *index)

    def get_trial_map(self, threads=None):
        """
        Order preserving map over trial argument tuples, fanned out over the
        configured number of worker processes.
        """
        from downclosed.tools.parallel_helpers import trial_map
        return functools.partial(
            trial_map, threads=self.threads if threads is None else threads)

    def progress(self, iterable, count, label="Progress: "):
        """
        Iterates ``iterable`` while showing a progress bar unless the
        session is quiet.
        """
        if self.quiet or count <= 1:
            for item in iterable:
                yield item
            return
        import progressbar
        widgets = [label, progressbar.Percentage(),
                   progressbar.Bar(), "", progressbar.ETA()]
        pbar = progressbar.ProgressBar(widgets=widgets, maxval=count).start()
        for _i, item in enumerate(iterable):
            yield item
            pbar.update(_i + 1)
        pbar.finish()
