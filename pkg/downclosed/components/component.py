#!/usr/bin/env python
# -*- coding: utf-8 -*-
from .communicator import Communicator


class Component(object):
    """
    Base class of the session, instance, problem, oracle and experiment
    components. Registers itself under ``component_name``; everything else
    is reached through ``self.comm``.
    """
    def __init__(self, communicator, component_name):
        if not isinstance(communicator, Communicator):
            raise TypeError("Components need a Communicator, not %s." %
                            type(communicator).__name__)
        self.comm = communicator
        self.component_name = component_name
        self.comm.register(component_name, self)

    def __repr__(self):
        return "<%s '%s'>" % (type(self).__name__, self.component_name)
