# Copyright (C) 2017 Marco Barisione
# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

from __future__ import absolute_import, division, print_function

import collections
import datetime
import os

from . import (
    configuration,
    pathutils,
    )

from .log import verbose


class Session(object):
    '''
    Tracks the configuration and the run directory of a single invocation.
    '''

    def __init__(self, config, output_dir=None, timestamp=True):
        '''
        Initialize a `Session` instance.

        config:
            A `configuration.RunConfig` instance.
        output_dir:
            The run directory; defaults to the "output-dir" option or, if that's not
            set, the current directory.
        timestamp:
            If false, report headers don't carry the time of the run, so that
            identical inputs give byte-identical outputs.
        '''
        self._config = config
        self._output_dir = output_dir or config.output_dir or os.getcwd()
        self._timestamp = timestamp
        self._inputs = collections.OrderedDict()

    @staticmethod
    def default_session(config_path=None):
        '''
        A `Session` using the configuration at `config_path` or the defaults.
        '''
        return Session(configuration.RunConfig(config_path))

    @property
    def config(self):
        '''
        The `configuration.RunConfig` instance for the session.
        '''
        return self._config

    @config.setter
    def config(self, config):
        self._config = config

    @property
    def output_dir(self):
        return self._output_dir

    @output_dir.setter
    def output_dir(self, output_dir):
        self._output_dir = os.path.abspath(output_dir)

    @property
    def timestamp(self):
        return self._timestamp

    @timestamp.setter
    def timestamp(self, timestamp):
        self._timestamp = timestamp

    def output_path(self, name):
        '''
        The path of the output file called `name` in the run directory.
        '''
        return os.path.join(self._output_dir, name)

    def record_input(self, role, path):
        '''
        Remember that the file at `path` was used as input `role`.
        '''
        self._inputs[role] = path

    def header(self, title):
        '''
        The first line of a text report.
        '''
        if not self._timestamp:
            return title
        return '%s (generated %s)' % (
            title,
            datetime.datetime.now().replace(microsecond=0).isoformat(' '))

    def write_run_files(self, command):
        '''
        Write the frozen configuration and the list of inputs into the run directory.
        '''
        pathutils.makedirs(self._output_dir)
        self._config.save(self.output_path('run-config.json'))
        pathutils.write_json(self.output_path('inputs.json'),
                             collections.OrderedDict((
                                 ('command', command),
                                 ('inputs', self._inputs),
                                 )))
        verbose('Run files written to "%s".' % self._output_dir)
