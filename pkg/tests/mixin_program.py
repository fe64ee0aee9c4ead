# Copyright (C) 2017 Marco Barisione
# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

from __future__ import absolute_import, division, print_function

import sys

from objtrace import (
    configuration,
    log,
    program,
    runtime,
    )

from . import testutils
from .tracked import TrackedTestCase
from .mixin_tempdir import TempDirMixin


class ProgramMixin(TempDirMixin,
                   TrackedTestCase):
    '''
    A mixin running the objtrace command line in-process.
    '''

    def setUp(self):
        super(ProgramMixin, self).setUp()

        self._last_exit_code = None
        self.current_text = None

    def tearDown(self):
        log.set_verbose(False)
        super(ProgramMixin, self).tearDown()

    def run_objtrace(self, arguments, ignore_fail=False):
        '''
        Run objtrace as a module with a fresh session.

        The output is saved in `current_text` after objtrace terminates.

        arguments:
            The arguments to pass to objtrace (excluding argument 0, i.e. the program name).
        ignore_fail:
            If false, errors cause an assertion failure.
            If true, errors are ignored.
        Return value:
            The exit code.
        '''
        session = runtime.Session(configuration.RunConfig())

        self._last_exit_code = None
        self.current_text = 'INVALID'

        redirector = testutils.Redirector()
        try:
            with redirector:
                program.main(session, ['objtrace'] + arguments)
        except SystemExit as exc:
            self._last_exit_code = exc.code or 0
        finally:
            self.current_text = redirector.content.replace('\r\n', '\n')

        assert self._last_exit_code is not None, 'main() is supposed to raise SystemExit'

        if not ignore_fail and self._last_exit_code != 0:
            sys.stderr.write(
                '\n'
                'The output from the failing objtrace invokation is:\n'
                '================\n'
                '%s\n'
                '================\n'
                '\n' %
                self.current_text.strip())
            self.fail('objtrace failed unexpectedly, exit code is %d' % self._last_exit_code)

        return self._last_exit_code

    def assert_exit_success(self):
        if self._last_exit_code is None:
            self.fail('assert_exit_success called before running objtrace')

        self.assertEqual(self._last_exit_code, 0,
                         'objtrace was expected to have succeeded, but it didn\'t')

    def assert_exit_code(self, expected):
        if self._last_exit_code is None:
            self.fail('assert_exit_code called before running objtrace')

        self.assertEqual(self._last_exit_code, expected,
                         'unexpected exit code; the output was:\n%s' % self.current_text)
