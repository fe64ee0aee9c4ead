# Copyright (C) 2017 Marco Barisione
# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

from __future__ import absolute_import, division, print_function

import io
import json
import os
import shutil
import tempfile
import unittest


class TempDirMixin(unittest.TestCase):
    '''
    Mixin taking care of having a temporary directory for input and output files which
    is cleaned in `tearDown`.
    '''

    def setUp(self):
        super(TempDirMixin, self).setUp()

        self.tmp_dir = os.path.realpath(tempfile.mkdtemp())

    def tearDown(self):
        super(TempDirMixin, self).tearDown()

        shutil.rmtree(self.tmp_dir)

    def tmp_path(self, *components):
        return os.path.join(self.tmp_dir, *components)

    def make_tmp_sub_dir(self):
        '''
        Create a directory inside this test's temporary directory.

        Return value:
            The path to an existing empty temporary directory.
        '''
        return tempfile.mkdtemp(dir=self.tmp_dir)

    def write_tmp_file(self, name, content):
        '''
        Write `content` into the file called `name` in the temporary directory.

        content:
            A string or, for any other value, an object to write as JSON.
        Return value:
            The path of the file.
        '''
        path = self.tmp_path(name)
        if not isinstance(content, str):
            content = json.dumps(content, indent=4)
        with io.open(path, 'w', encoding='utf-8') as output_file:
            output_file.write(content)
        return path

    def read_tmp_file(self, *components):
        with io.open(self.tmp_path(*components), encoding='utf-8') as input_file:
            return input_file.read()

    def read_tmp_json(self, *components):
        return json.loads(self.read_tmp_file(*components))
