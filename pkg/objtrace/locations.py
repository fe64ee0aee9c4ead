# Copyright (C) 2017 Marco Barisione
# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

from __future__ import absolute_import, division, print_function

import os


def root_code_dir():
    '''
    The directory containing the objtrace package.

    Return value:
        The package directory.
    '''
    return os.path.dirname(os.path.abspath(__file__))


def data_path(name):
    '''
    The path of the data file called `name` shipped with the package.
    '''
    return os.path.join(root_code_dir(), 'data', name)


def squiral_objectives_path():
    '''
    The path of the example objective configuration for the Squiral problem.
    '''
    return data_path('squiral-objectives.json')
