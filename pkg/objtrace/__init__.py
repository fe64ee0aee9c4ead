# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

from __future__ import absolute_import, division, print_function

from .version import __version__
