# Copyright (C) 2017 Marco Barisione
# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

from __future__ import absolute_import, division, print_function

import errno
import io
import json
import os

from .errors import (
    DataIOError,
    ParseError,
    )
from .log import verbose


def makedirs(dir_path):
    '''
    Create a directory and all the intermediate parent directories.

    This behaves like `os.makedirs` but doesn't raise an exception if the
    directory already exists.
    '''
    try:
        os.makedirs(dir_path)
    except OSError as exc:
        if exc.errno != errno.EEXIST or not os.path.isdir(dir_path):
            raise DataIOError('cannot create directory "%s": %s' % (dir_path, exc.strerror))


def read_text(path):
    '''
    Read the whole UTF-8 text file at `path`.

    A `DataIOError` is raised if the file cannot be read.
    '''
    verbose('Reading "%s".' % path)
    try:
        with io.open(path, 'r', encoding='utf-8') as text_file:
            return text_file.read()
    except (IOError, OSError) as exc:
        raise DataIOError('cannot read "%s": %s' % (path, exc.strerror or exc))
    except UnicodeDecodeError as exc:
        raise DataIOError('cannot read "%s": not valid UTF-8 (%s)' % (path, exc.reason))


def read_lines(path):
    '''
    The lines of the text file at `path`, for the line-delimited formats.
    '''
    return read_text(path).splitlines()


def read_json(path):
    '''
    Read and decode the JSON document at `path`.

    A `ParseError` carrying the line and column is raised for malformed documents.
    '''
    text = read_text(path)
    try:
        return json.loads(text)
    except ValueError as exc:
        raise ParseError('invalid JSON: %s' % getattr(exc, 'msg', exc),
                         path,
                         getattr(exc, 'lineno', None),
                         getattr(exc, 'colno', None))


def write_text(path, content):
    '''
    Write `content` to the file at `path`, creating the parent directories if needed.
    '''
    dir_path = os.path.dirname(path)
    if dir_path:
        makedirs(dir_path)

    verbose('Writing "%s".' % path)
    try:
        with io.open(path, 'w', encoding='utf-8', newline='\n') as text_file:
            text_file.write(content)
    except (IOError, OSError) as exc:
        raise DataIOError('cannot write "%s": %s' % (path, exc.strerror or exc))


def write_json(path, doc):
    '''
    Write `doc` as a JSON document indented by 4 spaces.
    '''
    write_text(path,
               json.dumps(doc,
                          indent=4,
                          separators=(',', ': '),
                          ensure_ascii=False) + '\n')
