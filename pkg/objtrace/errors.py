# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

from __future__ import absolute_import, division, print_function


class ObjtraceError(Exception):
    '''
    Base class for all the errors which are reported to the user instead of causing
    an internal error.

    Subclasses define `exit_code`, the code the program exits with when the error is
    not handled.
    '''

    exit_code = 1


class ValidationError(ObjtraceError):
    '''
    An input document is well-formed but violates its schema or its semantic rules.
    '''

    exit_code = 1

    def __init__(self, msg, path=None, position=None):
        '''
        Initialize a `ValidationError` instance.

        msg:
            The exception error message.
        path:
            The path of the file which caused the error or `None` if not known.
        position:
            A description of where in the document the problem is (for instance
            "$.children[2]" or "line 4") or `None`.
        '''
        super(ValidationError, self).__init__(msg)

        self._msg = msg
        self._path = path
        self._position = position

    @property
    def path(self):
        '''
        The path of the file which caused the error or `None`.
        '''
        return self._path

    @property
    def position(self):
        '''
        Where in the document the error was found or `None`.
        '''
        return self._position

    def with_path(self, path):
        '''
        Return a copy of the error which references the file at `path`.
        '''
        if self._path is not None:
            return self
        return self.__class__(self._msg, path=path, position=self._position)

    def __str__(self):
        parts = []
        if self._path is not None:
            parts.append(self._path)
        if self._position is not None:
            parts.append(str(self._position))

        if not parts:
            return self._msg

        return '%s: %s' % (': '.join(parts), self._msg)


class ParseError(ValidationError):
    '''
    A document could not be parsed at all.
    '''

    def __init__(self, msg, path=None, line=None, column=None):
        '''
        Initialize a `ParseError` instance.

        msg:
            The exception error message.
        path:
            The path of the file which caused the error or `None`.
        line:
            The 1-based line where the error was detected or `None`.
        column:
            The 1-based column where the error was detected or `None`.
        '''
        if line is not None and column is not None:
            position = 'line %d, column %d' % (line, column)
        elif line is not None:
            position = 'line %d' % line
        else:
            position = None

        super(ParseError, self).__init__(msg, path=path, position=position)

        self._line = line
        self._column = column

    @property
    def line(self):
        return self._line

    @property
    def column(self):
        return self._column

    def with_path(self, path):
        if self.path is not None:
            return self
        return ParseError(self._msg, path=path, line=self._line, column=self._column)


class ConfigError(ValidationError):
    '''
    The run configuration or an objective configuration is invalid.
    '''


class DataIOError(ObjtraceError):
    '''
    A file could not be read or written.
    '''

    exit_code = 2


class InvariantViolation(ObjtraceError):
    '''
    An internal invariant did not hold.
    '''

    exit_code = 3
