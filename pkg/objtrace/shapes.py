# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

'''
Code shapes (pq-gram patterns) and decision shapes.

A code shape is a stem of node tokens, from the root-most ancestor to the anchor, plus
a window of tokens of contiguous children of the anchor. Its canonical form is
"stem1/stem2/anchor|w1,w2".

A token is the node label, followed by "=value" if values are included and the node
has one. The characters "/", "|", ",", "=", ";", "(", ")" and "\\" are escaped with a
backslash inside labels and values.

A decision shape "either(CI;CJ)" is present when either of its branches is.
'''

from __future__ import absolute_import, division, print_function

import collections

from .errors import ValidationError


_SPECIAL_CHARS = '\\/|,=;()'

_DECISION_PREFIX = 'either('
_DECISION_SUFFIX = ')'


def escape(text):
    '''
    Escape `text` so it can be used as part of a token.
    '''
    return ''.join('\\' + char if char in _SPECIAL_CHARS else char for char in text)


def node_token(node, include_values):
    '''
    The token representing `node` in shapes.
    '''
    if include_values and node.value is not None:
        return '%s=%s' % (escape(node.label), escape(node.value))
    return escape(node.label)


def _split_escaped(text, separator):
    '''
    Split `text` at every occurrence of `separator` not preceded by a backslash.

    Escape sequences are kept in the returned parts.
    '''
    parts = []
    current = []
    chars = iter(text)
    for char in chars:
        if char == '\\':
            current.append(char)
            current.append(next(chars, ''))
        elif char == separator:
            parts.append(''.join(current))
            current = []
        else:
            current.append(char)
    parts.append(''.join(current))
    return parts


class CodeShape(collections.namedtuple('CodeShape', ['stem', 'window', 'include_values'])):
    '''
    A pq-gram code shape.

    stem:
        A tuple of tokens, root-most first; the last one is the anchor.
    window:
        A tuple of tokens of contiguous children of the anchor, possibly empty.
    include_values:
        Whether the tokens include node values.
    '''

    __slots__ = ()

    def __new__(cls, stem, window=(), include_values=True):
        stem = tuple(stem)
        assert stem, 'The stem of a shape cannot be empty'
        return super(CodeShape, cls).__new__(cls, stem, tuple(window), include_values)

    @property
    def shape_id(self):
        return '%s|%s' % ('/'.join(self.stem), ','.join(self.window))

    @property
    def anchor(self):
        return self.stem[-1]

    @property
    def n_labels(self):
        return len(self.stem) + len(self.window)

    def occurs_in(self, view):
        return view.contains(self)

    def __str__(self):
        return self.shape_id


class DecisionShape(collections.namedtuple('DecisionShape', ['first', 'second'])):
    '''
    A disjunction of two code shapes used by alternative strategies.

    first:
        The branch with the higher support.
    second:
        The other branch.
    '''

    __slots__ = ()

    @property
    def shape_id(self):
        return '%s%s;%s%s' % (_DECISION_PREFIX,
                              self.first.shape_id,
                              self.second.shape_id,
                              _DECISION_SUFFIX)

    @property
    def branches(self):
        return (self.first, self.second)

    @property
    def n_labels(self):
        return max(self.first.n_labels, self.second.n_labels)

    def occurs_in(self, view):
        return view.contains(self.first) or view.contains(self.second)

    def __str__(self):
        return self.shape_id


def is_decision_id(item_id):
    return item_id.startswith(_DECISION_PREFIX) and item_id.endswith(_DECISION_SUFFIX)


def parse_shape(text, include_values=True):
    '''
    Parse the canonical form of a code shape.
    '''
    parts = _split_escaped(text, '|')
    if len(parts) != 2:
        raise ValidationError('invalid shape "%s": expected exactly one "|"' % text)

    stem_text, window_text = parts
    stem = _split_escaped(stem_text, '/')
    if not all(stem):
        raise ValidationError('invalid shape "%s": empty stem token' % text)

    window = _split_escaped(window_text, ',') if window_text else []
    if not all(window):
        raise ValidationError('invalid shape "%s": empty window token' % text)

    return CodeShape(stem, window, include_values)


def parse_item(text, include_values=True):
    '''
    Parse the canonical form of either a code shape or a decision shape.
    '''
    if is_decision_id(text):
        inner = text[len(_DECISION_PREFIX):-len(_DECISION_SUFFIX)]
        branches = _split_escaped(inner, ';')
        if len(branches) != 2:
            raise ValidationError('invalid decision "%s": expected two branches' % text)
        return DecisionShape(parse_shape(branches[0], include_values),
                             parse_shape(branches[1], include_values))

    return parse_shape(text, include_values)


class TreeView(object):
    '''
    A tree pre-processed to answer containment queries for shapes quickly.
    '''

    def __init__(self, root, include_values=True):
        '''
        Initialize a `TreeView` instance.

        root:
            The root `AstNode` of the tree.
        include_values:
            Whether tokens include node values. This must match the shapes which are
            then looked up.
        '''
        self._include_values = include_values
        self._by_anchor = collections.defaultdict(list)

        for node, ancestors in root.walk_with_ancestors():
            token = node_token(node, include_values)
            ancestor_tokens = tuple(node_token(ancestor, include_values)
                                    for ancestor in ancestors)
            child_tokens = tuple(node_token(child, include_values)
                                 for child in node.children)
            self._by_anchor[token].append((ancestor_tokens, child_tokens))

    @property
    def include_values(self):
        return self._include_values

    def contains(self, shape):
        '''
        Whether `shape` occurs in the tree.

        The shape occurs if there is a node matching the anchor whose nearest ancestors
        match the rest of the stem and whose children contain the window as a contiguous
        run. An empty window matches at any such node.
        '''
        assert shape.include_values == self._include_values

        stem_ancestors = shape.stem[:-1]
        window = shape.window
        window_len = len(window)

        for ancestor_tokens, child_tokens in self._by_anchor.get(shape.anchor, ()):
            if len(ancestor_tokens) < len(stem_ancestors):
                continue
            if stem_ancestors and \
                    ancestor_tokens[len(ancestor_tokens) - len(stem_ancestors):] != \
                    stem_ancestors:
                continue
            if not window:
                return True
            for start in range(len(child_tokens) - window_len + 1):
                if child_tokens[start:start + window_len] == window:
                    return True

        return False


def extract_code_shapes(root, p_max=3, q_max=4, include_values=True):
    '''
    Extract all the code shapes of a tree.

    For every node and every stem length from 1 to `p_max` (truncated at the root),
    the result contains the shape with an empty window if the node is a leaf, or the
    shapes with every contiguous window of 1 to `q_max` children otherwise.

    Return value:
        A frozen set of `CodeShape`.
    '''
    shapes = set()

    for node, ancestors in root.walk_with_ancestors():
        tokens = [node_token(ancestor, include_values) for ancestor in ancestors]
        tokens.append(node_token(node, include_values))
        child_tokens = [node_token(child, include_values) for child in node.children]

        for p in range(1, min(p_max, len(tokens)) + 1):
            stem = tokens[len(tokens) - p:]

            if not child_tokens:
                shapes.add(CodeShape(stem, (), include_values))
                continue

            for q in range(1, min(q_max, len(child_tokens)) + 1):
                for start in range(len(child_tokens) - q + 1):
                    shapes.add(CodeShape(stem, child_tokens[start:start + q],
                                         include_values))

    return frozenset(shapes)


def shape_occurs(shape, root):
    '''
    Whether `shape` (a `CodeShape` or `DecisionShape`) occurs in the tree at `root`.
    '''
    if isinstance(shape, DecisionShape):
        include_values = shape.first.include_values
    else:
        include_values = shape.include_values
    return shape.occurs_in(TreeView(root, include_values))
