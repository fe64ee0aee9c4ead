# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

'''
Ordered labelled trees of code blocks and their JSON tree-document form.

A tree document is an object with a mandatory non-empty "label", an optional string
"value" and an optional array of "children". A child may also carry an integer "index"
which, if present, must be the position of the child in its parent's array.
'''

from __future__ import absolute_import, division, print_function

import collections
import json

from .errors import (
    ParseError,
    ValidationError,
    )


_ALLOWED_KEYS = frozenset(('label', 'value', 'children', 'index'))

IDENTIFIER_LABELS = ('var', 'param')


class AstNode(collections.namedtuple('AstNode', ['label', 'value', 'children'])):
    '''
    A node in the tree of a program.

    Two nodes compare equal iff their labels, values and ordered children are equal.
    '''

    __slots__ = ()

    def __new__(cls, label, value=None, children=()):
        return super(AstNode, cls).__new__(cls, label, value, tuple(children))

    @property
    def is_leaf(self):
        return not self.children

    def walk(self):
        '''
        Iterate over this node and all its descendants in pre-order.
        '''
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def walk_with_ancestors(self):
        '''
        Iterate over this node and all its descendants in pre-order.

        Return value:
            An iterator of `(node, ancestors)` pairs where `ancestors` is a tuple of the
            nodes from the root (included) to the parent of `node` (included).
        '''
        stack = [(self, ())]
        while stack:
            node, ancestors = stack.pop()
            yield node, ancestors
            child_ancestors = ancestors + (node,)
            for child in reversed(node.children):
                stack.append((child, child_ancestors))

    def size(self):
        '''
        The number of nodes in the tree rooted at this node.
        '''
        return sum(1 for _ in self.walk())


def ast_equal(first, second):
    return first == second


def node_from_document(doc, path=None, position='$'):
    '''
    Build an `AstNode` from an already decoded tree document.

    doc:
        The decoded JSON object.
    path:
        The file the document comes from (used for error messages only).
    position:
        A JSON-path-like description of where `doc` is (used for error messages only).

    Return value:
        The root `AstNode`.
    '''
    if not isinstance(doc, dict):
        raise ValidationError('a tree node must be an object', path, position)

    unknown = sorted(set(doc) - _ALLOWED_KEYS)
    if unknown:
        raise ValidationError('unknown keys in tree node: %s' % ', '.join(unknown),
                              path, position)

    label = doc.get('label')
    if not isinstance(label, str) or not label:
        raise ValidationError('the "label" of a tree node must be a non-empty string',
                              path, position)

    value = doc.get('value')
    if value is not None and not isinstance(value, str):
        raise ValidationError('the "value" of a tree node must be a string', path, position)

    children_docs = doc.get('children', [])
    if not isinstance(children_docs, list):
        raise ValidationError('the "children" of a tree node must be an array',
                              path, position)

    children = []
    for i, child_doc in enumerate(children_docs):
        child_position = '%s.children[%d]' % (position, i)
        declared_index = child_doc.get('index') if isinstance(child_doc, dict) else None
        if declared_index is not None:
            if isinstance(declared_index, bool) or not isinstance(declared_index, int):
                raise ValidationError('the "index" of a tree node must be an integer',
                                      path, child_position)
            if declared_index != i:
                raise ValidationError(
                    'child declared at index %d is at position %d' % (declared_index, i),
                    path, child_position)
        children.append(node_from_document(child_doc, path, child_position))

    return AstNode(label, value, children)


def node_to_document(node):
    '''
    Convert `node` into a JSON-serializable tree document.

    The "value" key is omitted when the node has no value and the "children" key is
    omitted when the node is a leaf.
    '''
    doc = {'label': node.label}
    if node.value is not None:
        doc['value'] = node.value
    if node.children:
        doc['children'] = [node_to_document(child) for child in node.children]
    return doc


def parse_ast(text, path=None):
    '''
    Parse a serialized tree document.

    text:
        The JSON text.
    path:
        The file the text was read from, if any.

    Return value:
        The root `AstNode`.
    '''
    try:
        doc = json.loads(text)
    except ValueError as exc:
        raise ParseError('malformed tree document: %s' % getattr(exc, 'msg', exc),
                         path,
                         getattr(exc, 'lineno', None),
                         getattr(exc, 'colno', None))

    return node_from_document(doc, path)


def serialize_ast(node):
    '''
    Serialize `node` into its canonical JSON text.

    The canonical form has sorted keys and no insignificant whitespace, so equal trees
    always produce identical text.
    '''
    return json.dumps(node_to_document(node), sort_keys=True, separators=(',', ':'))


def anonymize_variables(root, identifier_labels=IDENTIFIER_LABELS):
    '''
    Rename the identifiers in the tree rooted at `root`.

    The value of every node whose label is in `identifier_labels` is replaced with
    "var_0", "var_1", etc. in the order in which each distinct name is first met in a
    pre-order walk.

    Return value:
        A new tree.
    '''
    renames = {}
    for node in root.walk():
        if node.label in identifier_labels and node.value is not None:
            if node.value not in renames:
                renames[node.value] = 'var_%d' % len(renames)

    def rebuild(node):
        if node.label in identifier_labels and node.value is not None:
            value = renames[node.value]
        else:
            value = node.value
        return AstNode(node.label, value, [rebuild(child) for child in node.children])

    return rebuild(root)
