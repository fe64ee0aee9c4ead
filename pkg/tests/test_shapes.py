# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

from __future__ import absolute_import, division, print_function

from objtrace import shapes

from objtrace.errors import ValidationError

from .testutils import node
from .tracked import TrackedTestCase


def _ids(items):
    return set(item.shape_id for item in items)


class ShapesTestCase(TrackedTestCase):

    def setUp(self):
        super(ShapesTestCase, self).setUp()

        self.root = node('script', None,
                         node('pen down'),
                         node('repeat', None,
                              node('number', '4'),
                              node('move', None, node('var', 'length')),
                              node('turn', '90')))

    def test_extract_small(self):
        found = _ids(shapes.extract_code_shapes(node('a', None, node('b'), node('c')),
                                                p_max=2, q_max=2))
        self.assertEqual(found, set([
            'a|b', 'a|c', 'a|b,c',
            'b|', 'a/b|',
            'c|', 'a/c|',
            ]))

    def test_extract_limits(self):
        found = _ids(shapes.extract_code_shapes(self.root, p_max=3, q_max=4))

        self.assertIn('script/repeat/move|var=length', found)
        self.assertIn('repeat|number=4,move,turn=90', found)
        self.assertIn('script/pen down|', found)
        # Stems are truncated at the root.
        self.assertNotIn('x/script|pen down', found)
        # Windows are contiguous.
        self.assertNotIn('repeat|number=4,turn=90', found)

        narrow = _ids(shapes.extract_code_shapes(self.root, p_max=1, q_max=1))
        self.assertTrue(all('/' not in shape_id for shape_id in narrow))
        self.assertNotIn('repeat|number=4,move', narrow)

    def test_without_values(self):
        found = _ids(shapes.extract_code_shapes(self.root, include_values=False))
        self.assertIn('repeat|number,move,turn', found)
        self.assertFalse(any('=' in shape_id for shape_id in found))

    def test_escaping(self):
        weird = node('say', 'a/b|c,d')
        (shape,) = [shape for shape in shapes.extract_code_shapes(weird)]
        self.assertEqual(shape.shape_id, 'say=a\\/b\\|c\\,d|')
        self.assertEqual(shapes.parse_shape(shape.shape_id), shape)

    def test_contains(self):
        view = shapes.TreeView(self.root)

        def contains(text):
            return view.contains(shapes.parse_shape(text))

        self.assertTrue(contains('repeat/move|var=length'))
        self.assertTrue(contains('script/repeat/move|var=length'))
        self.assertTrue(contains('repeat|move,turn=90'))
        self.assertFalse(contains('repeat|turn=90,move'))
        self.assertFalse(contains('script/move|var=length'))
        self.assertFalse(contains('repeat|number=5'))
        # An empty window matches any node with a matching stem, leaf or not.
        self.assertTrue(contains('script/repeat|'))

    def test_decisions(self):
        decision = shapes.parse_item('either(repeat|multiply;repeat|repeat)')
        self.assertIsInstance(decision, shapes.DecisionShape)
        self.assertEqual(decision.shape_id, 'either(repeat|multiply;repeat|repeat)')
        self.assertEqual(decision.n_labels, 2)

        with_multiply = node('script', None, node('repeat', None, node('multiply')))
        with_nested = node('script', None, node('repeat', None, node('repeat')))
        with_neither = node('script', None, node('repeat', None, node('number', '4')))

        self.assertTrue(shapes.shape_occurs(decision, with_multiply))
        self.assertTrue(shapes.shape_occurs(decision, with_nested))
        self.assertFalse(shapes.shape_occurs(decision, with_neither))

    def test_invalid_items(self):
        with self.assert_raises_regex(ValidationError, 'exactly one "|"'):
            shapes.parse_item('script/move')

        with self.assert_raises_regex(ValidationError, 'empty stem token'):
            shapes.parse_item('script//move|')

        with self.assert_raises_regex(ValidationError, 'two branches'):
            shapes.parse_item('either(a|)')
