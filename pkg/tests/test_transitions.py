# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

from __future__ import absolute_import, division, print_function

import unittest

from objtrace import (
    dot,
    objectives,
    synth,
    transitions,
    traces,
    )

from objtrace.errors import ValidationError
from objtrace.objectives import (
    EVENT_BROKEN,
    EVENT_COMPLETED,
    FeedbackEvent,
    )
from objtrace.transitions import (
    SOURCE_EXPERT,
    SOURCE_SYSTEM,
    StateNode,
    StateSequence,
    )

from .testutils import (
    make_annotation,
    make_timed_trace,
    )
from .tracked import TrackedTestCase

try:
    import pydot
except ImportError:
    pydot = None


def _sequence(student_id, path):
    states = synth.parse_path(path)
    return StateSequence(student_id,
                         tuple(states),
                         tuple(60.0 * i for i in range(len(states))))


def _sequences(paths):
    result = []
    for path, count in paths:
        for _ in range(count):
            result.append(_sequence('student-%02d' % (len(result) + 1), path))
    return result


def _names(states):
    return [state.name for state in states]


class TransitionsTestCase(TrackedTestCase):

    def test_state_names(self):
        self.assertEqual(StateNode.from_name('31'), StateNode(transitions.KIND_OBJECTIVES,
                                                              (1, 3), None))
        self.assertEqual(StateNode.from_name('13').name, '13')
        self.assertEqual(StateNode.from_objectives([]), StateNode.start())
        self.assertTrue(StateNode.from_name('NWC').is_terminal)

        with self.assert_raises_regex(ValidationError, 'invalid state name "x1"'):
            StateNode.from_name('x1')
        with self.assert_raises_regex(ValidationError, 'invalid state name "10"'):
            StateNode.from_name('10')

    def test_directions(self):
        self.assertEqual(transitions.transition_direction(StateNode.from_name('13'),
                                                          StateNode.from_name('3')),
                         transitions.BACKWARD)
        self.assertEqual(transitions.transition_direction(StateNode.from_name('13'),
                                                          StateNode.from_name('134')),
                         transitions.FORWARD)
        self.assertEqual(transitions.transition_direction(StateNode.from_name('13'),
                                                          StateNode.from_name('END')),
                         transitions.FORWARD)

    def test_expert_sequence(self):
        trace = make_timed_trace('student', [0.0, 10.0, 20.0, 30.0, 40.0])
        truth = make_annotation('student', {1: '00011', 2: '01100'},
                                final_outcome=traces.NON_WORKING)

        sequence = transitions.state_sequence(trace, SOURCE_EXPERT, truth=truth)

        self.assertEqual(_names(sequence.states), ['S', '2', '1', 'NWC'])
        self.assertEqual(sequence.times, (0.0, 10.0, 30.0, 40.0))

        with self.assert_raises_regex(ValidationError, 'has no final outcome'):
            transitions.state_sequence(trace, SOURCE_EXPERT,
                                       truth=truth._replace(final_outcome=None))

    def test_system_sequence(self):
        trace = make_timed_trace('student', [0.0, 10.0, 20.0])
        log = objectives.EventLog.from_events('student',
                                              [FeedbackEvent(1, 1, EVENT_COMPLETED),
                                               FeedbackEvent(2, 1, EVENT_BROKEN)],
                                              range(3), [1])

        sequence = transitions.state_sequence(trace, SOURCE_SYSTEM, log=log)

        self.assertEqual(_names(sequence.states), ['S', '1', 'S', 'END'])

    def test_aggregate(self):
        sequences = [_sequence('one', 'S⇒1⇒S⇒1⇒WC'), _sequence('two', 'S⇒1⇒WC')]

        graph = transitions.aggregate(sequences, SOURCE_EXPERT)

        self.assertEqual(graph.population, 2)
        edge = graph.edge('S', '1')
        self.assertEqual(edge['weight'], 2)
        self.assertEqual(edge['count'], 3)
        self.assertEqual(edge['total_seconds'], 180.0)
        self.assertEqual(graph.edge('1', 'S')['direction'], transitions.BACKWARD)
        self.assertEqual([(a.name, b.name) for a, b, _ in graph.backward_edges()],
                         [('1', 'S')])

        with self.assert_raises_regex(ValidationError, 'no students'):
            transitions.aggregate([], SOURCE_EXPERT)

    def test_elide_cycles(self):
        states = [StateNode.from_name(name) for name in ('S', '3', '34', 'S', '34')]

        elided, times = transitions.elide_cycles(states, [0, 1, 2, 3, 4])

        self.assertEqual(_names(elided), ['S', '3', '34'])
        self.assertEqual(times, [0, 1, 2])

        elided, _ = transitions.elide_cycles(
            [StateNode.from_name(name) for name in ('S', '1', '13', '1', 'S', '1', '14')])
        self.assertEqual(_names(elided), ['S', '1', '14'])

    def test_phase1_threshold(self):
        self.assertEqual(transitions.phase1_threshold(27, 0.10), 3)
        self.assertEqual(transitions.phase1_threshold(30, 0.10), 3)

        graph = transitions.aggregate(_sequences([('S⇒1⇒WC', 3),
                                                  ('S⇒2⇒WC', 2),
                                                  ('S⇒WC', 22)]),
                                      SOURCE_EXPERT)
        self.assertEqual(graph.population, 27)

        simplified = transitions.simplify_phase1(graph)

        self.assertIsNotNone(simplified.edge('S', '1'))
        self.assertIsNone(simplified.edge('S', '2'))
        self.assertFalse(simplified.has_node('2'))
        self.assertTrue(graph.has_node('2'))

    def test_phase2(self):
        graph = transitions.aggregate(_sequences([('S⇒12⇒1⇒WC', 2), ('S⇒12⇒WC', 3)]),
                                      SOURCE_EXPERT)

        simplified = transitions.simplify(graph, stages=2)

        self.assertEqual(simplified.backward_edges(), [])
        self.assertFalse(simplified.has_node('1'))
        self.assertIsNotNone(simplified.edge('12', 'WC'))

    def test_phase3(self):
        sequences = [_sequence('one', 'S⇒3⇒34⇒3⇒34⇒134⇒WC'),
                     _sequence('two', 'S⇒1⇒13⇒3⇒134⇒WC')]
        graph = transitions.aggregate(sequences, SOURCE_EXPERT)

        simplified = transitions.simplify_phase3(graph)

        self.assertEqual([_names(sequence.states) for sequence in simplified.sequences],
                         [['S', '3', '34', '134', 'WC'],
                          ['S', '1', '13', '134', 'WC']])
        self.assertEqual(simplified.backward_edges(), [])
        self.assertIsNone(simplified.edge('13', '3'))
        self.assertEqual(simplified.edge('134', 'WC')['weight'], 2)

        again = transitions.simplify_phase3(simplified)
        self.assertEqual(again.to_document(), simplified.to_document())

    def test_phase3_keeps_rare_transitions_out(self):
        graph = transitions.aggregate(_sequences([('S⇒1⇒12⇒WC', 25), ('S⇒12⇒WC', 2)]),
                                      SOURCE_EXPERT)

        after_phase1 = transitions.simplify(graph, stages=1)
        self.assertEqual(after_phase1.min_weight, 3)
        self.assertIsNone(after_phase1.edge('S', '12'))

        simplified = transitions.simplify(graph, stages=3)
        self.assertIsNone(simplified.edge('S', '12'))
        self.assertEqual(simplified.edge('S', '1')['weight'], 25)
        self.assertEqual(simplified.edge('12', 'WC')['weight'], 27)
        for from_state, to_state, _ in simplified.edges():
            self.assertIsNotNone(after_phase1.edge(from_state.name, to_state.name))

        # Without the first phase nothing is filtered by weight.
        self.assertEqual(transitions.simplify_phase3(graph).edge('S', '12')['weight'], 2)

    def test_elide_cycles_outermost_recurrence(self):
        # Returning to 1 removes the whole detour through S and 13.
        elided, _ = transitions.elide_cycles(
            [StateNode.from_name(name) for name in ('S', '1', 'S', '13', '1', 'WC')])
        self.assertEqual(_names(elided), ['S', '1', 'WC'])

    def test_invalid_stages(self):
        graph = transitions.aggregate([_sequence('one', 'S⇒WC')], SOURCE_EXPERT)
        with self.assert_raises_regex(ValidationError, '0 to 3'):
            transitions.simplify(graph, stages=4)
        self.assertIs(transitions.simplify(graph, stages=0), graph)

    def test_cohort_paths(self):
        config = synth.GeneratorConfig(seed=11)
        student_traces, annotations = synth.generate_cohort(config)

        sequences = [transitions.state_sequence(trace, SOURCE_EXPERT,
                                                truth=annotations[trace.student_id])
                     for trace in student_traces]
        graph = transitions.simplify_phase3(transitions.aggregate(sequences, SOURCE_EXPERT))

        paths = transitions.frequent_paths(graph)
        self.assertEqual({row.text: row.frequency for row in paths},
                         dict(synth.COHORT_EXPERT_PATHS))
        self.assertEqual([row.frequency for row in paths[:3]], [5, 5, 4])

        frequent = transitions.frequent_paths(graph, min_count=3)
        self.assertEqual(sorted(row.frequency for row in frequent), [3, 4, 4, 4, 5, 5])

        self.assertAlmostEqual(transitions.completion_rate(sequences), 25 / 27)

    def test_diff_paths(self):
        expert = transitions.aggregate(_sequences([('S⇒3⇒WC', 2), ('S⇒1⇒WC', 1)]),
                                       SOURCE_EXPERT)
        system = transitions.aggregate(_sequences([('S⇒1⇒END', 3)]), SOURCE_SYSTEM)

        self.assertEqual(transitions.diff_paths(expert, system),
                         [transitions.FirstHopDiff('S⇒1', 1, 3),
                          transitions.FirstHopDiff('S⇒3', 2, 0)])

    def test_penwidth(self):
        self.assertEqual(dot.penwidth(0, 10), 1.0)
        self.assertEqual(dot.penwidth(10, 10), 5.0)
        self.assertEqual(dot.penwidth(3, 0), 1.0)

    def test_dot_export(self):
        expert = transitions.aggregate(_sequences([('S⇒3⇒WC', 2), ('S⇒3⇒NWC', 1)]),
                                       SOURCE_EXPERT)
        system = transitions.aggregate(_sequences([('S⇒3⇒1⇒END', 2)]), SOURCE_SYSTEM)

        expert_dot = dot.export_dot(expert)
        self.assertTrue(expert_dot.startswith('digraph "expert" {\n'))
        self.assertIn('    "WC" [shape=ellipse, color=black];\n', expert_dot)
        self.assertIn('    "NWC" [shape=ellipse, color=black];\n', expert_dot)
        self.assertIn('    "S" -> "3" [label="3 (3.0 min)", penwidth=5.00, color=black];\n',
                      expert_dot)
        self.assertTrue(expert_dot.endswith('}\n'))

        system_dot = dot.export_dot(system, show_times=False)
        self.assertIn('    "END" [shape=diamond, color=blue];\n', system_dot)
        self.assertIn('    "3" -> "1" [label="2", penwidth=5.00, color=red];\n', system_dot)
        self.assertNotIn('ellipse', system_dot)

    @unittest.skipIf(pydot is None, 'pydot is not installed')
    def test_dot_grammar(self):
        graph = transitions.aggregate(_sequences([('S⇒3⇒34⇒3⇒WC', 2), ('S⇒WC', 1)]),
                                      SOURCE_EXPERT)
        for stages in range(4):
            content = dot.export_dot(transitions.simplify(graph, stages))
            parsed = pydot.graph_from_dot_data(content)
            self.assertEqual(len(parsed), 1)
            self.assertEqual(len(parsed[0].get_edges()),
                             transitions.simplify(graph, stages).graph.number_of_edges())
