# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

from __future__ import absolute_import, division, print_function

from objtrace import (
    mining,
    objectives,
    shapes,
    )

from objtrace.errors import (
    ConfigError,
    ParseError,
    ValidationError,
    )
from objtrace.objectives import (
    BROKEN,
    COMPLETE,
    EVENT_BROKEN,
    EVENT_COMPLETED,
    EVENT_RECOMPLETED,
    INACTIVE,
    FeedbackEvent,
    ObjectiveSpec,
    )

from .testutils import (
    make_trace,
    node,
    )
from .tracked import TrackedTestCase


def _feature_set(*child_labels):
    '''
    A feature set where feature k is present if the script has a child labelled with the
    k-th of `child_labels`.
    '''
    return mining.FeatureSet([mining.Feature(i, [shapes.parse_shape('script|%s' % label)])
                              for i, label in enumerate(child_labels, start=1)])


def _script(*labels):
    return node('script', None, *[node(label) for label in labels])


class ObjectivesTestCase(TrackedTestCase):

    def setUp(self):
        super(ObjectivesTestCase, self).setUp()

        self.feature_set = _feature_set('a', 'b', 'c', 'd')
        self.specs = [ObjectiveSpec(i, 'Objective %d' % i, (i,)) for i in range(1, 5)]
        self.trace = make_trace('student', [
            _script(),
            _script('a'),
            _script('a', 'b'),
            _script('a', 'b', 'c'),
            _script('a', 'b', 'c', 'd'),
            _script('a', 'c', 'd'),
            _script('a', 'c', 'd', 'b'),
            ])

    def test_replay_events(self):
        log = objectives.replay(self.trace, self.feature_set, self.specs)

        self.assertEqual(list(log.events), [
            FeedbackEvent(1, 1, EVENT_COMPLETED),
            FeedbackEvent(2, 2, EVENT_COMPLETED),
            FeedbackEvent(3, 3, EVENT_COMPLETED),
            FeedbackEvent(4, 4, EVENT_COMPLETED),
            FeedbackEvent(5, 2, EVENT_BROKEN),
            FeedbackEvent(6, 2, EVENT_RECOMPLETED),
            ])

        self.assertEqual(log.statuses[0].complete, frozenset())
        self.assertEqual(log.statuses[4].complete, frozenset([1, 2, 3, 4]))
        self.assertEqual(log.statuses[5][2], BROKEN)
        self.assertEqual(log.statuses[5][1], COMPLETE)
        self.assertEqual(log.statuses[2][3], INACTIVE)
        self.assertTrue(log.final_status.all_complete)

        self.assertEqual(str(log.feature_states[5]), '1011')
        self.assertEqual(log.first_completed(2), FeedbackEvent(2, 2, EVENT_COMPLETED))
        self.assertEqual(log.position_of(3), 3)

    def test_statuses_follow_features(self):
        log = objectives.replay(self.trace, self.feature_set, self.specs)

        for state, statuses in zip(log.feature_states, log.statuses):
            for spec in self.specs:
                present = all(state.has(feature_id) for feature_id in spec.required)
                self.assertEqual(statuses[spec.id] == COMPLETE, present)

    def test_all_required(self):
        specs = [ObjectiveSpec(1, 'Both', (1, 2))]

        log = objectives.replay(self.trace, self.feature_set, specs)

        self.assertEqual(list(log.events), [
            FeedbackEvent(2, 1, EVENT_COMPLETED),
            FeedbackEvent(5, 1, EVENT_BROKEN),
            FeedbackEvent(6, 1, EVENT_RECOMPLETED),
            ])

    def test_step(self):
        prior = objectives.ObjectiveStatus.initial([1, 2, 3, 4])
        snapshot = self.trace.snapshots[2]

        statuses, events = objectives.step(prior, snapshot, self.feature_set, self.specs)

        self.assertEqual(statuses.complete, frozenset([1, 2]))
        self.assertEqual(events, [FeedbackEvent(2, 1, EVENT_COMPLETED),
                                  FeedbackEvent(2, 2, EVENT_COMPLETED)])

        statuses, events = objectives.step(statuses, snapshot, self.feature_set, self.specs)
        self.assertEqual(events, [])

    def test_determinism(self):
        self.assertEqual(objectives.replay(self.trace, self.feature_set, self.specs),
                         objectives.replay(self.trace, self.feature_set, self.specs))

    def test_event_lines(self):
        log = objectives.replay(self.trace, self.feature_set, self.specs)

        parsed = objectives.parse_event_lines(log.event_lines())
        self.assertEqual(list(parsed), ['student'])

        rebuilt = objectives.EventLog.from_events('student',
                                                  parsed['student'],
                                                  log.snapshot_indices,
                                                  log.objective_ids)
        self.assertEqual(rebuilt, log)
        self.assertIsNone(rebuilt.feature_states)

    def test_invalid_events(self):
        with self.assert_raises_regex(ValidationError,
                                      'invalid "broken" event for objective 1 at snapshot 0'):
            objectives.statuses_from_events([FeedbackEvent(0, 1, EVENT_BROKEN)], [0, 1], [1])

        with self.assert_raises_regex(ValidationError, 'unknown snapshots: 7'):
            objectives.statuses_from_events([FeedbackEvent(7, 1, EVENT_COMPLETED)],
                                            [0, 1], [1])

        with self.assert_raises_regex(ParseError, 'line 2'):
            objectives.parse_event_lines(['', '{"student_id":'], 'events.jsonl')

        with self.assert_raises_regex(ValidationError, 'unknown event kind "done"'):
            objectives.parse_event_lines(['{"student_id": "s", "snapshot_index": 0, '
                                          '"objective_id": 1, "kind": "done"}'])

    def test_load_objectives(self):
        doc = {'objectives': [
            {'id': 2, 'label': 'Loop', 'required': [3, 1, 3]},
            {'id': 1, 'required': [2]},
            ]}

        specs = objectives.load_objectives(doc, feature_ids=[1, 2, 3])

        self.assertEqual(specs, [ObjectiveSpec(1, 'Objective 1', (2,)),
                                 ObjectiveSpec(2, 'Loop', (1, 3))])
        self.assertEqual(objectives.load_objectives(objectives.objectives_to_document(specs)),
                         specs)

    def test_invalid_objectives(self):
        with self.assert_raises_regex(ConfigError, 'objective 1 requires missing feature 9'):
            objectives.load_objectives({'objectives': [{'id': 1, 'required': [9]}]},
                                       feature_ids=[1, 2])

        with self.assert_raises_regex(ConfigError, 'unique and contiguous from 1, got 1, 3'):
            objectives.load_objectives({'objectives': [{'id': 1, 'required': [1]},
                                                       {'id': 3, 'required': [1]}]})

        with self.assert_raises_regex(ConfigError, 'non-empty "required"'):
            objectives.load_objectives({'objectives': [{'id': 1, 'required': []}]})

        ten_objectives = {'objectives': [{'id': i, 'required': [1]} for i in range(1, 11)]}
        with self.assert_raises_regex(ConfigError, 'must go from 1 to 9, got 10'):
            objectives.load_objectives(ten_objectives)

        with self.assert_raises_regex(ConfigError, 'needs an "objectives" array'):
            objectives.load_objectives([])
