# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

from __future__ import absolute_import, division, print_function

import random

from objtrace import (
    evaluation,
    mining,
    objectives,
    phases,
    shapes,
    )

from objtrace.evaluation import FirstDetectionRecord
from objtrace.objectives import (
    EVENT_BROKEN,
    EVENT_COMPLETED,
    EVENT_RECOMPLETED,
    FeedbackEvent,
    )
from objtrace.phases import (
    PHASE_A,
    PHASE_B,
    PHASE_C,
    )

from .testutils import (
    make_timed_trace,
    make_trace,
    node,
    )
from .tracked import TrackedTestCase


# 20 minutes of phase A, 10 of phase B and 5 of phase C.
TIMESTAMPS = [0.0, 60.0, 120.0, 420.0, 1200.0, 1260.0, 1800.0, 1980.0, 2100.0]


def _log(trace, events, objective_ids=(1, 2)):
    return objectives.EventLog.from_events(trace.student_id,
                                           [FeedbackEvent(*event) for event in events],
                                           trace.snapshot_indices,
                                           objective_ids)


class PhasesTestCase(TrackedTestCase):

    def setUp(self):
        super(PhasesTestCase, self).setUp()

        self.trace = make_timed_trace('student', TIMESTAMPS)
        self.log = _log(self.trace, [(1, 1, EVENT_COMPLETED),
                                     (4, 2, EVENT_COMPLETED),
                                     (5, 1, EVENT_BROKEN),
                                     (6, 1, EVENT_RECOMPLETED)])

    def test_segment(self):
        boundaries = phases.segment_phases(self.trace, self.log)

        self.assertEqual(boundaries, phases.PhaseBoundaries(0.0, 1200.0, 1800.0, 2100.0,
                                                            False))
        self.assertEqual(boundaries.width(PHASE_A), 20 * 60)
        self.assertEqual(boundaries.width(PHASE_B), 10 * 60)
        self.assertEqual(boundaries.width(PHASE_C), 5 * 60)

    def test_active_idle(self):
        boundaries = phases.segment_phases(self.trace, self.log)

        def budget(phase, threshold_s=phases.DEFAULT_IDLE_THRESHOLD_S):
            return phases.active_idle(self.trace, boundaries.interval(phase), threshold_s)

        self.assertEqual(budget(PHASE_A), phases.TimeBudget(120.0, 1080.0))
        self.assertEqual(budget(PHASE_B), phases.TimeBudget(60.0, 540.0))
        # A gap of exactly the threshold is active.
        self.assertEqual(budget(PHASE_C), phases.TimeBudget(300.0, 0.0))
        self.assertEqual(budget(PHASE_C, threshold_s=179), phases.TimeBudget(120.0, 180.0))

    def test_nothing_detected(self):
        boundaries = phases.segment_phases(self.trace, _log(self.trace, []))

        self.assertTrue(boundaries.whole_trace_a)
        self.assertEqual(boundaries.a_end, 2100.0)
        self.assertTrue(boundaries.empty_b)
        self.assertTrue(boundaries.empty_c)

    def test_changes_before_last_detection(self):
        log = _log(self.trace, [(1, 1, EVENT_COMPLETED),
                                (2, 1, EVENT_BROKEN),
                                (3, 1, EVENT_RECOMPLETED),
                                (4, 2, EVENT_COMPLETED)])

        boundaries = phases.segment_phases(self.trace, log)

        self.assertEqual(boundaries.a_end, 1200.0)
        self.assertTrue(boundaries.empty_b)
        self.assertEqual(boundaries.width(PHASE_C), 900.0)

    def test_report(self):
        other = make_timed_trace('other', [0.0, 30.0])
        logs = {
            'student': self.log,
            'other': _log(other, []),
            }
        records = [FirstDetectionRecord('student', 1, 1, 1, evaluation.CD),
                   FirstDetectionRecord('student', 2, 4, 6, evaluation.EARLY)]

        report = phases.phase_report([self.trace, other], logs, records)

        self.assertEqual([row.student_id for row in report.rows], ['student', 'other'])
        row = report.rows[0]
        self.assertEqual(row.correct_ratio, 0.5)
        self.assertEqual(row.early_ratio, 0.5)
        self.assertEqual(row.incorrect_ratio, 0.0)
        self.assertEqual(report.rows[1].correct_ratio, 0.0)

        datasets = report.datasets
        self.assertEqual(list(datasets), list(phases.PhaseReport.DATASET_COLUMNS))
        self.assertEqual(datasets['correct-vs-active-a'], [(0.5, 120.0), (0.0, 30.0)])
        self.assertEqual(datasets['early-vs-idle-a'], [(0.5, 1080.0), (0.0, 0.0)])
        self.assertEqual(len(datasets['ratios-vs-bc'][0]), 8)

        self.assertEqual(report.whole_trace_a_count, 1)
        self.assertEqual(report.no_phase_b_count, 1)
        self.assertEqual(report.zero_idle_count(PHASE_C), 2)

        report = phases.phase_report([self.trace], logs, records, n_objectives=4)
        self.assertEqual(report.rows[0].correct_ratio, 0.25)

    def test_binned_averages(self):
        self.assertEqual(phases.binned_averages([(1.0, 5.0), (0.5, 10.0), (0.5, 20.0)]),
                         [phases.BinnedAverage(0.5, 2, 15.0),
                          phases.BinnedAverage(1.0, 1, 5.0)])

    def test_tiling(self):
        rng = random.Random(99)
        labels = ('a', 'b', 'c')
        feature_set = mining.FeatureSet([mining.Feature(i, [shapes.parse_shape('script|' + label)])
                                         for i, label in enumerate(labels, start=1)])
        specs = [objectives.ObjectiveSpec(i, 'Objective %d' % i, (i,)) for i in (1, 2, 3)]

        for i in range(100):
            n_snapshots = rng.randint(1, 20)
            timestamps = [0.0]
            for _ in range(n_snapshots - 1):
                timestamps.append(timestamps[-1] + rng.choice([5.0, 60.0, 180.0, 400.0]))
            roots = [node('script', None, *[node(label) for label in labels
                                            if rng.random() < 0.5])
                     for _ in range(n_snapshots)]
            trace = make_trace('student-%d' % i, roots, timestamps)
            log = objectives.replay(trace, feature_set, specs)

            boundaries = phases.segment_phases(trace, log)
            self.assertLessEqual(boundaries.start, boundaries.a_end)
            self.assertLessEqual(boundaries.a_end, boundaries.b_end)
            self.assertLessEqual(boundaries.b_end, boundaries.end)
            self.assertEqual(boundaries.whole_trace_a, not log.events)

            total = 0.0
            for phase in phases.PHASES:
                budget = phases.active_idle(trace, boundaries.interval(phase))
                total += budget.active_seconds + budget.idle_seconds
            self.assertAlmostEqual(total, trace.duration)
