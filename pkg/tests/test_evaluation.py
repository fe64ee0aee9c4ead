# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

from __future__ import absolute_import, division, print_function

import random

from objtrace import (
    evaluation,
    objectives,
    traces,
    )

from objtrace.errors import ValidationError
from objtrace.evaluation import (
    CD,
    CND,
    EARLY,
    FN,
    FP,
    ID,
    IND,
    LATE,
    TN,
    TP,
    ConfusionCounts,
    FirstDetectionRecord,
    )
from objtrace.objectives import (
    EVENT_BROKEN,
    EVENT_COMPLETED,
    FeedbackEvent,
    )

from .testutils import (
    make_annotation,
    make_timed_trace,
    )
from .tracked import TrackedTestCase


# Number of first detections of each type in a cohort, and how many of them belong to
# students with an unintended impact.
COHORT_DETECTIONS = (
    (CD, 30, 0),
    (CND, 14, 0),
    (ID, 14, 11),
    (IND, 12, 3),
    (EARLY, 29, 9),
    (LATE, 9, 3),
    )


def _log(student_id, events, n_snapshots, objective_ids):
    return objectives.EventLog.from_events(student_id,
                                           [FeedbackEvent(*event) for event in events],
                                           range(n_snapshots),
                                           objective_ids)


def _cohort_records():
    records = []
    impacts = {}
    for kind, count, impacted in COHORT_DETECTIONS:
        for i in range(count):
            student_id = '%s-%02d' % (kind, i)
            records.append(FirstDetectionRecord(student_id, 1, None, None, kind))
            impacts[student_id] = {traces.IMPACT_ES} if i < impacted else set()
    return records, impacts


class EvaluationTestCase(TrackedTestCase):

    def test_metrics(self):
        metrics = evaluation.confusion_metrics(ConfusionCounts(tp=10, tn=6, fp=4, fn=2))

        self.assertAlmostEqual(metrics.accuracy, 0.727273, places=6)
        self.assertAlmostEqual(metrics.precision, 10 / 14)
        self.assertAlmostEqual(metrics.recall, 10 / 12)
        self.assertAlmostEqual(metrics.tnr, 0.6)
        self.assertAlmostEqual(metrics.fpr, 0.4)
        self.assertAlmostEqual(metrics.fnr, 2 / 12)
        self.assertAlmostEqual(metrics.f1, 2 * (10 / 14) * (10 / 12) / (10 / 14 + 10 / 12))

    def test_metrics_zero_denominators(self):
        metrics = evaluation.confusion_metrics(ConfusionCounts(0, 0, 0, 0))
        self.assertEqual(metrics, evaluation.MetricsReport(None, None, None, None,
                                                           None, None, None))
        self.assertEqual(evaluation.format_percent(metrics.recall), 'n/a')

        metrics = evaluation.confusion_metrics(ConfusionCounts(0, 3, 0, 0))
        self.assertEqual(metrics.accuracy, 1.0)
        self.assertIsNone(metrics.precision)
        self.assertEqual(metrics.tnr, 1.0)

    def test_metric_identities(self):
        rng = random.Random(42)
        for _ in range(1000):
            counts = ConfusionCounts(*(rng.randint(1, 50) for _ in range(4)))
            metrics = evaluation.confusion_metrics(counts)
            self.assertAlmostEqual(metrics.recall + metrics.fnr, 1)
            self.assertAlmostEqual(metrics.tnr + metrics.fpr, 1)
            for value in metrics:
                self.assertGreaterEqual(value, 0)
                self.assertLessEqual(value, 1)

    def test_tag_events(self):
        log = _log('student',
                   [(1, 1, EVENT_COMPLETED),
                    (3, 1, EVENT_BROKEN),
                    (0, 3, EVENT_COMPLETED),
                    (2, 3, EVENT_BROKEN)],
                   4, [1, 2, 3])
        truth = make_annotation('student', {1: '0111', 2: '0011', 3: '0000'})

        tagged = evaluation.tag_events(log, truth)

        self.assertEqual([(item.snapshot_index, item.objective_id, item.tag, item.kind)
                          for item in tagged],
                         [(0, 3, FP, EVENT_COMPLETED),
                          (1, 1, TP, EVENT_COMPLETED),
                          (2, 2, FN, evaluation.MISSED_COMPLETION),
                          (2, 3, TN, EVENT_BROKEN),
                          (3, 1, FN, EVENT_BROKEN)])
        self.assertEqual(ConfusionCounts.from_tags(tagged), ConfusionCounts(1, 1, 1, 2))

    def test_tolerance(self):
        log = _log('student', [(1, 1, EVENT_COMPLETED)], 4, [1])
        truth = make_annotation('student', {1: '0011'})

        strict = evaluation.tag_events(log, truth)
        self.assertEqual([item.tag for item in strict], [FP, FN])

        lenient = evaluation.tag_events(log, truth, tolerance_edits=1)
        self.assertEqual([item.tag for item in lenient], [TP])

        with self.assert_raises_regex(ValidationError, 'cannot be negative'):
            evaluation.tag_events(log, truth, tolerance_edits=-1)

    def test_length_mismatch(self):
        log = _log('student', [], 3, [1])
        truth = make_annotation('student', {1: '0011'})

        with self.assert_raises_regex(ValidationError, '4 annotated snapshots, 3 replayed'):
            evaluation.tag_events(log, truth)

    def test_detection_types(self):
        self.assertEqual(evaluation.detection_type(None, None), CND)
        self.assertEqual(evaluation.detection_type(2, None), ID)
        self.assertEqual(evaluation.detection_type(None, 2), IND)
        self.assertEqual(evaluation.detection_type(2, 2), CD)
        self.assertEqual(evaluation.detection_type(1, 3), EARLY)
        self.assertEqual(evaluation.detection_type(4, 2), LATE)
        self.assertEqual(evaluation.detection_type(2, 3, tolerance_edits=1), CD)
        self.assertEqual(evaluation.detection_type(4, 2, tolerance_edits=1), LATE)

    def test_detection_partition(self):
        positions = [None] + list(range(6))
        for tolerance in (0, 1, 2):
            for system_position in positions:
                for expert_position in positions:
                    kind = evaluation.detection_type(system_position, expert_position,
                                                     tolerance)
                    self.assertIn(kind, evaluation.DETECTION_TYPES)
                    self.assertEqual(kind in (CND, IND), system_position is None)
                    self.assertEqual(kind in (CND, ID), expert_position is None)
                    if kind == EARLY:
                        self.assertLess(system_position, expert_position - tolerance)
                    elif kind == LATE:
                        self.assertGreater(system_position, expert_position + tolerance)

    def test_classify_first_detections(self):
        log = _log('student',
                   [(1, 1, EVENT_COMPLETED),
                    (0, 3, EVENT_COMPLETED),
                    (3, 4, EVENT_COMPLETED)],
                   4, [1, 2, 3, 4, 5])
        truth = make_annotation('student', {1: '0111', 2: '0011', 3: '0000', 4: '0100',
                                            5: '0000'})

        records = evaluation.classify_first_detections(log, truth)

        self.assertEqual([(record.objective_id, record.system_index, record.expert_index,
                           record.type) for record in records],
                         [(1, 1, 1, CD),
                          (2, None, 2, IND),
                          (3, 0, None, ID),
                          (4, 3, 1, LATE),
                          (5, None, None, CND)])

        summary = evaluation.detection_summary(records)
        self.assertEqual(summary.total, 5)
        self.assertAlmostEqual(summary.fully_incorrect, 0.4)
        self.assertAlmostEqual(summary.partially_incorrect, 0.2)
        self.assertAlmostEqual(summary.strictly_correct, 0.4)

    def test_cohort_detection_summary(self):
        counts = {kind: count for kind, count, _ in COHORT_DETECTIONS}

        summary = evaluation.summarize_detection_counts(counts)

        self.assertEqual(summary.total, 108)
        self.assertEqual(evaluation.format_percent(summary.fully_incorrect), '24.07%')
        self.assertEqual(evaluation.format_percent(summary.partially_incorrect), '35.19%')
        self.assertEqual(list(summary.counts), list(evaluation.DETECTION_TYPES))

        stats = evaluation.timing_offset_stats(counts)
        self.assertEqual(stats.near_miss_count, 38)
        self.assertEqual(stats.on_time_count, 30)
        self.assertAlmostEqual(stats.near_miss, 38 / 68)
        self.assertIsNone(stats.strict_metrics)

    def test_cohort_impacts(self):
        records, impacts = _cohort_records()

        table = evaluation.impact_tables(records, impacts)

        ratios = {row.detection_type: evaluation.format_percent(row.ratio)
                  for row in table.rows}
        self.assertEqual(ratios[ID], '78.57%')
        self.assertEqual(ratios[IND], '25.00%')
        self.assertEqual(ratios[EARLY], '31.03%')
        self.assertEqual(ratios[LATE], '33.33%')
        self.assertEqual(ratios[CD], '0.00%')

        self.assertEqual(table.row(ID).count, 14)
        self.assertEqual(table.row(ID).impacted, 11)
        self.assertEqual(table.row(ID).per_objective, {1: (14, 11)})
        self.assertEqual(table.faulty_count, 64)
        self.assertEqual(table.faulty_impacted, 26)

        (cooccurrence,) = table.cooccurrences
        self.assertEqual(cooccurrence.impact, traces.IMPACT_ES)
        self.assertEqual(cooccurrence.count, 26)
        self.assertEqual(cooccurrence.detection_types, (ID, IND, EARLY, LATE))

    def test_impact_links(self):
        records, impacts = _cohort_records()

        table = evaluation.impact_tables(records, impacts,
                                         {traces.IMPACT_ES: {ID, IND}})

        self.assertEqual(table.row(ID).impacted, 11)
        self.assertEqual(table.row(EARLY).impacted, 0)
        self.assertEqual(table.faulty_impacted, 14)
        self.assertEqual(table.cooccurrences[0].detection_types, (ID, IND))

    def test_strict_timing(self):
        log = _log('student',
                   [(0, 1, EVENT_COMPLETED),
                    (1, 2, EVENT_COMPLETED),
                    (3, 3, EVENT_COMPLETED)],
                   4, [1, 2, 3])
        truth = make_annotation('student', {1: '0111', 2: '0111', 3: '0111'})

        tagged = evaluation.tag_events(log, truth)
        records = evaluation.classify_first_detections(log, truth)
        self.assertEqual([record.type for record in records], [EARLY, CD, LATE])
        self.assertEqual(ConfusionCounts.from_tags(tagged), ConfusionCounts(2, 0, 1, 2))

        stats = evaluation.timing_offset_stats(records, tagged)

        self.assertAlmostEqual(stats.near_miss, 2 / 3)
        self.assertEqual(stats.lenient_counts, ConfusionCounts(tp=3, tn=0, fp=0, fn=0))
        # The on-time detection of objective 2 stays correct.
        self.assertEqual(stats.strict_counts, ConfusionCounts(tp=1, tn=0, fp=2, fn=0))
        self.assertAlmostEqual(stats.lenient_metrics.accuracy - stats.strict_metrics.accuracy,
                               2 / 3)

        strict_tags = evaluation.retag_near_misses(tagged, records, strict=True)
        self.assertEqual([(item.objective_id, item.tag) for item in strict_tags],
                         [(1, FP), (2, TP), (3, FP)])

    def test_strict_timing_cohort(self):
        rng = random.Random(7)
        for student in range(20):
            n_snapshots = 6
            events = []
            columns = {}
            for objective_id in (1, 2, 3):
                expert = rng.choice([None, 1, 2, 3, 4])
                system = rng.choice([None, 0, 2, 3, 5])
                columns[objective_id] = ''.join(
                    '1' if expert is not None and p >= expert else '0'
                    for p in range(n_snapshots))
                if system is not None:
                    events.append((system, objective_id, EVENT_COMPLETED))
            log = _log('s%d' % student, events, n_snapshots, [1, 2, 3])
            truth = make_annotation('s%d' % student, columns)

            tagged = evaluation.tag_events(log, truth)
            records = evaluation.classify_first_detections(log, truth)
            stats = evaluation.timing_offset_stats(records, tagged)

            lenient = stats.lenient_counts
            strict = stats.strict_counts
            self.assertEqual(lenient.total, strict.total)
            self.assertEqual(lenient.tp - strict.tp, stats.near_miss_count)
            self.assertEqual(strict.fp - lenient.fp, stats.near_miss_count)
            self.assertEqual((lenient.tn, lenient.fn), (strict.tn, strict.fn))

    def test_flag_impacts(self):
        trace = make_timed_trace('student', [0.0, 10.0, 20.0, 60.0])

        # Nothing detected while the objective was complete at snapshot 1.
        log = _log('student', [], 4, [1])
        truth = make_annotation('student', {1: '0100'})
        flags = evaluation.flag_impacts_heuristic(trace, log, truth)
        self.assertIsNone(flags.es)
        self.assertIsNone(flags.ipb)
        self.assertEqual(flags.its, {'snapshot_index': 1,
                                     'extra_seconds': 50.0,
                                     'objectives': [1]})

        # Reported as complete but never actually complete.
        log = _log('student', [(1, 1, EVENT_COMPLETED)], 4, [1])
        truth = make_annotation('student', {1: '0000'})
        flags = evaluation.flag_impacts_heuristic(trace, log, truth)
        self.assertEqual(flags.es, {'snapshot_index': 3, 'objectives': [1]})
        self.assertIsNone(flags.its)

        # An incorrect detection followed by the loss of a complete objective.
        log = _log('student', [(0, 1, EVENT_COMPLETED), (1, 2, EVENT_COMPLETED)], 4, [1, 2])
        truth = make_annotation('student', {1: '0000', 2: '0110'})
        flags = evaluation.flag_impacts_heuristic(trace, log, truth)
        self.assertEqual(flags.ipb, {'snapshot_index': 3, 'objectives': [1], 'lost': [2]})

    def test_count_events(self):
        logs = [_log('one', [(1, 1, EVENT_COMPLETED), (2, 1, EVENT_BROKEN)], 3, [1]),
                _log('two', [], 3, [1])]
        self.assertEqual(list(evaluation.count_events(logs).items()),
                         [('one', 2), ('two', 0)])
