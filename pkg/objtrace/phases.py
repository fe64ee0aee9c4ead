# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

'''
Segmentation of each attempt into phases and active/idle time budgets.

Phase A lasts until the last objective is detected for the first time; phase B lasts
until the last change (breakage or re-completion) to previously detected objectives;
phase C is the rest of the attempt.
'''

from __future__ import absolute_import, division, print_function

import collections

from . import (
    evaluation,
    objectives,
    )


DEFAULT_IDLE_THRESHOLD_S = 180

PHASE_A = 'A'
PHASE_B = 'B'
PHASE_C = 'C'
PHASES = (PHASE_A, PHASE_B, PHASE_C)


class PhaseBoundaries(collections.namedtuple('PhaseBoundaries',
                                             ['start', 'a_end', 'b_end', 'end',
                                              'whole_trace_a'])):
    '''
    Where the phases of an attempt begin and end.

    Phase A is [start, a_end), phase B is [a_end, b_end) and phase C is [b_end, end].
    `whole_trace_a` is true if nothing was ever detected, so the whole attempt is
    phase A.
    '''

    __slots__ = ()

    @property
    def empty_b(self):
        return self.b_end == self.a_end

    @property
    def empty_c(self):
        return self.end == self.b_end

    def interval(self, phase):
        return {
            PHASE_A: (self.start, self.a_end),
            PHASE_B: (self.a_end, self.b_end),
            PHASE_C: (self.b_end, self.end),
            }[phase]

    def width(self, phase):
        lower, upper = self.interval(phase)
        return upper - lower


TimeBudget = collections.namedtuple('TimeBudget', ['active_seconds', 'idle_seconds'])


def segment_phases(trace, log):
    '''
    Find the phase boundaries of the attempt in `trace` given its replayed `log`.
    '''
    positions = {index: position for position, index in enumerate(trace.snapshot_indices)}

    completed = [positions[event.snapshot_index] for event in log.events
                 if event.kind == objectives.EVENT_COMPLETED]

    if completed:
        a_position = max(completed)
        a_end = trace.snapshots[a_position].timestamp
        whole_trace_a = False
    else:
        a_position = len(trace.snapshots) - 1
        a_end = trace.end
        whole_trace_a = True

    changes = [positions[event.snapshot_index] for event in log.events
               if event.kind in (objectives.EVENT_BROKEN, objectives.EVENT_RECOMPLETED) and
               positions[event.snapshot_index] > a_position]
    if changes:
        b_end = trace.snapshots[max(changes)].timestamp
    else:
        b_end = a_end

    return PhaseBoundaries(trace.start, a_end, b_end, trace.end, whole_trace_a)


def active_idle(trace, interval, threshold_s=DEFAULT_IDLE_THRESHOLD_S):
    '''
    Split the time spent in `interval` into active and idle time.

    Every gap between consecutive snapshots belongs to the interval containing its
    start; gaps longer than `threshold_s` are idle.

    interval:
        A `(lower, upper)` tuple; gaps starting at `lower` are included, gaps starting
        at `upper` are not.

    Return value:
        A `TimeBudget`.
    '''
    lower, upper = interval
    active = 0.0
    idle = 0.0
    for previous, current in zip(trace.snapshots, trace.snapshots[1:]):
        if not lower <= previous.timestamp < upper:
            continue
        gap = current.timestamp - previous.timestamp
        if gap > threshold_s:
            idle += gap
        else:
            active += gap
    return TimeBudget(active, idle)


PhaseRow = collections.namedtuple('PhaseRow',
                                  ['student_id', 'boundaries', 'budgets',
                                   'correct_ratio', 'incorrect_ratio',
                                   'early_ratio', 'late_ratio'])


BinnedAverage = collections.namedtuple('BinnedAverage', ['ratio', 'count', 'average'])


def binned_averages(points):
    '''
    Average the second coordinate of `(ratio, value)` points for each distinct ratio.

    Return value:
        A list of `BinnedAverage` sorted by ratio.
    '''
    bins = collections.defaultdict(list)
    for ratio, value in points:
        bins[ratio].append(value)
    return [BinnedAverage(ratio, len(values), sum(values) / len(values))
            for ratio, values in sorted(bins.items())]


class PhaseReport(object):
    '''
    The phases of every student plus the datasets relating phase A detection ratios to
    the time spent.
    '''

    # Name of each dataset and the column names of its rows.
    DATASET_COLUMNS = collections.OrderedDict((
        ('correct-vs-active-a', ('correct_ratio', 'a_active_s')),
        ('early-vs-idle-a', ('early_ratio', 'a_idle_s')),
        ('ratios-vs-bc', ('correct_ratio', 'incorrect_ratio', 'early_ratio', 'late_ratio',
                          'b_active_s', 'b_idle_s', 'c_active_s', 'c_idle_s')),
        ))

    def __init__(self, rows):
        self.rows = list(rows)

    @property
    def datasets(self):
        '''
        An ordered dictionary mapping the names in `DATASET_COLUMNS` to lists of rows,
        one per student.
        '''
        rows = self.rows
        return collections.OrderedDict((
            ('correct-vs-active-a',
             [(row.correct_ratio, row.budgets[PHASE_A].active_seconds) for row in rows]),
            ('early-vs-idle-a',
             [(row.early_ratio, row.budgets[PHASE_A].idle_seconds) for row in rows]),
            ('ratios-vs-bc',
             [(row.correct_ratio, row.incorrect_ratio, row.early_ratio, row.late_ratio,
               row.budgets[PHASE_B].active_seconds, row.budgets[PHASE_B].idle_seconds,
               row.budgets[PHASE_C].active_seconds, row.budgets[PHASE_C].idle_seconds)
              for row in rows]),
            ))

    def binned(self):
        '''
        The binned averages of the two-column datasets.
        '''
        datasets = self.datasets
        return collections.OrderedDict(
            (name, binned_averages(datasets[name]))
            for name in ('correct-vs-active-a', 'early-vs-idle-a'))

    @property
    def no_phase_b_count(self):
        return sum(1 for row in self.rows if row.boundaries.empty_b)

    def zero_idle_count(self, phase):
        return sum(1 for row in self.rows if row.budgets[phase].idle_seconds == 0)

    @property
    def whole_trace_a_count(self):
        return sum(1 for row in self.rows if row.boundaries.whole_trace_a)


def phase_report(student_traces, logs, records, n_objectives=None,
                 threshold_s=DEFAULT_IDLE_THRESHOLD_S):
    '''
    Build the `PhaseReport` for a population.

    student_traces:
        A list of `traces.StudentTrace`.
    logs:
        A dictionary mapping student IDs to `objectives.EventLog`.
    records:
        A list of `evaluation.FirstDetectionRecord` for all the students.
    n_objectives:
        The number of objectives the ratios are computed over. Defaults to the number of
        records of each student.
    threshold_s:
        Gaps longer than this are idle time.
    '''
    records_by_student = collections.defaultdict(list)
    for record in records:
        records_by_student[record.student_id].append(record)

    rows = []
    for trace in student_traces:
        boundaries = segment_phases(trace, logs[trace.student_id])
        budgets = collections.OrderedDict(
            (phase, active_idle(trace, boundaries.interval(phase), threshold_s))
            for phase in PHASES)

        student_records = records_by_student.get(trace.student_id, [])
        counts = evaluation.count_detection_types(student_records)
        total = n_objectives if n_objectives is not None else len(student_records)

        def ratio(*kinds):
            if not total:
                return 0.0
            return sum(counts[kind] for kind in kinds) / total # pylint: disable=cell-var-from-loop

        rows.append(PhaseRow(trace.student_id,
                             boundaries,
                             budgets,
                             ratio(evaluation.CD, evaluation.CND),
                             ratio(evaluation.ID, evaluation.IND),
                             ratio(evaluation.EARLY),
                             ratio(evaluation.LATE)))

    return PhaseReport(rows)
