# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

'''
Writers for the files in a run directory.

Numbers are written with full precision; rounding happens only in the text summaries.
'''

from __future__ import absolute_import, division, print_function

import collections
import csv
import io

from . import (
    dot,
    evaluation,
    pathutils,
    phases,
    transitions,
    )

from .errors import ValidationError


def csv_text(header, rows):
    '''
    Format `rows` (sequences of values) as CSV with the column names in `header`.
    '''
    output = io.StringIO()
    writer = csv.writer(output, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow(['' if value is None else value for value in row])
    return output.getvalue()


def write_csv(path, header, rows):
    pathutils.write_text(path, csv_text(header, rows))


def read_csv(path):
    '''
    Read the CSV file at `path`.

    Return value:
        A list of dictionaries mapping column names to the (string) values.
    '''
    text = pathutils.read_text(path)
    return list(csv.DictReader(io.StringIO(text)))


def _metrics_document(counts, metrics):
    if counts is None:
        return None
    return collections.OrderedDict((
        ('counts', counts._asdict()),
        ('metrics', metrics._asdict()),
        ))


def metrics_document(confusion, timing, summary, impact_table, event_counts):
    '''
    The document written to "metrics.json".
    '''
    return collections.OrderedDict((
        ('confusion', _metrics_document(confusion, evaluation.confusion_metrics(confusion))),
        ('lenient', _metrics_document(timing.lenient_counts, timing.lenient_metrics)),
        ('strict', _metrics_document(timing.strict_counts, timing.strict_metrics)),
        ('detections', collections.OrderedDict((
            ('counts', summary.counts),
            ('total', summary.total),
            ('fully_incorrect', summary.fully_incorrect),
            ('partially_incorrect', summary.partially_incorrect),
            ('strictly_correct', summary.strictly_correct),
            ('near_miss', timing.near_miss),
            ))),
        ('impacts', collections.OrderedDict((
            ('faulty_count', impact_table.faulty_count),
            ('faulty_impacted', impact_table.faulty_impacted),
            ('faulty_impacted_ratio', impact_table.faulty_impacted_ratio),
            ))),
        ('events_per_student', event_counts),
        ))


DETECTION_COLUMNS = ('student_id', 'objective_id', 'system_index', 'expert_index', 'type')


def write_detections(path, records):
    write_csv(path, DETECTION_COLUMNS, records)


def _optional_int(value):
    return int(value) if value not in ('', None) else None


def read_detections(path):
    '''
    Read the first-detection records written by `write_detections`.
    '''
    records = []
    for line_number, row in enumerate(read_csv(path), start=2):
        try:
            record = evaluation.FirstDetectionRecord(row['student_id'],
                                                     int(row['objective_id']),
                                                     _optional_int(row['system_index']),
                                                     _optional_int(row['expert_index']),
                                                     row['type'])
        except (KeyError, TypeError, ValueError):
            raise ValidationError('invalid detection record', path, 'line %d' % line_number)
        if record.type not in evaluation.DETECTION_TYPES:
            raise ValidationError('unknown detection type "%s"' % record.type,
                                  path, 'line %d' % line_number)
        records.append(record)
    return records


def write_tagged_events(path, tagged_events):
    write_csv(path,
              ('student_id', 'objective_id', 'snapshot_index', 'tag', 'kind'),
              tagged_events)


def write_feature_states(path, logs):
    '''
    Write the feature state and the complete objectives of every replayed snapshot.
    '''
    rows = []
    for log in logs:
        for position, snapshot_index in enumerate(log.snapshot_indices):
            state = log.feature_states[position] if log.feature_states else None
            complete = sorted(log.statuses[position].complete)
            rows.append((log.student_id,
                         snapshot_index,
                         str(state) if state is not None else None,
                         ' '.join(str(objective_id) for objective_id in complete)))
    write_csv(path, ('student_id', 'snapshot_index', 'feature_state', 'complete'), rows)


def write_events(path, logs):
    lines = []
    for log in logs:
        lines.extend(log.event_lines())
    pathutils.write_text(path, ''.join(line + '\n' for line in lines))


def write_impact_tables(session, impact_table, objective_ids):
    '''
    Write the impact ratios per detection type, the co-occurrences per impact type and
    the raw links.
    '''
    header = ['type', 'count', 'impacted', 'ratio']
    for objective_id in objective_ids:
        header.extend(['obj%d_count' % objective_id, 'obj%d_impacted' % objective_id])

    rows = []
    for row in impact_table.rows:
        values = [row.detection_type, row.count, row.impacted, row.ratio]
        for objective_id in objective_ids:
            values.extend(row.per_objective.get(objective_id, (0, 0)))
        rows.append(values)
    write_csv(session.output_path('impacts.csv'), header, rows)

    write_csv(session.output_path('impact-cooccurrence.csv'),
              ('impact', 'students', 'detection_types'),
              [(item.impact, item.count, ' '.join(item.detection_types))
               for item in impact_table.cooccurrences])

    write_csv(session.output_path('impact-links.csv'),
              ('student_id', 'impact', 'detection_type'),
              impact_table.raw_links)


def write_impact_suggestions(path, suggestions):
    '''
    Write the impacts suggested by `evaluation.flag_impacts_heuristic`.

    suggestions:
        An ordered dictionary mapping student IDs to `evaluation.ImpactFlags`.
    '''
    doc = collections.OrderedDict()
    for student_id, flags in suggestions.items():
        doc[student_id] = collections.OrderedDict(
            (name.upper(), evidence) for name, evidence in flags._asdict().items()
            if evidence is not None)
    pathutils.write_json(path, doc)


def write_graph(session, transition_graph, min_path_count):
    '''
    Write the DOT export, the graph document and the frequent paths of a graph.

    Return value:
        The list of `transitions.PathRow` written.
    '''
    prefix = transition_graph.source
    pathutils.write_text(session.output_path('%s-graph.dot' % prefix),
                         dot.export_dot(transition_graph))
    pathutils.write_json(session.output_path('%s-graph.json' % prefix),
                         transition_graph.to_document())

    paths = transitions.frequent_paths(transition_graph, min_path_count)
    write_csv(session.output_path('%s-paths.csv' % prefix),
              ('path', 'frequency'),
              [(row.text, row.frequency) for row in paths])
    return paths


def write_first_hops(path, diffs):
    write_csv(path, ('hop', 'expert', 'system'), diffs)


def write_phase_report(session, report):
    '''
    Write the phases of every student, the scatter datasets and their binned averages.
    '''
    header = ['student_id', 'whole_trace_a', 'start', 'a_end', 'b_end', 'end']
    for phase in phases.PHASES:
        header.extend(['%s_active_s' % phase.lower(), '%s_idle_s' % phase.lower()])
    header.extend(['correct_ratio', 'incorrect_ratio', 'early_ratio', 'late_ratio'])

    rows = []
    for row in report.rows:
        boundaries = row.boundaries
        values = [row.student_id,
                  int(boundaries.whole_trace_a),
                  boundaries.start,
                  boundaries.a_end,
                  boundaries.b_end,
                  boundaries.end]
        for phase in phases.PHASES:
            values.extend([row.budgets[phase].active_seconds, row.budgets[phase].idle_seconds])
        values.extend([row.correct_ratio, row.incorrect_ratio, row.early_ratio,
                       row.late_ratio])
        rows.append(values)
    write_csv(session.output_path('phases.csv'), header, rows)

    for name, points in report.datasets.items():
        write_csv(session.output_path('%s.csv' % name),
                  report.DATASET_COLUMNS[name],
                  points)

    for name, averages in report.binned().items():
        write_csv(session.output_path('%s-binned.csv' % name),
                  ('ratio', 'students', 'average_s'),
                  averages)


class SummaryWriter(object):
    '''
    Accumulate the lines of a text summary.
    '''

    def __init__(self, session, title):
        self._lines = [session.header(title), '']

    def line(self, text=''):
        self._lines.append(text)

    def section(self, title):
        if self._lines[-1]:
            self._lines.append('')
        self._lines.append(title)
        self._lines.append('-' * len(title))

    def value(self, name, value):
        self._lines.append('%-32s %s' % (name + ':', value))

    def percent(self, name, value):
        self.value(name, evaluation.format_percent(value))

    @property
    def text(self):
        return '\n'.join(self._lines) + '\n'

    def save(self, path):
        pathutils.write_text(path, self.text)
