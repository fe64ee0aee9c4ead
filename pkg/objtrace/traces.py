# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

'''
Timed code traces, solution corpora and expert annotations.

File formats:
    Trace file: one JSON record per line,
        {"student_id": ..., "index": ..., "timestamp_s": ..., "ast": {...},
         "submitted": true|false}
    Corpus file: a JSON array of {"solution_id": ..., "ast": {...}}.
    Annotation file: a JSON array of
        {"student_id": ..., "final_outcome": "working"|"non_working",
         "impacts": ["IPB", "ITS", "ES"],
         "objectives": {"<id>": FIRST-COMPLETE-INDEX | [[FROM, TO|null], ...] | null}}
'''

from __future__ import absolute_import, division, print_function

import collections
import json
import numbers

from . import tree

from .errors import (
    ParseError,
    ValidationError,
    )


WORKING = 'working'
NON_WORKING = 'non_working'
FINAL_OUTCOMES = (WORKING, NON_WORKING)

IMPACT_IPB = 'IPB'
IMPACT_ITS = 'ITS'
IMPACT_ES = 'ES'
IMPACT_TYPES = (IMPACT_IPB, IMPACT_ITS, IMPACT_ES)

# Transition graph states name their objectives with one digit each.
MAX_OBJECTIVE_ID = 9


Snapshot = collections.namedtuple('Snapshot', ['index', 'timestamp', 'root'])


class StudentTrace(collections.namedtuple('StudentTrace',
                                          ['student_id', 'snapshots', 'submitted'])):
    '''
    The sequence of snapshots of the code written by a student.
    '''

    __slots__ = ()

    def __new__(cls, student_id, snapshots, submitted=False):
        snapshots = tuple(snapshots)
        assert snapshots, 'A trace needs at least one snapshot'
        return super(StudentTrace, cls).__new__(cls, student_id, snapshots, submitted)

    @property
    def snapshot_indices(self):
        return tuple(snapshot.index for snapshot in self.snapshots)

    @property
    def start(self):
        return self.snapshots[0].timestamp

    @property
    def end(self):
        return self.snapshots[-1].timestamp

    @property
    def duration(self):
        return self.end - self.start

    def position_of(self, snapshot_index):
        '''
        The position in `snapshots` of the snapshot with index `snapshot_index`.
        '''
        for position, snapshot in enumerate(self.snapshots):
            if snapshot.index == snapshot_index:
                return position
        raise KeyError(snapshot_index)


class SolutionCorpus(object):
    '''
    The final correct solutions used for mining.
    '''

    def __init__(self, solutions):
        '''
        Initialize a `SolutionCorpus` instance.

        solutions:
            An iterable of `(solution_id, root)` pairs. Solution IDs must be unique.
        '''
        self._solutions = tuple(solutions)

        seen = set()
        for solution_id, _ in self._solutions:
            if solution_id in seen:
                raise ValidationError('duplicate solution ID "%s"' % solution_id)
            seen.add(solution_id)

    @property
    def solutions(self):
        return self._solutions

    @property
    def ids(self):
        return tuple(solution_id for solution_id, _ in self._solutions)

    @property
    def roots(self):
        return tuple(root for _, root in self._solutions)

    def __len__(self):
        return len(self._solutions)

    def __iter__(self):
        return iter(self._solutions)


class ExpertAnnotation(collections.namedtuple('ExpertAnnotation',
                                              ['student_id',
                                               'snapshot_indices',
                                               'truth',
                                               'final_outcome',
                                               'impacts'])):
    '''
    What experts established about a trace.

    student_id:
        The student the annotation refers to.
    snapshot_indices:
        The indices of the snapshots of the annotated trace.
    truth:
        A dictionary mapping objective IDs to a tuple of booleans, one per snapshot
        position, true where the objective was actually complete.
    final_outcome:
        `WORKING`, `NON_WORKING` or `None` if unknown.
    impacts:
        A frozen set of the impact types (`IMPACT_TYPES`) observed for the student.
    '''

    __slots__ = ()

    @property
    def objective_ids(self):
        return tuple(sorted(self.truth))

    @property
    def length(self):
        return len(self.snapshot_indices)

    def is_complete(self, objective_id, position):
        return self.truth[objective_id][position]

    def completed_at(self, position):
        '''
        The frozen set of objectives complete at snapshot `position`.
        '''
        return frozenset(objective_id
                         for objective_id, column in self.truth.items()
                         if column[position])

    def first_complete(self, objective_id):
        '''
        The first position at which `objective_id` is complete or `None`.
        '''
        for position, complete in enumerate(self.truth[objective_id]):
            if complete:
                return position
        return None


def _load_json_line(line, path, line_number):
    try:
        return json.loads(line)
    except ValueError as exc:
        raise ParseError('malformed record: %s' % getattr(exc, 'msg', exc),
                         path,
                         line_number,
                         getattr(exc, 'colno', None))


def _read_trace_records(lines, path):
    records = []
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue

        doc = _load_json_line(line, path, line_number)
        position = 'line %d' % line_number
        if not isinstance(doc, dict):
            raise ValidationError('a trace record must be an object', path, position)

        for key in ('student_id', 'index', 'timestamp_s', 'ast'):
            if key not in doc:
                raise ValidationError('missing "%s" in trace record' % key, path, position)

        index = doc['index']
        if isinstance(index, bool) or not isinstance(index, int) or index < 0:
            raise ValidationError('the snapshot index must be a non-negative integer',
                                  path, position)

        timestamp = doc['timestamp_s']
        if isinstance(timestamp, bool) or not isinstance(timestamp, numbers.Real) or \
                timestamp < 0:
            raise ValidationError('the timestamp must be a non-negative number',
                                  path, position)

        root = tree.node_from_document(doc['ast'], path, '%s: $.ast' % position)

        records.append((str(doc['student_id']),
                        Snapshot(index, timestamp, root),
                        bool(doc.get('submitted', False)),
                        line_number))

    return records


def _build_trace(student_id, records, path):
    by_index = {}
    submitted = False
    for _, snapshot, record_submitted, line_number in records:
        if snapshot.index in by_index:
            raise ValidationError('duplicate snapshot index %d for student "%s"' %
                                  (snapshot.index, student_id),
                                  path, 'line %d' % line_number)
        by_index[snapshot.index] = snapshot
        submitted = submitted or record_submitted

    snapshots = [by_index[index] for index in sorted(by_index)]
    for previous, current in zip(snapshots, snapshots[1:]):
        if current.timestamp < previous.timestamp:
            raise ValidationError(
                'timestamp of snapshot %d (%s) is before the one of snapshot %d (%s) for '
                'student "%s"' %
                (current.index, current.timestamp, previous.index, previous.timestamp,
                 student_id),
                path)

    return StudentTrace(student_id, snapshots, submitted)


def parse_trace(lines, path=None):
    '''
    Parse the trace of a single student.

    lines:
        An iterable of lines, each one a JSON record.
    path:
        The file the lines come from, if any.

    Return value:
        A `StudentTrace` with the snapshots sorted by index.
    '''
    records = _read_trace_records(lines, path)
    if not records:
        raise ValidationError('the trace contains no snapshot', path)

    student_ids = sorted(set(record[0] for record in records))
    if len(student_ids) != 1:
        raise ValidationError('expected records for a single student, got %d' %
                              len(student_ids),
                              path)

    return _build_trace(student_ids[0], records, path)


def parse_traces(lines, path=None):
    '''
    Parse a trace file containing records for any number of students.

    Return value:
        A list of `StudentTrace`, in the order in which each student first appears.
    '''
    grouped = collections.OrderedDict()
    for record in _read_trace_records(lines, path):
        grouped.setdefault(record[0], []).append(record)

    return [_build_trace(student_id, records, path)
            for student_id, records in grouped.items()]


def _objective_column(spec, snapshot_indices, objective_id, path, position):
    '''
    Expand the objective specification `spec` into a tuple of booleans.
    '''
    last_index = snapshot_indices[-1] if snapshot_indices else -1

    def check_index(index):
        if isinstance(index, bool) or not isinstance(index, int) or index < 0:
            raise ValidationError('objective %d: snapshot indices must be non-negative '
                                  'integers' % objective_id,
                                  path, position)
        if index > last_index:
            raise ValidationError('objective %d: matrix longer than trace (index %d, last '
                                  'snapshot is %d)' % (objective_id, index, last_index),
                                  path, position)

    if spec is None:
        return tuple(False for _ in snapshot_indices)

    if isinstance(spec, int) and not isinstance(spec, bool):
        check_index(spec)
        return tuple(index >= spec for index in snapshot_indices)

    if not isinstance(spec, list):
        raise ValidationError('objective %d: expected an index or a list of intervals' %
                              objective_id,
                              path, position)

    intervals = []
    for interval in spec:
        if not isinstance(interval, list) or len(interval) != 2:
            raise ValidationError('objective %d: intervals must be [FROM, TO] pairs' %
                                  objective_id,
                                  path, position)
        lower, upper = interval
        check_index(lower)
        if upper is not None:
            check_index(upper)
            if upper < lower:
                raise ValidationError('objective %d: empty interval [%d, %d]' %
                                      (objective_id, lower, upper),
                                      path, position)
        intervals.append((lower, upper))

    def covered(index):
        return any(lower <= index and (upper is None or index <= upper)
                   for lower, upper in intervals)

    return tuple(covered(index) for index in snapshot_indices)


def parse_annotations(doc, snapshot_indices, objective_ids=None, path=None):
    '''
    Build an `ExpertAnnotation` from an annotation document.

    doc:
        The decoded annotation object for one student.
    snapshot_indices:
        The indices of the snapshots of the annotated trace.
    objective_ids:
        The known objective IDs or `None` to accept any positive integer ID.
        Objectives not mentioned in the document are never complete.
    path:
        The file the document comes from, if any.
    '''
    snapshot_indices = tuple(snapshot_indices)

    if not isinstance(doc, dict):
        raise ValidationError('an annotation must be an object', path)

    student_id = doc.get('student_id')
    if student_id is None:
        raise ValidationError('missing "student_id" in annotation', path)
    student_id = str(student_id)
    position = 'student "%s"' % student_id

    final_outcome = doc.get('final_outcome')
    if final_outcome is not None and final_outcome not in FINAL_OUTCOMES:
        raise ValidationError('invalid final outcome "%s"' % final_outcome, path, position)

    impacts = doc.get('impacts') or []
    for impact in impacts:
        if impact not in IMPACT_TYPES:
            raise ValidationError('unknown impact type "%s"' % impact, path, position)

    objectives_doc = doc.get('objectives', {})
    if not isinstance(objectives_doc, dict):
        raise ValidationError('"objectives" must be an object', path, position)

    truth = {}
    if objective_ids is not None:
        for objective_id in objective_ids:
            truth[objective_id] = tuple(False for _ in snapshot_indices)

    for key, spec in objectives_doc.items():
        try:
            objective_id = int(key)
        except ValueError:
            raise ValidationError('invalid objective ID "%s"' % key, path, position)

        if objective_ids is not None and objective_id not in truth:
            raise ValidationError('unknown objective ID %d' % objective_id, path, position)
        if not 1 <= objective_id <= MAX_OBJECTIVE_ID:
            raise ValidationError('invalid objective ID %d (IDs go from 1 to %d)' %
                                  (objective_id, MAX_OBJECTIVE_ID),
                                  path, position)

        truth[objective_id] = _objective_column(spec, snapshot_indices, objective_id,
                                                path, position)

    return ExpertAnnotation(student_id,
                            snapshot_indices,
                            truth,
                            final_outcome,
                            frozenset(impacts))


def parse_annotation_file(text, traces, objective_ids=None, path=None):
    '''
    Parse an annotation file.

    text:
        The JSON text of the file.
    traces:
        The `StudentTrace` instances the annotations refer to.
    objective_ids:
        See `parse_annotations`.
    path:
        The path of the file, if any.

    Return value:
        A dictionary mapping student IDs to `ExpertAnnotation` instances.
    '''
    try:
        docs = json.loads(text)
    except ValueError as exc:
        raise ParseError('malformed annotation file: %s' % getattr(exc, 'msg', exc),
                         path,
                         getattr(exc, 'lineno', None),
                         getattr(exc, 'colno', None))

    if not isinstance(docs, list):
        raise ValidationError('the annotation file must contain an array', path)

    traces_by_id = {trace.student_id: trace for trace in traces}
    annotations = collections.OrderedDict()
    for doc in docs:
        student_id = str(doc.get('student_id')) if isinstance(doc, dict) else None
        trace = traces_by_id.get(student_id)
        if trace is None:
            raise ValidationError('annotation for unknown student "%s"' % student_id, path)
        if student_id in annotations:
            raise ValidationError('duplicate annotation for student "%s"' % student_id,
                                  path)
        annotations[student_id] = parse_annotations(doc,
                                                    trace.snapshot_indices,
                                                    objective_ids,
                                                    path)

    return annotations


def parse_corpus(doc, path=None):
    '''
    Build a `SolutionCorpus` from a decoded corpus document.

    doc:
        A list of `{"solution_id": ..., "ast": ...}` objects.
    path:
        The file the document comes from, if any.
    '''
    if not isinstance(doc, list):
        raise ValidationError('the corpus must be an array', path)
    if not doc:
        raise ValidationError('empty corpus', path)

    solutions = []
    for i, entry in enumerate(doc):
        position = '$[%d]' % i
        if not isinstance(entry, dict) or 'solution_id' not in entry or 'ast' not in entry:
            raise ValidationError('corpus entries need "solution_id" and "ast"',
                                  path, position)
        root = tree.node_from_document(entry['ast'], path, position + '.ast')
        solutions.append((str(entry['solution_id']), root))

    try:
        return SolutionCorpus(solutions)
    except ValidationError as exc:
        raise exc.with_path(path)


def serialize_trace(trace):
    '''
    Serialize `trace` into the line-delimited trace format.
    '''
    lines = []
    for position, snapshot in enumerate(trace.snapshots):
        record = {
            'student_id': trace.student_id,
            'index': snapshot.index,
            'timestamp_s': snapshot.timestamp,
            'ast': tree.node_to_document(snapshot.root),
            }
        if trace.submitted and position == len(trace.snapshots) - 1:
            record['submitted'] = True
        lines.append(json.dumps(record, sort_keys=True, separators=(',', ':')))
    return '\n'.join(lines) + '\n'


def _column_to_spec(column, snapshot_indices):
    runs = []
    run_start = None
    for position, complete in enumerate(column):
        if complete and run_start is None:
            run_start = position
        elif not complete and run_start is not None:
            runs.append((run_start, position - 1))
            run_start = None
    if run_start is not None:
        runs.append((run_start, None))

    if not runs:
        return None
    if len(runs) == 1 and runs[0][1] is None:
        return snapshot_indices[runs[0][0]]

    return [[snapshot_indices[lower], snapshot_indices[upper] if upper is not None else None]
            for lower, upper in runs]


def annotation_to_document(annotation):
    doc = {
        'student_id': annotation.student_id,
        'objectives': {
            str(objective_id): _column_to_spec(annotation.truth[objective_id],
                                               annotation.snapshot_indices)
            for objective_id in annotation.objective_ids
            },
        }
    if annotation.final_outcome is not None:
        doc['final_outcome'] = annotation.final_outcome
    if annotation.impacts:
        doc['impacts'] = sorted(annotation.impacts)
    return doc


def serialize_annotations(annotations):
    '''
    Serialize an iterable of `ExpertAnnotation` into the annotation file format.
    '''
    return json.dumps([annotation_to_document(annotation) for annotation in annotations],
                      sort_keys=True,
                      indent=4,
                      separators=(',', ': ')) + '\n'


def serialize_corpus(corpus):
    '''
    Serialize a `SolutionCorpus` into the corpus file format.
    '''
    return json.dumps([{'solution_id': solution_id, 'ast': tree.node_to_document(root)}
                       for solution_id, root in corpus],
                      sort_keys=True,
                      indent=4,
                      separators=(',', ': ')) + '\n'
