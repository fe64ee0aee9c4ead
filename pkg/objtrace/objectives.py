# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

'''
Objective detection and the immediate feedback event stream.

After every edit the features present in the code are detected, each objective is
marked complete if all its required features are present and an event is emitted for
every objective whose status changed.
'''

from __future__ import absolute_import, division, print_function

import collections
import json

from .errors import (
    ConfigError,
    ParseError,
    ValidationError,
    )

from .log import verbose
from .traces import MAX_OBJECTIVE_ID


INACTIVE = 'inactive'
COMPLETE = 'complete'
BROKEN = 'broken'

EVENT_COMPLETED = 'completed'
EVENT_BROKEN = 'broken'
EVENT_RECOMPLETED = 'recompleted'
EVENT_KINDS = (EVENT_COMPLETED, EVENT_BROKEN, EVENT_RECOMPLETED)

# (previous status, new status) -> event kind.
_TRANSITION_EVENTS = {
    (INACTIVE, COMPLETE): EVENT_COMPLETED,
    (COMPLETE, BROKEN): EVENT_BROKEN,
    (BROKEN, COMPLETE): EVENT_RECOMPLETED,
    }

# Event kind -> (allowed previous status, new status).
_EVENT_TRANSITIONS = {kind: transition for transition, kind in _TRANSITION_EVENTS.items()}


ObjectiveSpec = collections.namedtuple('ObjectiveSpec', ['id', 'label', 'required'])


FeedbackEvent = collections.namedtuple('FeedbackEvent',
                                       ['snapshot_index', 'objective_id', 'kind'])


def load_objectives(doc, feature_ids=None, path=None):
    '''
    Load the objective definitions from an objectives document.

    doc:
        The decoded document, `{"objectives": [{"id": ..., "label": ...,
        "required": [...]}]}`.
    feature_ids:
        The IDs of the available features or `None` to skip checking that the required
        features exist.
    path:
        The file the document comes from, if any.

    Return value:
        A list of `ObjectiveSpec` sorted by ID.
    '''
    if not isinstance(doc, dict) or not isinstance(doc.get('objectives'), list):
        raise ConfigError('an objectives document needs an "objectives" array', path)

    known_features = set(feature_ids) if feature_ids is not None else None

    specs = []
    for i, objective_doc in enumerate(doc['objectives']):
        position = '$.objectives[%d]' % i
        if not isinstance(objective_doc, dict):
            raise ConfigError('an objective must be an object', path, position)

        objective_id = objective_doc.get('id')
        if isinstance(objective_id, bool) or not isinstance(objective_id, int):
            raise ConfigError('objective IDs must be integers', path, position)
        if not 1 <= objective_id <= MAX_OBJECTIVE_ID:
            raise ConfigError('objective IDs must go from 1 to %d, got %d' %
                              (MAX_OBJECTIVE_ID, objective_id),
                              path, position)

        label = objective_doc.get('label', 'Objective %s' % objective_id)
        if not isinstance(label, str):
            raise ConfigError('objective labels must be strings', path, position)

        required = objective_doc.get('required')
        if not isinstance(required, list) or not required:
            raise ConfigError('objective %d needs a non-empty "required" array' %
                              objective_id,
                              path, position)

        for feature_id in required:
            if isinstance(feature_id, bool) or not isinstance(feature_id, int):
                raise ConfigError('objective %d: feature IDs must be integers' %
                                  objective_id,
                                  path, position)
            if known_features is not None and feature_id not in known_features:
                raise ConfigError('objective %d requires missing feature %d' %
                                  (objective_id, feature_id),
                                  path, position)

        specs.append(ObjectiveSpec(objective_id, label, tuple(sorted(set(required)))))

    specs.sort(key=lambda spec: spec.id)
    ids = [spec.id for spec in specs]
    if ids != list(range(1, len(ids) + 1)):
        raise ConfigError('objective IDs must be unique and contiguous from 1, got %s' %
                          ', '.join(str(i) for i in ids),
                          path)

    return specs


def objectives_to_document(specs):
    return collections.OrderedDict((
        ('objectives', [collections.OrderedDict((
            ('id', spec.id),
            ('label', spec.label),
            ('required', list(spec.required)),
            )) for spec in specs]),
        ))


class FeatureState(object):
    '''
    Which features are present in a snapshot.
    '''

    def __init__(self, bits, feature_ids=None):
        '''
        Initialize a `FeatureState` instance.

        bits:
            An iterable of booleans; the k-th one is true if the k-th feature is present.
        feature_ids:
            The ID of the feature corresponding to each bit. Defaults to 1, 2, etc.
        '''
        self._bits = tuple(bool(bit) for bit in bits)
        if feature_ids is None:
            feature_ids = range(1, len(self._bits) + 1)
        self._feature_ids = tuple(feature_ids)
        assert len(self._feature_ids) == len(self._bits)

    @property
    def bits(self):
        return self._bits

    def has(self, feature_id):
        return self._bits[self._feature_ids.index(feature_id)]

    def __eq__(self, other):
        if not isinstance(other, FeatureState):
            return NotImplemented
        return self._bits == other._bits and self._feature_ids == other._feature_ids

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash((self._bits, self._feature_ids))

    def __str__(self):
        return ''.join('1' if bit else '0' for bit in self._bits)

    def __repr__(self):
        return 'FeatureState(%r)' % str(self)


class ObjectiveStatus(object):
    '''
    The status (`INACTIVE`, `COMPLETE` or `BROKEN`) of every objective.
    '''

    def __init__(self, statuses):
        '''
        Initialize an `ObjectiveStatus` instance.

        statuses:
            A dictionary (or iterable of pairs) mapping objective IDs to statuses.
        '''
        self._statuses = collections.OrderedDict(sorted(dict(statuses).items()))

    @staticmethod
    def initial(objective_ids):
        '''
        The status before any snapshot: every objective inactive.
        '''
        return ObjectiveStatus((objective_id, INACTIVE) for objective_id in objective_ids)

    def __getitem__(self, objective_id):
        return self._statuses[objective_id]

    def items(self):
        return self._statuses.items()

    @property
    def objective_ids(self):
        return tuple(self._statuses)

    @property
    def complete(self):
        '''
        The frozen set of complete objectives.
        '''
        return frozenset(objective_id
                         for objective_id, status in self._statuses.items()
                         if status == COMPLETE)

    @property
    def all_complete(self):
        return all(status == COMPLETE for status in self._statuses.values())

    def __eq__(self, other):
        if not isinstance(other, ObjectiveStatus):
            return NotImplemented
        return self._statuses == other._statuses

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash(tuple(self._statuses.items()))

    def __repr__(self):
        return 'ObjectiveStatus(%r)' % dict(self._statuses)


def feature_state(root, feature_set):
    '''
    The `FeatureState` of the tree at `root` for the features in `feature_set`
    (a `mining.FeatureSet`).
    '''
    return FeatureState(feature_set.presence(root), feature_set.feature_ids)


def objective_statuses(state, prior, specs):
    '''
    Compute the new objective statuses.

    An objective is complete if all its required features are present. Otherwise it is
    broken if it was complete or broken before, and inactive if it was never complete.
    '''
    statuses = {}
    for spec in specs:
        if all(state.has(feature_id) for feature_id in spec.required):
            statuses[spec.id] = COMPLETE
        elif prior[spec.id] in (COMPLETE, BROKEN):
            statuses[spec.id] = BROKEN
        else:
            statuses[spec.id] = INACTIVE
    return ObjectiveStatus(statuses)


def _events_between(prior, statuses, snapshot_index):
    events = []
    for objective_id, status in statuses.items():
        kind = _TRANSITION_EVENTS.get((prior[objective_id], status))
        if kind is not None:
            events.append(FeedbackEvent(snapshot_index, objective_id, kind))
    return events


def step(prior, snapshot, feature_set, specs):
    '''
    Process a single snapshot.

    prior:
        The `ObjectiveStatus` before the snapshot.
    snapshot:
        The `traces.Snapshot` to process.
    feature_set:
        The `mining.FeatureSet` to detect.
    specs:
        The list of `ObjectiveSpec`.

    Return value:
        A `(statuses, events)` tuple with the new `ObjectiveStatus` and the list of
        `FeedbackEvent` emitted, ordered by objective ID.
    '''
    state = feature_state(snapshot.root, feature_set)
    statuses = objective_statuses(state, prior, specs)
    return statuses, _events_between(prior, statuses, snapshot.index)


class EventLog(object):
    '''
    The result of replaying a trace: the events and the per-snapshot statuses.
    '''

    def __init__(self, student_id, snapshot_indices, events, statuses, feature_states=None):
        '''
        Initialize an `EventLog` instance.

        student_id:
            The student the log refers to.
        snapshot_indices:
            The indices of the replayed snapshots.
        events:
            The list of `FeedbackEvent` ordered by snapshot index and objective ID.
        statuses:
            The list of `ObjectiveStatus`, one per snapshot.
        feature_states:
            The list of `FeatureState`, one per snapshot, or `None` if not known (for
            instance when the log is loaded from an event file).
        '''
        self.student_id = student_id
        self.snapshot_indices = tuple(snapshot_indices)
        self.events = tuple(events)
        self.statuses = tuple(statuses)
        self.feature_states = tuple(feature_states) if feature_states is not None else None

        assert len(self.statuses) == len(self.snapshot_indices)

    @classmethod
    def from_events(cls, student_id, events, snapshot_indices, objective_ids):
        '''
        Rebuild a log from its events alone.
        '''
        events = sorted(events, key=lambda event: (event.snapshot_index, event.objective_id))
        statuses = statuses_from_events(events, snapshot_indices, objective_ids)
        return cls(student_id, snapshot_indices, events, statuses)

    @property
    def final_status(self):
        return self.statuses[-1]

    @property
    def objective_ids(self):
        return self.statuses[0].objective_ids

    def position_of(self, snapshot_index):
        return self.snapshot_indices.index(snapshot_index)

    def first_completed(self, objective_id):
        '''
        The `FeedbackEvent` of the first completion of `objective_id` or `None`.
        '''
        for event in self.events:
            if event.objective_id == objective_id and event.kind == EVENT_COMPLETED:
                return event
        return None

    def event_lines(self):
        '''
        The events in the line-delimited export format.
        '''
        return [json.dumps(collections.OrderedDict((
            ('student_id', self.student_id),
            ('snapshot_index', event.snapshot_index),
            ('objective_id', event.objective_id),
            ('kind', event.kind),
            ))) for event in self.events]

    def __eq__(self, other):
        if not isinstance(other, EventLog):
            return NotImplemented
        return (self.student_id, self.snapshot_indices, self.events, self.statuses) == \
            (other.student_id, other.snapshot_indices, other.events, other.statuses)

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    __hash__ = None


def replay(trace, feature_set, specs):
    '''
    Replay all the snapshots of a trace.

    Return value:
        An `EventLog`.
    '''
    prior = ObjectiveStatus.initial(spec.id for spec in specs)

    events = []
    statuses = []
    states = []
    for snapshot in trace.snapshots:
        state = feature_state(snapshot.root, feature_set)
        current = objective_statuses(state, prior, specs)
        events.extend(_events_between(prior, current, snapshot.index))
        statuses.append(current)
        states.append(state)
        prior = current

    verbose('Replayed %d snapshots for student "%s": %d events.' %
            (len(trace.snapshots), trace.student_id, len(events)))

    return EventLog(trace.student_id, trace.snapshot_indices, events, statuses, states)


def statuses_from_events(events, snapshot_indices, objective_ids):
    '''
    Reconstruct the per-snapshot status table from an event stream.

    Raises `ValidationError` if an event is not a valid transition.
    '''
    by_index = collections.defaultdict(list)
    for event in events:
        by_index[event.snapshot_index].append(event)

    unknown_indices = set(by_index) - set(snapshot_indices)
    if unknown_indices:
        raise ValidationError('events reference unknown snapshots: %s' %
                              ', '.join(str(i) for i in sorted(unknown_indices)))

    current = dict(ObjectiveStatus.initial(objective_ids).items())
    table = []
    for snapshot_index in snapshot_indices:
        for event in by_index.get(snapshot_index, ()):
            if event.objective_id not in current:
                raise ValidationError('event for unknown objective %d' % event.objective_id)
            expected_prior, new_status = _EVENT_TRANSITIONS[event.kind]
            if current[event.objective_id] != expected_prior:
                raise ValidationError('invalid "%s" event for objective %d at snapshot %d' %
                                      (event.kind, event.objective_id, snapshot_index))
            current[event.objective_id] = new_status
        table.append(ObjectiveStatus(current))

    return table


def parse_event_lines(lines, path=None):
    '''
    Parse a line-delimited event file.

    Return value:
        An ordered dictionary mapping student IDs to lists of `FeedbackEvent`, in the
        order in which the students first appear.
    '''
    events = collections.OrderedDict()
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue

        try:
            doc = json.loads(line)
        except ValueError as exc:
            raise ParseError('malformed event: %s' % getattr(exc, 'msg', exc),
                             path,
                             line_number,
                             getattr(exc, 'colno', None))

        position = 'line %d' % line_number
        if not isinstance(doc, dict):
            raise ValidationError('an event must be an object', path, position)

        try:
            student_id = str(doc['student_id'])
            event = FeedbackEvent(int(doc['snapshot_index']),
                                  int(doc['objective_id']),
                                  doc['kind'])
        except (KeyError, TypeError, ValueError):
            raise ValidationError('events need "student_id", "snapshot_index", '
                                  '"objective_id" and "kind"',
                                  path, position)

        if event.kind not in EVENT_KINDS:
            raise ValidationError('unknown event kind "%s"' % event.kind, path, position)

        events.setdefault(student_id, []).append(event)

    return events
