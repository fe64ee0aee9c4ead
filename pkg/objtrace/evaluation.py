# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

'''
Evaluation of the feedback against what experts established.
'''

from __future__ import absolute_import, division, print_function

import collections

from . import objectives

from .errors import ValidationError


TP = 'TP'
TN = 'TN'
FP = 'FP'
FN = 'FN'

# Kind of the tagged instances for completions the system never detected.
MISSED_COMPLETION = 'missed'

CD = 'CD'
CND = 'CND'
ID = 'ID'
IND = 'IND'
EARLY = 'E'
LATE = 'L'
DETECTION_TYPES = (CD, CND, ID, IND, EARLY, LATE)
FAULTY_DETECTION_TYPES = (ID, IND, EARLY, LATE)


TaggedEvent = collections.namedtuple('TaggedEvent',
                                     ['student_id', 'objective_id', 'snapshot_index',
                                      'tag', 'kind'])


class ConfusionCounts(collections.namedtuple('ConfusionCounts', ['tp', 'tn', 'fp', 'fn'])):
    '''
    Counts of true/false positives/negatives.
    '''

    __slots__ = ()

    @classmethod
    def from_tags(cls, tagged_events):
        counter = collections.Counter(tagged.tag for tagged in tagged_events)
        return cls(counter[TP], counter[TN], counter[FP], counter[FN])

    @property
    def total(self):
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other):
        return ConfusionCounts(*(a + b for a, b in zip(self, other)))


MetricsReport = collections.namedtuple('MetricsReport',
                                       ['accuracy', 'precision', 'recall', 'f1',
                                        'tnr', 'fpr', 'fnr'])


FirstDetectionRecord = collections.namedtuple('FirstDetectionRecord',
                                              ['student_id', 'objective_id',
                                               'system_index', 'expert_index', 'type'])


DetectionSummary = collections.namedtuple('DetectionSummary',
                                          ['counts', 'total', 'fully_incorrect',
                                           'partially_incorrect', 'strictly_correct'])


TimingStats = collections.namedtuple('TimingStats',
                                     ['near_miss', 'near_miss_count', 'on_time_count',
                                      'lenient_counts', 'lenient_metrics',
                                      'strict_counts', 'strict_metrics'])


ImpactRow = collections.namedtuple('ImpactRow',
                                   ['detection_type', 'count', 'impacted', 'ratio',
                                    'per_objective'])


ImpactCooccurrence = collections.namedtuple('ImpactCooccurrence',
                                            ['impact', 'count', 'detection_types'])


ImpactLink = collections.namedtuple('ImpactLink', ['student_id', 'impact', 'detection_type'])


ImpactFlags = collections.namedtuple('ImpactFlags', ['es', 'its', 'ipb'])


def _ratio(numerator, denominator):
    if denominator == 0:
        return None
    return numerator / denominator


def format_percent(value, digits=2):
    '''
    Format the fraction `value` as a percentage, or "n/a" if it's `None`.
    '''
    if value is None:
        return 'n/a'
    return '%.*f%%' % (digits, value * 100)


def _check_lengths(log, truth):
    if truth.length != len(log.snapshot_indices):
        raise ValidationError('annotation/trace length mismatch for student "%s": %d '
                              'annotated snapshots, %d replayed' %
                              (log.student_id, truth.length, len(log.snapshot_indices)))


def tag_events(log, truth, tolerance_edits=0):
    '''
    Tag the feedback of a student against the expert truth.

    Completions (first or repeated) are true positives if the expert says the objective
    is complete within `tolerance_edits` snapshots of the event, false positives
    otherwise. Breakages are true negatives if the expert says the objective is not
    complete at the event, false negatives otherwise. Every expert completion with no
    system completion within the tolerance is an additional false negative. Periods in
    which the objective is incomplete and nothing is detected are not counted.

    Return value:
        A list of `TaggedEvent` ordered by snapshot index and objective ID.
    '''
    if tolerance_edits < 0:
        raise ValidationError('the tolerance cannot be negative')
    _check_lengths(log, truth)

    n_snapshots = len(log.snapshot_indices)

    def window(position):
        return range(max(0, position - tolerance_edits),
                     min(n_snapshots, position + tolerance_edits + 1))

    tagged = []
    completion_positions = collections.defaultdict(set)

    for event in log.events:
        if event.objective_id not in truth.truth:
            raise ValidationError('event for objective %d which has no expert annotation' %
                                  event.objective_id)

        position = log.position_of(event.snapshot_index)
        column = truth.truth[event.objective_id]

        if event.kind in (objectives.EVENT_COMPLETED, objectives.EVENT_RECOMPLETED):
            completion_positions[event.objective_id].add(position)
            tag = TP if any(column[p] for p in window(position)) else FP
        else:
            tag = FN if column[position] else TN

        tagged.append(TaggedEvent(log.student_id,
                                  event.objective_id,
                                  event.snapshot_index,
                                  tag,
                                  event.kind))

    for objective_id in truth.objective_ids:
        column = truth.truth[objective_id]
        for position, complete in enumerate(column):
            if not complete or (position > 0 and column[position - 1]):
                continue
            detected = completion_positions[objective_id]
            if not any(p in detected for p in window(position)):
                tagged.append(TaggedEvent(log.student_id,
                                          objective_id,
                                          log.snapshot_indices[position],
                                          FN,
                                          MISSED_COMPLETION))

    tagged.sort(key=lambda item: (item.snapshot_index, item.objective_id))
    return tagged


def confusion_metrics(counts):
    '''
    Compute the usual metrics from `ConfusionCounts`.

    Metrics whose denominator is zero are `None`.
    '''
    tp, tn, fp, fn = counts

    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)

    return MetricsReport(accuracy=_ratio(tp + tn, tp + tn + fp + fn),
                         precision=precision,
                         recall=recall,
                         f1=f1,
                         tnr=_ratio(tn, tn + fp),
                         fpr=_ratio(fp, fp + tn),
                         fnr=_ratio(fn, fn + tp))


def detection_type(system_position, expert_position, tolerance_edits=0):
    '''
    The first-detection type for a system and an expert first completion.

    Either position may be `None` if the completion never happened.
    '''
    if system_position is None and expert_position is None:
        return CND
    if expert_position is None:
        return ID
    if system_position is None:
        return IND
    if abs(system_position - expert_position) <= tolerance_edits:
        return CD
    if system_position < expert_position:
        return EARLY
    return LATE


def classify_first_detections(log, truth, tolerance_edits=0):
    '''
    Classify the first detection of every objective for a student.

    Return value:
        A list of `FirstDetectionRecord`, one per objective, ordered by objective ID.
    '''
    _check_lengths(log, truth)

    objective_ids = sorted(set(truth.objective_ids) | set(log.objective_ids))

    def index_at(position):
        return log.snapshot_indices[position] if position is not None else None

    records = []
    for objective_id in objective_ids:
        first_event = log.first_completed(objective_id)
        if first_event is not None:
            system_position = log.position_of(first_event.snapshot_index)
        else:
            system_position = None

        if objective_id in truth.truth:
            expert_position = truth.first_complete(objective_id)
        else:
            expert_position = None

        records.append(FirstDetectionRecord(
            log.student_id,
            objective_id,
            index_at(system_position),
            index_at(expert_position),
            detection_type(system_position, expert_position, tolerance_edits)))

    return records


def count_detection_types(records):
    counter = collections.Counter(record.type for record in records)
    return collections.OrderedDict((kind, counter[kind]) for kind in DETECTION_TYPES)


def summarize_detection_counts(counts):
    '''
    Build a `DetectionSummary` from a dictionary mapping detection types to counts.
    '''
    counts = collections.OrderedDict((kind, counts.get(kind, 0)) for kind in DETECTION_TYPES)
    total = sum(counts.values())

    return DetectionSummary(
        counts=counts,
        total=total,
        fully_incorrect=_ratio(counts[ID] + counts[IND], total),
        partially_incorrect=_ratio(counts[EARLY] + counts[LATE], total),
        strictly_correct=_ratio(counts[CD] + counts[CND], total))


def detection_summary(records):
    return summarize_detection_counts(count_detection_types(records))


def retag_near_misses(tagged, records, strict=False):
    '''
    Retag the early and late first detections among `tagged`.

    Each early or late first completion is tagged as a true positive or, if `strict`,
    as a false positive. The missed expert completion it was paired with is dropped,
    so both modes hold the same number of instances.

    Return value:
        A new list of `TaggedEvent`, in the order of `tagged`.
    '''
    completions = set()
    missed = set()
    for record in records:
        if record.type not in (EARLY, LATE):
            continue
        completions.add((record.student_id, record.objective_id, record.system_index))
        missed.add((record.student_id, record.objective_id, record.expert_index))

    near_miss_tag = FP if strict else TP
    retagged = []
    for item in tagged:
        key = (item.student_id, item.objective_id, item.snapshot_index)
        if item.kind == MISSED_COMPLETION:
            if key in missed:
                continue
        elif item.kind == objectives.EVENT_COMPLETED and key in completions:
            item = item._replace(tag=near_miss_tag)
        retagged.append(item)

    return retagged


def timing_offset_stats(records_or_counts, tagged=None):
    '''
    How often the first detections were slightly early or late.

    records_or_counts:
        A list of `FirstDetectionRecord` or a dictionary mapping types to counts.
    tagged:
        The `TaggedEvent` list the records were classified from. If given, the
        confusion counts are recomputed twice: counting early and late first
        detections as correct (lenient) and as incorrect detections (strict).
        `records_or_counts` must then be a list of records.

    Return value:
        A `TimingStats`. The near-miss fraction is (E + L) / (CD + E + L).
    '''
    if isinstance(records_or_counts, dict):
        assert tagged is None, 'Tagged events need the detection records'
        counts = records_or_counts
    else:
        counts = count_detection_types(records_or_counts)

    on_time = counts.get(CD, 0)
    near_miss_count = counts.get(EARLY, 0) + counts.get(LATE, 0)
    near_miss = _ratio(near_miss_count, on_time + near_miss_count)

    if tagged is None:
        return TimingStats(near_miss, near_miss_count, on_time, None, None, None, None)

    lenient = ConfusionCounts.from_tags(retag_near_misses(tagged, records_or_counts))
    strict = ConfusionCounts.from_tags(retag_near_misses(tagged, records_or_counts,
                                                         strict=True))

    return TimingStats(near_miss,
                       near_miss_count,
                       on_time,
                       lenient,
                       confusion_metrics(lenient),
                       strict,
                       confusion_metrics(strict))


def impact_tables(records, impacts, links=None):
    '''
    Relate the first-detection types to the unintended impacts observed.

    records:
        A list of `FirstDetectionRecord`.
    impacts:
        A dictionary mapping student IDs to sets of impact types.
    links:
        A dictionary mapping impact types to the set of detection types which can
        contribute to it, or `None` to link every detection type to every impact.

    Return value:
        An `ImpactTable`.
    '''
    return ImpactTable(records, impacts, links)


class ImpactTable(object):
    '''
    Detection types co-occurring with unintended impacts.

    A record co-occurs with an impact if its student has that impact and, when links
    are given, its detection type is linked to the impact. A record may co-occur with
    several impacts.
    '''

    def __init__(self, records, impacts, links=None):
        records = list(records)
        self._impacts = {student_id: frozenset(labels)
                         for student_id, labels in impacts.items()}
        self._links = links

        linked_impacts = [self.record_impacts(record) for record in records]

        self.rows = []
        for kind in DETECTION_TYPES:
            per_objective = collections.OrderedDict()
            count = 0
            impacted = 0
            for record, record_impacts in zip(records, linked_impacts):
                if record.type != kind:
                    continue
                objective_count, objective_impacted = \
                    per_objective.get(record.objective_id, (0, 0))
                count += 1
                objective_count += 1
                if record_impacts:
                    impacted += 1
                    objective_impacted += 1
                per_objective[record.objective_id] = (objective_count, objective_impacted)

            per_objective = collections.OrderedDict(sorted(per_objective.items()))
            self.rows.append(ImpactRow(kind, count, impacted, _ratio(impacted, count) or 0.0,
                                       per_objective))

        raw_links = set()
        for record, record_impacts in zip(records, linked_impacts):
            for impact in record_impacts:
                raw_links.add(ImpactLink(record.student_id, impact, record.type))
        self.raw_links = sorted(raw_links)

        self.cooccurrences = []
        for impact in sorted(set(label for labels in self._impacts.values()
                                 for label in labels)):
            students = set(link.student_id for link in self.raw_links if link.impact == impact)
            kinds = set(link.detection_type for link in self.raw_links
                        if link.impact == impact)
            self.cooccurrences.append(ImpactCooccurrence(
                impact,
                len(students),
                tuple(kind for kind in DETECTION_TYPES if kind in kinds)))

        faulty = [record_impacts
                  for record, record_impacts in zip(records, linked_impacts)
                  if record.type in FAULTY_DETECTION_TYPES]
        self.faulty_count = len(faulty)
        self.faulty_impacted = sum(1 for record_impacts in faulty if record_impacts)
        self.faulty_impacted_ratio = _ratio(self.faulty_impacted, self.faulty_count)

    def record_impacts(self, record):
        '''
        The impacts `record` co-occurs with.
        '''
        student_impacts = self._impacts.get(record.student_id, frozenset())
        if self._links is None:
            return student_impacts
        return frozenset(impact for impact in student_impacts
                         if record.type in self._links.get(impact, ()))

    def row(self, detection_type_name):
        for row in self.rows:
            if row.detection_type == detection_type_name:
                return row
        raise KeyError(detection_type_name)


def count_events(logs):
    '''
    The number of feedback events per student.

    Return value:
        An ordered dictionary mapping student IDs to event counts.
    '''
    return collections.OrderedDict((log.student_id, len(log.events)) for log in logs)


def flag_impacts_heuristic(trace, log, truth, records=None, its_alpha=0.5):
    '''
    Suggest which impacts a student may have suffered.

    ES is suggested when, at the last snapshot, the system reports every objective as
    complete while the expert says at least one is not.
    ITS is suggested when, after reaching a state in which all the objectives are
    actually complete at time t1, the student keeps working for at least
    `its_alpha` * t1 while at least one objective is IND or L.
    IPB is suggested when an objective with an ID or E first detection is followed by
    a snapshot in which an objective the expert considered complete is lost.

    Return value:
        An `ImpactFlags` tuple whose entries are `None` or a dictionary describing the
        evidence.
    '''
    _check_lengths(log, truth)
    if records is None:
        records = classify_first_detections(log, truth)

    last = len(log.snapshot_indices) - 1

    es = None
    expert_final = truth.completed_at(last)
    expert_incomplete = sorted(set(truth.objective_ids) - expert_final)
    if log.final_status.all_complete and expert_incomplete:
        es = {
            'snapshot_index': log.snapshot_indices[last],
            'objectives': expert_incomplete,
            }

    its = None
    all_objectives = frozenset(truth.objective_ids)
    missed = sorted(record.objective_id for record in records if record.type in (IND, LATE))
    for position in range(last + 1):
        if truth.completed_at(position) == all_objectives:
            t1 = trace.snapshots[position].timestamp - trace.start
            extra = trace.end - trace.snapshots[position].timestamp
            if extra > 0 and extra >= its_alpha * t1 and missed:
                its = {
                    'snapshot_index': log.snapshot_indices[position],
                    'extra_seconds': extra,
                    'objectives': missed,
                    }
            break

    ipb = None
    suspicious = sorted(record.objective_id for record in records
                        if record.type in (ID, EARLY) and record.system_index is not None)
    if suspicious:
        first_suspicious = min(log.position_of(record.system_index)
                               for record in records
                               if record.objective_id in suspicious)
        for position in range(first_suspicious + 1, last + 1):
            lost = truth.completed_at(position - 1) - truth.completed_at(position)
            if lost:
                ipb = {
                    'snapshot_index': log.snapshot_indices[position],
                    'objectives': suspicious,
                    'lost': sorted(lost),
                    }
                break

    return ImpactFlags(es, its, ipb)
