# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

'''
Mining of the features shared by correct solutions.

The pipeline extracts the code shapes of every solution, indexes which solutions
contain each shape, removes redundant shapes, builds decision shapes for alternative
strategies, drops everything which is not common enough and finally clusters what is
left into features.
'''

from __future__ import absolute_import, division, print_function

import collections
import itertools

from . import (
    shapes,
    traces,
    tree,
    )

from .errors import (
    ConfigError,
    ValidationError,
    )

from .log import verbose


JACCARD_DEDUPE_THRESHOLD = 0.950625 # 0.975 squared.
SUPPORT_THRESHOLD = 0.81 # 0.9 squared.


class MiningConfig(object):
    '''
    Parameters of the mining pipeline.
    '''

    # Maps the keys used in configuration documents to the attribute names.
    DOCUMENT_KEYS = collections.OrderedDict((
        ('p-max', 'p_max'),
        ('q-max', 'q_max'),
        ('jaccard-dedupe-threshold', 'jaccard_dedupe_threshold'),
        ('support-threshold', 'support_threshold'),
        ('include-values', 'include_values'),
        ('resolution-drop-threshold', 'resolution_drop_threshold'),
        ('min-features', 'min_features'),
        ('max-features', 'max_features'),
        ('anonymize-variables', 'anonymize_variables'),
        ))

    def __init__(self,
                 p_max=3,
                 q_max=4,
                 jaccard_dedupe_threshold=JACCARD_DEDUPE_THRESHOLD,
                 support_threshold=SUPPORT_THRESHOLD,
                 include_values=True,
                 resolution_drop_threshold=0.05,
                 min_features=None,
                 max_features=None,
                 anonymize_variables=False):
        '''
        Initialize a `MiningConfig` instance.

        p_max:
            The maximum number of labels in the stem of a shape.
        q_max:
            The maximum number of children in the window of a shape.
        jaccard_dedupe_threshold:
            Of two shapes whose occurrence sets have a Jaccard similarity strictly
            higher than this, the smaller is removed.
        support_threshold:
            Shapes and decisions with support strictly lower than this are removed.
        include_values:
            Whether node values are part of shapes.
        resolution_drop_threshold:
            A merge is rejected if it makes the resolution drop by more than this
            fraction of the current resolution.
        min_features:
            Stop merging when there are this many features or `None`.
        max_features:
            Keep merging while there are more features than this or `None`.
        anonymize_variables:
            Whether identifiers are renamed before mining and detection.
        '''
        self.p_max = p_max
        self.q_max = q_max
        self.jaccard_dedupe_threshold = jaccard_dedupe_threshold
        self.support_threshold = support_threshold
        self.include_values = include_values
        self.resolution_drop_threshold = resolution_drop_threshold
        self.min_features = min_features
        self.max_features = max_features
        self.anonymize_variables = anonymize_variables

        self.validate()

    def validate(self):
        '''
        Raise a `ConfigError` if the configuration is not valid.
        '''
        for name in ('p_max', 'q_max'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError('mining option "%s" must be a positive integer' % name)

        for name in ('jaccard_dedupe_threshold', 'support_threshold'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or \
                    not 0 < value <= 1:
                raise ConfigError('mining option "%s" must be in (0, 1]' % name)

        if isinstance(self.resolution_drop_threshold, bool) or \
                not isinstance(self.resolution_drop_threshold, (int, float)) or \
                not 0 <= self.resolution_drop_threshold <= 1:
            raise ConfigError('mining option "resolution_drop_threshold" must be in [0, 1]')

        for name in ('min_features', 'max_features'):
            value = getattr(self, name)
            if value is None:
                continue
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError('mining option "%s" must be a positive integer' % name)

        if self.min_features is not None and self.max_features is not None and \
                self.min_features > self.max_features:
            raise ConfigError('mining option "min_features" cannot be greater than '
                              '"max_features"')

    @classmethod
    def from_document(cls, doc):
        '''
        Create a `MiningConfig` from a configuration object using the hyphenated keys of
        `DOCUMENT_KEYS`. Missing keys take the default value.
        '''
        if doc is None:
            return cls()
        if not isinstance(doc, dict):
            raise ConfigError('the "mining" option must be an object')

        unknown = sorted(set(doc) - set(cls.DOCUMENT_KEYS))
        if unknown:
            raise ConfigError('unknown mining options: %s' % ', '.join(unknown))

        return cls(**{cls.DOCUMENT_KEYS[key]: value for key, value in doc.items()})

    def to_document(self):
        return collections.OrderedDict(
            (key, getattr(self, attr)) for key, attr in self.DOCUMENT_KEYS.items())


ReportEntry = collections.namedtuple('ReportEntry', ['stage', 'item', 'cause'])

CurvePoint = collections.namedtuple('CurvePoint', ['n_features', 'resolution', 'accepted'])


class MiningReport(object):
    '''
    Provenance of a mining run: how many items survived each stage, why each item was
    removed or merged and the resolution of every attempted merge.
    '''

    def __init__(self):
        self.stage_counts = collections.OrderedDict()
        self.entries = []
        self.curve = []

    def record_count(self, stage, count):
        verbose('Mining stage "%s": %d items.' % (stage, count))
        self.stage_counts[stage] = count

    def record(self, stage, item, cause):
        self.entries.append(ReportEntry(stage, item, cause))

    def record_curve_point(self, n_features, resolution_value, accepted):
        self.curve.append(CurvePoint(n_features, resolution_value, accepted))

    def to_document(self):
        return collections.OrderedDict((
            ('stages', [collections.OrderedDict((('stage', stage), ('count', count)))
                        for stage, count in self.stage_counts.items()]),
            ('entries', [collections.OrderedDict(entry._asdict())
                         for entry in self.entries]),
            ('resolution_curve', [collections.OrderedDict(point._asdict())
                                  for point in self.curve]),
            ))


class OccurrenceIndex(object):
    '''
    For every shape, the set of IDs of the solutions containing it.
    '''

    def __init__(self, corpus_size, occurrences):
        '''
        Initialize an `OccurrenceIndex` instance.

        corpus_size:
            The number of solutions in the corpus.
        occurrences:
            A dictionary mapping shape IDs to sets of solution IDs.
        '''
        assert corpus_size > 0
        self._corpus_size = corpus_size
        self._occurrences = {shape_id: frozenset(ids)
                             for shape_id, ids in occurrences.items()}

    @property
    def corpus_size(self):
        return self._corpus_size

    @property
    def shape_ids(self):
        return sorted(self._occurrences)

    def occurrences(self, item):
        '''
        The solutions containing `item`, a `shapes.CodeShape` or a `shapes.DecisionShape`.

        Decisions occur where either branch does.
        '''
        if isinstance(item, shapes.DecisionShape):
            return self.occurrences(item.first) | self.occurrences(item.second)
        return self._occurrences[item.shape_id]

    def support(self, item):
        return len(self.occurrences(item)) / self._corpus_size

    def overlap(self, first, second):
        '''
        The fraction of the corpus containing both `first` and `second`.
        '''
        return len(self.occurrences(first) & self.occurrences(second)) / self._corpus_size


def jaccard(first, second):
    '''
    The Jaccard similarity of two sets; 0 if both are empty.
    '''
    union = len(first | second)
    if union == 0:
        return 0.0
    return len(first & second) / union


def _anonymized_corpus(corpus):
    return traces.SolutionCorpus((solution_id, tree.anonymize_variables(root))
                                 for solution_id, root in corpus)


def _anonymized_trace(trace):
    return traces.StudentTrace(
        trace.student_id,
        [traces.Snapshot(snapshot.index,
                         snapshot.timestamp,
                         tree.anonymize_variables(snapshot.root))
         for snapshot in trace.snapshots],
        trace.submitted)


def extract_corpus_shapes(corpus, config):
    all_shapes = set()
    for _, root in corpus:
        all_shapes |= shapes.extract_code_shapes(root,
                                                 config.p_max,
                                                 config.q_max,
                                                 config.include_values)
    return all_shapes


def build_occurrence_index(corpus, code_shapes):
    '''
    Build the `OccurrenceIndex` of `code_shapes` over `corpus`.
    '''
    if not len(corpus): # pylint: disable=len-as-condition
        raise ValidationError('empty corpus')

    code_shapes = list(code_shapes)
    include_values = code_shapes[0].include_values if code_shapes else True

    views = [(solution_id, shapes.TreeView(root, include_values))
             for solution_id, root in corpus]

    occurrences = {}
    for shape in code_shapes:
        occurrences[shape.shape_id] = [solution_id
                                       for solution_id, view in views
                                       if view.contains(shape)]

    return OccurrenceIndex(len(corpus), occurrences)


def _size_key(shape):
    return (shape.n_labels, shape.shape_id)


def dedupe_redundant(code_shapes, index, config, report=None):
    '''
    Remove redundant shapes.

    Pairs are scanned in canonical ID order and, when the Jaccard similarity of their
    occurrence sets is strictly higher than the threshold, the smaller of the two
    (fewer labels, then lower canonical ID) is removed.

    Return value:
        The list of surviving shapes sorted by canonical ID.
    '''
    ordered = sorted(code_shapes, key=lambda shape: shape.shape_id)
    removed = set()

    for i, first in enumerate(ordered):
        if first.shape_id in removed:
            continue
        first_occurrences = index.occurrences(first)

        for second in ordered[i + 1:]:
            if second.shape_id in removed:
                continue

            similarity = jaccard(first_occurrences, index.occurrences(second))
            if similarity <= config.jaccard_dedupe_threshold:
                continue

            if _size_key(first) < _size_key(second):
                smaller, larger = first, second
            else:
                smaller, larger = second, first

            removed.add(smaller.shape_id)
            if report is not None:
                report.record('dedupe',
                              smaller.shape_id,
                              'jaccard %.6f with %s' % (similarity, larger.shape_id))

            if smaller is first:
                break

    survivors = [shape for shape in ordered if shape.shape_id not in removed]
    if report is not None:
        report.record_count('dedupe', len(survivors))
    return survivors


def build_decision_shapes(code_shapes, index, config, report=None):
    # pylint: disable=unused-argument
    '''
    Build the decision shapes combining alternative strategies.

    For each shape, the partner is the other shape with the smallest overlap (ties
    broken by canonical ID); a decision is built if the partner has strictly lower
    support.

    Return value:
        The list of decisions sorted by canonical ID.
    '''
    ordered = sorted(code_shapes, key=lambda shape: shape.shape_id)

    decisions = {}
    for first in ordered:
        partner = None
        partner_overlap = None
        for second in ordered:
            if second is first:
                continue
            overlap = index.overlap(first, second)
            if partner_overlap is None or overlap < partner_overlap:
                partner = second
                partner_overlap = overlap

        # A single shape has no partner.
        if partner is not None and index.support(partner) < index.support(first):
            key = frozenset((first.shape_id, partner.shape_id))
            if key not in decisions:
                decisions[key] = shapes.DecisionShape(first, partner)

    result = sorted(decisions.values(), key=lambda decision: decision.shape_id)
    if report is not None:
        report.record_count('decisions', len(result))
    return result


def filter_by_support(items, index, config, report=None):
    '''
    Remove the shapes and decisions whose support is strictly lower than the threshold.

    Return value:
        The list of surviving items sorted by canonical ID.
    '''
    survivors = []
    for item in sorted(items, key=lambda item: item.shape_id):
        support = index.support(item)
        if support < config.support_threshold:
            if report is not None:
                report.record('support', item.shape_id, 'support %.6f' % support)
        else:
            survivors.append(item)

    if report is not None:
        report.record_count('support', len(survivors))
    return survivors


class Feature(object):
    '''
    A mined feature: a group of shapes and decisions which must all be present.
    '''

    def __init__(self, feature_id, members, support=None):
        '''
        Initialize a `Feature` instance.

        feature_id:
            The 1-based ID of the feature.
        members:
            The `shapes.CodeShape` and `shapes.DecisionShape` instances in the feature.
        support:
            The fraction of the corpus containing all the members or `None` if unknown.
        '''
        assert members
        self._feature_id = feature_id
        self._members = tuple(sorted(members, key=lambda member: member.shape_id))
        self._support = support

    @property
    def feature_id(self):
        return self._feature_id

    @property
    def members(self):
        return self._members

    @property
    def member_ids(self):
        return tuple(member.shape_id for member in self._members)

    @property
    def support(self):
        return self._support

    @property
    def include_values(self):
        first = self._members[0]
        if isinstance(first, shapes.DecisionShape):
            first = first.first
        return first.include_values

    def occurs(self, root_or_view):
        '''
        Whether all the members occur in a tree.

        root_or_view:
            Either the root `tree.AstNode` of the tree or a `shapes.TreeView` of it.
        '''
        if isinstance(root_or_view, shapes.TreeView):
            view = root_or_view
        else:
            view = shapes.TreeView(root_or_view, self.include_values)
        return all(member.occurs_in(view) for member in self._members)


class FeatureSet(object):
    '''
    The ordered features used to compute feature states.
    '''

    def __init__(self, features, include_values=True, anonymize_variables=False):
        self._features = tuple(sorted(features, key=lambda feature: feature.feature_id))
        self._include_values = include_values
        self._anonymize_variables = anonymize_variables

    @property
    def features(self):
        return self._features

    @property
    def feature_ids(self):
        return tuple(feature.feature_id for feature in self._features)

    @property
    def include_values(self):
        return self._include_values

    @property
    def anonymize_variables(self):
        return self._anonymize_variables

    def __len__(self):
        return len(self._features)

    def __iter__(self):
        return iter(self._features)

    def view(self, root):
        '''
        A `shapes.TreeView` of `root` suitable to detect these features.
        '''
        if self._anonymize_variables:
            root = tree.anonymize_variables(root)
        return shapes.TreeView(root, self._include_values)

    def presence(self, root):
        '''
        A tuple of booleans, one per feature, true where the feature occurs in `root`.
        '''
        view = self.view(root)
        return tuple(feature.occurs(view) for feature in self._features)


def resolution(features, training_traces):
    '''
    The fraction of adjacent snapshot pairs whose feature states differ.

    features:
        A `FeatureSet` or an iterable of objects with an `occurs` method.
    training_traces:
        A list of `traces.StudentTrace`.
    '''
    if isinstance(features, FeatureSet):
        presence = features.presence
    else:
        features = list(features)

        def presence(root):
            return tuple(feature.occurs(root) for feature in features)

    pairs = 0
    changed = 0
    for trace in training_traces:
        vectors = [presence(snapshot.root) for snapshot in trace.snapshots]
        for previous, current in zip(vectors, vectors[1:]):
            pairs += 1
            if previous != current:
                changed += 1

    if pairs == 0:
        raise ValidationError('resolution needs at least one trace with two snapshots')

    return changed / pairs


class FeatureCluster(collections.namedtuple('FeatureCluster', ['id', 'members'])):
    '''
    A group of items merged into a single feature.

    id:
        The 1-based ID of the cluster.
    members:
        A tuple of `shapes.CodeShape` and `shapes.DecisionShape` sorted by ID.
    '''

    __slots__ = ()

    @property
    def member_ids(self):
        return tuple(member.shape_id for member in self.members)


class _Cluster(object):
    # A cluster being built, before the final IDs are assigned.

    def __init__(self, members, occurrences):
        self.members = tuple(sorted(members, key=lambda member: member.shape_id))
        self.key = tuple(member.shape_id for member in self.members)
        self.occurrences = occurrences

    def merged_with(self, other):
        return _Cluster(self.members + other.members,
                        self.occurrences & other.occurrences)


class _PresenceTable(object):
    # Which items are present in each snapshot of the training traces.

    def __init__(self, items, training_traces, include_values, anonymize):
        self._rows = []
        for trace in training_traces:
            row = []
            for snapshot in trace.snapshots:
                root = snapshot.root
                if anonymize:
                    root = tree.anonymize_variables(root)
                view = shapes.TreeView(root, include_values)
                row.append(frozenset(item.shape_id for item in items
                                     if item.occurs_in(view)))
            self._rows.append(row)

    def resolution(self, clusters):
        pairs = 0
        changed = 0
        for row in self._rows:
            vectors = [tuple(all(member_id in present for member_id in cluster.key)
                             for cluster in clusters)
                       for present in row]
            for previous, current in zip(vectors, vectors[1:]):
                pairs += 1
                if previous != current:
                    changed += 1

        if pairs == 0:
            raise ValidationError('resolution needs at least one trace with two snapshots')

        return changed / pairs


def _most_similar_pair(clusters):
    best = None
    best_similarity = None
    for i, j in itertools.combinations(range(len(clusters)), 2):
        similarity = jaccard(clusters[i].occurrences, clusters[j].occurrences)
        if best_similarity is None or similarity > best_similarity:
            best = (i, j)
            best_similarity = similarity
    return best, best_similarity


def cluster_features(items, index, training_traces, config, report=None):
    '''
    Merge the items into features.

    At every step the two clusters with the most similar occurrence sets are merged
    (the occurrence set of a cluster is the intersection of the ones of its members).
    With training traces, a merge is rejected, and clustering stops, if it makes the
    resolution drop by more than `config.resolution_drop_threshold`, unless the number
    of features is still above `config.max_features`. Without training traces, items
    are merged down to `config.min_features` or, if that is not set, to
    `config.max_features`.

    Return value:
        A list of `FeatureCluster` with IDs from 1, ordered by smallest member ID.
    '''
    items = list(items)
    if not items:
        raise ValidationError('no shape or decision left to cluster into features')

    clusters = sorted((_Cluster((item,), index.occurrences(item)) for item in items),
                      key=lambda cluster: cluster.key)

    if training_traces:
        table = _PresenceTable(items,
                               training_traces,
                               config.include_values,
                               config.anonymize_variables)
        current_resolution = table.resolution(clusters)
        lower_bound = config.min_features if config.min_features is not None else 1
        verbose('Initial resolution with %d features: %.6f.' %
                (len(clusters), current_resolution))
    else:
        table = None
        current_resolution = None
        if config.min_features is not None:
            lower_bound = config.min_features
        elif config.max_features is not None:
            lower_bound = config.max_features
        else:
            lower_bound = len(clusters)

    while len(clusters) > max(lower_bound, 1):
        forced = config.max_features is not None and len(clusters) > config.max_features

        (i, j), similarity = _most_similar_pair(clusters)
        merged = clusters[i].merged_with(clusters[j])
        candidate = [cluster for k, cluster in enumerate(clusters) if k not in (i, j)]
        candidate.append(merged)
        candidate.sort(key=lambda cluster: cluster.key)

        if table is not None:
            new_resolution = table.resolution(candidate)
            if current_resolution > 0:
                drop = (current_resolution - new_resolution) / current_resolution
            else:
                drop = 0.0
            accepted = forced or drop <= config.resolution_drop_threshold
            if report is not None:
                report.record_curve_point(len(candidate), new_resolution, accepted)

            if not accepted:
                verbose('Merge rejected: resolution would drop from %.6f to %.6f.' %
                        (current_resolution, new_resolution))
                if report is not None:
                    report.record('cluster',
                                  ' + '.join(clusters[i].key + clusters[j].key),
                                  'rejected, resolution drop %.6f' % drop)
                break

            current_resolution = new_resolution

        if report is not None:
            report.record('cluster',
                          ' + '.join(clusters[i].key + clusters[j].key),
                          'merged, jaccard %.6f' % similarity)
        clusters = candidate

    result = [FeatureCluster(feature_id, cluster.members)
              for feature_id, cluster in enumerate(clusters, start=1)]
    if report is not None:
        report.record_count('cluster', len(result))
    return result


class MiningResult(object):
    '''
    The outcome of a mining run.
    '''

    def __init__(self, feature_set, decisions, report, config, corpus_size):
        '''
        Initialize a `MiningResult` instance.

        feature_set:
            The mined `FeatureSet`.
        decisions:
            A list of `(decision, support, kept)` tuples for every decision built.
        report:
            The `MiningReport` of the run.
        config:
            The `MiningConfig` used.
        corpus_size:
            The number of solutions mined.
        '''
        self.feature_set = feature_set
        self.decisions = decisions
        self.report = report
        self.config = config
        self.corpus_size = corpus_size

    @property
    def features(self):
        return self.feature_set.features

    def to_document(self):
        '''
        The features document, suitable for JSON serialization.
        '''
        return collections.OrderedDict((
            ('include_values', self.config.include_values),
            ('anonymize_variables', self.config.anonymize_variables),
            ('corpus_size', self.corpus_size),
            ('features', [collections.OrderedDict((
                ('id', feature.feature_id),
                ('members', list(feature.member_ids)),
                ('presence', 'all'),
                ('support', feature.support),
                )) for feature in self.features]),
            ('decisions', [collections.OrderedDict((
                ('id', decision.shape_id),
                ('branches', [decision.first.shape_id, decision.second.shape_id]),
                ('support', support),
                ('kept', kept),
                )) for decision, support, kept in self.decisions]),
            ('report', self.report.to_document()),
            ))


def load_features(doc, path=None):
    '''
    Build a `FeatureSet` from a features document.
    '''
    if not isinstance(doc, dict) or not isinstance(doc.get('features'), list):
        raise ValidationError('a features document needs a "features" array', path)

    include_values = doc.get('include_values', True)
    anonymize = doc.get('anonymize_variables', False)

    features = []
    seen = set()
    for i, feature_doc in enumerate(doc['features']):
        position = '$.features[%d]' % i
        if not isinstance(feature_doc, dict):
            raise ValidationError('a feature must be an object', path, position)

        feature_id = feature_doc.get('id')
        if isinstance(feature_id, bool) or not isinstance(feature_id, int) or feature_id < 1:
            raise ValidationError('feature IDs must be positive integers', path, position)
        if feature_id in seen:
            raise ValidationError('duplicate feature ID %d' % feature_id, path, position)
        seen.add(feature_id)

        if feature_doc.get('presence', 'all') != 'all':
            raise ValidationError('unsupported presence rule "%s"' % feature_doc['presence'],
                                  path, position)

        member_docs = feature_doc.get('members')
        if not isinstance(member_docs, list) or not member_docs:
            raise ValidationError('a feature needs a non-empty "members" array',
                                  path, position)

        try:
            members = [shapes.parse_item(member, include_values) for member in member_docs]
        except ValidationError as exc:
            raise ValidationError(str(exc), path, position)

        features.append(Feature(feature_id, members, feature_doc.get('support')))

    return FeatureSet(features, include_values, anonymize)


def mine(corpus, training_traces=None, config=None):
    '''
    Run the whole mining pipeline.

    corpus:
        The `traces.SolutionCorpus` of correct solutions.
    training_traces:
        A list of `traces.StudentTrace` used to measure resolution while clustering,
        or `None`.
    config:
        A `MiningConfig` or `None` for the defaults.

    Return value:
        A `MiningResult`.
    '''
    if config is None:
        config = MiningConfig()

    if not len(corpus): # pylint: disable=len-as-condition
        raise ValidationError('empty corpus')

    if config.anonymize_variables:
        corpus = _anonymized_corpus(corpus)
        if training_traces:
            training_traces = [_anonymized_trace(trace) for trace in training_traces]
        # The traces are now anonymized, the clustering doesn't need to do it again.
        cluster_config = MiningConfig(**dict(vars(config), anonymize_variables=False))
    else:
        cluster_config = config

    report = MiningReport()

    code_shapes = extract_corpus_shapes(corpus, config)
    report.record_count('extract', len(code_shapes))

    index = build_occurrence_index(corpus, code_shapes)

    survivors = dedupe_redundant(code_shapes, index, config, report)
    decisions = build_decision_shapes(survivors, index, config, report)
    items = filter_by_support(survivors + decisions, index, config, report)

    clusters = cluster_features(items, index, training_traces, cluster_config, report)

    kept_ids = set(item.shape_id for item in items)
    decision_rows = [(decision, index.support(decision), decision.shape_id in kept_ids)
                     for decision in decisions]

    features = []
    for cluster in clusters:
        occurrences = None
        for member in cluster.members:
            member_occurrences = index.occurrences(member)
            if occurrences is None:
                occurrences = member_occurrences
            else:
                occurrences = occurrences & member_occurrences
        features.append(Feature(cluster.id,
                                cluster.members,
                                len(occurrences) / index.corpus_size))

    verbose('Mined %d features from %d solutions.' % (len(features), len(corpus)))

    return MiningResult(FeatureSet(features, config.include_values, config.anonymize_variables),
                        decision_rows,
                        report,
                        config,
                        len(corpus))
