# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

'''
Synthetic Squiral-style data: solution corpora with controlled strategy variation and
student traces whose expert annotation is known by construction.

Every tree is assembled from the set of objectives it completes:

    1: a custom block, called from the script.
    2: a loop repeating "rotations * 4" times (or a loop nested in another).
    3: a "move" inside the loop taking a variable.
    4: "pen down" outside the loop, plus "turn 90" and "change length" inside it.
'''

from __future__ import absolute_import, division, print_function

import collections
import itertools
import random

from . import (
    locations,
    objectives,
    pathutils,
    traces,
    transitions,
    )

from .errors import (
    ConfigError,
    ValidationError,
    )
from .log import verbose
from .tree import AstNode


BLOCK_NAME = 'CreateASquiralOfSize'
ALTERNATIVE_BLOCK_NAME = 'DrawSquiral'

SQUIRAL_OBJECTIVE_IDS = (1, 2, 3, 4)

# Expert paths of a 27 student cohort, with the number of students following each.
# The first six are the frequent ones; the last two end with non-working code.
COHORT_EXPERT_PATHS = (
    ('S⇒3⇒13⇒134⇒1234⇒WC', 4),
    ('S⇒3⇒34⇒134⇒1234⇒WC', 4),
    ('S⇒WC', 4),
    ('S⇒3⇒13⇒134⇒WC', 3),
    ('S⇒3⇒34⇒134⇒WC', 5),
    ('S⇒1⇒134⇒WC', 5),
    ('S⇒1⇒12⇒NWC', 1),
    ('S⇒3⇒34⇒NWC', 1),
    )

# Frequent paths detected by the system for the same cohort.
COHORT_SYSTEM_PATHS = (
    ('S⇒1⇒12⇒123⇒END', 4),
    ('S⇒1⇒13⇒123⇒END', 2),
    ('S⇒1⇒13⇒123⇒1234⇒END', 3),
    ('S⇒1⇒13⇒134⇒END', 2),
    ('S⇒1⇒13⇒134⇒1234⇒END', 3),
    ('S⇒1⇒14⇒134⇒1234⇒END', 4),
    ('S⇒1⇒END', 7),
    )


class GeneratorConfig(object):
    '''
    Parameters of the data generator.
    '''

    # Maps the keys used in configuration documents to the attribute names.
    DOCUMENT_KEYS = collections.OrderedDict((
        ('seed', 'seed'),
        ('n-solutions', 'n_solutions'),
        ('custom-block-fraction', 'custom_block_fraction'),
        ('nested-loop-fraction', 'nested_loop_fraction'),
        ('block-name-variation', 'block_name_variation'),
        ('parameter-variation', 'parameter_variation'),
        ('turn-variation', 'turn_variation'),
        ('n-traces', 'n_traces'),
        ('edit-error-rate', 'edit_error_rate'),
        ('timestamp-jitter', 'timestamp_jitter'),
        ('mean-gap-s', 'mean_gap_s'),
        ('idle-rate', 'idle_rate'),
        ('idle-gap-s', 'idle_gap_s'),
        ))

    FRACTIONS = (
        'custom_block_fraction',
        'nested_loop_fraction',
        'block_name_variation',
        'parameter_variation',
        'turn_variation',
        'edit_error_rate',
        'timestamp_jitter',
        'idle_rate',
        )

    def __init__(self,
                 seed=0,
                 n_solutions=20,
                 custom_block_fraction=1.0,
                 nested_loop_fraction=0.1,
                 block_name_variation=0.1,
                 parameter_variation=0.1,
                 turn_variation=0.1,
                 n_traces=27,
                 edit_error_rate=0.1,
                 timestamp_jitter=0.5,
                 mean_gap_s=30.0,
                 idle_rate=0.05,
                 idle_gap_s=240.0):
        '''
        Initialize a `GeneratorConfig` instance.

        seed:
            The seed of every random choice; the same seed gives the same output.
        n_solutions:
            The number of solutions in the corpus.
        custom_block_fraction:
            The fraction of solutions using a custom block; the others draw the Squiral
            directly from the script.
        nested_loop_fraction:
            The fraction of solutions using two nested loops instead of a loop repeating
            "rotations * 4" times.
        block_name_variation:
            The fraction of solutions giving the custom block a different name.
        parameter_variation:
            The fraction of solutions moving by a block parameter instead of a variable.
        turn_variation:
            The fraction of solutions turning left and putting the pen down from the
            script instead of from the custom block.
        n_traces:
            The number of student traces in a cohort.
        edit_error_rate:
            The probability that an edit temporarily breaks a complete objective.
        timestamp_jitter:
            How much the time between edits varies, as a fraction of `mean_gap_s`.
        mean_gap_s:
            The average time between edits.
        idle_rate:
            The probability that the student is idle before an edit.
        idle_gap_s:
            The minimum time between edits when the student is idle.
        '''
        self.seed = seed
        self.n_solutions = n_solutions
        self.custom_block_fraction = custom_block_fraction
        self.nested_loop_fraction = nested_loop_fraction
        self.block_name_variation = block_name_variation
        self.parameter_variation = parameter_variation
        self.turn_variation = turn_variation
        self.n_traces = n_traces
        self.edit_error_rate = edit_error_rate
        self.timestamp_jitter = timestamp_jitter
        self.mean_gap_s = mean_gap_s
        self.idle_rate = idle_rate
        self.idle_gap_s = idle_gap_s

        self.validate()

    def validate(self):
        '''
        Raise a `ConfigError` if the configuration is not valid.
        '''
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ConfigError('generator option "seed" must be an integer')

        for name in ('n_solutions', 'n_traces'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError('generator option "%s" must be a positive integer' % name)

        for name in self.FRACTIONS:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or \
                    not 0 <= value <= 1:
                raise ConfigError('generator option "%s" must be in [0, 1], got %r' %
                                  (name, value))

        for name in ('mean_gap_s', 'idle_gap_s'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
                raise ConfigError('generator option "%s" must be a positive number' % name)

        if sum(count for _, count in self.strategy_counts()) > self.n_solutions:
            raise ConfigError('the strategy fractions add up to more than the %d solutions' %
                              self.n_solutions)

    def strategy_counts(self):
        '''
        The number of solutions of each alternative strategy, as a list of
        `(strategy name, count)` pairs.
        '''
        def count(fraction):
            return int(round(fraction * self.n_solutions))

        return [
            ('flat', count(1 - self.custom_block_fraction)),
            ('nested-loop', count(self.nested_loop_fraction)),
            ('block-name', count(self.block_name_variation)),
            ('parameter', count(self.parameter_variation)),
            ('turn', count(self.turn_variation)),
            ]

    @classmethod
    def from_document(cls, doc, seed=None):
        '''
        Create a `GeneratorConfig` from a configuration object using the hyphenated keys
        of `DOCUMENT_KEYS`. Missing keys take the default value; `seed`, if not `None`,
        overrides the one in the document.
        '''
        if doc is None:
            doc = {}
        if not isinstance(doc, dict):
            raise ConfigError('the "generator" option must be an object')

        unknown = sorted(set(doc) - set(cls.DOCUMENT_KEYS))
        if unknown:
            raise ConfigError('unknown generator options: %s' % ', '.join(unknown))

        kwargs = {cls.DOCUMENT_KEYS[key]: value for key, value in doc.items()}
        if seed is not None:
            kwargs['seed'] = seed
        return cls(**kwargs)

    def to_document(self):
        return collections.OrderedDict(
            (key, getattr(self, attr)) for key, attr in self.DOCUMENT_KEYS.items())


TemplateStyle = collections.namedtuple('TemplateStyle',
                                       ['block_name',
                                        'nested_loop',
                                        'parameter_label',
                                        'turn_label',
                                        'pen_down_on_stage'])

MAIN_STYLE = TemplateStyle(BLOCK_NAME, False, 'var', 'turn', False)

STRATEGY_STYLES = {
    'nested-loop': MAIN_STYLE._replace(nested_loop=True),
    'block-name': MAIN_STYLE._replace(block_name=ALTERNATIVE_BLOCK_NAME),
    'parameter': MAIN_STYLE._replace(parameter_label='param'),
    'turn': MAIN_STYLE._replace(turn_label='turn left', pen_down_on_stage=True),
    }


def _number(value):
    return AstNode('number', str(value))


def _var(name):
    return AstNode('var', name)


def assemble(objective_ids, style=MAIN_STYLE):
    '''
    Build the script completing exactly the objectives in `objective_ids`.

    objective_ids:
        An iterable of objective IDs in `SQUIRAL_OBJECTIVE_IDS`.
    style:
        The `TemplateStyle` deciding how the objectives are implemented.

    Return value:
        The root `AstNode` of the script.
    '''
    objective_ids = frozenset(objective_ids)
    assert objective_ids <= set(SQUIRAL_OBJECTIVE_IDS), objective_ids

    if 3 in objective_ids:
        move_argument = AstNode(style.parameter_label, 'length')
    else:
        move_argument = _number(10)
    body = [AstNode('move', None, (move_argument,))]
    if 4 in objective_ids:
        body.append(AstNode(style.turn_label, '90'))
        body.append(AstNode('change', None, (_var('length'), _number(5))))

    if 2 not in objective_ids:
        loop = AstNode('repeat', None, [_number(10)] + body)
    elif style.nested_loop:
        inner_loop = AstNode('repeat', None, [_number(4)] + body)
        loop = AstNode('repeat', None, (_var('rotations'), inner_loop))
    else:
        count = AstNode('multiply', None, (_var('rotations'), _number(4)))
        loop = AstNode('repeat', None, [count] + body)

    pen_down = [AstNode('pen down')] if 4 in objective_ids else []

    if 1 not in objective_ids:
        return AstNode('script', None, pen_down + [loop])

    if style.pen_down_on_stage:
        custom_block = AstNode('custom', style.block_name, (loop,))
        stage = pen_down
    else:
        custom_block = AstNode('custom', style.block_name, pen_down + [loop])
        stage = []

    return AstNode('script', None, stage + [custom_block, AstNode('call', style.block_name)])


def flat_sequence(n_sides):
    '''
    A script drawing `n_sides` sides of a Squiral one statement at a time, with no loop
    and no custom block.
    '''
    children = [AstNode('pen down')]
    for side in range(n_sides):
        children.append(AstNode('move', None, (_number(10 + 5 * side),)))
        children.append(AstNode('turn', '90'))
    return AstNode('script', None, children)


def _draws_sides(loop):
    labels = set()
    for node in loop.walk():
        if node.label in ('turn', 'turn left'):
            if node.value == '90':
                labels.add('turn')
        else:
            labels.add(node.label)
    return {'move', 'turn', 'change'} <= labels


def objective_truth(root):
    '''
    The frozen set of objectives `root` completes, by direct inspection of the tree.
    '''
    nodes = list(root.walk_with_ancestors())

    def in_loop(ancestors):
        return any(ancestor.label == 'repeat' for ancestor in ancestors)

    complete = set()

    custom_names = {node.value for node, _ in nodes if node.label == 'custom'}
    called_names = {node.value for node, _ in nodes if node.label == 'call'}
    if custom_names & called_names:
        complete.add(1)

    for node, ancestors in nodes:
        if node.label == 'repeat':
            for child in node.children:
                if child.label in ('multiply', 'repeat') and \
                        any(grandchild.label == 'number' and grandchild.value == '4'
                            for grandchild in child.children):
                    complete.add(2)

        elif node.label == 'move' and in_loop(ancestors) and \
                any(child.label in ('var', 'param') for child in node.children):
            complete.add(3)

    pen_down_outside_loop = any(node.label == 'pen down' and not in_loop(ancestors)
                                for node, ancestors in nodes)
    if pen_down_outside_loop and \
            any(node.label == 'repeat' and _draws_sides(node) for node, _ in nodes):
        complete.add(4)

    return frozenset(complete)


def generate_corpus(config):
    '''
    Generate a corpus of correct solutions.

    Each alternative strategy of `config.strategy_counts()` is used by its own block of
    solutions; the remaining solutions follow the main template. The order is shuffled.

    Return value:
        A `traces.SolutionCorpus`.
    '''
    rng = random.Random(config.seed)

    entries = []
    for strategy, count in config.strategy_counts():
        if strategy == 'flat':
            entry = (frozenset(SQUIRAL_OBJECTIVE_IDS) - {1}, MAIN_STYLE)
        else:
            entry = (frozenset(SQUIRAL_OBJECTIVE_IDS), STRATEGY_STYLES[strategy])
        entries.extend([entry] * count)

    entries.extend([(frozenset(SQUIRAL_OBJECTIVE_IDS), MAIN_STYLE)] *
                   (config.n_solutions - len(entries)))
    rng.shuffle(entries)

    solutions = []
    for i, (objective_ids, style) in enumerate(entries):
        root = assemble(objective_ids, style)
        assert objective_truth(root) == objective_ids
        solutions.append(('solution-%02d' % (i + 1), root))

    verbose('Generated a corpus of %d solutions (seed %d).' %
            (len(solutions), config.seed))

    return traces.SolutionCorpus(solutions)


def parse_path(path):
    '''
    Parse a target path such as "S⇒3⇒34⇒WC".

    path:
        The path text or a sequence of state names.

    Return value:
        A list of `transitions.StateNode`.
    '''
    if isinstance(path, str):
        names = path.split(transitions.PATH_SEPARATOR)
    else:
        names = list(path)

    states = [transitions.StateNode.from_name(name.strip()) for name in names]

    if len(states) < 2 or states[0] != transitions.StateNode.start() or \
            not states[-1].is_terminal:
        raise ValidationError('a target path must go from "S" to a terminal state, got '
                              '"%s"' % transitions.path_text(states))

    for previous, state in zip(states, states[1:-1]):
        if state.is_terminal:
            raise ValidationError('terminal state "%s" in the middle of path "%s"' %
                                  (state.name, transitions.path_text(states)))
        if state == previous:
            raise ValidationError('repeated state "%s" in path "%s"' %
                                  (state.name, transitions.path_text(states)))
        unknown = set(state.objectives) - set(SQUIRAL_OBJECTIVE_IDS)
        if unknown:
            raise ValidationError('unknown objectives %s in path "%s"' %
                                  (', '.join(str(i) for i in sorted(unknown)),
                                   transitions.path_text(states)))

    return states


def student_rng(config, student_id):
    '''
    The random number generator for the trace of `student_id`, derived from the seed so
    that each trace can be generated on its own.
    '''
    return random.Random('%d/%s' % (config.seed, student_id))


def _snapshot_trees(states, config, rng):
    trees = [(AstNode('script'), frozenset())]

    middle = states[1:-1]
    if not middle:
        # The student ignores the objectives and draws the sides one by one.
        for n_sides in range(1, rng.randint(2, 5) + 1):
            trees.append((flat_sequence(n_sides), frozenset()))
        return trees

    for state in middle:
        objective_ids = frozenset(state.objectives)
        for _ in range(rng.randint(1, 3)):
            trees.append((assemble(objective_ids), objective_ids))
            if objective_ids and rng.random() < config.edit_error_rate:
                broken = objective_ids - {rng.choice(sorted(objective_ids))}
                trees.append((assemble(broken), broken))
                trees.append((assemble(objective_ids), objective_ids))

    return trees


def _timestamps(count, config, rng):
    timestamps = [0.0]
    current = 0.0
    for _ in range(count - 1):
        if rng.random() < config.idle_rate:
            gap = config.idle_gap_s * (1 + 0.5 * rng.random())
        else:
            gap = config.mean_gap_s * (1 + config.timestamp_jitter * rng.uniform(-1, 1))
        current += gap
        timestamps.append(round(current, 1))
    return timestamps


def generate_trace(config, target_path, student_id='student-01', rng=None):
    '''
    Generate the trace of a student following `target_path`.

    config:
        The `GeneratorConfig`.
    target_path:
        The expert path, as accepted by `parse_path`. Each state lasts 1 to 3 snapshots;
        with probability `config.edit_error_rate` a snapshot is followed by one breaking
        an objective and one restoring it.
    student_id:
        The ID of the student.
    rng:
        The `random.Random` to use; defaults to `student_rng(config, student_id)`.

    Return value:
        A `(traces.StudentTrace, traces.ExpertAnnotation)` tuple.
    '''
    states = parse_path(target_path)
    if rng is None:
        rng = student_rng(config, student_id)

    trees = _snapshot_trees(states, config, rng)
    timestamps = _timestamps(len(trees), config, rng)

    snapshots = []
    for position, ((root, objective_ids), timestamp) in enumerate(zip(trees, timestamps)):
        assert objective_truth(root) == objective_ids, (student_id, position)
        snapshots.append(traces.Snapshot(position, timestamp, root))

    terminal = states[-1].terminal
    final_outcome = {
        transitions.TERMINAL_WC: traces.WORKING,
        transitions.TERMINAL_NWC: traces.NON_WORKING,
        }.get(terminal)
    impacts = frozenset([traces.IMPACT_ES]) if final_outcome == traces.NON_WORKING \
        else frozenset()

    trace = traces.StudentTrace(student_id,
                                snapshots,
                                submitted=terminal != transitions.TERMINAL_END)

    truth = {objective_id: tuple(objective_id in objective_ids for _, objective_ids in trees)
             for objective_id in SQUIRAL_OBJECTIVE_IDS}
    annotation = traces.ExpertAnnotation(student_id,
                                         trace.snapshot_indices,
                                         truth,
                                         final_outcome,
                                         impacts)

    return trace, annotation


def expand_paths(paths):
    '''
    Expand a list of `(path, count)` pairs into the list of paths, one per student.
    '''
    expanded = []
    for path, count in paths:
        if isinstance(count, bool) or not isinstance(count, int) or count < 0:
            raise ValidationError('invalid count %r for path "%s"' % (count, path))
        expanded.extend([path] * count)
    return expanded


def generate_cohort(config, paths=None):
    '''
    Generate `config.n_traces` student traces following the paths in `paths`.

    paths:
        A list of `(path, count)` pairs; defaults to `COHORT_EXPERT_PATHS`. If the counts
        add up to something different from `config.n_traces`, the paths are cycled or
        truncated.

    Return value:
        A `(traces, annotations)` tuple, where `traces` is a list of
        `traces.StudentTrace` and `annotations` an ordered dictionary mapping student IDs
        to `traces.ExpertAnnotation`.
    '''
    if paths is None:
        paths = COHORT_EXPERT_PATHS

    expanded = expand_paths(paths)
    if not expanded:
        raise ValidationError('cannot generate a cohort with no paths')

    student_traces = []
    annotations = collections.OrderedDict()
    chosen = itertools.islice(itertools.cycle(expanded), config.n_traces)
    for i, path in enumerate(chosen):
        student_id = 'student-%02d' % (i + 1)
        trace, annotation = generate_trace(config, path, student_id)
        student_traces.append(trace)
        annotations[student_id] = annotation

    verbose('Generated %d traces (seed %d).' % (len(student_traces), config.seed))

    return student_traces, annotations


def objective_subsets():
    '''
    All the subsets of `SQUIRAL_OBJECTIVE_IDS`, as frozen sets.
    '''
    return [frozenset(subset)
            for size in range(len(SQUIRAL_OBJECTIVE_IDS) + 1)
            for subset in itertools.combinations(SQUIRAL_OBJECTIVE_IDS, size)]


def _objective_labels(objectives_doc):
    if objectives_doc is None:
        objectives_doc = pathutils.read_json(locations.squiral_objectives_path())
    return {spec.id: spec.label for spec in objectives.load_objectives(objectives_doc)}


def derive_objectives(feature_set, objectives_doc=None):
    '''
    Map the features in `feature_set` to the Squiral objectives.

    A feature is required by objective k if, on every reference script, it's present
    exactly when the script completes k. The reference scripts are the scripts assembled
    from every subset of the objectives, the empty script and a flat sequence of
    statements.

    feature_set:
        The mined `mining.FeatureSet`.
    objectives_doc:
        An objectives document providing the labels; defaults to the one shipped with
        the package.

    Return value:
        A list of `objectives.ObjectiveSpec`.
    '''
    references = [(subset, feature_set.presence(assemble(subset)))
                  for subset in objective_subsets()]
    references.append((frozenset(), feature_set.presence(AstNode('script'))))
    references.append((frozenset(), feature_set.presence(flat_sequence(4))))

    required = collections.OrderedDict((objective_id, [])
                                       for objective_id in SQUIRAL_OBJECTIVE_IDS)
    for position, feature in enumerate(feature_set.features):
        for objective_id in SQUIRAL_OBJECTIVE_IDS:
            if all(presence[position] == (objective_id in subset)
                   for subset, presence in references):
                required[objective_id].append(feature.feature_id)
                break

    labels = _objective_labels(objectives_doc)

    specs = []
    for objective_id, feature_ids in required.items():
        if not feature_ids:
            raise ValidationError('no mined feature detects objective %d ("%s")' %
                                  (objective_id, labels.get(objective_id, '')))
        verbose('Objective %d requires features %s.' %
                (objective_id, ', '.join(str(i) for i in feature_ids)))
        specs.append(objectives.ObjectiveSpec(objective_id,
                                              labels.get(objective_id,
                                                         'Objective %d' % objective_id),
                                              tuple(feature_ids)))

    return specs
