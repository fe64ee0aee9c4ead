# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

'''
State transition graphs of the solution paths of students.

A state is the set of objectives complete at a given time, either according to the
experts or according to the system. Every path starts at "S" (no objective complete)
and ends at a terminal: "WC" (working code) or "NWC" (non-working code) for expert
paths, "END" for system paths.
'''

from __future__ import absolute_import, division, print_function

import collections
import math

import networkx as nx

from .errors import ValidationError
from .log import verbose
from .traces import MAX_OBJECTIVE_ID, WORKING


SOURCE_EXPERT = 'expert'
SOURCE_SYSTEM = 'system'
SOURCES = (SOURCE_EXPERT, SOURCE_SYSTEM)

KIND_START = 'start'
KIND_OBJECTIVES = 'objective_set'
KIND_TERMINAL = 'terminal'

TERMINAL_WC = 'WC'
TERMINAL_NWC = 'NWC'
TERMINAL_END = 'END'

FORWARD = 'forward'
BACKWARD = 'backward'

PATH_SEPARATOR = '⇒'


class StateNode(collections.namedtuple('StateNode', ['kind', 'objectives', 'terminal'])):
    '''
    A node in a transition graph.

    kind:
        `KIND_START`, `KIND_OBJECTIVES` or `KIND_TERMINAL`.
    objectives:
        A sorted tuple of the complete objective IDs (empty for start and terminals).
    terminal:
        The terminal label for terminal nodes, `None` otherwise.
    '''

    __slots__ = ()

    @classmethod
    def start(cls):
        return cls(KIND_START, (), None)

    @classmethod
    def from_objectives(cls, objective_ids):
        '''
        The node for a set of complete objectives; the start node if the set is empty.
        '''
        objective_ids = tuple(sorted(objective_ids))
        assert all(1 <= objective_id <= MAX_OBJECTIVE_ID for objective_id in objective_ids), \
            objective_ids
        if not objective_ids:
            return cls.start()
        return cls(KIND_OBJECTIVES, objective_ids, None)

    @classmethod
    def make_terminal(cls, label):
        assert label in (TERMINAL_WC, TERMINAL_NWC, TERMINAL_END)
        return cls(KIND_TERMINAL, (), label)

    @classmethod
    def from_name(cls, name):
        if name == 'S':
            return cls.start()
        if name in (TERMINAL_WC, TERMINAL_NWC, TERMINAL_END):
            return cls.make_terminal(name)
        if not name.isdigit() or '0' in name:
            raise ValidationError('invalid state name "%s"' % name)
        return cls.from_objectives(int(char) for char in name)

    @property
    def name(self):
        if self.kind == KIND_START:
            return 'S'
        if self.kind == KIND_TERMINAL:
            return self.terminal
        return ''.join(str(objective_id) for objective_id in self.objectives)

    @property
    def is_terminal(self):
        return self.kind == KIND_TERMINAL

    @property
    def sort_key(self):
        order = {KIND_START: 0, KIND_OBJECTIVES: 1, KIND_TERMINAL: 2}[self.kind]
        return (order, len(self.objectives), self.objectives, self.terminal or '')

    def strictly_extends(self, other):
        return set(self.objectives) > set(other.objectives)

    def __str__(self):
        return self.name


def transition_direction(from_state, to_state):
    '''
    `BACKWARD` if some objective of `from_state` is not in `to_state` (and `to_state`
    is not a terminal), `FORWARD` otherwise.
    '''
    if to_state.is_terminal:
        return FORWARD
    if set(from_state.objectives) - set(to_state.objectives):
        return BACKWARD
    return FORWARD


StateSequence = collections.namedtuple('StateSequence', ['student_id', 'states', 'times'])


def path_text(states):
    return PATH_SEPARATOR.join(state.name for state in states)


def _collapse(student_id, timed_states, trace, terminal):
    states = [StateNode.start()]
    times = [trace.start]
    for state, timestamp in timed_states:
        if state != states[-1]:
            states.append(state)
            times.append(timestamp)
    states.append(StateNode.make_terminal(terminal))
    times.append(trace.end)
    return StateSequence(student_id, tuple(states), tuple(times))


def state_sequence(trace, source, truth=None, log=None):
    '''
    The sequence of states a student went through.

    trace:
        The `traces.StudentTrace` of the student.
    source:
        `SOURCE_EXPERT` to use the expert annotation `truth`, `SOURCE_SYSTEM` to use the
        replayed `objectives.EventLog` `log`.

    Return value:
        A `StateSequence` starting at "S", with no consecutive duplicates, ending at
        the terminal.
    '''
    if source == SOURCE_EXPERT:
        if truth is None:
            raise ValidationError('expert state sequences need an annotation')
        if truth.final_outcome is None:
            raise ValidationError('the annotation for student "%s" has no final outcome' %
                                  truth.student_id)
        if truth.length != len(trace.snapshots):
            raise ValidationError('annotation/trace length mismatch for student "%s"' %
                                  trace.student_id)
        timed_states = [(StateNode.from_objectives(truth.completed_at(position)),
                         snapshot.timestamp)
                        for position, snapshot in enumerate(trace.snapshots)]
        terminal = TERMINAL_WC if truth.final_outcome == WORKING else TERMINAL_NWC

    elif source == SOURCE_SYSTEM:
        if log is None:
            raise ValidationError('system state sequences need an event log')
        if len(log.statuses) != len(trace.snapshots):
            raise ValidationError('event log/trace length mismatch for student "%s"' %
                                  trace.student_id)
        timed_states = [(StateNode.from_objectives(status.complete), snapshot.timestamp)
                        for status, snapshot in zip(log.statuses, trace.snapshots)]
        terminal = TERMINAL_END

    else:
        raise ValidationError('invalid source "%s"' % source)

    return _collapse(trace.student_id, timed_states, trace, terminal)


class TransitionGraph(object):
    '''
    The aggregated transitions of a population of students.

    The underlying `networkx.DiGraph` has the state names as node keys, with a `state`
    attribute holding the `StateNode`. Edges carry `weight` (number of distinct students
    taking the transition), `count` (raw number of times it was taken), `direction` and
    `total_seconds` (time accumulated along the transition).

    `min_weight` is the lowest weight a transition needs to stay in the graph; it is
    raised by the first simplification phase.
    '''

    def __init__(self, source, graph, population, sequences, min_weight=1):
        self._source = source
        self._graph = graph
        self._population = population
        self._sequences = tuple(sequences)
        self._min_weight = min_weight

    @property
    def source(self):
        return self._source

    @property
    def graph(self):
        return self._graph

    @property
    def population(self):
        return self._population

    @property
    def sequences(self):
        return self._sequences

    @property
    def min_weight(self):
        return self._min_weight

    def nodes(self):
        '''
        The `StateNode` instances in the graph in a stable order.
        '''
        return sorted((data['state'] for _, data in self._graph.nodes(data=True)),
                      key=lambda state: state.sort_key)

    def edges(self):
        '''
        The edges as `(from_state, to_state, attributes)` tuples in a stable order.
        '''
        result = [(self._graph.nodes[u]['state'], self._graph.nodes[v]['state'], data)
                  for u, v, data in self._graph.edges(data=True)]
        result.sort(key=lambda edge: (edge[0].sort_key, edge[1].sort_key))
        return result

    def edge(self, from_name, to_name):
        '''
        The attributes of the edge between two states (by name) or `None`.
        '''
        return self._graph.get_edge_data(from_name, to_name)

    def has_node(self, name):
        return self._graph.has_node(name)

    def backward_edges(self):
        return [edge for edge in self.edges() if edge[2]['direction'] == BACKWARD]

    def to_document(self):
        return collections.OrderedDict((
            ('source', self._source),
            ('population', self._population),
            ('nodes', [collections.OrderedDict((
                ('name', state.name),
                ('kind', state.kind),
                ('objectives', list(state.objectives)),
                )) for state in self.nodes()]),
            ('edges', [collections.OrderedDict((
                ('from', from_state.name),
                ('to', to_state.name),
                ('weight', data['weight']),
                ('count', data['count']),
                ('direction', data['direction']),
                ('total_seconds', data['total_seconds']),
                )) for from_state, to_state, data in self.edges()]),
            ))


def _build_graph(sequences, accept_edge=None):
    graph = nx.DiGraph()
    students = collections.defaultdict(set)

    for sequence in sequences:
        for state in sequence.states:
            graph.add_node(state.name, state=state)

        hops = zip(sequence.states, sequence.states[1:], sequence.times, sequence.times[1:])
        for from_state, to_state, from_time, to_time in hops:
            if accept_edge is not None and not accept_edge(from_state, to_state):
                continue

            key = (from_state.name, to_state.name)
            if graph.has_edge(*key):
                data = graph.edges[key]
                data['count'] += 1
                data['total_seconds'] += to_time - from_time
            else:
                graph.add_edge(*key,
                               count=1,
                               total_seconds=to_time - from_time,
                               direction=transition_direction(from_state, to_state))
            students[key].add(sequence.student_id)

    for key, student_ids in students.items():
        graph.edges[key]['weight'] = len(student_ids)

    return graph


def _drop_unreachable(graph):
    start = StateNode.start().name
    if start not in graph:
        graph.remove_nodes_from(list(graph.nodes))
        return
    reachable = nx.descendants(graph, start) | {start}
    graph.remove_nodes_from([node for node in list(graph.nodes) if node not in reachable])


def aggregate(sequences, source, population=None):
    '''
    Aggregate the state sequences of a population into a `TransitionGraph`.

    sequences:
        A non-empty list of `StateSequence`.
    source:
        `SOURCE_EXPERT` or `SOURCE_SYSTEM`.
    population:
        The number of students; defaults to the number of sequences.
    '''
    sequences = list(sequences)
    if not sequences:
        raise ValidationError('cannot build a transition graph with no students')
    if source not in SOURCES:
        raise ValidationError('invalid source "%s"' % source)

    if population is None:
        population = len(sequences)

    graph = _build_graph(sequences)
    verbose('Aggregated %d %s sequences: %d states, %d transitions.' %
            (len(sequences), source, graph.number_of_nodes(), graph.number_of_edges()))

    return TransitionGraph(source, graph, population, sequences)


def phase1_threshold(population, min_fraction):
    # The epsilon keeps exact products such as 0.1 * 30 from rounding up.
    return int(math.ceil(min_fraction * population - 1e-9))


def simplify_phase1(transition_graph, min_fraction=0.10):
    '''
    Remove the transitions taken by fewer than ceil(`min_fraction` * population)
    students, then the states which are not reachable any more.
    '''
    threshold = phase1_threshold(transition_graph.population, min_fraction)

    graph = transition_graph.graph.copy()
    rare = [(u, v) for u, v, weight in graph.edges(data='weight') if weight < threshold]
    graph.remove_edges_from(rare)
    _drop_unreachable(graph)

    verbose('Phase 1 (threshold %d): removed %d transitions.' % (threshold, len(rare)))

    return TransitionGraph(transition_graph.source,
                           graph,
                           transition_graph.population,
                           transition_graph.sequences,
                           max(threshold, transition_graph.min_weight))


def simplify_phase2(transition_graph):
    '''
    Remove the backward transitions, then the states which are not reachable any more.
    '''
    graph = transition_graph.graph.copy()
    backward = [(u, v) for u, v, direction in graph.edges(data='direction')
                if direction == BACKWARD]
    graph.remove_edges_from(backward)
    _drop_unreachable(graph)

    verbose('Phase 2: removed %d backward transitions.' % len(backward))

    return TransitionGraph(transition_graph.source,
                           graph,
                           transition_graph.population,
                           transition_graph.sequences,
                           transition_graph.min_weight)


def elide_cycles(states, times=None):
    '''
    Remove the cycles from a state sequence.

    While a state recurs, the right-most recurrence at position j is taken with the
    earliest position i holding the same state, and the states at i+1..j are removed.

    Return value:
        A `(states, times)` tuple of lists.
    '''
    states = list(states)
    times = list(times) if times is not None else [None] * len(states)

    while True:
        for j in range(len(states) - 1, 0, -1):
            i = states.index(states[j])
            if i < j:
                del states[i + 1:j + 1]
                del times[i + 1:j + 1]
                break
        else:
            return states, times


def _simplify_sequence(sequence):
    states, times = elide_cycles(sequence.states, sequence.times)

    kept_states = []
    kept_times = []
    for state, timestamp in zip(states, times):
        if kept_states and not state.is_terminal and \
                not state.strictly_extends(kept_states[-1]):
            continue
        kept_states.append(state)
        kept_times.append(timestamp)

    return StateSequence(sequence.student_id, tuple(kept_states), tuple(kept_times))


def simplify_phase3(transition_graph):
    '''
    Remove the cycles from every student's sequence, so that each one only moves
    forward, and rebuild the transitions from the simplified sequences.

    Only the states still in the graph and forward transitions taken by at least
    `min_weight` students are kept.
    '''
    sequences = [_simplify_sequence(sequence) for sequence in transition_graph.sequences]

    current = transition_graph.graph

    def accept_edge(from_state, to_state):
        return (current.has_node(from_state.name) and
                current.has_node(to_state.name) and
                transition_direction(from_state, to_state) == FORWARD)

    graph = _build_graph(sequences, accept_edge)
    graph.remove_nodes_from([node for node in list(graph.nodes) if node not in current])
    graph.remove_edges_from([(u, v) for u, v, weight in graph.edges(data='weight')
                             if weight < transition_graph.min_weight])
    _drop_unreachable(graph)

    verbose('Phase 3: %d states, %d transitions.' %
            (graph.number_of_nodes(), graph.number_of_edges()))

    return TransitionGraph(transition_graph.source,
                           graph,
                           transition_graph.population,
                           sequences,
                           transition_graph.min_weight)


def simplify(transition_graph, stages=3, min_fraction=0.10):
    '''
    Apply the first `stages` simplification phases (0 to 3).
    '''
    if stages not in (0, 1, 2, 3):
        raise ValidationError('the number of simplification stages must be 0 to 3')

    if stages >= 1:
        transition_graph = simplify_phase1(transition_graph, min_fraction)
    if stages >= 2:
        transition_graph = simplify_phase2(transition_graph)
    if stages >= 3:
        transition_graph = simplify_phase3(transition_graph)
    return transition_graph


PathRow = collections.namedtuple('PathRow', ['path', 'frequency', 'text'])


def frequent_paths(transition_graph, min_count=1):
    '''
    The solution paths followed by at least `min_count` students.

    Return value:
        A list of `PathRow` sorted by decreasing frequency, then by path text.
    '''
    counter = collections.Counter(tuple(sequence.states)
                                  for sequence in transition_graph.sequences)

    rows = [PathRow(tuple(state.name for state in states), frequency, path_text(states))
            for states, frequency in counter.items()
            if frequency >= min_count]
    rows.sort(key=lambda row: (-row.frequency, row.text))
    return rows


def completion_rate(sequences):
    '''
    The fraction of the sequences ending with working code, or `None` if there are no
    sequences.
    '''
    sequences = list(sequences)
    if not sequences:
        return None
    working = sum(1 for sequence in sequences
                  if sequence.states[-1] == StateNode.make_terminal(TERMINAL_WC))
    return working / len(sequences)


FirstHopDiff = collections.namedtuple('FirstHopDiff', ['hop', 'expert', 'system'])


def _first_hops(sequences):
    return collections.Counter(path_text(sequence.states[:2]) for sequence in sequences
                               if len(sequence.states) >= 2)


def diff_paths(expert_graph, system_graph):
    '''
    Compare the first hop of the expert and system paths.

    Return value:
        A list of `FirstHopDiff` (hop text, number of expert paths starting with it,
        number of system paths starting with it) sorted by hop text.
    '''
    expert_hops = _first_hops(expert_graph.sequences)
    system_hops = _first_hops(system_graph.sequences)
    return [FirstHopDiff(hop, expert_hops[hop], system_hops[hop])
            for hop in sorted(set(expert_hops) | set(system_hops))]

