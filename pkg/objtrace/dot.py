# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

from __future__ import absolute_import, division, print_function

import textwrap

from . import transitions

from .log import verbose


NODE_STYLES = {
    transitions.SOURCE_EXPERT: ('ellipse', 'black'),
    transitions.SOURCE_SYSTEM: ('diamond', 'blue'),
    }

BACKWARD_COLOR = 'red'


def _gvquote(text):
    return '"%s"' % text.replace('\\', '\\\\').replace('"', '\\"')


def penwidth(weight, max_weight, max_width=5.0):
    '''
    The pen width for an edge of weight `weight`, scaling linearly from 1 for a weight
    of 0 to `max_width` for `max_weight`.
    '''
    if max_weight <= 0:
        return 1.0
    return 1.0 + (max_width - 1.0) * weight / max_weight


class DotWriter(object):
    '''
    Generate the DOT text for a `transitions.TransitionGraph`.
    '''

    def __init__(self, transition_graph, show_times=True, max_penwidth=5.0):
        '''
        Initialize a `DotWriter` instance.

        transition_graph:
            The graph to export.
        show_times:
            If true, edges with accumulated time are labelled with it in minutes.
        max_penwidth:
            The pen width of the heaviest edge.
        '''
        self._graph = transition_graph
        self._show_times = show_times
        self._max_penwidth = max_penwidth

        self._lines = []

    def _emit(self, text=''):
        if not text.endswith('\n'):
            text += '\n'
        if text.startswith('\n') and len(text) > 1:
            text = text[1:]
        self._lines.append(textwrap.dedent(text))

    def _emit_line(self, line):
        self._lines.append(line + '\n')

    def _emit_intro(self):
        shape, color = NODE_STYLES[self._graph.source]
        self._emit(
            '''
            digraph %(name)s {
                rankdir=LR;
                node [shape=%(shape)s, color=%(color)s];
            '''
            % dict(
                name=_gvquote(self._graph.source),
                shape=shape,
                color=color,
                ))

    def _emit_nodes(self):
        shape, color = NODE_STYLES[self._graph.source]
        for state in self._graph.nodes():
            self._emit_line('    %s [shape=%s, color=%s];' %
                            (_gvquote(state.name), shape, color))

    def _edge_label(self, data):
        label = '%d' % data['weight']
        if self._show_times and data.get('total_seconds'):
            label += ' (%.1f min)' % (data['total_seconds'] / 60.0)
        return label

    def _emit_edges(self):
        _, forward_color = NODE_STYLES[self._graph.source]
        edges = self._graph.edges()
        max_weight = max([data['weight'] for _, _, data in edges] or [0])

        for from_state, to_state, data in edges:
            if data['direction'] == transitions.BACKWARD:
                color = BACKWARD_COLOR
            else:
                color = forward_color

            self._emit_line('    %s -> %s [label=%s, penwidth=%.2f, color=%s];' %
                            (_gvquote(from_state.name),
                             _gvquote(to_state.name),
                             _gvquote(self._edge_label(data)),
                             penwidth(data['weight'], max_weight, self._max_penwidth),
                             color))

    def generate_content(self):
        '''
        Generate the DOT text.
        '''
        self._emit_intro()
        self._emit_nodes()
        self._emit_edges()
        self._emit('}')

        content = ''.join(self._lines)
        verbose('Generated DOT graph with %d lines.' % len(self._lines))

        self._lines = []

        return content


def export_dot(transition_graph, show_times=True):
    return DotWriter(transition_graph, show_times).generate_content()
