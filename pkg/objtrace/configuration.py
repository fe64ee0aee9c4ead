# Copyright (C) 2017 Marco Barisione
# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

from __future__ import absolute_import, division, print_function

import collections
import os

from . import (
    evaluation,
    mining,
    pathutils,
    phases,
    synth,
    traces,
    )

from .errors import (
    ConfigError,
    DataIOError,
    )
from .log import verbose


def _is_number(value):
    return not isinstance(value, bool) and isinstance(value, (int, float))


def _is_int(value):
    return not isinstance(value, bool) and isinstance(value, int)


class RunConfig(object):
    '''
    Configuration of a run, backed by a JSON document.

    Paths in the document are relative to the directory containing it.
    '''

    PATH_KEYS = (
        'corpus',
        'traces',
        'annotations',
        'objectives',
        'features',
        'training-traces',
        'events',
        'detections',
        'output-dir',
        )

    OTHER_KEYS = (
        'mining',
        'tolerance-edits',
        'graph',
        'idle-threshold-s',
        'its-alpha',
        'seed',
        'generator',
        'impact-links',
        )

    GRAPH_KEYS = ('min-fraction', 'min-path-count', 'stages')

    def __init__(self, json_config_path=None, content=None):
        '''
        Initialize a `RunConfig` instance.

        json_config_path:
            The path to the JSON configuration file or `None` to use the defaults.
        content:
            The decoded configuration document to use instead of reading
            `json_config_path`. Relative paths are still resolved against the directory
            of `json_config_path`, or the current directory if it's `None`.
        '''
        self._json_config_path = json_config_path

        if json_config_path is not None:
            self._base_dir = os.path.dirname(os.path.abspath(json_config_path))
        else:
            self._base_dir = os.getcwd()

        if content is None:
            if json_config_path is None:
                content = {}
            else:
                verbose('Loading configuration "%s".' % json_config_path)
                try:
                    content = pathutils.read_json(json_config_path)
                except DataIOError as exc:
                    raise ConfigError('cannot read the configuration file: %s' % exc,
                                      json_config_path)

        self._content = content
        self.validate()

    def _error(self, msg):
        return ConfigError(msg, self._json_config_path)

    def validate(self):
        '''
        Raise a `ConfigError` if the configuration document is not valid.
        '''
        if not isinstance(self._content, dict):
            raise self._error('the configuration must be an object')

        unknown = sorted(set(self._content) - set(self.PATH_KEYS) - set(self.OTHER_KEYS))
        if unknown:
            raise self._error('unknown configuration options: %s' % ', '.join(unknown))

        for key in self.PATH_KEYS:
            value = self._content.get(key)
            if value is not None and not isinstance(value, str):
                raise self._error('option "%s" must be a path' % key)

        graph = self._content.get('graph', {})
        if not isinstance(graph, dict):
            raise self._error('the "graph" option must be an object')
        unknown = sorted(set(graph) - set(self.GRAPH_KEYS))
        if unknown:
            raise self._error('unknown graph options: %s' % ', '.join(unknown))

        # Evaluate every option so that invalid values are reported straight away.
        for name in ('mining_config', 'tolerance_edits', 'graph_min_fraction',
                     'graph_min_path_count', 'graph_stages', 'idle_threshold_s',
                     'its_alpha', 'seed', 'generator_config', 'impact_links'):
            getattr(self, name)

    def resolve(self, path):
        '''
        Resolve `path` relative to the directory of the configuration file.
        '''
        return os.path.normpath(os.path.join(self._base_dir, path))

    def _path_option(self, key):
        value = self._content.get(key)
        if value is None:
            return None
        return self.resolve(value)

    def _set_path_option(self, key, value):
        if value is None:
            self._content.pop(key, None)
        else:
            self._content[key] = os.path.abspath(value)

    def save(self, json_config_path):
        '''
        Freeze the configuration, with absolute paths, into `json_config_path`.
        '''
        pathutils.write_json(json_config_path, self.json_serializable_config)

    @property
    def json_serializable_config(self):
        '''
        A dictionary suitable for JSON representation of the effective configuration.
        '''
        doc = collections.OrderedDict()
        for key in self.PATH_KEYS:
            value = self._path_option(key)
            if value is not None:
                doc[key] = value
        doc['mining'] = self.mining_config.to_document()
        doc['tolerance-edits'] = self.tolerance_edits
        doc['graph'] = collections.OrderedDict((
            ('min-fraction', self.graph_min_fraction),
            ('min-path-count', self.graph_min_path_count),
            ('stages', self.graph_stages),
            ))
        doc['idle-threshold-s'] = self.idle_threshold_s
        doc['its-alpha'] = self.its_alpha
        generator_config = self.generator_config
        doc['seed'] = generator_config.seed
        doc['generator'] = generator_config.to_document()
        if self.impact_links is not None:
            doc['impact-links'] = collections.OrderedDict(
                (impact, sorted(kinds)) for impact, kinds in sorted(self.impact_links.items()))
        return doc

    @property
    def config_path(self):
        '''
        The path of the configuration file or `None`.
        '''
        return self._json_config_path

    @property
    def corpus(self):
        '''
        The corpus file of correct solutions.
        '''
        return self._path_option('corpus')

    @corpus.setter
    def corpus(self, path):
        self._set_path_option('corpus', path)

    @property
    def traces(self):
        '''
        The line-delimited trace file.
        '''
        return self._path_option('traces')

    @traces.setter
    def traces(self, path):
        self._set_path_option('traces', path)

    @property
    def annotations(self):
        '''
        The expert annotation file.
        '''
        return self._path_option('annotations')

    @annotations.setter
    def annotations(self, path):
        self._set_path_option('annotations', path)

    @property
    def objectives(self):
        '''
        The objective configuration file.
        '''
        return self._path_option('objectives')

    @objectives.setter
    def objectives(self, path):
        self._set_path_option('objectives', path)

    @property
    def features(self):
        '''
        The features document written by the "mine" command.
        '''
        return self._path_option('features')

    @features.setter
    def features(self, path):
        self._set_path_option('features', path)

    @property
    def training_traces(self):
        '''
        The traces used to measure the resolution while clustering features.
        '''
        return self._path_option('training-traces')

    @training_traces.setter
    def training_traces(self, path):
        self._set_path_option('training-traces', path)

    @property
    def events(self):
        '''
        The line-delimited feedback events written by the "replay" command.
        '''
        return self._path_option('events')

    @events.setter
    def events(self, path):
        self._set_path_option('events', path)

    @property
    def detections(self):
        '''
        The first-detection CSV file written by the "evaluate" command.
        '''
        return self._path_option('detections')

    @detections.setter
    def detections(self, path):
        self._set_path_option('detections', path)

    @property
    def output_dir(self):
        '''
        The run directory where every output is written.
        '''
        return self._path_option('output-dir')

    @output_dir.setter
    def output_dir(self, path):
        self._set_path_option('output-dir', path)

    @property
    def mining_config(self):
        '''
        The `mining.MiningConfig` built from the "mining" option.
        '''
        try:
            return mining.MiningConfig.from_document(self._content.get('mining'))
        except ConfigError as exc:
            raise self._error(str(exc))

    @property
    def tolerance_edits(self):
        '''
        How many snapshots a detection can be off and still count as correct.
        '''
        value = self._content.get('tolerance-edits', 0)
        if not _is_int(value) or value < 0:
            raise self._error('option "tolerance-edits" must be a non-negative integer')
        return value

    @tolerance_edits.setter
    def tolerance_edits(self, value):
        self._content['tolerance-edits'] = value

    def _graph_option(self, key, default):
        return self._content.get('graph', {}).get(key, default)

    @property
    def graph_min_fraction(self):
        '''
        Transitions taken by fewer than this fraction of the students are removed by the
        first simplification phase.
        '''
        value = self._graph_option('min-fraction', 0.10)
        if not _is_number(value) or not 0 <= value <= 1:
            raise self._error('option "graph.min-fraction" must be in [0, 1]')
        return value

    @property
    def graph_min_path_count(self):
        '''
        Solution paths followed by fewer students than this are not listed.
        '''
        value = self._graph_option('min-path-count', 1)
        if not _is_int(value) or value < 1:
            raise self._error('option "graph.min-path-count" must be a positive integer')
        return value

    @property
    def graph_stages(self):
        '''
        How many simplification phases are applied to transition graphs.
        '''
        value = self._graph_option('stages', 3)
        if not _is_int(value) or value not in (0, 1, 2, 3):
            raise self._error('option "graph.stages" must be 0, 1, 2 or 3')
        return value

    @graph_stages.setter
    def graph_stages(self, value):
        self._content.setdefault('graph', {})['stages'] = value

    @property
    def idle_threshold_s(self):
        '''
        Gaps between edits longer than this many seconds are idle time.
        '''
        value = self._content.get('idle-threshold-s', phases.DEFAULT_IDLE_THRESHOLD_S)
        if not _is_number(value) or value <= 0:
            raise self._error('option "idle-threshold-s" must be a positive number')
        return value

    @idle_threshold_s.setter
    def idle_threshold_s(self, value):
        self._content['idle-threshold-s'] = value

    @property
    def its_alpha(self):
        '''
        The extra time, as a fraction of the time needed to reach a correct solution,
        after which a student is suggested as impacted on time spent.
        '''
        value = self._content.get('its-alpha', 0.5)
        if not _is_number(value) or value < 0:
            raise self._error('option "its-alpha" must be a non-negative number')
        return value

    @property
    def seed(self):
        '''
        The seed of the data generator.
        '''
        value = self._content.get('seed', 0)
        if not _is_int(value):
            raise self._error('option "seed" must be an integer')
        return value

    @seed.setter
    def seed(self, value):
        self._content['seed'] = value

    @property
    def generator_config(self):
        '''
        The `synth.GeneratorConfig` built from the "generator" option. The "seed" option,
        if set, overrides the seed in "generator".
        '''
        seed = self.seed if 'seed' in self._content else None
        try:
            return synth.GeneratorConfig.from_document(self._content.get('generator'),
                                                       seed=seed)
        except ConfigError as exc:
            raise self._error(str(exc))

    @property
    def impact_links(self):
        '''
        A dictionary mapping impact types to the detection types which can contribute to
        them, or `None` if every detection type may contribute to every impact.
        '''
        links = self._content.get('impact-links')
        if links is None:
            return None
        if not isinstance(links, dict):
            raise self._error('option "impact-links" must be an object')

        result = {}
        for impact, kinds in links.items():
            if impact not in traces.IMPACT_TYPES:
                raise self._error('unknown impact type "%s"' % impact)
            if not isinstance(kinds, list) or \
                    any(kind not in evaluation.DETECTION_TYPES for kind in kinds):
                raise self._error('impact "%s" must be linked to a list of detection '
                                  'types (%s)' %
                                  (impact, ', '.join(evaluation.DETECTION_TYPES)))
            result[impact] = frozenset(kinds)
        return result
