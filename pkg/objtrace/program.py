#! /usr/bin/env python3
#
# Copyright (C) 2016-2017 Marco Barisione
# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

from __future__ import absolute_import, division, print_function

import argparse
import collections
import os
import sys

from . import (
    configuration,
    evaluation,
    mining,
    objectives,
    pathutils,
    phases,
    reports,
    runtime,
    synth,
    traces,
    transitions,
    version,
    )

from .errors import (
    ConfigError,
    ObjtraceError,
    ValidationError,
    )
from .log import die, info, verbose, get_verbose, set_verbose


INTERNAL_ERROR_EXIT_CODE = 3


class ArgumentParser(argparse.ArgumentParser):
    '''
    `ArgumentParser` giving a decent message when no command is given.

    Invalid command lines are validation errors, so they exit with the same code.
    '''

    def error(self, message):
        if message == 'too few arguments':
            # There seems to be no other way, but we need a decent message when
            # the program is invoked without arguments.
            message = '%s; try "%s help"' % (message, self.prog)

        self.print_usage(sys.stderr)
        die('%s: error: %s' % (self.prog, message), ValidationError.exit_code)


class SharedArgument(object):
    '''
    Definition of an argparse argument which can be added to multiple subparsers
    (AKA commands).
    '''

    def __init__(self, *args, **kwargs):
        '''
        Initialise a `SharedArgument`.

        The arguments are the same you would pass to `ArgumentParser.add_argument`.
        '''
        self.args = args
        self.kwargs = kwargs

    def add_to_parser(self, target_parser):
        '''
        Add the argument to `target_parser`.
        '''
        target_parser.add_argument(*self.args, **self.kwargs)

    @staticmethod
    def add_group_to_parser(target_parser, shared_arguments):
        '''
        Add all the arguments in the `shared_arguments` iterable to `target_parser`.
        '''
        for arg in shared_arguments:
            arg.add_to_parser(target_parser)


CommandInfo = collections.namedtuple('CommandInfo', ['name', 'subparser', 'callback'])


# Command line options overriding the path options of the configuration, as
# (option name, attribute of the parsed arguments and of `RunConfig`, help) tuples.
PATH_ARGUMENTS = {
    'corpus': SharedArgument(
        '--corpus',
        metavar='FILE',
        help='the corpus of correct solutions (a JSON array)'),
    'training_traces': SharedArgument(
        '--training-traces',
        metavar='FILE',
        help='traces used to measure the resolution while clustering features'),
    'traces': SharedArgument(
        '--traces',
        metavar='FILE',
        help='the student traces (one JSON record per line)'),
    'annotations': SharedArgument(
        '--annotations',
        metavar='FILE',
        help='the expert annotations (a JSON array)'),
    'features': SharedArgument(
        '--features',
        metavar='FILE',
        help='the features document written by "mine"'),
    'objectives': SharedArgument(
        '--objectives',
        metavar='FILE',
        help='the objective configuration'),
    'events': SharedArgument(
        '--events',
        metavar='FILE',
        help='the feedback events written by "replay"; if not given, the traces are '
        'replayed using the features and objectives'),
    'detections': SharedArgument(
        '--detections',
        metavar='FILE',
        help='the first detections written by "evaluate"; if not given, they are '
        'computed from the annotations'),
    }


def _apply_arguments(parsed_args, session):
    '''
    Build the configuration of `session` from the configuration file and the command
    line options.
    '''
    if parsed_args.config is not None:
        session.config = configuration.RunConfig(parsed_args.config)

    config = session.config

    for name in PATH_ARGUMENTS:
        value = getattr(parsed_args, name, None)
        if value is not None:
            setattr(config, name, value)

    if parsed_args.seed is not None:
        config.seed = parsed_args.seed

    for name in ('tolerance_edits', 'idle_threshold_s'):
        value = getattr(parsed_args, name, None)
        if value is not None:
            setattr(config, name, value)

    stages = getattr(parsed_args, 'stages', None)
    if stages is not None:
        config.graph_stages = stages

    # Overrides may have introduced invalid values.
    config.validate()

    if parsed_args.out is not None:
        config.output_dir = parsed_args.out
    session.output_dir = config.output_dir or os.getcwd()
    session.timestamp = not parsed_args.no_timestamp

    verbose('Writing to "%s".' % session.output_dir)


def _required_path(session, name):
    path = getattr(session.config, name)
    if path is None:
        option = name.replace('_', '-')
        raise ConfigError('no %s file given: use --%s or the "%s" configuration option' %
                          (option, option, option))
    if not os.path.exists(path):
        raise ConfigError('the %s file "%s" does not exist' % (name.replace('_', ' '), path))
    session.record_input(name, path)
    return path


def load_corpus(session):
    path = _required_path(session, 'corpus')
    return traces.parse_corpus(pathutils.read_json(path), path)


def load_traces(session, name='traces'):
    path = _required_path(session, name)
    student_traces = traces.parse_traces(pathutils.read_lines(path), path)
    if not student_traces:
        raise ValidationError('no traces', path)
    return student_traces


def load_annotations(session, student_traces, objective_ids=None):
    path = _required_path(session, 'annotations')
    return traces.parse_annotation_file(pathutils.read_text(path),
                                        student_traces,
                                        objective_ids,
                                        path)


def load_feature_set(session):
    path = _required_path(session, 'features')
    return mining.load_features(pathutils.read_json(path), path)


def load_specs(session, feature_ids=None):
    path = _required_path(session, 'objectives')
    return objectives.load_objectives(pathutils.read_json(path), feature_ids, path)


def load_logs(session, student_traces):
    '''
    The `objectives.EventLog` of every student, read from the events file if configured,
    replayed otherwise.

    Return value:
        An ordered dictionary mapping student IDs to logs.
    '''
    if session.config.events is None:
        feature_set = load_feature_set(session)
        specs = load_specs(session, feature_set.feature_ids)
        return collections.OrderedDict(
            (trace.student_id, objectives.replay(trace, feature_set, specs))
            for trace in student_traces)

    specs = load_specs(session)
    objective_ids = [spec.id for spec in specs]

    path = _required_path(session, 'events')
    events = objectives.parse_event_lines(pathutils.read_lines(path), path)

    known = set(trace.student_id for trace in student_traces)
    unknown = sorted(set(events) - known)
    if unknown:
        raise ValidationError('events for unknown students: %s' % ', '.join(unknown), path)

    logs = collections.OrderedDict()
    for trace in student_traces:
        try:
            logs[trace.student_id] = objectives.EventLog.from_events(
                trace.student_id,
                events.get(trace.student_id, []),
                trace.snapshot_indices,
                objective_ids)
        except ValidationError as exc:
            raise ValidationError('student "%s": %s' % (trace.student_id, exc), path)
    return logs


def _annotation_for(annotations, student_id):
    annotation = annotations.get(student_id)
    if annotation is None:
        raise ValidationError('no annotation for student "%s"' % student_id)
    return annotation


def run_mine(session):
    '''
    Mine the features of the configured corpus and write the features document.

    Return value:
        The `mining.MiningResult`.
    '''
    config = session.config
    corpus = load_corpus(session)
    if config.training_traces is not None:
        training_traces = load_traces(session, 'training_traces')
    else:
        training_traces = None

    result = mining.mine(corpus, training_traces, config.mining_config)

    features_path = session.output_path('features.json')
    pathutils.write_json(features_path, result.to_document())

    summary = reports.SummaryWriter(session, 'Feature mining')
    summary.value('Solutions', len(corpus))
    summary.section('Stages')
    for stage, count in result.report.stage_counts.items():
        summary.value(stage, count)
    summary.section('Features')
    for feature in result.features:
        summary.value('F%d (support %.2f)' % (feature.feature_id, feature.support),
                      ' + '.join(feature.member_ids))
    summary.save(session.output_path('mining-summary.txt'))

    info('Mined %d features from %d solutions into "%s".' %
         (len(result.features), len(corpus), features_path))

    return result


def run_replay(session, student_traces=None):
    '''
    Replay the configured traces and write the events and feature states.

    Return value:
        An ordered dictionary mapping student IDs to `objectives.EventLog`.
    '''
    if student_traces is None:
        student_traces = load_traces(session)

    feature_set = load_feature_set(session)
    specs = load_specs(session, feature_set.feature_ids)

    logs = collections.OrderedDict(
        (trace.student_id, objectives.replay(trace, feature_set, specs))
        for trace in student_traces)

    events_path = session.output_path('events.jsonl')
    reports.write_events(events_path, logs.values())
    reports.write_feature_states(session.output_path('feature-states.csv'), logs.values())

    summary = reports.SummaryWriter(session, 'Replay')
    summary.value('Students', len(logs))
    summary.section('Events per student')
    for student_id, count in evaluation.count_events(logs.values()).items():
        summary.value(student_id, count)
    summary.save(session.output_path('replay-summary.txt'))

    info('Replayed %d traces into "%s".' % (len(logs), events_path))

    return logs


EvaluationResult = collections.namedtuple('EvaluationResult',
                                          ['confusion', 'timing', 'summary',
                                           'impact_table', 'records'])


def run_evaluate(session, student_traces=None, logs=None, annotations=None):
    '''
    Tag the feedback against the expert annotations and write the metrics, first
    detections and impact tables.

    Return value:
        An `EvaluationResult`.
    '''
    config = session.config

    if student_traces is None:
        student_traces = load_traces(session)
    if logs is None:
        logs = load_logs(session, student_traces)
    if annotations is None:
        annotations = load_annotations(session, student_traces)

    tagged = []
    records = []
    suggestions = collections.OrderedDict()
    for trace in student_traces:
        log = logs[trace.student_id]
        annotation = _annotation_for(annotations, trace.student_id)

        student_records = evaluation.classify_first_detections(log,
                                                               annotation,
                                                               config.tolerance_edits)
        tagged.extend(evaluation.tag_events(log, annotation, config.tolerance_edits))
        records.extend(student_records)
        suggestions[trace.student_id] = evaluation.flag_impacts_heuristic(
            trace, log, annotation, student_records, config.its_alpha)

    confusion = evaluation.ConfusionCounts.from_tags(tagged)
    timing = evaluation.timing_offset_stats(records, tagged)
    detections = evaluation.detection_summary(records)
    impact_table = evaluation.impact_tables(
        records,
        {student_id: annotation.impacts for student_id, annotation in annotations.items()},
        config.impact_links)
    event_counts = evaluation.count_events(logs.values())

    detections_path = session.output_path('detections.csv')
    reports.write_tagged_events(session.output_path('tagged-events.csv'), tagged)
    reports.write_detections(detections_path, records)
    pathutils.write_json(session.output_path('metrics.json'),
                         reports.metrics_document(confusion,
                                                  timing,
                                                  detections,
                                                  impact_table,
                                                  event_counts))
    reports.write_impact_tables(session,
                                impact_table,
                                sorted(set(record.objective_id for record in records)))
    reports.write_impact_suggestions(session.output_path('impact-suggestions.json'),
                                     suggestions)

    metrics = evaluation.confusion_metrics(confusion)
    summary = reports.SummaryWriter(session, 'Evaluation')
    summary.section('Feedback events')
    summary.value('TP / TN / FP / FN', '%d / %d / %d / %d' % tuple(confusion))
    for name, value in metrics._asdict().items():
        summary.percent(name, value)
    if timing.strict_metrics is not None:
        summary.percent('accuracy (early/late incorrect)', timing.strict_metrics.accuracy)
    summary.section('First detections')
    for kind, count in detections.counts.items():
        summary.value(kind, count)
    summary.percent('fully incorrect (ID + IND)', detections.fully_incorrect)
    summary.percent('partially incorrect (E + L)', detections.partially_incorrect)
    summary.percent('near misses', timing.near_miss)
    summary.section('Impacts')
    for row in impact_table.rows:
        summary.value('%s impacted' % row.detection_type,
                      '%d of %d (%s)' % (row.impacted, row.count,
                                         evaluation.format_percent(row.ratio)))
    summary.percent('faulty feedback with impact', impact_table.faulty_impacted_ratio)
    summary.save(session.output_path('evaluation-summary.txt'))

    info('Evaluated %d feedback events and %d first detections into "%s".' %
         (confusion.total, len(records), session.output_dir))

    return EvaluationResult(confusion, timing, detections, impact_table, records)


GRAPH_MODES = (transitions.SOURCE_EXPERT, transitions.SOURCE_SYSTEM, 'both')


def run_graph(session, mode='both', student_traces=None, logs=None, annotations=None):
    '''
    Build, simplify and export the transition graphs.

    Return value:
        A dictionary mapping sources to the simplified `transitions.TransitionGraph`.
    '''
    config = session.config

    if student_traces is None:
        student_traces = load_traces(session)

    sources = [transitions.SOURCE_EXPERT, transitions.SOURCE_SYSTEM] if mode == 'both' \
        else [mode]

    summary = reports.SummaryWriter(session, 'Transition graphs')

    graphs = collections.OrderedDict()
    for source in sources:
        if source == transitions.SOURCE_EXPERT:
            if annotations is None:
                annotations = load_annotations(session, student_traces)
            sequences = []
            for trace in student_traces:
                annotation = _annotation_for(annotations, trace.student_id)
                if annotation.final_outcome is None:
                    verbose('Student "%s" has no final outcome, not in the expert graph.' %
                            trace.student_id)
                    continue
                sequences.append(transitions.state_sequence(trace, source, truth=annotation))
        else:
            if logs is None:
                logs = load_logs(session, student_traces)
            sequences = [transitions.state_sequence(trace, source,
                                                    log=logs[trace.student_id])
                         for trace in student_traces]

        graph = transitions.simplify(transitions.aggregate(sequences, source),
                                     config.graph_stages,
                                     config.graph_min_fraction)
        graphs[source] = graph

        paths = reports.write_graph(session, graph, config.graph_min_path_count)

        summary.section('%s paths' % source.capitalize())
        for row in paths:
            summary.value(row.text, row.frequency)
        if source == transitions.SOURCE_EXPERT:
            summary.percent('completion rate', transitions.completion_rate(sequences))

    if len(graphs) == 2:
        diffs = transitions.diff_paths(graphs[transitions.SOURCE_EXPERT],
                                       graphs[transitions.SOURCE_SYSTEM])
        reports.write_first_hops(session.output_path('first-hops.csv'), diffs)
        summary.section('First hops')
        for diff in diffs:
            summary.value(diff.hop, 'expert %d, system %d' % (diff.expert, diff.system))

    summary.save(session.output_path('graph-summary.txt'))

    info('Exported %d transition graphs (%d simplification stages) into "%s".' %
         (len(graphs), config.graph_stages, session.output_dir))

    return graphs


def run_phases(session, student_traces=None, logs=None, records=None):
    '''
    Segment the attempts into phases and write the phase report.

    Return value:
        The `phases.PhaseReport`.
    '''
    config = session.config

    if student_traces is None:
        student_traces = load_traces(session)
    if logs is None:
        logs = load_logs(session, student_traces)

    if records is None:
        if config.detections is not None:
            path = _required_path(session, 'detections')
            records = reports.read_detections(path)
        else:
            annotations = load_annotations(session, student_traces)
            records = []
            for trace in student_traces:
                records.extend(evaluation.classify_first_detections(
                    logs[trace.student_id],
                    _annotation_for(annotations, trace.student_id),
                    config.tolerance_edits))

    report = phases.phase_report(student_traces,
                                 logs,
                                 records,
                                 threshold_s=config.idle_threshold_s)
    reports.write_phase_report(session, report)

    summary = reports.SummaryWriter(session, 'Phases')
    summary.value('Students', len(report.rows))
    summary.value('Idle threshold (s)', config.idle_threshold_s)
    summary.value('No detection at all', report.whole_trace_a_count)
    summary.value('No phase B', report.no_phase_b_count)
    for phase in phases.PHASES:
        summary.value('No idle time in phase %s' % phase, report.zero_idle_count(phase))
    summary.save(session.output_path('phases-summary.txt'))

    info('Wrote the phases of %d students into "%s".' %
         (len(report.rows), session.output_dir))

    return report


GeneratedData = collections.namedtuple('GeneratedData',
                                       ['corpus', 'traces', 'annotations'])


def run_gen(session):
    '''
    Generate a corpus, a cohort of traces and their annotations.

    Return value:
        A `GeneratedData` tuple.
    '''
    config = session.config
    generator_config = config.generator_config

    corpus = synth.generate_corpus(generator_config)
    student_traces, annotations = synth.generate_cohort(generator_config)

    corpus_path = session.output_path('corpus.json')
    traces_path = session.output_path('traces.jsonl')
    annotations_path = session.output_path('annotations.json')

    pathutils.write_text(corpus_path, traces.serialize_corpus(corpus))
    pathutils.write_text(traces_path,
                         ''.join(traces.serialize_trace(trace) for trace in student_traces))
    pathutils.write_text(annotations_path,
                         traces.serialize_annotations(annotations.values()))

    summary = reports.SummaryWriter(session, 'Generated data')
    summary.value('Seed', generator_config.seed)
    summary.value('Solutions', len(corpus))
    for strategy, count in generator_config.strategy_counts():
        summary.value('  %s' % strategy, count)
    summary.value('Traces', len(student_traces))
    summary.value('Snapshots', sum(len(trace.snapshots) for trace in student_traces))
    summary.save(session.output_path('gen-summary.txt'))

    info('Generated %d solutions and %d traces into "%s".' %
         (len(corpus), len(student_traces), session.output_dir))

    return GeneratedData(corpus_path, traces_path, annotations_path)


def run_report(session):
    '''
    Run the whole pipeline in a single run directory, generating the data first if no
    corpus and traces are configured.
    '''
    config = session.config

    if config.corpus is None and config.traces is None:
        generated = run_gen(session)
        config.corpus = generated.corpus
        config.traces = generated.traces
        config.annotations = generated.annotations

    result = run_mine(session)
    config.features = session.output_path('features.json')

    if config.objectives is None:
        specs = synth.derive_objectives(result.feature_set)
        objectives_path = session.output_path('objectives.json')
        pathutils.write_json(objectives_path, objectives.objectives_to_document(specs))
        config.objectives = objectives_path

    student_traces = load_traces(session)
    logs = run_replay(session, student_traces)
    # Only replayed events are evaluated, not a configured events file.
    config.events = None

    specs = load_specs(session)
    annotations = load_annotations(session, student_traces, [spec.id for spec in specs])
    evaluation_result = run_evaluate(session, student_traces, logs, annotations)
    run_graph(session, 'both', student_traces, logs, annotations)
    run_phases(session, student_traces, logs, evaluation_result.records)


def run_objtrace(session, arguments):
    '''
    Run objtrace.

    session:
        A `runtime.Session` instance.
    arguments:
        The command line arguments (for instance `sys.argv`).
    '''
    assert session

    program_name = os.path.basename(arguments[0])
    if program_name in ('objtrace.py', '__main__.py'):
        program_name = 'objtrace'

    parser = ArgumentParser(prog=program_name,
                            description='Mines objective features from correct solutions '
                            'and evaluates the feedback they give on student traces.')
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')

    parser.add_argument(
        '--version',
        action='version',
        version='objtrace %s' % version.__version__)

    all_commands = {}

    def add_command_internal(command_name, callback, *args, **kwargs):
        command_subparser = subparsers.add_parser(command_name, *args, **kwargs)
        all_commands[command_name] = CommandInfo(
            name=command_name,
            subparser=command_subparser,
            callback=callback)
        return command_subparser

    def add_command(command_name, run_callback, path_arguments, *args, **kwargs):
        def callback(parsed_args, callback_session):
            _apply_arguments(parsed_args, callback_session)
            try:
                run_callback(parsed_args, callback_session)
            finally:
                # Written even on failure, so that a broken run can be inspected.
                callback_session.write_run_files(command_name)

        command_subparser = add_command_internal(command_name, callback, *args, **kwargs)
        SharedArgument.add_group_to_parser(
            command_subparser,
            [PATH_ARGUMENTS[name] for name in path_arguments])
        return command_subparser

    def add_to_every_command(*args, **kwargs):
        for command in all_commands.values():
            command.subparser.add_argument(*args, **kwargs)

    tolerance_arg = SharedArgument(
        '--tolerance-edits',
        metavar='N',
        type=int,
        help='how many snapshots a detection can be off and still be correct '
        '(default: 0)')

    idle_threshold_arg = SharedArgument(
        '--idle-threshold-s',
        metavar='SECONDS',
        type=float,
        help='gaps between edits longer than this are idle time (default: 180)')

    stages_arg = SharedArgument(
        '--stages',
        type=int,
        choices=(0, 1, 2, 3),
        help='how many simplification phases to apply to the graphs (default: 3)')

    # "mine" command.
    add_command(
        'mine',
        lambda parsed_args, session: run_mine(session),
        ['corpus', 'training_traces'],
        help='mine the features of a corpus of correct solutions',
        description='Extracts the code shapes of the correct solutions, removes the '
        'redundant ones, builds decision shapes, filters by support and clusters the '
        'survivors into features. Writes "features.json".')

    # "replay" command.
    add_command(
        'replay',
        lambda parsed_args, session: run_replay(session),
        ['traces', 'features', 'objectives'],
        help='replay student traces and emit the feedback events',
        description='Computes the feature state of every snapshot and the resulting '
        'objective statuses. Writes "events.jsonl" and "feature-states.csv".')

    # "evaluate" command.
    evaluate_parser = add_command(
        'evaluate',
        lambda parsed_args, session: run_evaluate(session),
        ['traces', 'annotations', 'events', 'features', 'objectives'],
        help='evaluate the feedback against expert annotations',
        description='Tags every feedback event, classifies the first detections and '
        'relates them to the impacts observed. Writes "metrics.json", '
        '"detections.csv" and the impact tables.')
    tolerance_arg.add_to_parser(evaluate_parser)

    # "graph" command.
    graph_parser = add_command(
        'graph',
        lambda parsed_args, session: run_graph(session, parsed_args.mode),
        ['traces', 'annotations', 'events', 'features', 'objectives'],
        help='build the state transition graphs',
        description='Aggregates the expert or system state sequences of the students '
        'into transition graphs, simplifies them and writes them as DOT files, with '
        'the frequent solution paths.')
    graph_parser.add_argument(
        '--mode',
        choices=GRAPH_MODES,
        default='both',
        help='which graphs to build (default: both)')
    stages_arg.add_to_parser(graph_parser)

    # "phases" command.
    phases_parser = add_command(
        'phases',
        lambda parsed_args, session: run_phases(session),
        ['traces', 'events', 'features', 'objectives', 'detections', 'annotations'],
        help='segment the attempts into phases',
        description='Splits every attempt into phase A (first detections), phase B '
        '(changes to detected objectives) and phase C (the rest), and the time in each '
        'into active and idle time. Writes "phases.csv" and the scatter datasets.')
    idle_threshold_arg.add_to_parser(phases_parser)
    tolerance_arg.add_to_parser(phases_parser)

    # "gen" command.
    add_command(
        'gen',
        lambda parsed_args, session: run_gen(session),
        [],
        help='generate a synthetic corpus and cohort',
        description='Generates a corpus of correct solutions, a cohort of student '
        'traces and their expert annotations. The "generator" configuration option '
        'controls the strategy mix and the traces.')

    # "report" command.
    report_parser = add_command(
        'report',
        lambda parsed_args, session: run_report(session),
        ['corpus', 'training_traces', 'traces', 'annotations', 'objectives'],
        help='run the whole pipeline',
        description='Runs gen (if no corpus and traces are given), mine, replay, '
        'evaluate, graph and phases into a single run directory. If no objective '
        'configuration is given, the mined features are mapped to the objectives of '
        'the generated problem.')
    tolerance_arg.add_to_parser(report_parser)
    stages_arg.add_to_parser(report_parser)
    idle_threshold_arg.add_to_parser(report_parser)

    # "help" command.
    def do_help(help_parsed_args, callback_session):
        command_name = ' '.join(help_parsed_args.topic)
        if not command_name:
            parser.print_help()
            return

        command = all_commands.get(command_name)
        if command is None:
            die('"%s" is not an objtrace command. '
                'Try "objtrace help" to list the available commands.' % command_name)

        command.subparser.print_help()

    help_parser = add_command_internal(
        'help',
        do_help,
        help='show the help message',
        description='Shows the documentation. If used with no argument, then the general '
        'documentation is shown. Otherwise, when a command is specified as argument, '
        'the documentation for that command is shown.')

    help_parser.add_argument(
        'topic',
        metavar='COMMAND',
        nargs=argparse.REMAINDER,
        help='command you want to know more about')

    # Arguments common to everything.
    add_to_every_command(
        '-v',
        '--verbose',
        action='store_true',
        help='enable verbose logging')

    for command in all_commands.values():
        if command.name == 'help':
            continue
        command.subparser.add_argument(
            '--config',
            metavar='FILE',
            help='the JSON run configuration')
        command.subparser.add_argument(
            '--out',
            metavar='DIR',
            help='the run directory where the outputs are written (default: the '
            '"output-dir" option or the current directory)')
        command.subparser.add_argument(
            '--seed',
            type=int,
            help='the seed of the data generator')
        command.subparser.add_argument(
            '--no-timestamp',
            action='store_true',
            help='don\'t put the time of the run in the report headers')

    # Now actually parse the command line.
    parsed_args = parser.parse_args(arguments[1:])

    if getattr(parsed_args, 'verbose', None) is None:
        # This is needed in Python 3 if no argument is passed.
        parser.error('too few arguments')

    set_verbose(parsed_args.verbose)

    command = all_commands.get(parsed_args.command)
    if command is None:
        die('Invalid command "%s". This should not happen.' % parsed_args.command,
            INTERNAL_ERROR_EXIT_CODE)

    # We don't use argparse's ability to call a callback as we need to do stuff before
    # it's called.
    command.callback(parsed_args, session)


def main(session, arguments):
    '''
    Run objtrace as a command, i.e. taking care or dealing with keyboard interrupts,
    errors, unexpected exceptions, etc.

    This function doesn't return and raises a `SystemExit` with the appropriate
    exit code: 0 on success, 1 for invalid input, 2 for I/O failures and 3 for
    internal errors.

    If you need to run objtrace as part of another program or from unit tests, use
    `run_objtrace` instead.

    session:
        A `runtime.Session` instance.
    arguments:
        The command line arguments (for instance `sys.argv`).
    '''
    exit_code = 0

    try:
        run_objtrace(session, arguments)
    except KeyboardInterrupt:
        info('\nInterrupted.')
        raise SystemExit(1)
    except ObjtraceError as exc:
        try:
            die('Error: %s' % exc, exc.exit_code)
        except SystemExit as exit_exc:
            exit_code = exit_exc.code
    except Exception as exc: # pylint: disable=broad-except
        # We print the backtrace only if verbose logging is enabled.
        msg = 'Internal error!\nGot exception: "%s".\n' % exc
        if get_verbose():
            verbose(msg)
            raise
        else:
            try:
                die(msg, INTERNAL_ERROR_EXIT_CODE)
            except SystemExit as exit_exc:
                exit_code = exit_exc.code
    except SystemExit as exc:
        exit_code = exc.code

    raise SystemExit(exit_code)


def main_with_defaults():
    '''
    Entry point for the script.

    Call `main` with a default session and `sys.argv`.
    '''
    main(runtime.Session.default_session(), sys.argv)
