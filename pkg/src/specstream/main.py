"""
specstream command line: detect, replay, report, query, generate, eval and bench
Exit codes: 0 success, 2 usage error, 1 runtime error
"""
import argparse
import json
import logging
import os
import signal
import sys
from src.config.detector_config import DetectorConfig
from src.config.eval_config import EvalConfig
from src.config.stream_settings import StreamSettings, dump_settings, load_settings
from src.config.topology_config import TopologyConfig
from src.core.errors import SpecstreamError
from src.evaluation.benchmark import benchmark
from src.evaluation.labels_io import read_detections, read_events, read_truth
from src.evaluation.slices import extract_slices, in_slices
from src.evaluation.sweep import evaluate, parse_grid, run_sweep, write_tables
from src.evaluation.synthetic import SyntheticStream, dump_scenario, load_scenario, write_samples, write_truth
from src.reporting.spectrum_report import ChannelTable, ReportState, render
from src.store.event_store import SpectrumDatabase
from src.topology.codecs import FORMATS
from src.topology.engine import MODES, SpectrumStreamer
from src.topology.sinks import NdjsonSink, TcpNdjsonSink
from src.topology.sources import file_source, parse_endpoint, socket_source
from src.utils import ResultDirManager, setup_logging

STREAM_FILES = {'csv': 'stream.csv', 'binary': 'stream.bin'}


class UsageError(Exception):
    """
    Flag combination the parser itself cannot reject
    """


def _read_text(path_or_inline: str) -> str:
    if os.path.isfile(path_or_inline):
        with open(path_or_inline, 'r') as f:
            return f.read()
    return path_or_inline


def _settings(args) -> StreamSettings:
    with open(args.config, 'r') as f:
        return load_settings(f.read())


def _topology(args) -> TopologyConfig:
    return TopologyConfig(workers=args.workers, mode=args.mode)


def _scenario(args):
    scenario = load_scenario(_read_text(args.scenario))
    if args.seed is not None:
        scenario = scenario.model_copy(update={'seed': args.seed})
    return scenario


def _run_stream(streamer: SpectrumStreamer, samples, topology: TopologyConfig):
    def _on_signal(signum, frame):
        logging.warning("Signal {0} received, draining the pipeline".format(signum))
        streamer.request_stop()

    previous = {}
    for sig in (signal.SIGINT, signal.SIGTERM):
        try:
            previous[sig] = signal.signal(sig, _on_signal)
        except ValueError:
            # Not on the main thread
            pass
    try:
        if topology.workers == 1 and topology.mode == 'inproc':
            return streamer.run_direct(samples)
        return streamer.run(samples)
    finally:
        for sig, handler in previous.items():
            signal.signal(sig, handler)


def cmd_detect(args) -> int:
    settings = _settings(args)
    topology = _topology(args)
    if (args.input is None) == (args.listen is None):
        raise UsageError("detect needs exactly one of --input and --listen")

    out = sys.stdout if args.out is None else open(args.out, 'w')
    sinks = [NdjsonSink(out)]
    if args.serve is not None:
        sinks.append(TcpNdjsonSink(*parse_endpoint(args.serve)))
    database = SpectrumDatabase(args.store) if args.store is not None else None
    streamer = SpectrumStreamer(settings, topology=topology, sinks=sinks, database=database, keep_events=False)
    if args.input is not None:
        samples = file_source(args.input, args.format, settings.plan.bin_count, realtime=args.realtime,
                              stop=streamer.stop_event)
    else:
        samples = socket_source(*parse_endpoint(args.listen), args.format, settings.plan.bin_count)
    try:
        summary = _run_stream(streamer, samples, topology)
    finally:
        for sink in sinks:
            sink.close()
        if database is not None:
            database.close()
        if out is not sys.stdout:
            out.close()
    if summary.stopped_early:
        logging.info("Stopped before the end of the source")
    return 0


def cmd_replay(args) -> int:
    args.listen = None
    return cmd_detect(args)


def cmd_report(args) -> int:
    settings = _settings(args)
    if (args.input is None) == (args.store is None):
        raise UsageError("report needs exactly one of --input and --store")
    if args.input is not None:
        with open(args.input, 'r') as f:
            events = read_events(f, settings.plan)
    else:
        database = SpectrumDatabase(args.store)
        events = database.merged.all()
        database.close()

    tick = settings.tick_interval_ms
    start = args.period_start if args.period_start is not None else min((e.t_start for e in events), default=0)
    end = args.period_end if args.period_end is not None else max((e.t_stop for e in events), default=start) + tick
    channels = None
    if args.channels is not None:
        channels = ChannelTable.from_document(_read_text(args.channels), settings.plan)
    state = ReportState(settings.plan, start, end, tick, channels)
    skipped = 0
    for event in events:
        if start <= event.t_start and event.t_stop < end:
            state.accumulate(event)
        else:
            skipped += 1
    if skipped:
        logging.info("{0} events outside [{1}, {2}) left out of the report".format(skipped, start, end))
    sys.stdout.write(render(state, 'text' if args.text else 'json'))
    return 0


def cmd_query(args) -> int:
    database = SpectrumDatabase(args.store)
    try:
        events = database.execute(_read_text(args.query))
    finally:
        database.close()
    sys.stdout.write(json.dumps([e.to_record() for e in events]) + "\n")
    return 0


def cmd_generate(args) -> int:
    scenario = _scenario(args)
    stream = SyntheticStream(scenario)
    manager = ResultDirManager()
    manager.add_location('out', args.out)
    with open(manager.get_file_path('out', STREAM_FILES[args.format]), 'wb') as f:
        count = write_samples(stream.samples(), f, args.format)
    with open(manager.get_file_path('out', 'truth.ndjson'), 'w') as f:
        write_truth(stream.truth, f)
    with open(manager.get_file_path('out', 'scenario.json'), 'w') as f:
        f.write(dump_scenario(scenario) + "\n")
    settings = StreamSettings(plan=scenario.plan, detector=DetectorConfig(),
                              tick_interval_ms=scenario.tick_interval_ms)
    with open(manager.get_file_path('out', 'settings.json'), 'w') as f:
        f.write(dump_settings(settings) + "\n")
    logging.info("Wrote {0} samples and {1} truth labels to {2}".format(count, len(stream.truth),
                                                                      manager.get_abs_path('out')))
    return 0


def _eval_inputs(args):
    """
    :return: settings, sample factory, truth labels, stream length and start in ms, and the scenario if any
    """
    if args.scenario is not None:
        scenario = _scenario(args)
        stream = SyntheticStream(scenario)
        if args.config is not None:
            settings = _settings(args)
        else:
            settings = StreamSettings(plan=scenario.plan, detector=DetectorConfig(),
                                      tick_interval_ms=scenario.tick_interval_ms)
        return settings, stream.samples, stream.truth, stream.duration_ms, scenario.start_time_ms, scenario
    if args.input is None or args.truth is None or args.config is None:
        raise UsageError("eval needs --scenario, or --input with --truth and --config")
    settings = _settings(args)
    with open(args.truth, 'r') as f:
        truth = read_truth(f)

    def samples():
        return file_source(args.input, args.format, settings.plan.bin_count)
    first = last = None
    for sample in samples():
        first = sample.timestamp if first is None else first
        last = sample.timestamp
    length = 0 if first is None else last - first + settings.tick_interval_ms
    return settings, samples, truth, length, (first or 0), None


def _slices(args, scenario, length_ms: int, start_ms: int, eval_cfg: EvalConfig):
    d = args.slice_duration_ms
    st = args.slice_spacing_ms
    budget = args.slice_budget_ms
    if scenario is not None:
        d = d if d is not None else scenario.slice_duration_ms
        st = st if st is not None else scenario.slice_spacing_ms
        budget = budget if budget is not None else scenario.slice_budget_ms
    if d is None:
        return None
    st = st if st is not None else eval_cfg.slice_spacing_ms
    seed = args.seed if args.seed is not None else 0
    return extract_slices(length_ms, d, st, seed, budget_ms=budget, stream_start_ms=start_ms)


def _score_detections(args) -> int:
    """
    Score an existing notification or event file instead of running the detector
    """
    if args.truth is None or args.config is None:
        raise UsageError("eval --detections needs --truth and --config")
    settings = _settings(args)
    with open(args.truth, 'r') as f:
        truth = read_truth(f)
    with open(args.detections, 'r') as f:
        detected = read_detections(f)
    eval_cfg = EvalConfig(tick_interval_ms=settings.tick_interval_ms)
    boxes = list(truth) + list(detected)
    start = min((b.t_start for b in boxes), default=0)
    length = max((b.t_stop for b in boxes), default=start) + settings.tick_interval_ms - start
    slices = _slices(args, None, length, start, eval_cfg)
    table, boundaries = evaluate(detected, truth, eval_cfg, slices)
    record = {"events": len(detected)}
    record.update(table.to_record())
    record.update(boundaries.to_record())
    sys.stdout.write(json.dumps(record) + "\n")
    return 0


def cmd_eval(args) -> int:
    if args.detections is not None:
        return _score_detections(args)
    settings, samples, truth, length_ms, start_ms, scenario = _eval_inputs(args)
    eval_cfg = EvalConfig(tick_interval_ms=settings.tick_interval_ms)
    slices = _slices(args, scenario, length_ms, start_ms, eval_cfg)
    if slices is not None:
        logging.info("Scoring {0} slices".format(len(slices)))
    grid = parse_grid(_read_text(args.grid)) if args.grid is not None else [{}]
    table = run_sweep(samples, truth, grid, settings, eval_cfg, slices=slices, jobs=args.jobs)
    if args.out is not None:
        write_tables(table, args.out)
    sys.stdout.write(table.to_json(orient='records') + "\n")

    if args.plot_slices is not None:
        if slices is None:
            raise UsageError("--plot-slices needs labelling slices (--slice-duration-ms or a scenario that sets them)")
        from src.plotting.spectrogram_viz import SliceCollector, save_slice_plots
        from src.topology.engine import detect_stream
        collector = SliceCollector(slices)
        events = detect_stream(collector.wrap(samples()), settings)
        tick = settings.tick_interval_ms
        save_slice_plots(collector, in_slices(truth, slices, tick), in_slices(events, slices, tick),
                         settings.plan, tick, args.plot_slices)
    return 0


def cmd_bench(args) -> int:
    if args.scenario is not None:
        scenario = _scenario(args)
        samples = SyntheticStream(scenario).samples()
        if args.config is not None:
            settings = _settings(args)
        else:
            settings = StreamSettings(plan=scenario.plan, detector=DetectorConfig(),
                                      tick_interval_ms=scenario.tick_interval_ms)
    elif args.input is not None and args.config is not None:
        settings = _settings(args)
        samples = file_source(args.input, args.format, settings.plan.bin_count)
    else:
        raise UsageError("bench needs --scenario, or --input with --config")
    topology = _topology(args)
    result = benchmark(samples, settings, None if topology.workers == 1 and topology.mode == 'inproc'
                       else topology)
    sys.stdout.write(json.dumps(result.to_record()) + "\n")
    return 0


def _add_stream_flags(parser, config_required: bool = True):
    parser.add_argument("--config",
                        action='store',
                        type=str,
                        required=config_required,
                        help="Stream settings document: band plan, tick interval and detector parameters",
                        dest="config",
                        metavar="settings.json")
    parser.add_argument("--format",
                        action='store',
                        choices=FORMATS,
                        default='csv',
                        help="Sample record format",
                        dest="format")


def _add_topology_flags(parser):
    parser.add_argument("--workers",
                        action='store',
                        type=int,
                        default=1,
                        help="Number of bin partitions processed in parallel",
                        dest="workers",
                        metavar="W")
    parser.add_argument("--mode",
                        action='store',
                        choices=MODES,
                        default='inproc',
                        help="Workers as threads in this process or as processes talking over TCP",
                        dest="mode")


def _add_scenario_flags(parser):
    parser.add_argument("--scenario",
                        action='store',
                        type=str,
                        help="Synthetic scenario document (path or inline JSON) or preset name",
                        dest="scenario")
    parser.add_argument("--seed",
                        action='store',
                        type=int,
                        default=None,
                        help="Overrides the scenario seed, also seeds slice extraction",
                        dest="seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specstream", description="Streaming spectrum event detection")
    parser.add_argument("--log-file",
                        action='store',
                        type=str,
                        default=None,
                        help="Also write the log to this file",
                        dest="log_file")
    parser.add_argument("--log-level",
                        action='store',
                        choices=['debug', 'info', 'warning', 'error'],
                        default='info',
                        help="Console log level, the console log goes to stderr",
                        dest="log_level")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, func in (("detect", cmd_detect), ("replay", cmd_replay)):
        p = sub.add_parser(name, help="Detect events in a live or recorded stream and emit NDJSON notifications"
                           if name == "detect" else "Detect events in a recorded stream file")
        _add_stream_flags(p)
        _add_topology_flags(p)
        p.add_argument("--input", action='store', type=str, required=(name == "replay"), dest="input",
                       help="Sample file to read")
        if name == "detect":
            p.add_argument("--listen", action='store', type=str, dest="listen", metavar="host:port",
                           help="Accept one sensor connection and read samples from it")
        p.add_argument("--out", action='store', type=str, dest="out", help="Notification file, stdout by default")
        p.add_argument("--serve", action='store', type=str, dest="serve", metavar="host:port",
                       help="Also broadcast notifications to TCP clients")
        p.add_argument("--store", action='store', type=str, dest="store", metavar="dir",
                       help="Persist Transmissions and MergedTx stores in this directory")
        p.add_argument("--realtime", action='store_true', dest="realtime",
                       help="Replay the file at the pace of its timestamps")
        p.set_defaults(func=func)

    p = sub.add_parser("report", help="Spectrum report over a period")
    p.add_argument("--config", action='store', type=str, required=True, dest="config", metavar="settings.json")
    p.add_argument("--input", action='store', type=str, dest="input",
                   help="Events as NDJSON: notification output or a store file")
    p.add_argument("--store", action='store', type=str, dest="store", metavar="dir",
                   help="Store directory, its MergedTx events are reported")
    p.add_argument("--channels", action='store', type=str, dest="channels",
                   help="Channel table: JSON list of {name, startBin, stopBin} (path or inline)")
    p.add_argument("--period-start", action='store', type=int, dest="period_start")
    p.add_argument("--period-end", action='store', type=int, dest="period_end")
    p.add_argument("--text", action='store_true', dest="text", help="Plain text instead of JSON")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("query", help="Range or location query against a store directory")
    p.add_argument("--store", action='store', type=str, required=True, dest="store", metavar="dir")
    p.add_argument("--query", action='store', type=str, required=True, dest="query",
                   help="Query document (path or inline JSON)")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("generate", help="Write a synthetic stream, its truth labels and matching settings")
    _add_scenario_flags(p)
    p.add_argument("--format", action='store', choices=FORMATS, default='csv', dest="format")
    p.add_argument("--out", action='store', type=str, required=True, dest="out", metavar="dir")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("eval", help="Score detection against truth for one or more detector configurations")
    _add_stream_flags(p, config_required=False)
    _add_scenario_flags(p)
    p.add_argument("--input", action='store', type=str, dest="input")
    p.add_argument("--truth", action='store', type=str, dest="truth", help="Truth labels as NDJSON")
    p.add_argument("--detections", action='store', type=str, dest="detections",
                   help="Score these notifications or events instead of running the detector")
    p.add_argument("--grid", action='store', type=str, dest="grid",
                   help="Parameter grid (path or inline JSON), the settings alone when absent")
    p.add_argument("--jobs", action='store', type=int, default=1, dest="jobs")
    p.add_argument("--out", action='store', type=str, dest="out", metavar="dir", help="Write sweep.csv and sweep.json")
    p.add_argument("--slice-duration-ms", action='store', type=int, dest="slice_duration_ms")
    p.add_argument("--slice-spacing-ms", action='store', type=int, dest="slice_spacing_ms")
    p.add_argument("--slice-budget-ms", action='store', type=int, dest="slice_budget_ms")
    p.add_argument("--plot-slices", action='store', type=str, dest="plot_slices", metavar="dir",
                   help="Spectrogram PNG per slice with truth and detections")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="Throughput and peak memory of one run")
    _add_stream_flags(p, config_required=False)
    _add_scenario_flags(p)
    _add_topology_flags(p)
    p.add_argument("--input", action='store', type=str, dest="input")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    if not setup_logging(console_log_output="stderr", console_log_level=args.log_level, console_log_color=True,
                         logfile_file=args.log_file):
        print("Failed to setup logging, aborting.", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print("specstream: error: {0}".format(e), file=sys.stderr)
        return 2
    except (SpecstreamError, OSError, ValueError) as e:
        logging.error("{0}: {1}".format(type(e).__name__, e))
        return 1


def entry_point():
    sys.exit(main())


if __name__ == '__main__':
    entry_point()
