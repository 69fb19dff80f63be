"""
Scoring of detections against truth and batch runs of the pipeline over a grid of detector parameters
"""
from concurrent.futures import ThreadPoolExecutor
import itertools
import json
import logging
import os
import pandas as pd
from src.config.detector_config import parse_document
from src.config.eval_config import EvalConfig
from src.config.stream_settings import StreamSettings
from src.core.datatypes import PsdSample
from src.core.errors import ConfigParseError, SpecstreamError
from src.evaluation.matching import ConfusionMatrix, StartStopMatrix, confusion, match_events, start_stop_confusion
from src.evaluation.slices import Slice, clip_to_slice
from src.topology.engine import detect_stream
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

StreamInput = Union[Sequence[PsdSample], Callable[[], Iterable[PsdSample]]]


def evaluate(detected: Sequence, truth: Sequence, eval_cfg: EvalConfig,
             slices: Optional[Sequence[Slice]] = None) -> Tuple[ConfusionMatrix, StartStopMatrix]:
    """
    Score detections against truth, over the whole stream or summed over the labelling slices
    Inside a slice both sides are clipped to the slice before matching
    """
    if slices is None:
        windows = [(detected, truth)]
    else:
        tick = eval_cfg.tick_interval_ms
        windows = [(clip_to_slice(detected, w, tick), clip_to_slice(truth, w, tick)) for w in slices]
    table, boundaries = ConfusionMatrix(0, 0, 0), StartStopMatrix()
    for det, tru in windows:
        matching = match_events(det, tru, eval_cfg.tol_time_ms, eval_cfg.tol_freq_bins, eval_cfg.tick_interval_ms)
        table = table + confusion(matching)
        boundaries = boundaries + start_stop_confusion(matching, eval_cfg.boundary_tol_ms)
    return table, boundaries


def parse_grid(document: Union[str, bytes, List, Dict]) -> List[Dict[str, Any]]:
    """
    A JSON list of partial config documents, or an object mapping field names to value lists
    whose cartesian product is taken in key order
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ConfigParseError("grid is not valid JSON: {0}".format(e)) from None
    if isinstance(document, dict):
        keys = list(document)
        values = [v if isinstance(v, list) else [v] for v in document.values()]
        grid = [dict(zip(keys, combo)) for combo in itertools.product(*values)]
    elif isinstance(document, list):
        grid = [parse_document(item) for item in document]
    else:
        raise ConfigParseError("grid must be a JSON list or object, got {0}".format(type(document).__name__))
    if len(grid) == 0:
        raise ConfigParseError("grid is empty")
    return grid


def _samples_of(stream: StreamInput) -> Iterable[PsdSample]:
    return stream() if callable(stream) else stream


def _run_one(index: int, overrides: Dict[str, Any], stream: StreamInput, truth: Sequence,
             settings: StreamSettings, eval_cfg: EvalConfig, slices: Optional[Sequence[Slice]]) -> Dict[str, Any]:
    row = {"config": index}
    row.update(overrides)
    try:
        run_settings = settings.with_detector(settings.detector.replace(**overrides))
        events = detect_stream(_samples_of(stream), run_settings)
        table, boundaries = evaluate(events, truth, eval_cfg, slices)
    except SpecstreamError as e:
        logging.warning("sweep run {0} failed: {1}".format(index, e))
        row.update(events=0, error="{0}: {1}".format(e.reason, e))
        return row
    row["events"] = len(events)
    row.update(table.to_record())
    row.update(boundaries.to_record())
    row["error"] = None
    logging.info("sweep run {0}: {1}".format(index, table.to_record()))
    return row


def run_sweep(stream: StreamInput, truth: Sequence, grid: Sequence[Dict[str, Any]], settings: StreamSettings,
              eval_cfg: EvalConfig = None, slices: Optional[Sequence[Slice]] = None, jobs: int = 1) -> pd.DataFrame:
    """
    :param stream: samples, or a factory returning a fresh iterable, replayed identically for every config
    :param grid: partial detector documents applied on top of settings.detector
    :param jobs: runs executed in parallel, each owns its own pipeline
    :return: one row per grid entry in grid order
    """
    if len(grid) == 0:
        raise ValueError("parameter grid is empty")
    if eval_cfg is None:
        eval_cfg = EvalConfig(tick_interval_ms=settings.tick_interval_ms)
    if not callable(stream):
        stream = list(stream)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_one, i, dict(o), stream, truth, settings, eval_cfg, slices)
                       for i, o in enumerate(grid)]
            rows = [f.result() for f in futures]
    else:
        rows = [_run_one(i, dict(o), stream, truth, settings, eval_cfg, slices) for i, o in enumerate(grid)]
    return pd.DataFrame.from_records(rows)


def write_tables(table: pd.DataFrame, out_dir: str, name: str = "sweep") -> Tuple[str, str]:
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, name + ".csv")
    json_path = os.path.join(out_dir, name + ".json")
    table.to_csv(csv_path, index=False)
    table.to_json(json_path, orient='records', indent=2)
    return csv_path, json_path
