from src.evaluation.synthetic import (PRESETS, ForcedBlock, GroundTruthLabel, SyntheticScenario, SyntheticStream,
                                      TransmitterSpec, dump_scenario, load_scenario, synth_generate, write_samples,
                                      write_truth)
from src.evaluation.slices import clip_to_slice, extract_slices, in_slices
from src.evaluation.matching import (ConfusionMatrix, Matching, StartStopMatrix, confusion, match_events,
                                     start_stop_confusion)
from src.evaluation.labels_io import read_detections, read_events, read_truth
from src.evaluation.sweep import evaluate, parse_grid, run_sweep, write_tables
from src.evaluation.benchmark import BenchmarkResult, benchmark
