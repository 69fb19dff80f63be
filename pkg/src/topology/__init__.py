from src.topology.codecs import FORMATS, decode_sample, encode_sample, iter_records, iter_samples
from src.topology.partitioning import Partitioning, partition
from src.topology.barrier import TickBarrier, VerdictBatch, WorkerEnd, WorkerFailure, barrier_collect
from src.topology.sinks import CollectingSink, NdjsonSink, TcpNdjsonSink
from src.topology.sources import file_source, paced, parse_endpoint, socket_source
from src.topology.engine import MODES, SpectrumStreamer, StreamSummary, detect_stream
