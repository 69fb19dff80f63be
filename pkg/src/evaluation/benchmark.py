"""
Throughput and memory of one streaming run
"""
from dataclasses import dataclass
import logging
import threading
import time
import psutil
from src.config.stream_settings import StreamSettings
from src.config.topology_config import TopologyConfig
from src.core.datatypes import PsdSample
from src.topology.engine import SpectrumStreamer
from typing import Dict, Iterable, Iterator


class _RssSampler:
    """
    Polls the resident set size of this process from a background thread and keeps the maximum
    """
    def __init__(self, interval_s: float):
        self.interval_s = interval_s
        self.process = psutil.Process()
        self.peak = self.process.memory_info().rss
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, name="rss-sampler", daemon=True)

    def _run(self):
        while not self._stop.wait(self.interval_s):
            self.peak = max(self.peak, self.process.memory_info().rss)

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self._stop.set()
        self._thread.join()
        self.peak = max(self.peak, self.process.memory_info().rss)
        return False


@dataclass
class BenchmarkResult:
    samples: int
    bins: int
    workers: int
    wall_s: float
    stream_duration_ms: int
    samples_per_second: float
    bin_samples_per_second: float
    # Stream time covered per unit of processing time
    realtime_factor: float
    peak_memory_bytes: int
    events: int

    def to_record(self) -> Dict:
        return {"samples": self.samples, "bins": self.bins, "workers": self.workers, "wallS": self.wall_s,
                "streamDurationMs": self.stream_duration_ms, "samplesPerSecond": self.samples_per_second,
                "binSamplesPerSecond": self.bin_samples_per_second, "realtimeFactor": self.realtime_factor,
                "peakMemoryBytes": self.peak_memory_bytes, "events": self.events}


class _Counted:
    def __init__(self, samples: Iterable[PsdSample]):
        self.samples = samples
        self.count = 0
        self.first_t = None
        self.last_t = None

    def __iter__(self) -> Iterator[PsdSample]:
        for sample in self.samples:
            if self.first_t is None:
                self.first_t = sample.timestamp
            self.last_t = sample.timestamp
            self.count += 1
            yield sample


def benchmark(samples: Iterable[PsdSample], settings: StreamSettings, topology: TopologyConfig = None,
              rss_interval_s: float = 0.05) -> BenchmarkResult:
    """
    Stream duration counts one tick interval per sample, so a stream of n samples covers n ticks
    Closed events are not kept so memory reflects the streaming state only
    """
    counted = _Counted(samples)
    streamer = SpectrumStreamer(settings, topology=topology, keep_events=False)
    with _RssSampler(rss_interval_s) as rss:
        started = time.perf_counter()
        if topology is None:
            summary = streamer.run_direct(counted)
        else:
            summary = streamer.run(counted)
        wall_s = max(time.perf_counter() - started, 1e-9)
    duration_ms = counted.count * settings.tick_interval_ms
    result = BenchmarkResult(samples=counted.count, bins=settings.plan.bin_count,
                             workers=1 if topology is None else topology.workers, wall_s=wall_s,
                             stream_duration_ms=duration_ms, samples_per_second=counted.count / wall_s,
                             bin_samples_per_second=counted.count * settings.plan.bin_count / wall_s,
                             realtime_factor=(duration_ms / 1000.0) / wall_s, peak_memory_bytes=int(rss.peak),
                             events=summary.events)
    logging.info("Benchmark: {0:.1f} samples/s, {1:.2f}x real time, peak RSS {2:.1f} MB".format(
        result.samples_per_second, result.realtime_factor, result.peak_memory_bytes / 2 ** 20))
    return result
