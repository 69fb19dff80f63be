class EvalConfig:
    """
    Defaults of the evaluation harness, tolerances are expressed in ticks and scaled by the tick interval
    """
    def __init__(self, tick_interval_ms: int = 100):
        self.tick_interval_ms = tick_interval_ms

        # Truth labels are dilated by this many ticks before looking for overlapping detections
        self.tol_time_ticks = 2
        # ... and by this many bins
        self.tol_freq_bins = 1
        # A detected boundary within this many ticks of the truth boundary counts as correct
        self.boundary_tol_ticks = 2

        # Ground truth slices: duration d and mean spacing st
        self.slice_duration_ms = 10000
        self.slice_spacing_ms = 120000

    @property
    def tol_time_ms(self) -> int:
        return self.tol_time_ticks * self.tick_interval_ms

    @property
    def boundary_tol_ms(self) -> int:
        return self.boundary_tol_ticks * self.tick_interval_ms
