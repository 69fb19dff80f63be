from src.detection.windows import SlidingWindow, DelayedWindow, window_push, moving_average
from src.detection.histogram import OnlineHistogram, histogram_update, bin_index, bin_indices
from src.detection.chi_square import PSEUDOCOUNT, chi_square_statistic, chi_square_pvalue, chi_square_cells
from src.detection.bin_pipeline import BinPipeline, detect, classify_direction
from src.detection.pipeline_bank import PipelineBank, VerdictColumns
