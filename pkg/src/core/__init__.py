from src.core.errors import *
from src.core.datatypes import BandPlan, BinActivity, Direction, PsdSample, SpectrumEvent, Warmup
from src.core.validation import SampleValidator, validate_sample
