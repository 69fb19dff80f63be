from src.config.detector_config import DetectorConfig, dump_config, load_config
from src.config.stream_settings import StreamSettings, dump_settings, load_settings
from src.config.topology_config import TopologyConfig
from src.config.eval_config import EvalConfig
