from src.utils.results_dir_manager import ResultDirManager
from src.utils.my_logging import setup_logging
