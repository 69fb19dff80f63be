import os


# Translates between short location names and the directories generated results are written to
# Locations are registered once with a path relative to the base directory, afterwards callers
# only deal with the location name
class ResultDirManager:
    def __init__(self, base_dir: str = None):
        # Relative paths are resolved against this directory, the working directory by default
        self.base_dir = os.path.abspath(base_dir if base_dir is not None else os.getcwd())
        # Example {'slices': 'runs/eval/slices'}
        self.mypaths = {}
        self.myabspaths = {}

    def add_location(self, loc_name: str, loc_rel_pth: str, make_dir_if_none: bool = True) -> str:
        abs_loc_pth = os.path.join(self.base_dir, loc_rel_pth)
        if make_dir_if_none:
            os.makedirs(abs_loc_pth, exist_ok=True)
        self.mypaths[loc_name] = loc_rel_pth
        self.myabspaths[loc_name] = abs_loc_pth
        return abs_loc_pth

    def loc_exists(self, loc_name: str) -> bool:
        if loc_name in self.mypaths:
            return True
        raise KeyError("Unknown location name {0} for dict with keys {1}".format(loc_name, list(self.mypaths)))

    def get_abs_path(self, loc_name: str) -> str:
        self.loc_exists(loc_name)
        return self.myabspaths[loc_name]

    def get_file_path(self, loc_name: str, file_name: str, check_exists: bool = False) -> str:
        file_abs_path = os.path.join(self.get_abs_path(loc_name), file_name)
        if check_exists and not os.path.exists(file_abs_path):
            raise ValueError('No file at {0}'.format(file_abs_path))
        return file_abs_path
