"""Path utilities for cvdyn."""
import os

DEFAULT_OUT_DIR = "cvdyn-out"
LOGS_DIR = "logs"
PRESETS_DIR = "presets"
PRESET_SUFFIX = ".toml"

TRAJECTORY_CSV = "trajectory.csv"
SWEEP_CSV = "sweep.csv"
NOISE_CSV = "noise.csv"
THRESHOLD_CSV = "threshold.csv"
SUMMARY_JSON = "summary.json"
ESTIMATE_JSON = "estimate.json"
VALIDATION_JSON = "validation.json"


def get_output_dir(out_dir: str | None = None) -> str:
    path = os.path.abspath(out_dir or DEFAULT_OUT_DIR)
    os.makedirs(path, exist_ok=True)
    return path


def get_log_dir(out_dir: str | None = None) -> str:
    path = os.path.join(get_output_dir(out_dir), LOGS_DIR)
    os.makedirs(path, exist_ok=True)
    return path


def get_presets_dir() -> str:
    """Bundled scenario presets, next to the app package."""
    app_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    return os.path.join(app_dir, PRESETS_DIR)


def preset_names() -> list[str]:
    folder = get_presets_dir()
    if not os.path.isdir(folder):
        return []
    return sorted(name[:-len(PRESET_SUFFIX)] for name in os.listdir(folder)
                  if name.endswith(PRESET_SUFFIX))


def preset_path(name: str) -> str:
    return os.path.join(get_presets_dir(), name + PRESET_SUFFIX)
