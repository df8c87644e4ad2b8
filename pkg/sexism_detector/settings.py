# Settings for the sexism_detector project
#
# Every value can be overridden through the environment or a local .env file
# (loaded with python-dotenv). Keep this module flat: upper-case constants only.
import datetime
import os

from dotenv import load_dotenv

load_dotenv()

LOG_LEVEL = os.getenv("SEXISM_DETECTOR_LOG_LEVEL", "INFO")

# os.pathsep-separated directories searched for embedding files given by name
EMBEDDINGS_PATH = os.getenv("SEXISM_DETECTOR_EMBEDDINGS_PATH", "")

# Directory holding a prepared split (train.csv / test.csv) of the published dataset
DATA_DIR = os.getenv("SEXISM_DETECTOR_DATA_DIR", "data/prepared")
OUTPUT_DIR = os.getenv("SEXISM_DETECTOR_OUTPUT_DIR", "output")

DEFAULT_SEED = int(os.getenv("SEXISM_DETECTOR_SEED", "42"))
DEFAULT_SPLIT_RATIO = 0.8
DEFAULT_SEEDS = [42, 43, 44]

# Published dataset column names (Kaggle "sexist-workplace-statements")
DEFAULT_TEXT_COLUMN = "text"
DEFAULT_LABEL_COLUMN = "label"

DEFAULT_GLOVE_FILE = os.getenv("SEXISM_DETECTOR_GLOVE_FILE", "glove.6B.100d.txt")
DEFAULT_GN_GLOVE_FILE = os.getenv("SEXISM_DETECTOR_GN_GLOVE_FILE", "gn_glove.100d.txt")


def run_timestamp() -> str:
    """Timestamp used to name per-run output directories."""
    return os.getenv("SEXISM_DETECTOR_RUN_TIMESTAMP", datetime.datetime.now().strftime("%Y-%m-%d_%H-%M-%S"))
