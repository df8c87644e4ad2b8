import os
import sys
from datetime import datetime

from sexism_detector.cli import main

if __name__ == "__main__":
    # One timestamp per launch so bench output and logs share a directory name
    os.environ.setdefault("SEXISM_DETECTOR_RUN_TIMESTAMP", datetime.now().strftime("%Y-%m-%d_%H-%M-%S"))
    sys.exit(main())
