import sys

from sexism_detector.cli import main

sys.exit(main())
