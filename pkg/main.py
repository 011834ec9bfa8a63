"""
dimshape - Main Entry Point
Trajectory-dimension reward shaping: train, measure, stress-test, serve.
"""

import sys

from dotenv import load_dotenv

# Load environment variables (LOG_LEVEL, DIMSHAPE_WORKERS, DIMSHAPE_OUT)
load_dotenv()

from app.cli import main

if __name__ == "__main__":
    sys.exit(main())
