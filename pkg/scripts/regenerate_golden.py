"""Print the sha256 of the demo field CSV, for refreshing the golden digest on purpose.

    python3 scripts/regenerate_golden.py
"""

import hashlib
import tempfile
from pathlib import Path

from dfcb.cli import cmd_sample, load_config

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    with tempfile.TemporaryDirectory() as d:
        path = cmd_sample(load_config(ROOT / "configs" / "demo.json"), Path(d))
        print(hashlib.sha256(path.read_bytes()).hexdigest())
