import os
import sys
from pathlib import Path

# in-tree build output; an installed wheel takes precedence when present
_build = os.environ.get("MESHFORGE_PYTHONPATH", str(Path(__file__).resolve().parents[2] / "build" / "python"))
if Path(_build).exists():
    sys.path.insert(0, _build)
