"""Regenerate the golden image hashes from the fixture inputs.

Run from the plotkit directory: ``python tests/update_golden.py``.
The hashes depend on the installed matplotlib, so regenerate them after
upgrading it or changing any styling.
"""

import os
import subprocess
import sys


def main() -> int:
    here = os.path.dirname(os.path.abspath(__file__))
    env = dict(os.environ, PLOTKIT_UPDATE_GOLDEN="1")
    return subprocess.call(
        [sys.executable, "-m", "pytest",
         os.path.join(here, "test_render.py::test_golden_image_hashes"), "-q"],
        env=env,
    )


if __name__ == "__main__":
    raise SystemExit(main())
