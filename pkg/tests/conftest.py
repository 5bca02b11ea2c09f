import subprocess
import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
QOI_SCRIPT = REPO_ROOT / "scripts" / "make_qoi_samples.py"


@pytest.fixture(scope="session")
def qoi_csv(tmp_path_factory) -> Path:
    """Synthetic output-of-interest sample CSV at the full 16**6 size.

    Generated once per session by the documented script with its default
    seed; costs roughly half a minute of CSV writing.
    """
    path = tmp_path_factory.mktemp("qoi") / "qoi_samples.csv"
    subprocess.run(
        [sys.executable, str(QOI_SCRIPT), "--out", str(path)],
        check=True,
        capture_output=True,
        cwd=REPO_ROOT,
    )
    return path
