"""
CLI end-to-end conftest: runs cli.py in a subprocess inside a scratch directory.
"""
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

# Add project root to path
ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)

CLI = os.path.join(ROOT, "cli.py")


@pytest.fixture
def workdir(tmp_path):
    """Fresh scratch directory for one test's inputs and outputs."""
    return tmp_path


@pytest.fixture
def run_cli(workdir):
    """Run `python cli.py <args>` in the scratch directory; returns the CompletedProcess."""
    def _run(*args, timeout=600):
        return subprocess.run(
            [sys.executable, CLI, *[str(a) for a in args]],
            cwd=workdir,
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    return _run


@pytest.fixture
def write_spec(workdir):
    """Write a model spec document to the scratch directory and return its path."""
    def _write(doc, name="model.json") -> Path:
        path = workdir / name
        path.write_text(json.dumps(doc))
        return path
    return _write
