import os
import subprocess
import sys

import pytest

from byzshield import _backend


def _backend_in_subprocess(env_value):
    env = dict(os.environ, BYZSHIELD_PURE_PYTHON=env_value)
    out = subprocess.run(
        [sys.executable, "-c", "import byzshield; print(byzshield.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    return out.stdout.strip()


def test_env_forces_python():
    assert _backend_in_subprocess("1") == "python"


def test_default_prefers_compiled():
    want = "cython" if _backend.compiled_kernel is not None else "python"
    assert _backend_in_subprocess("") == want


def test_get_kernel():
    assert _backend.get_kernel("python") is _backend.python_kernel
    with pytest.raises(ValueError):
        _backend.get_kernel("fortran")
