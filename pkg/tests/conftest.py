import numpy as np
import pytest


@pytest.fixture
def swm_home(tmp_path, monkeypatch):
    """Point dataset storage at a throwaway directory."""
    home = tmp_path / "swm_home"
    monkeypatch.setenv("SWM_HOME", str(home))
    return home


@pytest.fixture
def rng():
    return np.random.default_rng(0)
