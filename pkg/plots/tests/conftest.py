import pytest

from csvfixtures import make_preset_dir


@pytest.fixture
def preset_dir(tmp_path):
    return lambda preset: make_preset_dir(preset, str(tmp_path))
