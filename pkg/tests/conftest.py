import pytest

from ovals.classes import SymmetryClass
from ovals.spectral import build_frame


@pytest.fixture
def sym32() -> SymmetryClass:
    return SymmetryClass(3, 2)


@pytest.fixture
def sym42() -> SymmetryClass:
    return SymmetryClass(4, 2)


@pytest.fixture(scope="module")
def frame2():
    return build_frame(2, 64)


@pytest.fixture
def write_config(tmp_path):
    def _write(text: str, name: str = "experiment.cfg"):
        path = tmp_path / name
        path.write_text(text)
        return path

    return _write
