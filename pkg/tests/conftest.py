import pytest

from nlqm import create_app
from nlqm.params import ModelParams


@pytest.fixture
def app(tmp_path):
    app = create_app({"TESTING": True, "OUT_DIR": str(tmp_path / "out"), "LOG_LEVEL": "WARNING"})
    yield app


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def worked_params():
    """b=1, mu=-1/2, N=2: the fixed point with delta0 = 1/2 and c = 1."""
    return ModelParams(a=1.0, b=1.0, mu=-0.5, lam=0.3, n_norm=2.0)


@pytest.fixture
def energies():
    return [0.0, 0.7, 1.3, 2.1]
