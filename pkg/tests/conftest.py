import pytest

from bloc_lang.api.timeline import build_dataset
from bloc_lang.models.language import LanguageConfig, PauseFunction
from bloc_lang.models.timeline import Dataset
from tests import factories


@pytest.fixture
def f1_language() -> LanguageConfig:
    """Dot pauses at one minute."""
    return LanguageConfig(p1="60s", p2=PauseFunction.F1)


@pytest.fixture
def f2_language() -> LanguageConfig:
    """Log-scale pauses at one minute."""
    return LanguageConfig(p1="60s", p2=PauseFunction.F2)


@pytest.fixture
def nasa_dataset() -> Dataset:
    return build_dataset(factories.nasa_posts())


@pytest.fixture
def alice_dataset() -> Dataset:
    return build_dataset(factories.alice_posts(), graph=factories.alice_graph())


@pytest.fixture(scope="session")
def separable_dataset() -> Dataset:
    return factories.separable_bot_dataset()


@pytest.fixture(scope="session")
def campaign_dataset() -> Dataset:
    return factories.campaign_dataset()
