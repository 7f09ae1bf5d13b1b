import os
import sys

import pytest

project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from tests.helpers import make_itinerary  # noqa: E402


@pytest.fixture
def itinerary():
    return make_itinerary()


@pytest.fixture
def itineraries():
    return [make_itinerary(hotel=i) for i in range(10)]
