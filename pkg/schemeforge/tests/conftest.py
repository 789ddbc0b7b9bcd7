# schemeforge/tests/conftest.py

# Shared fixtures and hypothesis profiles for the schemeforge test suite.

import json
import os

import pytest
from hypothesis import HealthCheck, settings

from schemeforge.problem_spec import bundled_spec_path, load_problem_spec, parse_problem_spec

settings.register_profile("dev", max_examples=25, deadline=None)
settings.register_profile(
    "ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))

BUNDLED_SPECS = (
    "allen_cahn_1d",
    "allen_cahn_2d",
    "advection_2d",
    "advection_2d_workstation",
    "advection_2d_server",
    "lpbf",
)


@pytest.fixture
def spec_document():
    """Return a loader for the raw JSON of a bundled spec, as a mutable dict."""

    def load(name: str) -> dict:
        return json.loads(bundled_spec_path(name).read_text(encoding="utf-8"))

    return load


@pytest.fixture
def make_spec(spec_document):
    """Return a factory that patches a bundled document and parses it."""

    def make(name: str, patch=None):
        document = spec_document(name)
        if patch is not None:
            patch(document)
        return parse_problem_spec(json.dumps(document))

    return make


@pytest.fixture
def lpbf_spec():
    return load_problem_spec(bundled_spec_path("lpbf"))


@pytest.fixture
def allen_cahn_1d_spec():
    return load_problem_spec(bundled_spec_path("allen_cahn_1d"))


@pytest.fixture
def allen_cahn_2d_spec():
    return load_problem_spec(bundled_spec_path("allen_cahn_2d"))


@pytest.fixture
def advection_spec():
    return load_problem_spec(bundled_spec_path("advection_2d"))
