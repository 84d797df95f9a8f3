import warnings

import pytest

from g2surf import catalog
from g2surf.surface import synthesize


def _synth(name, n=129, mode="analytic", **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return synthesize(catalog.PRESETS[name](), shape=(n, n), mode=mode, **kw)


@pytest.fixture(scope="session")
def grids():
    """Analytic 129 x 129 grids for every catalog map, built once."""
    return {name: _synth(name) for name in catalog.PRESETS}


@pytest.fixture(scope="session")
def fd_grids():
    return {name: _synth(name, 65, "fd") for name in catalog.PRESETS}
