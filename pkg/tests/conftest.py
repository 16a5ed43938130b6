import pytest

from limid import _backend


@pytest.fixture(params=_backend.available())
def backend(request):
    previous = _backend.use(request.param)
    yield request.param
    _backend.use(previous)
