import pytest

def pytest_addoption(parser):
    parser.addoption("--crabs-data", default = None, help = "CSV of the crab morphology data set.")
    parser.addoption("--golub-data", default = None, help = "CSV of the Golub leukemia expression data set.")

@pytest.fixture
def crabs_data(request):
    path = request.config.getoption("--crabs-data")
    if path is None:
        pytest.skip("pass --crabs-data to run")
    return path

@pytest.fixture
def golub_data(request):
    path = request.config.getoption("--golub-data")
    if path is None:
        pytest.skip("pass --golub-data to run")
    return path
