import pytest

from netbend.graph import GeneratorConfig, build_toy_generator
from netbend.weights import random_init

WEIGHTS_SEED = 1
LATENT_SEED = 42

# sha256 of the PPM rendered from weight seed 1, latent seed 42, no patches;
# recorded from the first implementation run and cross-checked against a
# scripted straight-line forward pass in test_graph.py
BASELINE_PPM_SHA256 = "db93d317739efe8159246b6608d6599a56bc0655fd007df572c3c7aaa6147454"


@pytest.fixture(scope="session")
def config():
    return GeneratorConfig()


@pytest.fixture(scope="session")
def weight_table(config):
    return random_init(config, WEIGHTS_SEED)


@pytest.fixture(scope="session")
def graph(config, weight_table):
    return build_toy_generator(config, weight_table)
