"""Shipped example networks."""
from importlib import resources

from .model import NetworkSpec, parse_network_spec

NAMES = ("fig3", "fig4")


def fixture_text(name: str) -> str:
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(NAMES)}")
    return resources.files(__package__).joinpath("fixtures", f"{name}.json").read_text()


def load_fixture(name: str) -> NetworkSpec:
    return parse_network_spec(fixture_text(name))
