"""Bundled demonstration systems."""

import json
from importlib import resources

from .nikishin import system_from_descriptor

__all__ = ['DEMOS', 'demo_path', 'demo_descriptor', 'load_demo']

DEMOS = {
    'm0': 'demo_m0.json',
    '01': 'demo_01.json',
    '10': 'demo_10.json',
    '11': 'demo_11.json',
    '02': 'demo_02.json',
}


def demo_path(name):
    return resources.files(__package__).joinpath('data', DEMOS[name])


def demo_descriptor(name):
    return json.loads(demo_path(name).read_text())


def load_demo(name):
    """Fresh :class:`MixedSystem` for a bundled demo."""
    return system_from_descriptor(demo_descriptor(name))
