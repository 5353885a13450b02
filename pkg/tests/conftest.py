"""Shared fixtures: the two analytic surfaces used throughout the suite."""

import pytest

from heisencurve.characteristics import CharField
from heisencurve.hgroup import make_frame
from heisencurve.hsurface import GraphPatch, PolySurface, SurfaceHandle

POLY_X11 = PolySurface({(1, 0, 0): 1.0})
POLY_X12 = PolySurface({(0, 1, 0): 1.0})
POLY_T = PolySurface({(0, 0, 1): 1.0})
POLY_X11_PLUS_T = PolySurface({(1, 0, 0): 1.0, (0, 0, 1): 1.0})


def make_flat_patch():
    """f2 = x12, frame b1 = (0, 1): phi2hat vanishes identically."""
    return GraphPatch(make_frame((0.0, 1.0)), SurfaceHandle.from_polynomial(POLY_X12))


def make_affine_patch():
    """f2 = x11 + t, identity frame: phi2hat(eta, tau) = -tau / (1 - eta)."""
    return GraphPatch(make_frame((1.0, 0.0)),
                      SurfaceHandle.from_polynomial(POLY_X11_PLUS_T))


@pytest.fixture
def flat_patch():
    return make_flat_patch()


@pytest.fixture
def affine_patch():
    return make_affine_patch()


@pytest.fixture
def flat_field(flat_patch):
    return CharField(flat_patch)


@pytest.fixture
def affine_field(affine_patch):
    return CharField(affine_patch)
