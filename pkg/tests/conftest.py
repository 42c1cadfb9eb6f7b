import os

import numpy as np
import pytest

import reachctl as rc

SEED = int(os.environ.get("REACHCTL_SEED", "20260809"))


@pytest.fixture(scope="session")
def seed():
    return SEED


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(SEED)


# --- double integrator on a 2D simplex (one shared input direction) ---------

EX1_A = np.array([[0.0, 1.0], [0.0, 0.0]])
EX1_B = np.array([[0.0], [1.0]])
EX1_a = np.zeros(2)
EX1_VERTS = np.array([[-1.0, 1.0], [1.0, 0.0], [0.0, 0.0]])

# single affine law interpolating controls (-3/4, -1, 1) on the full simplex
EX1_AFFINE_K = np.array([[-2.0, -3.75]])
EX1_AFFINE_G = np.array([1.0])

EX1_PINS = [
    (1, np.array([0.5, 0.25]), np.array([-1.0])),
    (1, np.array([1.0, 0.0]), np.array([-1.0])),
    (1, np.array([0.0, 0.0]), np.array([-1.0])),
    (2, np.array([-1.0, 1.0]), np.array([-0.75])),
    (2, np.array([0.5, 0.25]), np.array([-1.0])),
    (2, np.array([0.0, 0.0]), np.array([1.0])),
]


@pytest.fixture(scope="session")
def ex1_system():
    return rc.affine_system(EX1_A, EX1_B, EX1_a)


@pytest.fixture(scope="session")
def ex1_simplex():
    return rc.build_simplex(EX1_VERTS)


@pytest.fixture(scope="session")
def ex1_instance(ex1_system, ex1_simplex):
    return rc.analyze(ex1_system, ex1_simplex)


@pytest.fixture(scope="session")
def ex1_pwa(ex1_instance):
    return rc.synthesize(ex1_instance, pinned_controls=EX1_PINS)


@pytest.fixture(scope="session")
def ex1_affine(ex1_simplex):
    from reachctl.synthesis import AffinePiece, PwaController

    piece = AffinePiece(simplex=ex1_simplex, K=EX1_AFFINE_K, g=EX1_AFFINE_G, index=1)
    return PwaController(pieces=[piece])


# --- two-input system on the unit 4D simplex, two vertex pairs share inputs -

EX2_A = np.array([
    [-3.0, -3.0, -3.0, 1.0],
    [0.0, 0.0, 0.0, -2.0],
    [-3.0, -3.0, -3.0, 1.0],
    [0.0, 0.0, 0.0, -2.0],
])
EX2_B = np.array([[0.0, -2.0], [0.0, 1.0], [-2.0, 0.0], [1.0, 0.0]])
EX2_a = np.ones(4)
EX2_VERTS = np.vstack([np.zeros(4), np.eye(4)])

EX2_VP = np.array([0.0, 0.75, 0.0, 0.0])
EX2_VPP = np.array([0.0, 0.0, 0.0, 0.8])

_E = np.eye(4)
EX2_PINS = [
    (1, EX2_VP, np.array([-1.0, -2.0])),
    (1, _E[0], np.array([-1.0, -2.0])),
    (1, _E[1], np.array([-1.0, -2.0])),
    (1, _E[2], np.array([-1.0, -2.0])),
    (1, _E[3], np.array([1.0, 0.0])),
    (2, EX2_VPP, np.array([-4.0, 0.6])),
    (2, _E[0], np.array([-5.0, -1.0])),
    (2, EX2_VP, np.array([-1.0, -2.0])),
    (2, _E[2], np.array([-5.0, -1.0])),
    (2, _E[3], np.array([-3.0, 1.0])),
    (3, np.zeros(4), np.array([0.0, 0.0])),
    (3, _E[0], np.array([-1.0, 0.0])),
    (3, EX2_VP, np.array([-1.0, -2.0])),
    (3, _E[2], np.array([0.0, -1.0])),
    (3, EX2_VPP, np.array([-4.0, 0.6])),
]

EX2_K1 = np.array([[0.0, 0.0, 0.0, 2.0], [0.0, 0.0, 0.0, 2.0]])
EX2_G1 = np.array([-1.0, -2.0])
EX2_K2 = np.array([[3.0, 9.33, 3.0, 5.0], [0.0, -1.33, 0.0, 2.0]])
EX2_G2 = np.array([-8.0, -1.0])
EX2_K3 = np.array([[-1.0, -1.33, 0.0, -5.0], [0.0, -2.66, -1.0, 0.75]])
EX2_G3 = np.array([0.0, 0.0])


@pytest.fixture(scope="session")
def ex2_system():
    return rc.affine_system(EX2_A, EX2_B, EX2_a)


@pytest.fixture(scope="session")
def ex2_simplex():
    return rc.build_simplex(EX2_VERTS)


@pytest.fixture(scope="session")
def ex2_instance(ex2_system, ex2_simplex):
    return rc.analyze(ex2_system, ex2_simplex)


@pytest.fixture(scope="session")
def ex2_pwa(ex2_instance):
    return rc.synthesize(ex2_instance, pinned_controls=EX2_PINS,
                         pinned_subdivision=[EX2_VP, EX2_VPP])


# --- 3D instance where the face vertices get independent cone vectors -------
# (two inputs versus a one-dimensional equilibrium face: affine route)

KLM_N = np.array([4.0, 3.0, 5.0])
KLM_A = np.outer(KLM_N, np.array([-1.0, -1.0, 0.0])) / 50.0
KLM_B = np.array([[-2.0, 1.0], [1.0, -3.0], [1.0, 1.0]])
KLM_a = KLM_N / 50.0


@pytest.fixture(scope="session")
def kappa_lt_mhat_instance():
    sys = rc.affine_system(KLM_A, KLM_B, KLM_a)
    S = rc.build_simplex(np.vstack([np.zeros(3), np.eye(3)]))
    return rc.analyze(sys, S)
