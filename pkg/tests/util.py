"""Shared generators for the test suite: random shears, volume-preserving
maps, and symplectic quadratic maps, all driven by seeded RNGs."""

import numpy as np

from qvpmaps import AffineMap, QuadMap, ShearData, build_shear
from qvpmaps.symplectic import standard_j


def random_unit(rng, n=3):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_shear_data(rng, scale=1.0):
    """ShearData with random direction and random symmetric P, P v = 0."""
    v = random_unit(rng)
    P0 = rng.standard_normal((3, 3)) * scale
    P0 = 0.5 * (P0 + P0.T)
    proj = np.eye(3) - np.outer(v, v)
    P = proj @ P0 @ proj
    if np.max(np.abs(P)) < 1e-3:  # avoid near-degenerate draws
        return random_shear_data(rng, scale)
    return ShearData(v, P)


def random_det1_matrix(rng, n=3, spread=1.0):
    """Random matrix scaled to determinant +1 (up to roundoff)."""
    while True:
        L = rng.standard_normal((n, n)) * spread
        d = np.linalg.det(L)
        if abs(d) > 1e-3:
            if d < 0:
                L[0] = -L[0]
                d = -d
            return L / d ** (1.0 / n)


def random_vp_map(rng, with_affine=True):
    """Random volume-preserving quadratic map of R^3 = affine(det 1) o shear."""
    sd = random_shear_data(rng)
    S = build_shear(sd)
    if not with_affine:
        return S, AffineMap.identity(3), sd
    L = random_det1_matrix(rng)
    b = rng.standard_normal(3)
    T = AffineMap(L, b)
    return S.after_affine(T), T, sd


def random_symmetric(rng, n):
    A = rng.standard_normal((n, n))
    return 0.5 * (A + A.T)


def random_linear_symplectic(rng, half_dim):
    """Product of elementary symplectic factors: exactly symplectic up to fp."""
    n = half_dim
    S1 = random_symmetric(rng, n)
    S2 = random_symmetric(rng, n)
    R = random_det1_matrix(rng, n) if n > 1 else np.array([[1.0 + rng.random()]])
    G1 = np.block([[np.eye(n), S1], [np.zeros((n, n)), np.eye(n)]])
    G2 = np.block([[np.eye(n), np.zeros((n, n))], [S2, np.eye(n)]])
    G3 = np.block(
        [[R, np.zeros((n, n))], [np.zeros((n, n)), np.linalg.inv(R).T]]
    )
    return G1 @ G2 @ G3


def random_gradient_shear(rng, half_dim, scale=1.0):
    """Shear (q + grad V(p), p) from a random fully symmetric cubic tensor."""
    n = half_dim
    T = rng.standard_normal((n, n, n)) * scale
    T = (
        T
        + T.transpose(0, 2, 1)
        + T.transpose(1, 0, 2)
        + T.transpose(1, 2, 0)
        + T.transpose(2, 0, 1)
        + T.transpose(2, 1, 0)
    ) / 6.0
    quad = np.zeros((2 * n, 2 * n, 2 * n))
    for i in range(n):
        quad[i, n:, n:] = T[i]
    return QuadMap.standard_form(quad)


def random_symplectic_quadmap(rng, half_dim):
    S = random_gradient_shear(rng, half_dim)
    G = random_linear_symplectic(rng, half_dim)
    b = rng.standard_normal(2 * half_dim)
    return S.after_affine(AffineMap(G, b)), G, b, S


def omega_defect(G, half_dim):
    J = standard_j(half_dim)
    return float(np.max(np.abs(G.T @ J @ G - J)))


def _perp_sym(rng, v, scale=1.0):
    P0 = random_symmetric(rng, 3) * scale
    proj = np.eye(3) - np.outer(v, v)
    P = proj @ P0 @ proj
    if np.max(np.abs(P)) < 1e-3:
        return _perp_sym(rng, v, scale)
    return P


def random_case_map(rng, dim_z, b_scale=1.0):
    """Volume-preserving map T o S with L forcing dim Z(v, L) = 3, 2 or 1."""
    while True:
        B = rng.standard_normal((3, 3))
        if abs(np.linalg.det(B)) > 0.3:
            break
    v = B[:, 0] / np.linalg.norm(B[:, 0])
    B[:, 0] = v
    if dim_z == 1:
        block = rng.standard_normal((2, 2))
        d2 = np.linalg.det(block)
        if abs(d2) < 0.1:
            return random_case_map(rng, dim_z, b_scale)
        Lt = np.zeros((3, 3))
        Lt[0, 0] = 1.0 / d2
        Lt[1:, 1:] = block
    elif dim_z == 2:
        block = rng.standard_normal((2, 2))
        if abs(block[1, 0]) < 0.2:  # keep Lv well off span{v}
            return random_case_map(rng, dim_z, b_scale)
        d2 = np.linalg.det(block)
        if abs(d2) < 0.1:
            return random_case_map(rng, dim_z, b_scale)
        Lt = np.zeros((3, 3))
        Lt[:2, :2] = block
        Lt[2, 2] = 1.0 / d2
    else:
        L = random_det1_matrix(rng)
        K = np.column_stack([v, L @ v, L @ L @ v])
        if np.linalg.svd(K, compute_uv=False)[-1] < 1e-3:
            return random_case_map(rng, dim_z, b_scale)
        P = _perp_sym(rng, v)
        sd = ShearData(v, P)
        b = rng.standard_normal(3) * b_scale
        return build_shear(sd).after_affine(AffineMap(L, b)), L, b, sd
    Bi = np.linalg.inv(B)
    L = B @ Lt @ Bi
    L = L / np.cbrt(np.linalg.det(L))  # exact det drift from the similarity
    P = _perp_sym(rng, v)
    sd = ShearData(v, P)
    b = rng.standard_normal(3) * b_scale
    return build_shear(sd).after_affine(AffineMap(L, b)), L, b, sd
