"""
Equilibrated bending moments on Hermite frame meshes.

Each element's moment is a quadratic M̂(x) = M0 + M1 x + q x²/2 with
M̂″ = q. The two free coefficients are read off the element's FE nodal
forces r_e = ∫ S N″ - f_e:

    M1 = r_e[w_a]        M0 = -r_e[θ_a]

which also yields M̂′(h) = -r_e[w_b] and M̂(h) = r_e[θ_b]. Element
equilibrium is exact by construction; joint equilibrium holds up to the
solver residual, since Σ_e T_eᵀ r_e - F = K u_h - f.
"""

import logging

import numpy as np
from numpy.polynomial import polynomial as P

from sensbounds.forms import (
    BeamLoad,
    ResolvedBeamLoad,
    consistent_load,
    curvature_polynomial,
    hermite_second,
    hermite_values,
)
from sensbounds.mesh import Mesh1D, gauss_rule
from sensbounds.parameters import ModelKind

from .StressField import Coupling, EquilibriumError, StressField

logger = logging.getLogger(__name__)

NODAL_TOL = 1e-9


def _resolve(mesh: Mesh1D, load: BeamLoad | ResolvedBeamLoad) -> ResolvedBeamLoad:
    return load.resolve(mesh) if isinstance(load, BeamLoad) else load


def beam_fe_stress(
    mesh: Mesh1D, coeffs: np.ndarray, prime: bool = False
) -> StressField:
    """
    The FE moment EI w_h″ (or EI' w_h″ with ``prime``) of a coefficient vector.
    """
    polys = []
    for el in mesh.elements:
        profile = mesh.members[el.member].stiffness_profile
        ei, ei_prime = profile.local(el.s_a)
        curvature = curvature_polynomial(el.gather(coeffs), el.length)
        polys.append(P.polymul(ei_prime if prime else ei, curvature))
    width = max(len(p) for p in polys)
    flux = np.zeros((len(polys), width))
    for e, p in enumerate(polys):
        flux[e, : len(p)] = p
    return StressField(ModelKind.FRAME, flux)


def element_actions(mesh: Mesh1D, field: StressField) -> np.ndarray:
    """(n_elements, 4) local nodal forces ∫ M N_i″ of a moment field."""
    width = field.flux.shape[1]
    rule = gauss_rule(max(2, (width + 2) // 2), dim=1)
    out = np.empty((len(mesh.elements), 4))
    for e, el in enumerate(mesh.elements):
        x, w = rule.on_interval(0.0, el.length)
        m = P.polyval(x, field.flux[e])
        out[e] = hermite_second(x, el.length).T @ (w * m)
    return out


def nodal_defect(
    mesh: Mesh1D, field: StressField, load: BeamLoad | ResolvedBeamLoad
) -> tuple[float, float]:
    """
    Joint imbalance of ``field`` against ``load``:
    (‖Σ Tᵀ(∫M N″ - f_e) - F‖∞, scale).
    The scale is the larger of the load and the element forces.
    """
    resolved = _resolve(mesh, load)
    actions = element_actions(mesh, field)
    total = np.zeros(mesh.n_free)
    for e, el in enumerate(mesh.elements):
        if el.dofs.size:
            local = actions[e] - consistent_load(resolved.q[e], el.length)
            np.add.at(total, el.dofs, el.transform.T @ local)
    total -= resolved.nodal
    scale = max(resolved.scale, float(np.max(np.abs(actions), initial=0.0)), 1e-300)
    return float(np.max(np.abs(total), initial=0.0)), scale


def recover_beam_moments(
    mesh: Mesh1D,
    fe_stress: StressField | np.ndarray,
    load: BeamLoad | ResolvedBeamLoad,
    tol: float = NODAL_TOL,
) -> StressField:
    """
    An elementwise-quadratic moment field in equilibrium with ``load``.

    ``fe_stress`` is the FE moment field whose nodal forces drive the
    recovery, or a coefficient vector (its EI w_h″ is used).

    Raises:
        EquilibriumError: the FE field is out of joint balance by more than
            ``tol`` relative to the load scale.
    """
    if isinstance(fe_stress, np.ndarray):
        fe_stress = beam_fe_stress(mesh, fe_stress)
    resolved = _resolve(mesh, load)

    defect, scale = nodal_defect(mesh, fe_stress, resolved)
    if defect > tol * scale:
        raise EquilibriumError(
            f"FE moments are out of joint balance: {defect:.3e} (scale {scale:.3e})",
            defect=defect,
            scale=scale,
        )

    actions = element_actions(mesh, fe_stress)
    flux = np.zeros((len(mesh.elements), 3))
    for e, el in enumerate(mesh.elements):
        r = actions[e] - consistent_load(resolved.q[e], el.length)
        flux[e] = (-r[1], r[0], 0.5 * resolved.q[e])
    logger.debug("Recovered moments on %d elements, defect %.2e", len(flux), defect)
    return StressField(ModelKind.FRAME, flux)


# ---------------------------------------------------------------------- #
# Verification with enriched test functions
# ---------------------------------------------------------------------- #


def _bubbles(x: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Values and second derivatives of t²(1-t)² and t³(1-t)², t = x/h."""
    t = x / h
    b0 = P.polypow([0.0, 1.0, -1.0], 2)
    b1 = P.polymul(b0, [0.0, 1.0])
    values = np.column_stack([P.polyval(t, b0), P.polyval(t, b1)])
    second = np.column_stack(
        [P.polyval(t, P.polyder(b0, 2)), P.polyval(t, P.polyder(b1, 2))]
    ) / (h * h)
    return values, second


def beam_equilibrium_defect(
    mesh: Mesh1D,
    field: StressField,
    load: BeamLoad | ResolvedBeamLoad,
    n_tests: int = 16,
    seed: int = 0,
) -> float:
    """
    Largest relative imbalance Σ_e(∫M v″ - ∫q v) - Fᵀv over random test
    functions v made of Hermite nodal parts plus quintic element bubbles.

    Each imbalance is divided by the sum of the absolute values of its
    terms, so 0 is exact equilibrium and 1 is no cancellation at all.
    """
    resolved = _resolve(mesh, load)
    rng = np.random.default_rng(seed)
    width = field.flux.shape[1]
    rule = gauss_rule(max(4, (width + 6) // 2), dim=1)

    worst = 0.0
    for _ in range(n_tests):
        v = rng.uniform(-1.0, 1.0, mesh.n_free)
        bubble = rng.uniform(-1.0, 1.0, (len(mesh.elements), 2))
        nodal = float(resolved.nodal @ v)
        total, magnitude = -nodal, abs(nodal)
        for e, el in enumerate(mesh.elements):
            h = el.length
            x, w = rule.on_interval(0.0, h)
            d = el.gather(v) if el.dofs.size else np.zeros(4)
            b_val, b_sec = _bubbles(x, h)
            v_val = hermite_values(x, h) @ d + b_val @ bubble[e]
            v_sec = hermite_second(x, h) @ d + b_sec @ bubble[e]
            m = P.polyval(x, field.flux[e])
            bending = float(w @ (m * v_sec))
            loading = float(w @ (resolved.q[e] * v_val))
            total += bending - loading
            magnitude += abs(bending) + abs(loading)
        if magnitude > 0.0:
            worst = max(worst, abs(total) / magnitude)
    return worst


# ---------------------------------------------------------------------- #
# Energy products
# ---------------------------------------------------------------------- #


def beam_energy_parts(
    mesh: Mesh1D,
    coupling: Coupling,
    p: tuple[StressField, StressField],
    d: tuple[StressField, StressField],
) -> tuple[float, float, float]:
    """
    Parts of the coupled complementary product of two transformed pairs.

    ``p`` and ``d`` hold (s₁, s₂) fields; they are mapped pointwise to
    residual pairs with the local λ and integrated with 1/EI weights using
    pole-adapted Gauss rules. Returns (∫p₁d₁/EI, ∫p₂d₂/EI,
    ∫λ(p₁d₂ + p₂d₁)/EI).
    """
    width = max(f.flux.shape[1] for f in (*p, *d))
    first = second = cross = 0.0
    for e, el in enumerate(mesh.elements):
        profile = mesh.members[el.member].stiffness_profile
        order = profile.rule_order(el.s_a, el.s_b, 2 * (width - 1), coupling.xi)
        x, w = gauss_rule(order, dim=1).on_interval(0.0, el.length)
        lam = coupling.beam_lambda(e, x)
        inv = 1.0 / (1.0 - lam * lam)
        weight = w / profile.value(el.s_a + x)

        def residual(pair):
            s1 = P.polyval(x, pair[0].flux[e])
            s2 = P.polyval(x, pair[1].flux[e])
            return (s1 - lam * s2) * inv, (s2 - lam * s1) * inv

        p1, p2 = residual(p)
        d1, d2 = (p1, p2) if d is p else residual(d)
        first += float(weight @ (p1 * d1))
        second += float(weight @ (p2 * d2))
        cross += float(weight @ (lam * (p1 * d2 + p2 * d1)))
    return first, second, cross
