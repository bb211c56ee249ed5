"""Decide the bundle of an input pair and build the reducing group element.

Stage 1 classifies the A-part by rank and cosquare eigenstructure and moves
it to its canonical form.  Stage 2 reduces the transported B-part by the
stabilizer subgroup of the canonical A to the catalogued B-shape, extracting
the continuous parameters.  Every reducer is verified by re-application; a
failed verification raises rather than returning a wrong answer.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from ._takagi import takagi
from .core import (
    GroupElement,
    Mat2,
    PairAB,
    SymMat2,
    ValidationError,
    apply_action,
    apply_psi2,
    cosquare,
    group_compose,
    max_norm,
    pair_distance,
)
from .normal_forms import (
    ALabel,
    BLabel,
    BShape,
    BundleLabel,
    BundleParams,
    canonicalize_params,
    representative,
    representative_A,
)

__all__ = [
    "ToleranceConfig",
    "Classification",
    "AmbiguityError",
    "ClassificationFailureError",
    "classify_A",
    "classify_B",
    "stabilizer_reduce_B",
    "classify_pair",
]

_J = np.diag([1.0, -1.0]).astype(complex)
_S12 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_T = (1.0 / math.sqrt(2.0)) * np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex)


@dataclass(frozen=True)
class ToleranceConfig:
    rank_tol: float = 1e-6
    eig_cluster_tol: float = 1e-6
    unit_circle_tol: float = 1e-12

    def __post_init__(self):
        for name in ("rank_tol", "eig_cluster_tol", "unit_circle_tol"):
            v = getattr(self, name)
            if not (0.0 < v <= 1e-2):
                raise ValidationError(f"{name} must lie in (0, 1e-2]")


@dataclass(frozen=True)
class Classification:
    label: BundleLabel
    params: BundleParams
    reducer: GroupElement
    residual: float
    ambiguous: tuple = ()

    def to_json(self) -> dict:
        return {
            "label": str(self.label),
            "params": self.params.to_json(),
            "reducer": self.reducer.to_json(),
            "residual": self.residual,
            "ambiguous": list(self.ambiguous),
        }


class AmbiguityError(ValueError):
    """Two classification branches fall within tolerance of each other."""

    def __init__(self, candidates, message="ambiguous classification"):
        super().__init__(f"{message}: {candidates}")
        self.candidates = tuple(candidates)


class ClassificationFailureError(RuntimeError):
    """No catalogued shape is reachable within tolerance (taxonomy bug or a
    genuine off-catalog input)."""


def _near(q, thresh, amb, note):
    """Decide q <= thresh, annotating when q sits suspiciously close."""
    if 0.01 * thresh < q < 100.0 * thresh:
        amb.append(note)
    return q <= thresh


# ---------------------------------------------------------------------------
# stage 1: the A-part

def classify_A(A: Mat2, tol: ToleranceConfig | None = None):
    """Returns (a_label, params, reducer, residual, ambiguous)."""
    tol = tol or ToleranceConfig()
    arr = A.array
    amb: list[str] = []
    U, sv, Vh = np.linalg.svd(arr)
    scale = sv[0]
    if _near(scale, tol.rank_tol, amb, "A near zero"):
        g = GroupElement(1.0, Mat2.identity())
        return ALabel.ZERO, BundleParams(), g, float(scale), tuple(amb)
    if _near(sv[1] / scale, tol.rank_tol, amb, "A near rank-1 boundary"):
        label, g = _reduce_rank1_A(U, sv, Vh, tol, amb)
    else:
        label, params, g = _reduce_rank2_A(arr, tol, amb)
        res = max_norm(
            (g.c * g.P.array.conj().T @ arr @ g.P.array)
            - representative_A(label, params).array
        )
        return label, params, g, float(res), tuple(amb)
    res = max_norm(
        (g.c * g.P.array.conj().T @ arr @ g.P.array)
        - representative_A(label, BundleParams()).array
    )
    return label, BundleParams(), g, float(res), tuple(amb)


def _unit(v):
    return v / np.linalg.norm(v)


def _reduce_rank1_A(U, sv, Vh, tol, amb):
    s0 = sv[0]
    u = U[:, 0]
    v = Vh[0].conj()  # A ~ s0 * outer(u, conj(v)) = s0 u v^H
    align = abs(np.vdot(v, u))
    if _near(1.0 - align, tol.eig_cluster_tol, amb, "rank-1 A near the 1(+)0 / nilpotent boundary"):
        # A = s0 e^{i psi} v v^H
        psi = cmath.phase(np.vdot(v, u))
        vperp = np.array([-v[1].conjugate(), v[0].conjugate()])
        P = np.column_stack([v / math.sqrt(s0), _unit(vperp)])
        return ALabel.ONE_ZERO, GroupElement(cmath.exp(-1j * psi), Mat2(P))
    # nilpotent: send u -> e1 direction, v -> e2 direction
    p1 = _unit(u - v * np.vdot(v, u))        # perpendicular to v
    p2 = _unit(v - u * np.vdot(u, v))        # perpendicular to u
    z = s0 * (p1.conj() @ u) * (v.conj() @ p2)
    P = np.column_stack([p1 / abs(z), p2])
    return ALabel.NILPOTENT, GroupElement(z.conjugate() / abs(z), Mat2(P))


def _reduce_rank2_A(arr, tol, amb):
    C = cosquare(Mat2(arr)).array
    lam = np.linalg.eigvals(C)
    lam_m = lam.mean()
    D = C - lam_m * np.eye(2)
    sd = np.linalg.svd(D, compute_uv=False)
    n_scale = max(1.0, abs(lam_m))
    if _near(sd[0], tol.eig_cluster_tol * n_scale, amb, "cosquare near scalar"):
        return _reduce_hermitian_like(arr, lam_m, tol, amb)
    if _near(sd[1], tol.eig_cluster_tol * max(1.0, sd[0]), amb, "cosquare near defective"):
        if abs(abs(lam_m) - 1.0) > 100 * tol.eig_cluster_tol:
            raise ClassificationFailureError(
                f"defective cosquare with non-unimodular eigenvalue {lam_m!r}"
            )
        return _reduce_jordan_A(arr, C, lam_m)
    # two separated eigenvalues; pair structure: both unimodular, or a
    # conjugate-reciprocal pair
    m0, m1 = abs(lam[0]), abs(lam[1])
    unimodular = max(abs(m0 - 1.0), abs(m1 - 1.0))
    if _near(unimodular, tol.eig_cluster_tol, amb, "cosquare eigenvalues near the unit circle"):
        return _reduce_one_theta_A(arr, C, lam)
    if abs(m0 * m1 - 1.0) > 1e-6 * max(1.0, m0 * m1):
        raise ClassificationFailureError(
            f"cosquare spectrum {lam!r} violates the reciprocal pair structure"
        )
    return _reduce_tau_A(arr, C, lam)


def _eigvec(M, lam):
    X = M - lam * np.eye(2)
    _, _, vh = np.linalg.svd(X)
    return vh[-1].conj()


def _reduce_one_theta_A(arr, C, lam):
    s0 = _eigvec(C, lam[0])
    s1 = _eigvec(C, lam[1])
    for order in ((s0, s1), (s1, s0)):
        S = np.column_stack(order)
        N = S.conj().T @ arr @ S
        c = cmath.exp(-1j * cmath.phase(N[0, 0]))
        theta = cmath.phase(c * N[1, 1])
        if 0.0 < theta < math.pi:
            P = S @ np.diag([1.0 / math.sqrt(abs(N[0, 0])),
                             1.0 / math.sqrt(abs(N[1, 1]))])
            return (ALabel.ONE_THETA, BundleParams(theta=theta),
                    GroupElement(c, Mat2(P)))
    raise ClassificationFailureError("no eigenvalue order yields theta in (0, pi)")


def _reduce_tau_A(arr, C, lam):
    lam = sorted(lam, key=abs)
    tau = abs(lam[0])
    s0 = _eigvec(C, lam[0])
    s1 = _eigvec(C, lam[1])
    S = np.column_stack([s0, s1])
    c = cmath.exp(-0.5j * cmath.phase(lam[0]))
    for cc in (c, -c):
        N = cc * S.conj().T @ arr @ S
        m = N[0, 1]
        if abs(m) < 1e-300:
            continue
        # split the scale evenly over both columns to keep P well conditioned
        r = cmath.sqrt(m)
        P = S @ np.diag([1.0 / r.conjugate(), 1.0 / r])
        out = cc * P.conj().T @ arr @ P
        if abs(out[0, 1] - 1.0) < 0.5:
            return (ALabel.TAU_FORM, BundleParams(tau=float(tau)),
                    GroupElement(cc, Mat2(P)))
    raise ClassificationFailureError("tau-form reduction failed")


def _reduce_hermitian_like(arr, lam_m, tol, amb):
    if abs(abs(lam_m) - 1.0) > 100 * tol.eig_cluster_tol:
        raise ClassificationFailureError(
            f"scalar cosquare with non-unimodular eigenvalue {lam_m!r}"
        )
    c0 = cmath.exp(-0.5j * cmath.phase(lam_m))
    H = c0 * arr
    H = 0.5 * (H + H.conj().T)
    d, Uh = np.linalg.eigh(H)  # ascending
    if _near(min(abs(d)), tol.eig_cluster_tol * max(abs(d)), amb,
             "Hermitian part near singular"):
        raise ClassificationFailureError("rank-2 A with near-singular Hermitian part")
    if d[0] > 0:
        P = Uh @ np.diag(1.0 / np.sqrt(d))
        return ALabel.IDENTITY, BundleParams(), GroupElement(c0, Mat2(P))
    if d[1] < 0:
        P = Uh @ np.diag(1.0 / np.sqrt(-d))
        return ALabel.IDENTITY, BundleParams(), GroupElement(-c0, Mat2(P))
    # indefinite: order (positive, negative) for diag(1, -1)
    P = np.column_stack([Uh[:, 1] / math.sqrt(d[1]), Uh[:, 0] / math.sqrt(-d[0])])
    return ALabel.ONE_PLUS_MINUS, BundleParams(), GroupElement(c0, Mat2(P))


def _reduce_jordan_A(arr, C, lam_m):
    # bring the cosquare to the unipotent Jordan form of [[0,1],[1,i]]
    lam = lam_m / abs(lam_m)
    c = cmath.exp(-0.5j * cmath.phase(lam))
    Cn = c * c * C
    M = Cn - np.eye(2)
    # Jordan chain: M p2 = 2i p1, M p1 ~ 0
    Us, ss, Vhs = np.linalg.svd(M)
    p1 = Us[:, 0] * (ss[0] / 2j)
    p2 = Vhs[0].conj()
    P0 = np.column_stack([p1, p2])
    for cc in (c, -c):
        Mt = cc * P0.conj().T @ arr @ P0
        t = Mt[0, 1]
        if abs(t.real) < 1e-12 * max(1.0, abs(t)):
            continue
        if t.real < 0:
            continue
        tr = t.real
        q = Mt[1, 1].real
        a_scale = 1.0 / math.sqrt(tr)
        b_corr = -a_scale * q / (2.0 * tr)
        K = np.array([[a_scale, b_corr], [0.0, a_scale]], dtype=complex)
        P = P0 @ K
        out = cc * P.conj().T @ arr @ P
        if max_norm(out - np.array([[0, 1], [1, 1j]])) < 0.1:
            return ALabel.JORDAN_I, BundleParams(), GroupElement(cc, Mat2(P))
    raise ClassificationFailureError("Jordan-type reduction failed")


# ---------------------------------------------------------------------------
# the B-part alone (T-congruence rank normal form)

def classify_B(B: SymMat2, tol: ToleranceConfig | None = None):
    """Returns (b_label, reducer P, residual, ambiguous)."""
    tol = tol or ToleranceConfig()
    amb: list[str] = []
    arr = B.array
    s, U = takagi(arr)
    scale = s[0]
    if _near(scale, tol.rank_tol, amb, "B near zero"):
        return BLabel.ZERO, Mat2.identity(), float(scale), tuple(amb)
    if _near(s[1] / scale, tol.rank_tol, amb, "B near rank-1 boundary"):
        rank = 1
        P = np.conj(U) @ np.diag([1.0 / math.sqrt(s[0]), 1.0])
    else:
        rank = 2
        P = np.conj(U) @ np.diag(1.0 / np.sqrt(s))
    target = np.diag([1.0, 1.0 if rank == 2 else 0.0])
    res = max_norm(P.T @ arr @ P - target)
    label = BLabel.RANK2 if rank == 2 else BLabel.RANK1
    return label, Mat2(P), float(res), tuple(amb)


# ---------------------------------------------------------------------------
# stage 2: stabilizer reduction of the transported B

def _zero_flags(B: SymMat2, zt: float):
    return (abs(B.a) > zt, abs(B.b) > zt, abs(B.d) > zt)


def _phase_sqrt(z: complex) -> complex:
    """A unit-modulus x with x^2 * z real positive (z != 0)."""
    return cmath.exp(-0.5j * cmath.phase(z))


def stabilizer_reduce_B(a_label: ALabel, B: SymMat2,
                        tol: ToleranceConfig | None = None,
                        a_params: BundleParams | None = None):
    """Reduce B by the stabilizer of the canonical A-form.

    Returns (b_shape, params: BundleParams, g_stab: GroupElement, ambiguous).
    The returned element satisfies c P* A0 P = A_target where A_target is A0
    itself except for the cells displayed in the anti-diagonal representative
    of the 1(+)-1 class.
    """
    tol = tol or ToleranceConfig()
    a_params = a_params or BundleParams()
    amb: list[str] = []
    dispatch = {
        ALabel.ZERO: _reduce_B_zero,
        ALabel.ONE_ZERO: _reduce_B_one_zero,
        ALabel.IDENTITY: _reduce_B_identity,
        ALabel.ONE_PLUS_MINUS: _reduce_B_one_plus_minus,
        ALabel.ONE_THETA: _reduce_B_one_theta,
        ALabel.TAU_FORM: _reduce_B_tau,
        ALabel.NILPOTENT: _reduce_B_nilpotent,
        ALabel.JORDAN_I: _reduce_B_jordan,
    }
    shape, params, g = dispatch[a_label](B, tol, amb)
    # stabilizer membership / A-transport check
    A0 = representative_A(a_label, a_params).array
    swap_rep = shape in (BShape.SWAP_ONE_DE_ITHETA, BShape.SWAP_OFF_DIAG_B_ONE,
                         BShape.SWAP_ONE_ZERO)
    A_target = representative_A(a_label, a_params, swap_rep=swap_rep).array
    defect = max_norm(g.c * g.P.array.conj().T @ A0 @ g.P.array - A_target)
    if defect > 1e-7 * max(1.0, max_norm(A0)):
        raise ClassificationFailureError(
            f"stage-2 reducer leaves the stabilizer of {a_label} (defect {defect:.3e})"
        )
    return shape, params, g, tuple(amb)


def _reduce_B_zero(B, tol, amb):
    label, P, _, amb2 = classify_B(B, tol)
    amb.extend(amb2)
    shape = {BLabel.ZERO: BShape.ZERO, BLabel.RANK1: BShape.RANK1,
             BLabel.RANK2: BShape.RANK2}[label]
    return shape, BundleParams(), GroupElement(1.0, P)


def _reduce_B_one_zero(B, tol, amb):
    scale = max(max_norm(B), 1e-300)
    zt = tol.rank_tol * scale
    b11, b12, b22 = B.a, B.b, B.d
    if abs(b22) > zt:
        v = 1.0 / cmath.sqrt(b22)
        w = (b11 * b22 - b12 * b12) / b22  # det B / b22
        if _near(abs(w), zt, amb, "B(1,1) residual near zero over 1(+)0"):
            P = np.array([[1.0, 0.0], [-b12 / b22, v]], dtype=complex)
            return BShape.ZERO_ONE, BundleParams(), GroupElement(1.0, Mat2(P))
        x = _phase_sqrt(w)
        P = np.array([[x, 0.0], [-x * b12 / b22, v]], dtype=complex)
        return BShape.DIAG_A_ONE, BundleParams(a=abs(w)), GroupElement(1.0, Mat2(P))
    if abs(b12) > zt:
        P = np.array([[1.0, 0.0], [-b11 / (2 * b12), 1.0 / b12]], dtype=complex)
        return BShape.SWAP, BundleParams(), GroupElement(1.0, Mat2(P))
    if abs(b11) > zt:
        x = _phase_sqrt(b11)
        P = np.array([[x, 0.0], [0.0, 1.0]], dtype=complex)
        return BShape.DIAG_A0, BundleParams(a=abs(b11)), GroupElement(1.0, Mat2(P))
    return BShape.ZERO, BundleParams(), GroupElement(1.0, Mat2.identity())


def _reduce_B_identity(B, tol, amb):
    arr = B.array
    s, U = takagi(arr)  # descending
    P = np.conj(U) @ _S12  # ascending order
    scale = max(s[0], 1e-300)
    g = GroupElement(1.0, Mat2(P))
    s_lo, s_hi = s[1], s[0]
    if _near(s_hi, tol.rank_tol * max(1.0, scale), amb, "B near zero over I2"):
        return BShape.ZERO, BundleParams(), g
    if _near(s_lo / s_hi, tol.rank_tol, amb, "B near rank-1 over I2"):
        return BShape.ZERO_D, BundleParams(d=float(s_hi)), g
    if _near((s_hi - s_lo) / s_hi, tol.eig_cluster_tol, amb,
             "Takagi values near coincidence over I2"):
        return BShape.D_IDENTITY, BundleParams(d=float(0.5 * (s_lo + s_hi))), g
    return BShape.DIAG_AD, BundleParams(a=float(s_lo), d=float(s_hi)), g


def _reduce_B_one_theta(B, tol, amb):
    zt = tol.rank_tol * max(max_norm(B), 1e-300)
    f11, f12, f22 = _zero_flags(B, zt)
    b11, b12, b22 = B.a, B.b, B.d
    phi1 = phi2 = 0.0
    shape, params = None, BundleParams()
    if f11 and f12 and f22:
        phi1 = -0.5 * cmath.phase(b11)
        phi2 = -0.5 * cmath.phase(b22)
        zs = b12 * cmath.exp(1j * (phi1 + phi2))
        # half-angle branches realize the sign identification; canonicalize
        if not (0.0 <= cmath.phase(zs) < math.pi):
            phi1 += math.pi
            zs = -zs
        shape = BShape.FULL_HERMITIAN_LIKE
        params = BundleParams(a=abs(b11), d=abs(b22), zeta_star=zs)
    elif f11 and f12:
        phi1 = -0.5 * cmath.phase(b11)
        phi2 = -cmath.phase(b12) - phi1
        shape, params = BShape.A_PLUS_OFF_DIAG, BundleParams(a=abs(b11), b=abs(b12))
    elif f12 and f22:
        phi2 = -0.5 * cmath.phase(b22)
        phi1 = -cmath.phase(b12) - phi2
        shape, params = BShape.OFF_DIAG_PLUS_D, BundleParams(b=abs(b12), d=abs(b22))
    elif f11 and f22:
        phi1 = -0.5 * cmath.phase(b11)
        phi2 = -0.5 * cmath.phase(b22)
        shape, params = BShape.DIAG_AD, BundleParams(a=abs(b11), d=abs(b22))
    elif f12:
        phi1 = -cmath.phase(b12)
        shape, params = BShape.ANTI_DIAG, BundleParams(b=abs(b12))
    elif f11:
        phi1 = -0.5 * cmath.phase(b11)
        shape, params = BShape.DIAG_A0, BundleParams(a=abs(b11))
    elif f22:
        phi2 = -0.5 * cmath.phase(b22)
        shape, params = BShape.ZERO_D, BundleParams(d=abs(b22))
    else:
        shape = BShape.ZERO
    P = np.diag([cmath.exp(1j * phi1), cmath.exp(1j * phi2)])
    return shape, params, GroupElement(1.0, Mat2(P))


def _reduce_B_tau(B, tol, amb):
    zt = tol.rank_tol * max(max_norm(B), 1e-300)
    f11, f12, f22 = _zero_flags(B, zt)
    b11, b12, b22 = B.a, B.b, B.d
    c = 1.0

    def elem(p, c):
        return GroupElement(c, Mat2(np.diag([p, c / p.conjugate()])))

    if f11 and f12:
        rho = abs(b11) ** -0.5
        psi = -0.5 * cmath.phase(b12)
        phi_raw = cmath.phase(b11) - cmath.phase(b12)
        phi = math.fmod(phi_raw, math.pi)
        if phi < 0.0:
            phi += math.pi
        halfturns = round((phi_raw - phi) / math.pi)
        if halfturns % 2:
            psi += 0.5 * math.pi
            c = -1.0
        p = rho * cmath.exp(1j * psi)
        g = elem(p, c)
        Bp = apply_psi2(g.P, B)
        return (BShape.PHASE_FORM,
                BundleParams(phi=phi, b=abs(b12), zeta=complex(Bp.d)), g)
    if f11:
        p = 1.0 / cmath.sqrt(b11)
        g = elem(p, 1.0)
        Bp = apply_psi2(g.P, B)
        return BShape.ONE_ZETA, BundleParams(zeta=complex(Bp.d)), g
    if f22 and f12:
        rho = abs(b22) ** 0.5
        psi = -0.5 * cmath.phase(b12)
        phi_raw = cmath.phase(b22) - cmath.phase(b12)
        phi = math.fmod(phi_raw, math.pi)
        if phi < 0.0:
            phi += math.pi
        halfturns = round((phi_raw - phi) / math.pi)
        if halfturns % 2:
            psi += 0.5 * math.pi
            c = -1.0
        p = rho * cmath.exp(1j * psi)
        return (BShape.OFF_DIAG_PHASE, BundleParams(b=abs(b12), phi=phi),
                elem(p, c))
    if f22:
        rho = abs(b22) ** 0.5
        psi = -0.5 * cmath.phase(b22)
        return BShape.ZERO_ONE, BundleParams(), elem(rho * cmath.exp(1j * psi), 1.0)
    if f12:
        psi = -0.5 * cmath.phase(b12)
        return BShape.ANTI_DIAG, BundleParams(b=abs(b12)), elem(cmath.exp(1j * psi), 1.0)
    return BShape.ZERO, BundleParams(), GroupElement(1.0, Mat2.identity())


def _reduce_B_nilpotent(B, tol, amb):
    zt = tol.rank_tol * max(max_norm(B), 1e-300)
    f11, f12, f22 = _zero_flags(B, zt)
    b11, b12, b22 = B.a, B.b, B.d
    a1 = cmath.phase(b11) if f11 else 0.0
    a2 = cmath.phase(b12) if f12 else 0.0
    a3 = cmath.phase(b22) if f22 else 0.0

    def elem(rho, psi, gamma):
        c = cmath.exp(1j * gamma)
        x = rho * cmath.exp(1j * psi)
        return GroupElement(c, Mat2(np.diag([x, 1.0 / (c * x.conjugate())])))

    if f22 and f12:
        rho = abs(b22) ** 0.5
        gamma = a3 - a2
        psi = gamma - 0.5 * a3
        g = elem(rho, psi, gamma)
        Bp = apply_psi2(g.P, B)
        if f11:
            return (BShape.ZETA_B_ONE,
                    BundleParams(zeta_star=complex(Bp.a), b=abs(b12)), g)
        return BShape.OFF_DIAG_B_ONE, BundleParams(b=abs(b12)), g
    if f11 and f12:  # b22 = 0
        x = 1.0 / cmath.sqrt(b11)
        psi = cmath.phase(x)
        gamma = 2 * psi + a2
        g = elem(abs(x), psi, gamma)
        return BShape.ONE_B_ZERO, BundleParams(b=abs(b12)), g
    if f11 and f22:  # b12 = 0
        rho = abs(b22) ** 0.5
        psi = -0.5 * a1
        x = rho * cmath.exp(1j * psi)
        c = cmath.sqrt(b22) / x.conjugate()
        g = GroupElement(c, Mat2(np.diag([x, 1.0 / (c * x.conjugate())])))
        return BShape.DIAG_A_ONE, BundleParams(a=abs(b11) * abs(b22)), g
    if f11:
        x = 1.0 / cmath.sqrt(b11)
        return (BShape.ONE_ZERO, BundleParams(),
                GroupElement(1.0, Mat2(np.diag([x, 1.0 / x.conjugate()]))))
    if f22:
        rho = abs(b22) ** 0.5
        c = cmath.sqrt(b22) / rho
        g = GroupElement(c, Mat2(np.diag([rho, 1.0 / (c * rho)])))
        return BShape.ZERO_ONE, BundleParams(), g
    if f12:
        g = elem(1.0, 0.0, a2)
        return BShape.ANTI_DIAG, BundleParams(b=abs(b12)), g
    return BShape.ZERO, BundleParams(), GroupElement(1.0, Mat2.identity())


def _reduce_B_jordan(B, tol, amb):
    zt = tol.rank_tol * max(max_norm(B), 1e-300)
    f11, f12, f22 = _zero_flags(B, zt)
    b11, b12, b22 = B.a, B.b, B.d

    def elem(v2, t):
        v = cmath.sqrt(v2)
        P = v * np.array([[1.0, 1j * t], [0.0, 1.0]], dtype=complex)
        return GroupElement(1.0, Mat2(P))

    if f11:
        t_c = 1j * b12 / b11
        if abs(t_c.imag) > 1e-6 * (1.0 + abs(t_c)):
            raise ClassificationFailureError(
                "B over the [[0,1],[1,i]] form is off the catalogued strata "
                f"(unreal shear {t_c!r})"
            )
        t = t_c.real
        v2 = b11.conjugate() / abs(b11)
        g = elem(v2, t)
        Bp = apply_psi2(g.P, B)
        return (BShape.DIAG_A_ZETA,
                BundleParams(a=abs(b11), zeta=complex(Bp.d)), g)
    if f12:
        t_c = 1j * b22 / (2 * b12)
        if abs(t_c.imag) > 1e-6 * (1.0 + abs(t_c)):
            raise ClassificationFailureError(
                "B over the [[0,1],[1,i]] form is off the catalogued strata "
                f"(unreal shear {t_c!r})"
            )
        t = t_c.real
        v2 = b12.conjugate() / abs(b12)
        g = elem(v2, t)
        return BShape.ANTI_DIAG, BundleParams(b=abs(b12)), g
    if f22:
        v2 = b22.conjugate() / abs(b22)
        return BShape.ZERO_D, BundleParams(d=abs(b22)), elem(v2, 0.0)
    return BShape.ZERO, BundleParams(), GroupElement(1.0, Mat2.identity())


# --- the 1 (+) -1 class -----------------------------------------------------

def _sqrtm2_symmetric(C):
    """A symmetric square root of an invertible symmetric 2x2 matrix."""
    det = C[0, 0] * C[1, 1] - C[0, 1] * C[1, 0]
    tr = C[0, 0] + C[1, 1]
    best = None
    for s in (cmath.sqrt(det), -cmath.sqrt(det)):
        t2 = tr + 2 * s
        if abs(t2) < 1e-14 * max(1.0, abs(tr)):
            continue
        X = (C + s * np.eye(2)) / cmath.sqrt(t2)
        r = max_norm(X @ X - C)
        if best is None or r < best[0]:
            best = (r, X)
    if best is None or best[0] > 1e-8 * max(1.0, max_norm(C)):
        raise ClassificationFailureError("symmetric square root failed")
    return best[1]


def _rot(z):
    c, s = cmath.cos(z), cmath.sin(z)
    return np.array([[c, s], [-s, c]], dtype=complex)


_SHALF = _T @ np.diag([1.0, 1j]) @ _T          # symmetric sqrt of [[0,1],[1,0]]
_SHALF_INV = _T @ np.diag([1.0, -1j]) @ _T


def _u11_membership(P, c=1.0):
    return max_norm(c * P.conj().T @ _J @ P - _J)


def _reduce_B_one_plus_minus(B, tol, amb):
    arr = B.array
    scale = max(max_norm(B), 1e-300)
    zt = tol.rank_tol * scale
    if max_norm(B) <= zt:
        return BShape.ZERO, BundleParams(), GroupElement(1.0, Mat2.identity())
    s, U = takagi(arr)
    c_total = 1.0
    pre = np.eye(2, dtype=complex)
    if _near(s[1] / s[0], tol.rank_tol, amb, "B near rank-1 over 1(+)-1"):
        w = math.sqrt(s[0]) * U[:, 0]
        mu = (abs(w[0]) ** 2 - abs(w[1]) ** 2)
        if _near(abs(mu), tol.rank_tol * (abs(w[0]) ** 2 + abs(w[1]) ** 2), amb,
                 "rank-1 B near the isotropic boundary over 1(+)-1"):
            # isotropic direction: the 1(+)0 cell of the swap representative
            m = 0.5 * (abs(w[0]) + abs(w[1]))
            Dw = np.diag([cmath.exp(-1j * cmath.phase(w[0])),
                          cmath.exp(-1j * cmath.phase(w[1]))])
            r = -math.log(m * math.sqrt(2.0))
            Hb = np.array([[math.cosh(r), math.sinh(r)],
                           [math.sinh(r), math.cosh(r)]], dtype=complex)
            P = Dw @ Hb @ _T
            return BShape.SWAP_ONE_ZERO, BundleParams(), GroupElement(1.0, Mat2(P))
        if mu > 0:
            pre = _S12
            c_total = -1.0
            w = _S12 @ w
            mu = -mu
        d = -mu
        # P = D H with phases D and a boost H so that P^T w = sqrt(d) e2
        r1, r2 = abs(w[0]), abs(w[1])
        D1 = np.diag([cmath.exp(-1j * cmath.phase(w[0])) if r1 > 0 else 1.0,
                      cmath.exp(-1j * cmath.phase(w[1]))])
        t = math.atanh(-r1 / r2)
        Hb = np.array([[math.cosh(t), math.sinh(t)],
                       [math.sinh(t), math.cosh(t)]], dtype=complex)
        P = pre @ D1 @ Hb
        return BShape.ZERO_D, BundleParams(d=float(d)), GroupElement(c_total, Mat2(P))
    # rank 2: classify by the similarity invariant N = J conj(B) J B
    N = _J @ np.conj(arr) @ _J @ arr
    lam = np.linalg.eigvals(N)
    lam_m = lam.mean()
    D = N - lam_m * np.eye(2)
    sd = np.linalg.svd(D, compute_uv=False)
    n_scale = max(max_norm(N), 1e-300)
    if _near(sd[0], tol.eig_cluster_tol * n_scale, amb,
             "similarity invariant near scalar over 1(+)-1"):
        lam_r = lam_m.real
        if abs(lam_m.imag) > 1e-6 * n_scale:
            raise ClassificationFailureError("scalar invariant with complex eigenvalue")
        if lam_r > 0:
            return _opm_d_identity(arr, math.sqrt(lam_r))
        return _opm_anti_diag(arr, math.sqrt(-lam_r))
    if _near(sd[1], tol.eig_cluster_tol * max(sd[0], 1e-300), amb,
             "similarity invariant near defective over 1(+)-1"):
        if not (abs(lam_m.imag) <= 1e-6 * n_scale and lam_m.real > 0):
            raise ClassificationFailureError(
                f"defective invariant with eigenvalue {lam_m!r} off the catalog"
            )
        return _opm_swap_off_diag(arr, math.sqrt(lam_m.real), tol)
    # distinct eigenvalues
    if abs(lam[0].imag) > 1e-6 * n_scale:
        # conjugate pair d^2 e^{+-i theta}: the 1 (+) d e^{i theta} swap cell
        return _opm_swap_one_de_itheta(arr, lam, tol)
    lam_r = sorted(lam.real)
    if lam_r[0] <= 0:
        raise ClassificationFailureError(
            f"real invariant spectrum {lam_r!r} off the catalog over 1(+)-1"
        )
    return _opm_diag_ad(arr, N, lam_r)


def _opm_diag_ad(arr, N, lam_r):
    vs = [_eigvec(N, l) for l in lam_r]
    forms = [float((v.conj() @ (_J @ v)).real) for v in vs]
    if forms[0] * forms[1] >= 0:
        raise ClassificationFailureError("eigenvectors not split by the (1,1) form")
    order = (0, 1) if forms[0] > 0 else (1, 0)
    pos, neg = order
    p1 = vs[pos] / math.sqrt(forms[pos])
    p2 = vs[neg] / math.sqrt(-forms[neg])
    P = np.column_stack([p1, p2])
    Bp = P.T @ arr @ P
    Dphi = np.diag([cmath.exp(-0.5j * cmath.phase(Bp[0, 0])),
                    cmath.exp(-0.5j * cmath.phase(Bp[1, 1]))])
    P = P @ Dphi
    a = math.sqrt(lam_r[pos])
    d = math.sqrt(lam_r[neg])
    c = 1.0
    if a > d:
        P = P @ _S12
        c = -1.0
        a, d = d, a
    return BShape.DIAG_AD, BundleParams(a=a, d=d), GroupElement(c, Mat2(P))


def _opm_d_identity(arr, d):
    C = arr / d
    Q0 = _sqrtm2_symmetric(C)
    Q0i = np.linalg.inv(Q0)
    K = Q0i.conj().T @ _J @ Q0i
    x = 0.5 * math.atan2(K[0, 1].real, K[0, 0].real)
    Q = _rot(x) @ Q0
    P = np.linalg.inv(Q)
    if _u11_membership(P) > 1e-7:
        raise ClassificationFailureError("dI reduction left the (1,1) unitary group")
    return BShape.D_IDENTITY, BundleParams(d=float(d)), GroupElement(1.0, Mat2(P))


def _opm_anti_diag(arr, b):
    C = arr / b
    G0 = _sqrtm2_symmetric(C)
    G0i = np.linalg.inv(G0)
    K = G0i.conj().T @ _J @ G0i
    if K[0, 1].imag >= 0:
        y = 0.5 * math.asinh(K[0, 0].real)
        O = _rot(1j * y)
    else:
        y = 0.5 * math.asinh(-K[0, 0].real)
        O = np.diag([1.0, -1.0]) @ _rot(1j * y)
    Q = _SHALF_INV @ O @ G0
    P = np.linalg.inv(Q)
    if _u11_membership(P) > 1e-7:
        raise ClassificationFailureError("anti-diagonal reduction left the group")
    return BShape.ANTI_DIAG, BundleParams(b=float(b)), GroupElement(1.0, Mat2(P))


def _both_sqrts(z):
    r = cmath.sqrt(z)
    return (r, -r) if r != 0 else (r,)


def _jordan_chain(N, lam):
    M = N - lam * np.eye(2)
    Us, ss, Vhs = np.linalg.svd(M)
    v2 = Vhs[0].conj()
    v1 = M @ v2
    return np.column_stack([v1, v2])


def _gauss_newton_congruence(B1, B_td, R0, iters=60):
    """Polish R so that R^T B1 R = B_td and R* J R = J, from initial R0."""

    def resid(R):
        r1 = R.T @ B1 @ R - B_td
        r2 = R.conj().T @ _J @ R - _J
        return np.array([
            r1[0, 0].real, r1[0, 0].imag, r1[0, 1].real, r1[0, 1].imag,
            r1[1, 1].real, r1[1, 1].imag,
            r2[0, 0].real, r2[1, 1].real, r2[0, 1].real, r2[0, 1].imag,
        ])

    def unpack(p):
        return (p[:4] + 1j * p[4:]).reshape(2, 2)

    p = np.concatenate([R0.real.ravel(), R0.imag.ravel()])
    lam_lm = 1e-8
    f = resid(unpack(p))
    for _ in range(iters):
        Jm = np.zeros((10, 8))
        h = 1e-7
        for j in range(8):
            dp = np.zeros(8)
            dp[j] = h
            Jm[:, j] = (resid(unpack(p + dp)) - resid(unpack(p - dp))) / (2 * h)
        try:
            step = np.linalg.solve(Jm.T @ Jm + lam_lm * np.eye(8), -Jm.T @ f)
        except np.linalg.LinAlgError:
            break
        p_new = p + step
        f_new = resid(unpack(p_new))
        if np.linalg.norm(f_new) < np.linalg.norm(f):
            p, f = p_new, f_new
            lam_lm = max(lam_lm * 0.3, 1e-12)
            if np.linalg.norm(f) < 1e-13:
                break
        else:
            lam_lm *= 10.0
            if lam_lm > 1e6:
                break
    return unpack(p), float(np.linalg.norm(f))


def _opm_swap_off_diag(arr, b, tol):
    B_sw = np.array([[0.0, b], [b, 1.0]], dtype=complex)
    B_td = _T @ B_sw @ _T
    N1 = _J @ np.conj(arr) @ _J @ arr
    N_td = _J @ np.conj(B_td) @ _J @ B_td
    lam = b * b
    V = _jordan_chain(N1, lam)
    Uc = _jordan_chain(N_td, lam)
    # every intertwiner is V Z Uc^{-1} with Z in the Jordan commutant
    # [[z1, z2], [0, z1]]; the B-transport fixes Z up to a sign
    G = V.T @ arr @ V
    H = Uc.T @ B_td @ Uc
    cands = []
    if abs(G[0, 0]) > 1e-10 * max_norm(G):
        for z1 in _both_sqrts(H[0, 0] / G[0, 0]):
            z2 = (H[0, 1] - z1 * z1 * G[0, 1]) / (z1 * G[0, 0])
            cands.append((z1, z2))
    elif abs(G[0, 1]) > 1e-10 * max_norm(G):
        for z1 in _both_sqrts(H[0, 1] / G[0, 1]):
            z2 = (H[1, 1] - z1 * z1 * G[1, 1]) / (2.0 * z1 * G[0, 1])
            cands.append((z1, z2))
    Uci = np.linalg.inv(Uc)
    best = None
    for z1, z2 in cands:
        R = V @ np.array([[z1, z2], [0.0, z1]], dtype=complex) @ Uci
        b_res = max_norm(R.T @ arr @ R - B_td)
        # the solution may land in the P* J P = -J component; c = -1 then
        # restores the anti-diagonal A-representative
        for c in (1.0, -1.0):
            r = max(b_res, max_norm(R.conj().T @ _J @ R - c * _J))
            if best is None or r < best[2]:
                best = (R, c, r)
    if best is None or best[2] > 1e-7 * max(1.0, max_norm(arr)):
        R0 = best[0] if best else V @ Uci
        R, r = _gauss_newton_congruence(arr, B_td, R0)
        r = max(r, _u11_membership(R))
        if r > 1e-7 * max(1.0, max_norm(arr)):
            raise ClassificationFailureError(
                f"defective-invariant reduction did not converge (residual {r:.3e})"
            )
        best = (R, 1.0, r)
    P = best[0] @ _T
    return (BShape.SWAP_OFF_DIAG_B_ONE, BundleParams(b=float(b)),
            GroupElement(best[1], Mat2(P)))


def _opm_swap_one_de_itheta(arr, lam, tol):
    lam_p = lam[0] if lam[0].imag > 0 else lam[1]
    d = abs(lam_p)
    theta = abs(cmath.phase(lam_p))
    B_sw = np.diag([1.0, d * cmath.exp(1j * theta)])
    B_td = _T @ B_sw @ _T
    N1 = _J @ np.conj(arr) @ _J @ arr
    N_td = _J @ np.conj(B_td) @ _J @ B_td
    lam_m = lam_p.conjugate()
    V = np.column_stack([_eigvec(N1, lam_p), _eigvec(N1, lam_m)])
    Uc = np.column_stack([_eigvec(N_td, lam_p), _eigvec(N_td, lam_m)])
    G = V.T @ arr @ V
    H = Uc.T @ B_td @ Uc
    sols = []
    if abs(G[0, 0]) > 1e-12 * max_norm(G):
        z1 = cmath.sqrt(H[0, 0] / G[0, 0])
        if abs(G[0, 1]) > 1e-12 * max_norm(G):
            z2 = H[0, 1] / (z1 * G[0, 1])
            sols += [(z1, z2), (-z1, -z2)]
        z2m = cmath.sqrt(H[1, 1] / G[1, 1])
        sols += [(z1, z2m), (z1, -z2m), (-z1, z2m), (-z1, -z2m)]
    best = None
    for z1, z2 in sols:
        R = V @ np.diag([z1, z2]) @ np.linalg.inv(Uc)
        r = max(max_norm(R.T @ arr @ R - B_td), _u11_membership(R))
        if best is None or r < best[1]:
            best = (R, r)
    if best is None or best[1] > 1e-7 * max(1.0, max_norm(arr)):
        # polish with the generic solver
        R0 = best[0] if best else V @ np.linalg.inv(Uc)
        R, r = _gauss_newton_congruence(arr, B_td, R0)
        if r > 1e-8 * max(1.0, max_norm(arr)):
            raise ClassificationFailureError(
                f"conjugate-pair reduction did not converge (residual {r:.3e})"
            )
        best = (R, r)
    P = best[0] @ _T
    return (BShape.SWAP_ONE_DE_ITHETA, BundleParams(d=float(d), theta=float(theta)),
            GroupElement(1.0, Mat2(P)))


# ---------------------------------------------------------------------------
# the full pair

def classify_pair(x: PairAB, tol: ToleranceConfig | None = None) -> Classification:
    tol = tol or ToleranceConfig()
    a_label, a_params, g1, res1, amb1 = classify_A(x.A, tol)
    B1 = apply_psi2(g1.P, x.B)
    try:
        shape, b_params, g2, amb2 = stabilizer_reduce_B(a_label, B1, tol,
                                                        a_params)
    except ClassificationFailureError:
        if amb1:
            # the A part was snapped to a degenerate class inside the
            # ambiguity zone; if B then falls off that class's strata the
            # snap itself is what failed, not the input
            raise AmbiguityError(
                tuple(amb1),
                f"B is off the strata of the tentative class {a_label}")
        raise
    label = BundleLabel(a_label, shape)
    merged = BundleParams(**{**_asdict(a_params), **_asdict(b_params)})
    merged = canonicalize_params(label, merged)
    total = group_compose(g1, g2)
    target = representative(label, merged) if not _missing(label, merged) else None
    if target is None:
        raise ClassificationFailureError(f"incomplete parameters for {label}")
    residual = pair_distance(apply_action(total, x), target)
    scale = max(1.0, max_norm(x.A), max_norm(x.B))
    ambiguous = tuple(amb1) + tuple(amb2)
    if residual > 1e-5 * scale:
        raise ClassificationFailureError(
            f"classification of {label} failed verification (residual {residual:.3e})"
        )
    return Classification(label, merged, total, float(residual), ambiguous)


def _asdict(p: BundleParams) -> dict:
    return {k: v for k, v in p.__dict__.items() if v is not None}


def _missing(label, params) -> bool:
    from .normal_forms import param_fields, validate_params

    return bool(validate_params(label, params))
