"""Concrete Hamiltonians: Landau, spin-orbit (Jaynes-Cummings), quaternionic.

All spin-1/2 models share the structure H = eps_B (K1^2 + K2^2)/2 built
from non-Abelian kinetic momenta K_i = K_i x 1 - c_b 1 x gamma_i:

* Jaynes-Cummings: gamma_1 = -sigma_2, gamma_2 = sigma_1 (Rashba type);
  exactly solvable, levels E_0 = eps_B(1/2 + c_b^2) and
  E_j^+- = eps_B(j +- sqrt(1 + 8 j c_b^2)/2 + c_b^2).
* Quaternionic: gamma_1 = -alpha, gamma_2 = sigma_2 alpha sigma_2 with a
  real symmetric alpha parametrized by (r0, r1, r2); no closed-form
  spectrum, gaps are detected numerically.

The anti-unitary symmetries are Theta = F C (scalar), Xi = (F x theta) C
with theta = diag(1, i), and Xi' = (F x sigma_2) C. The spin twist must
be diag(1, i) rather than the often-seen diag(1, -i): with
coefficient-wise complex conjugation only the former intertwines the
spin-orbit Hamiltonian (the latter maps c_b -> -c_b); both square to +1.
"""

from dataclasses import dataclass

import numpy as np

from . import sectors
from .fock import (
    AntiUnitaryRep,
    ModelParams,
    OperatorMatrix,
    derived_operator,
    flip_and_conjugation,
    ladder,
    landau_projection,
    tensor_with_spin,
)

__all__ = [
    "SpectrumTable",
    "GapRecord",
    "landau_levels",
    "jc_angles",
    "jc_spectrum",
    "jc_hamiltonian",
    "jc_projection",
    "jc_trs",
    "quaternionic_hamiltonian",
    "quaternionic_trs",
    "quaternionic_ground_modes",
    "diagonalize_and_gaps",
    "fermi_projection",
    "riesz_projection",
    "nonabelian_field_check",
    "NoGapError",
]

SIGMA1 = sectors.SIGMA1
SIGMA2 = sectors.SIGMA2
SIGMA3 = sectors.SIGMA3


class NoGapError(RuntimeError):
    """Requested energy does not sit inside a certified spectral gap."""


@dataclass
class SpectrumTable:
    """Ascending eigenvalues with provenance and interior certification."""

    eigenvalues: np.ndarray
    provenance: str                 # "closed_form" or "diagonalized"
    multiplicities: np.ndarray = None   # within truncation; None for closed forms
    interior: np.ndarray = None         # None for closed forms

    def interior_eigenvalues(self):
        if self.interior is None:
            return np.asarray(self.eigenvalues)
        return np.asarray(self.eigenvalues)[self.interior]


@dataclass
class GapRecord:
    lower: float
    upper: float

    @property
    def width(self):
        return self.upper - self.lower

    def contains(self, energy):
        return self.lower < energy < self.upper


def landau_levels(params, jmax):
    """Closed-form scalar levels E_j = eps_B (j + 1/2), j = 0..jmax."""
    if jmax < 0:
        raise ValueError("jmax must be nonnegative")
    ev = params.eps_B * (np.arange(jmax + 1) + 0.5)
    return SpectrumTable(ev, "closed_form")


def jc_angles(j, c_b):
    """Mixing angles of the j-th spin-orbit pair, principal branch.

    theta_j^+- = atan( sqrt(8 c_b^2 j) / (1 +- sqrt(1 + 8 c_b^2 j)) ).
    The lower branch tends to -pi/2 as c_b -> 0.
    """
    if j < 1:
        raise ValueError("pair levels start at j = 1; level 0 is the scalar state")
    if c_b == 0:
        return 0.0, -np.pi / 2.0
    root = np.sqrt(1.0 + 8.0 * c_b ** 2 * j)
    num = np.sqrt(8.0 * c_b ** 2 * j)
    theta_plus = np.arctan(num / (1.0 + root))
    theta_minus = np.arctan(num / (1.0 - root))
    return float(theta_plus), float(theta_minus)


def jc_spectrum(params, jmax):
    """Closed-form spin-orbit levels up to pair index jmax, ascending."""
    vals = [params.eps_B * (0.5 + params.c_b ** 2)]
    for j in range(1, jmax + 1):
        root = np.sqrt(1.0 + 8.0 * j * params.c_b ** 2)
        vals.append(params.eps_B * (j - root / 2.0 + params.c_b ** 2))
        vals.append(params.eps_B * (j + root / 2.0 + params.c_b ** 2))
    return SpectrumTable(np.sort(np.array(vals)), "closed_form")


def jc_hamiltonian(basis, params):
    """H = H_B x 1 + c_b eps_B (K1 x s2 - K2 x s1) + c_b^2 eps_B."""
    hb = tensor_with_spin(derived_operator(basis, "H_B", params), np.eye(2))
    k1 = derived_operator(basis, "K1", params)
    k2 = derived_operator(basis, "K2", params)
    w = tensor_with_spin(k1, SIGMA2) - tensor_with_spin(k2, SIGMA1)
    out = hb + (params.c_b * params.eps_B) * w
    out = out + OperatorMatrix(basis, params.c_b ** 2 * params.eps_B * np.eye(out.dim), spin_dim=2)
    return out


def jc_projection(basis, params, j, sign=None):
    """Spectral projection of the level E_j^sign (E_0 for j = 0).

    The j = 0 eigenvectors have vanishing upper spin component, so the
    scalar-level projection is P_0 placed in the lower spin slot.
    """
    if j == 0:
        return tensor_with_spin(landau_projection(basis, 0), np.diag([0.0, 1.0]))
    if sign not in ("+", "-", 1, -1):
        raise ValueError("sign must be '+' or '-' for pair levels")
    if j + 1 > basis.nmax:
        raise ValueError(f"pair level {j} needs Nmax >= {j + 1}")
    theta = jc_angles(j, params.c_b)[0 if sign in ("+", 1) else 1]
    s, c = np.sin(theta), np.cos(theta)
    pj = landau_projection(basis, j).entries
    pjm1 = landau_projection(basis, j - 1).entries
    am = ladder(basis, "a-").entries
    ap = ladder(basis, "a+").entries
    e11 = np.array([[1, 0], [0, 0]], dtype=complex)
    e12 = np.array([[0, 1], [0, 0]], dtype=complex)
    e21 = np.array([[0, 0], [1, 0]], dtype=complex)
    e22 = np.array([[0, 0], [0, 1]], dtype=complex)
    block = (
        np.kron(s * s * pjm1, e11)
        + np.kron(-1j * s * c / np.sqrt(j) * (am @ pj), e12)
        + np.kron(+1j * s * c / np.sqrt(j) * (pj @ ap), e21)
        + np.kron(c * c * pj, e22)
    )
    return OperatorMatrix(basis, block, spin_dim=2)


def jc_trs(basis):
    """Even anti-unitary symmetry Xi = (F x theta) C, theta = diag(1, i)."""
    F, C, _ = flip_and_conjugation(basis)
    u = np.kron(F.entries @ C.unitary_part.entries, np.diag([1.0, 1j]))
    return AntiUnitaryRep(OperatorMatrix(basis, u, spin_dim=2))


def _quaternionic_gammas(params):
    r0, r1, r2 = params.r
    gamma1 = np.array([[-r0 - r2, -r1], [-r1, -r0 + r2]], dtype=complex)
    gamma2 = np.array([[r0 - r2, -r1], [-r1, r0 + r2]], dtype=complex)
    return gamma1, gamma2


def quaternionic_hamiltonian(basis, params):
    """H = eps_B (A+ A- + 1/2) with the displaced ladder blocks A+-."""
    m_minus = sectors._quaternionic_blocks(params)
    am = np.kron(ladder(basis, "a-").entries, np.eye(2))
    a_minus = am + params.c_b * np.kron(np.eye(basis.dim), m_minus)
    a_plus = a_minus.conj().T
    h = params.eps_B * (a_plus @ a_minus + 0.5 * np.eye(2 * basis.dim))
    return OperatorMatrix(basis, h, spin_dim=2)


def quaternionic_hamiltonian_alt(basis, params):
    """Equivalent assembly H_B x 1 + c_b eps_B W_Q + c_b^2 eps_B |r|^2."""
    hb = tensor_with_spin(derived_operator(basis, "H_B", params), np.eye(2))
    k1 = derived_operator(basis, "K1", params)
    k2 = derived_operator(basis, "K2", params)
    r0, r1, r2 = params.r
    S = r1 * SIGMA1 + r2 * SIGMA3
    w = tensor_with_spin(r0 * (k1 - k2), np.eye(2)) + tensor_with_spin(k1 + k2, S)
    out = hb + (params.c_b * params.eps_B) * w
    norm2 = r0 ** 2 + r1 ** 2 + r2 ** 2
    out = out + OperatorMatrix(
        basis, params.c_b ** 2 * params.eps_B * norm2 * np.eye(out.dim), spin_dim=2
    )
    return out


def quaternionic_trs(basis):
    """Odd anti-unitary symmetry Xi' = (F x sigma_2) C; squares to -1."""
    F, C, _ = flip_and_conjugation(basis)
    u = np.kron(F.entries @ C.unitary_part.entries, SIGMA2)
    return AntiUnitaryRep(OperatorMatrix(basis, u, spin_dim=2))


def quaternionic_ground_modes(basis, params, m):
    """The two lowest-shell eigenvectors of A- built on psi_(0, m).

    A- Phi^+- = c_b e^{i pi/4} (r0 +- i sqrt(r1^2 + r2^2)) Phi^+-.
    Requires r1^2 + r2^2 > 0 and a nonvanishing normalization branch.
    """
    r0, r1, r2 = params.r
    rho = np.sqrt(r1 ** 2 + r2 ** 2)
    if rho == 0:
        raise ValueError("spin eigenvectors need r1^2 + r2^2 > 0")
    out = []
    for sgn in (+1.0, -1.0):
        denom = 2 * rho ** 2 + 2 * sgn * r2 * rho
        if denom <= 0:
            raise ValueError("degenerate normalization branch")
        spinor = np.array([r1, -(r2 + sgn * rho)], dtype=complex) / np.sqrt(denom)
        vec = np.zeros(2 * basis.dim, dtype=complex)
        i = basis.index_of(0, m)
        vec[2 * i: 2 * i + 2] = spinor
        eig = params.c_b * np.exp(1j * np.pi / 4) * (r0 + sgn * 1j * rho)
        out.append((vec, eig))
    return out


def diagonalize_and_gaps(H, gap_threshold, params=None):
    """Full hermitian eigendecomposition with interior-certified gap list.

    An eigenvector is interior when less than 1e-8 of its probability mass
    sits on the two outermost shells; gaps are scanned over interior
    eigenvalues only and must exceed the threshold.
    """
    if not H.is_hermitian(1e-10):
        raise ValueError("Hamiltonian must be hermitian-certified")
    w, v = np.linalg.eigh(H.entries)
    basis = H.basis
    shell = np.repeat(basis.shell, H.spin_dim)
    edge = shell > basis.nmax - sectors.EDGE_SHELLS
    mass = (np.abs(v) ** 2)[edge].sum(axis=0)
    interior = mass < sectors.INTERIOR_MASS
    table = SpectrumTable(w, "diagonalized", np.ones_like(w, dtype=np.int64), interior)
    gaps = _gaps_from_levels(w[interior], gap_threshold)
    return table, gaps


def _gaps_from_levels(levels, threshold):
    gaps = []
    for a, b in zip(levels[:-1], levels[1:]):
        if b - a > threshold:
            gaps.append(GapRecord(float(a), float(b)))
    return gaps


def fermi_projection(H, energy, gap_threshold=None, params=None):
    """Sum of eigenprojections below an energy inside a certified gap."""
    if gap_threshold is None:
        gap_threshold = 0.05
    table, gaps = diagonalize_and_gaps(H, gap_threshold, params)
    if not any(g.contains(energy) for g in gaps):
        raise NoGapError(f"no certified gap around E = {energy}")
    w, v = np.linalg.eigh(H.entries)
    keep = w <= energy
    V = v[:, keep]
    return OperatorMatrix(H.basis, V @ V.conj().T, H.spin_dim)


def riesz_projection(H, contour_center, contour_radius, quad_points=64):
    """Spectral projection by trapezoidal contour quadrature of the resolvent.

    (i / 2 pi) times the counterclockwise circle integral of (H - z)^{-1};
    exponentially convergent in the number of contour points for circles
    staying away from the spectrum. Raises when the contour passes within
    1e-6 of an interior eigenvalue.
    """
    if not H.is_hermitian(1e-10):
        raise ValueError("Hamiltonian must be hermitian-certified")
    w = np.linalg.eigvalsh(H.entries)
    dist = np.abs(np.abs(w - contour_center) - contour_radius).min()
    if dist < 1e-6:
        raise ValueError(f"contour passes within {dist:.2e} of an eigenvalue")
    n = H.dim
    acc = np.zeros((n, n), dtype=complex)
    theta = (np.arange(quad_points) + 0.5) * (2 * np.pi / quad_points)
    for t in theta:
        z = contour_center + contour_radius * np.exp(1j * t)
        dz = 1j * contour_radius * np.exp(1j * t)
        acc += np.linalg.solve(H.entries - z * np.eye(n), np.eye(n)) * dz
    acc *= (1j / (2 * np.pi)) * (2 * np.pi / quad_points)
    return OperatorMatrix(H.basis, acc, H.spin_dim)


def nonabelian_field_check(params, model):
    """Orthogonal part of the non-Abelian field: B x 1 - i (b^2/hbar)[g1, g2].

    For the spin-orbit model the commutator term is +2 sigma_3 in units of
    b^2/hbar; for the quaternionic model the gammas commute and the field
    stays purely Abelian. Returns the coefficient pattern as a report.
    """
    if model == "JC":
        gamma1, gamma2 = -SIGMA2, SIGMA1
    elif model == "Q":
        gamma1, gamma2 = _quaternionic_gammas(params)
    else:
        raise ValueError("model must be 'JC' or 'Q'")
    comm = gamma1 @ gamma2 - gamma2 @ gamma1
    su2_part = -1j * comm
    sigma3_coeff = complex(np.trace(su2_part @ SIGMA3) / 2.0)
    abelian = float(np.abs(comm).max()) < 1e-14
    return {
        "model": model,
        "commutator_norm": float(np.abs(comm).max()),
        "su2_part": su2_part,
        "sigma3_coefficient": sigma3_coeff,
        "abelian": abelian,
    }
