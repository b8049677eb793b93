"""Symmetric 3x3 tensor algebra and the magnetic dipole field formula.

Real symmetric tensors are stored as their six independent coefficients in
the order (11, 22, 33, 12, 13, 23) so that symmetry holds exactly by
construction.  Units are documented per quantity but never enforced:
polarizability tensors carry m^3, field quantities A/m.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidRotationError, SingularityError

# row/column index of each packed coefficient, order 11, 22, 33, 12, 13, 23
_PACK_IJ = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))

ORTHOGONALITY_TOL = 1e-12
JACOBI_OFFDIAG_TOL = 1e-14


class SymTensor3:
    """Real symmetric 3x3 tensor backed by six packed coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=float)
        if c.shape != (6,):
            raise InvalidInputError(f"expected 6 coefficients, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvalidInputError("tensor coefficients must be finite")
        self.coeffs = c

    @classmethod
    def zero(cls) -> "SymTensor3":
        return cls(np.zeros(6))

    @classmethod
    def identity(cls) -> "SymTensor3":
        return cls([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])

    @classmethod
    def diag(cls, d1: float, d2: float, d3: float) -> "SymTensor3":
        return cls([d1, d2, d3, 0.0, 0.0, 0.0])

    @classmethod
    def isotropic(cls, value: float) -> "SymTensor3":
        return cls([value, value, value, 0.0, 0.0, 0.0])

    @classmethod
    def from_matrix(cls, m, asym_tol: float = 1e-12) -> "SymTensor3":
        """Pack a dense symmetric matrix; reject if asymmetry exceeds tolerance."""
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise InvalidInputError(f"expected 3x3 matrix, got shape {m.shape}")
        scale = max(np.abs(m).max(), 1.0)
        if np.abs(m - m.T).max() > asym_tol * scale:
            raise InvalidInputError("matrix is not symmetric to tolerance")
        s = 0.5 * (m + m.T)
        return cls([s[i, j] for i, j in _PACK_IJ])

    @property
    def matrix(self) -> np.ndarray:
        m = np.empty((3, 3))
        for k, (i, j) in enumerate(_PACK_IJ):
            m[i, j] = self.coeffs[k]
            m[j, i] = self.coeffs[k]
        return m

    def __getitem__(self, ij) -> float:
        i, j = ij
        if i > j:
            i, j = j, i
        return float(self.coeffs[_PACK_IJ.index((i, j))])

    def trace(self) -> float:
        return float(self.coeffs[:3].sum())

    def norm(self) -> float:
        """Frobenius norm."""
        c = self.coeffs
        return float(np.sqrt((c[:3] ** 2).sum() + 2.0 * (c[3:] ** 2).sum()))

    def __add__(self, other: "SymTensor3") -> "SymTensor3":
        return SymTensor3(self.coeffs + other.coeffs)

    def __sub__(self, other: "SymTensor3") -> "SymTensor3":
        return SymTensor3(self.coeffs - other.coeffs)

    def __neg__(self) -> "SymTensor3":
        return SymTensor3(-self.coeffs)

    def __mul__(self, scalar: float) -> "SymTensor3":
        return SymTensor3(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"SymTensor3({self.coeffs.tolist()})"


class ComplexSymTensor3:
    """Complex symmetric 3x3 tensor split into real and imaginary parts."""

    __slots__ = ("real", "imag")

    def __init__(self, real: SymTensor3, imag: SymTensor3):
        self.real = real
        self.imag = imag

    @classmethod
    def zero(cls) -> "ComplexSymTensor3":
        return cls(SymTensor3.zero(), SymTensor3.zero())

    @classmethod
    def from_matrix(cls, m, asym_tol: float = 1e-12) -> "ComplexSymTensor3":
        m = np.asarray(m, dtype=complex)
        return cls(
            SymTensor3.from_matrix(m.real, asym_tol),
            SymTensor3.from_matrix(m.imag, asym_tol),
        )

    @property
    def matrix(self) -> np.ndarray:
        return self.real.matrix + 1j * self.imag.matrix

    def __getitem__(self, ij) -> complex:
        return self.real[ij] + 1j * self.imag[ij]

    def __add__(self, other: "ComplexSymTensor3") -> "ComplexSymTensor3":
        return ComplexSymTensor3(self.real + other.real, self.imag + other.imag)

    def __sub__(self, other: "ComplexSymTensor3") -> "ComplexSymTensor3":
        return ComplexSymTensor3(self.real - other.real, self.imag - other.imag)

    def norm(self) -> float:
        return float(np.hypot(self.real.norm(), self.imag.norm()))

    def conj(self) -> "ComplexSymTensor3":
        return ComplexSymTensor3(self.real, -self.imag)

    def __repr__(self) -> str:
        return f"ComplexSymTensor3(real={self.real!r}, imag={self.imag!r})"


class Rotation3:
    """Orthogonal 3x3 matrix, proper or improper."""

    __slots__ = ("matrix",)

    def __init__(self, q):
        q = np.asarray(q, dtype=float)
        if q.shape != (3, 3) or not np.all(np.isfinite(q)):
            raise InvalidRotationError("rotation must be a finite 3x3 matrix")
        if np.abs(q.T @ q - np.eye(3)).max() > ORTHOGONALITY_TOL:
            raise InvalidRotationError("matrix is not orthogonal to 1e-12")
        if abs(abs(np.linalg.det(q)) - 1.0) > ORTHOGONALITY_TOL:
            raise InvalidRotationError("matrix determinant is not +-1 to 1e-12")
        self.matrix = q

    @classmethod
    def identity(cls) -> "Rotation3":
        return cls(np.eye(3))

    @classmethod
    def about_axis(cls, axis: int, angle: float) -> "Rotation3":
        """Right-handed rotation by `angle` radians about coordinate axis 0, 1 or 2."""
        c, s = np.cos(angle), np.sin(angle)
        q = np.eye(3)
        a, b = [k for k in range(3) if k != axis]
        q[a, a] = c
        q[b, b] = c
        q[a, b] = -s
        q[b, a] = s
        return cls(q)

    def __repr__(self) -> str:
        return f"Rotation3({self.matrix.tolist()})"


def eigen_sym3(t: SymTensor3) -> tuple[np.ndarray, Rotation3]:
    """Eigen-decompose a symmetric tensor by cyclic Jacobi sweeps.

    Returns eigenvalues in ascending order and the orthogonal matrix whose
    columns are the matching eigenvectors, so ``T = Q diag(w) Q^T``.  For a
    repeated eigenvalue the eigenvectors are one orthonormal basis of the
    eigenspace; callers should compare subspace projectors, not vectors.
    """
    a = t.matrix
    norm = np.linalg.norm(a)
    v = np.eye(3)
    if norm > 0.0:
        for _ in range(64):
            off = max(abs(a[0, 1]), abs(a[0, 2]), abs(a[1, 2]))
            if off <= JACOBI_OFFDIAG_TOL * norm:
                break
            for p, q in ((0, 1), (0, 2), (1, 2)):
                apq = a[p, q]
                if abs(apq) <= 0.25 * JACOBI_OFFDIAG_TOL * norm:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                tstep = np.sign(tau) if tau != 0.0 else 1.0
                tstep /= abs(tau) + np.hypot(1.0, tau)
                c = 1.0 / np.hypot(1.0, tstep)
                s = tstep * c
                rot = np.eye(3)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], Rotation3(v[:, order])


def rotate_tensor(t: SymTensor3, q: Rotation3) -> SymTensor3:
    """Transform coefficients under a rotation: result_ij = Q_ip Q_jq T_pq."""
    qm = q.matrix
    return SymTensor3.from_matrix(qm @ t.matrix @ qm.T, asym_tol=1e-9)


def dipole_green_hessian(x, z) -> SymTensor3:
    """Hessian of the free-space Laplace Green's function 1/(4 pi |x-z|).

    Returns (1 / (4 pi r^3)) (3 rhat x rhat - I) in units 1/m^3; symmetric
    and trace-free for every x != z.
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != (3,) or z.shape != (3,):
        raise InvalidInputError("points must be 3-vectors")
    r = x - z
    dist = np.linalg.norm(r)
    if dist == 0.0:
        raise SingularityError("Green's function Hessian is singular at x == z")
    rhat = r / dist
    m = (3.0 * np.outer(rhat, rhat) - np.eye(3)) / (4.0 * np.pi * dist**3)
    return SymTensor3.from_matrix(m, asym_tol=1e-9)


def perturbed_field(x, z, m: ComplexSymTensor3, h0_at_z) -> np.ndarray:
    """Leading-order perturbed magnetic field of a small object at z.

    Contracts the Green's-function Hessian with the polarizability tensor and
    the background field evaluated at the object centre:
    (H - H0)(x) = D^2 G(x, z) . M . H0(z).  Output is a complex 3-vector in
    the units of ``h0_at_z``.
    """
    h0 = np.asarray(h0_at_z, dtype=float)
    if h0.shape != (3,):
        raise InvalidInputError("background field must be a real 3-vector")
    d2g = dipole_green_hessian(x, z).matrix
    return d2g @ (m.matrix @ h0)


@dataclass(frozen=True)
class OffdiagBoundReport:
    """Result of the off-diagonal magnitude bounds on the R and I tensors."""

    pass_r: bool
    pass_i: bool
    margin_r: float
    margin_i: float

    @property
    def passed(self) -> bool:
        return self.pass_r and self.pass_i


def offdiag_bound_report(r: SymTensor3, i: SymTensor3) -> OffdiagBoundReport:
    """Check |R_ij| <= |Tr R| and |I_ij| <= Tr I for all i != j.

    Margins are the smallest slack (bound minus off-diagonal magnitude); a
    negative margin means the corresponding bound fails.
    """
    off_r = np.abs(r.coeffs[3:]).max()
    off_i = np.abs(i.coeffs[3:]).max()
    margin_r = abs(r.trace()) - off_r
    margin_i = i.trace() - off_i
    # exact zero off-diagonals always pass, whatever the trace
    pass_r = margin_r >= 0.0 or off_r == 0.0
    pass_i = margin_i >= 0.0 or off_i == 0.0
    return OffdiagBoundReport(pass_r, pass_i, margin_r, margin_i)
