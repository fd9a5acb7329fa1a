"""Bimatrix algebra: ordered pairs of complex matrices acting through the conjugate.

A bimatrix ``{A1, A2}`` maps a complex vector ``x`` to ``A1 @ x + conj(A2) @
conj(x)``.  The map is linear over the reals but not over the complexes.  Two
faithful matrix pictures exist: a ``2n x 2m`` *real representation* acting on
stacked (real, imaginary) coordinates, and a ``2n x 2m`` complex *lifting*
acting on stacked ``(x, conj(x))/sqrt(2)`` coordinates.  Both carry sums to
sums and products to products, and the unitary :func:`h_matrix` intertwines
them.  Eigenvalues, exponentials and inverses of a bimatrix are defined
through these representations.
"""

import numpy as np
import scipy.linalg

from .exceptions import DimensionError, SingularBimatrixError, SpectrumError

__all__ = [
    "Bimatrix",
    "HermiteBimatrix",
    "SpectrumSet",
    "h_matrix",
    "e_matrix",
    "arrow",
    "unarrow",
    "breve",
    "block_bimatrix",
    "hermite_from_real_representation",
    "is_positive_definite",
    "quadratic_form_real",
    "conjugate_complete",
    "cmatrix_to_json",
    "cmatrix_from_json",
    "cvector_to_json",
    "cvector_from_json",
    "bimatrix_to_json",
    "bimatrix_from_json",
]

# Reciprocal-condition floor below which an inverse is refused.
RCOND_FLOOR = 1e-12
# Relative symmetry residual allowed by the Hermite check.
HERMITE_RTOL = 1e-10
# Positive definiteness: smallest eigenvalue must exceed this times the norm.
PD_EIG_RTOL = 1e-10
# Relative tolerance when pairing eigenvalues with their conjugates.
CONJ_PAIR_RTOL = 1e-8


def as_cmatrix(a, name="matrix"):
    """Coerce to a 2-D complex array with finite entries (always a copy)."""
    arr = np.array(a, dtype=complex, copy=True)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_cvector(x, name="vector"):
    """Coerce to a 1-D complex array with finite entries."""
    arr = np.array(x, dtype=complex, copy=True).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


class Bimatrix:
    """Ordered pair ``{A1, A2}`` of equal-shape complex matrices.

    The pair acts on a complex vector ``x`` as ``A1 x + conj(A2) conj(x)``.
    Instances are immutable values: the stored arrays are private copies and
    are marked read-only, so a bimatrix can be shared freely across threads.

    Parameters
    ----------
    first : array_like
        The part multiplying ``x`` (complex ``n x m``).
    second : array_like
        The part whose conjugate multiplies ``conj(x)``; same shape as
        ``first``.
    """

    __slots__ = ("first", "second")

    def __init__(self, first, second):
        first = as_cmatrix(first, "first part")
        second = as_cmatrix(second, "second part")
        if first.shape != second.shape:
            raise DimensionError(
                f"bimatrix parts must share a shape, got {first.shape} and {second.shape}"
            )
        first.setflags(write=False)
        second.setflags(write=False)
        object.__setattr__(self, "first", first)
        object.__setattr__(self, "second", second)

    def __setattr__(self, name, value):
        raise AttributeError("Bimatrix is immutable")

    # -- shape -------------------------------------------------------------

    @property
    def shape(self):
        return self.first.shape

    @property
    def rows(self):
        return self.first.shape[0]

    @property
    def cols(self):
        return self.first.shape[1]

    @property
    def is_square(self):
        return self.rows == self.cols

    # -- constructors --------------------------------------------------------

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n), np.zeros((n, n)))

    @classmethod
    def zeros(cls, rows, cols=None):
        cols = rows if cols is None else cols
        return cls(np.zeros((rows, cols)), np.zeros((rows, cols)))

    @classmethod
    def normal(cls, first):
        """Pair with vanishing second part: a plain complex matrix."""
        first = as_cmatrix(first, "first part")
        return cls(first, np.zeros_like(first))

    @classmethod
    def antilinear(cls, second):
        """Pair with vanishing first part: acts only through the conjugate."""
        second = as_cmatrix(second, "second part")
        return cls(np.zeros_like(second), second)

    @classmethod
    def from_real_representation(cls, mat):
        """Recover the unique bimatrix whose real representation equals ``mat``.

        ``mat`` must be real with even dimensions ``2n x 2m``.  The inverse is
        computed blockwise, which keeps structural zeros exact (a block-
        symmetric input yields an exactly zero second part).
        """
        mat = np.asarray(mat)
        if np.iscomplexobj(mat):
            if np.any(mat.imag != 0):
                raise ValueError("real representation must be a real matrix")
            mat = mat.real
        mat = mat.astype(float, copy=False)
        if mat.ndim != 2 or mat.shape[0] % 2 or mat.shape[1] % 2:
            raise DimensionError(
                f"real representation must have even dimensions, got {mat.shape}"
            )
        n, m = mat.shape[0] // 2, mat.shape[1] // 2
        m11, m12 = mat[:n, :m], mat[:n, m:]
        m21, m22 = mat[n:, :m], mat[n:, m:]
        first = 0.5 * (m11 + m22) + 0.5j * (m21 - m12)
        second = 0.5 * (m11 - m22) - 0.5j * (m21 + m12)
        return cls(first, second)

    # -- action and arithmetic -----------------------------------------------

    def apply(self, x):
        """Evaluate ``A1 x + conj(A2) conj(x)``."""
        x = as_cvector(x)
        if x.shape[0] != self.cols:
            raise DimensionError(
                f"vector of length {x.shape[0]} incompatible with {self.shape} bimatrix"
            )
        return self.first @ x + np.conj(self.second) @ np.conj(x)

    def __add__(self, other):
        if not isinstance(other, Bimatrix):
            return NotImplemented
        if self.shape != other.shape:
            raise DimensionError(f"cannot add shapes {self.shape} and {other.shape}")
        return Bimatrix(self.first + other.first, self.second + other.second)

    def __sub__(self, other):
        if not isinstance(other, Bimatrix):
            return NotImplemented
        if self.shape != other.shape:
            raise DimensionError(f"cannot subtract shapes {self.shape} and {other.shape}")
        return Bimatrix(self.first - other.first, self.second - other.second)

    def __neg__(self):
        return Bimatrix(-self.first, -self.second)

    def __mul__(self, scalar):
        # Only real scalars commute with the action; complex ones do not scale
        # both parts uniformly.
        if not np.isrealobj(np.asarray(scalar)) or np.ndim(scalar) != 0:
            return NotImplemented
        s = float(scalar)
        return Bimatrix(s * self.first, s * self.second)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, Bimatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionError(
                f"cannot compose {self.shape} with {other.shape} bimatrix"
            )
        a1, a2 = self.first, self.second
        b1, b2 = other.first, other.second
        return Bimatrix(a1 @ b1 + np.conj(a2) @ b2, np.conj(a1) @ b2 + a2 @ b1)

    def conj_transpose(self):
        """Adjoint pair ``{A1^H, A2^T}``."""
        return Bimatrix(self.first.conj().T, self.second.T)

    @property
    def H(self):
        return self.conj_transpose()

    # -- representations -----------------------------------------------------

    def real_representation(self):
        """Real ``2n x 2m`` matrix acting on stacked (Re x, Im x)."""
        s = self.first + self.second
        d = self.first - self.second
        return np.block([[s.real, -s.imag], [d.imag, d.real]])

    def complex_lifting(self):
        """Complex ``2n x 2m`` matrix acting on stacked ``(x, conj(x))``."""
        return np.block(
            [
                [self.first, np.conj(self.second)],
                [self.second, np.conj(self.first)],
            ]
        )

    # -- inverse, power, exponent, spectrum ------------------------------------

    def inverse(self, rcond_floor=RCOND_FLOOR):
        """Inverse bimatrix, computed through the complex lifting.

        Raises
        ------
        SingularBimatrixError
            If the lifting's reciprocal condition number falls below
            ``rcond_floor``.
        """
        if not self.is_square:
            raise DimensionError("only square bimatrices can be inverted")
        lift = self.complex_lifting()
        sv = np.linalg.svd(lift, compute_uv=False)
        if sv[0] == 0.0 or sv[-1] <= rcond_floor * sv[0]:
            rc = 0.0 if sv[0] == 0.0 else float(sv[-1] / sv[0])
            raise SingularBimatrixError(
                f"bimatrix is singular to working precision (rcond ~ {rc:.2e})"
            )
        n = self.rows
        rhs = np.vstack([np.eye(n), np.zeros((n, n))]).astype(complex)
        stack = np.linalg.solve(lift, rhs)
        return Bimatrix(stack[:n], stack[n:])

    def power(self, k):
        """``k``-fold composition with itself; ``k = 0`` gives the identity."""
        if not self.is_square:
            raise DimensionError("only square bimatrices can be raised to a power")
        k = int(k)
        if k < 0:
            raise ValueError("power expects k >= 0; compose inverse() explicitly")
        result = Bimatrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            k >>= 1
            if k:
                base = base @ base
        return result

    def expm(self, t=1.0):
        """Bimatrix exponential ``exp(t {A1, A2})``.

        Evaluated as the real matrix exponential of ``t`` times the real
        representation (Pade scaling-and-squaring), mapped back to a pair.
        """
        if not self.is_square:
            raise DimensionError("only square bimatrices have an exponential")
        rep = scipy.linalg.expm(float(t) * self.real_representation())
        return Bimatrix.from_real_representation(rep)

    def eigenvalues(self):
        """Eigenvalue multiset of the real representation (conjugate-closed)."""
        if not self.is_square:
            raise DimensionError("only square bimatrices have eigenvalues")
        return SpectrumSet(np.linalg.eigvals(self.real_representation()))

    # -- misc ----------------------------------------------------------------

    def allclose(self, other, rtol=1e-9, atol=1e-12):
        return (
            self.shape == other.shape
            and np.allclose(self.first, other.first, rtol=rtol, atol=atol)
            and np.allclose(self.second, other.second, rtol=rtol, atol=atol)
        )

    def __repr__(self):
        return f"Bimatrix(shape={self.shape})"


def _inverse_first_schur(bm):
    """Closed-form inverse assuming the first part is nonsingular."""
    a1, a2 = bm.first, bm.second
    a1ci = np.linalg.inv(np.conj(a1))
    s1 = a1 - np.conj(a2) @ a1ci @ a2
    s1i = np.linalg.inv(s1)
    return Bimatrix(s1i, -a1ci @ a2 @ s1i)


def _inverse_second_schur(bm):
    """Closed-form inverse assuming the second part is nonsingular."""
    a1, a2 = bm.first, bm.second
    a2i = np.linalg.inv(a2)
    s2 = np.conj(a2) - a1 @ a2i @ np.conj(a1)
    s2i = np.linalg.inv(s2)
    return Bimatrix(-a2i @ np.conj(a1) @ s2i, s2i)


def h_matrix(n):
    """Unitary ``(1/sqrt 2) [[I, jI], [I, -jI]]`` linking the two pictures.

    Satisfies ``H H^H = I`` and ``H H^T = e_matrix(n)``.
    """
    if n < 1:
        raise ValueError("h_matrix expects n >= 1")
    ey = np.eye(n)
    return np.block([[ey, 1j * ey], [ey, -1j * ey]]) / np.sqrt(2.0)


def e_matrix(n):
    """Block anti-identity ``[[0, I], [I, 0]]`` of order ``2n``."""
    ey = np.eye(n)
    z = np.zeros((n, n))
    return np.block([[z, ey], [ey, z]])


def arrow(x):
    """Stack real and imaginary parts: ``C^m -> R^(2m)``."""
    x = as_cvector(x)
    return np.concatenate([x.real, x.imag])


def unarrow(v):
    """Inverse of :func:`arrow`."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] % 2:
        raise DimensionError("arrow vector must have even length")
    m = v.shape[0] // 2
    return v[:m] + 1j * v[m:]


def breve(x):
    """Stack ``x`` and its conjugate with a ``1/sqrt 2`` factor (norm-preserving)."""
    x = as_cvector(x)
    return np.concatenate([x, np.conj(x)]) / np.sqrt(2.0)


def block_bimatrix(rows):
    """Assemble a bimatrix from a 2-D grid of bimatrix blocks."""
    firsts = [[bm.first for bm in row] for row in rows]
    seconds = [[bm.second for bm in row] for row in rows]
    return Bimatrix(np.block(firsts), np.block(seconds))


class HermiteBimatrix(Bimatrix):
    """Square pair ``{P1, P2}`` with ``P1`` Hermitian and ``P2`` symmetric.

    This is the self-adjoint class of bimatrices: the real representation is
    a symmetric real matrix and the real quadratic form
    ``Re(x^H (P1 x + conj(P2) conj(x)))`` is well defined.  Note that being
    Hermite does not by itself make ``x^H {P1,P2} x`` real.
    """

    __slots__ = ()

    def __init__(self, p1, p2=None, tol=HERMITE_RTOL):
        p1 = as_cmatrix(p1, "first part")
        if p2 is None:
            p2 = np.zeros_like(p1)
        super().__init__(p1, p2)
        if not self.is_square:
            raise DimensionError("Hermite bimatrix must be square")
        r1 = np.linalg.norm(self.first - self.first.conj().T)
        r2 = np.linalg.norm(self.second - self.second.T)
        if r1 > tol * max(1.0, np.linalg.norm(self.first)):
            raise ValueError("first part is not Hermitian within tolerance")
        if r2 > tol * max(1.0, np.linalg.norm(self.second)):
            raise ValueError("second part is not symmetric within tolerance")

    def is_positive_definite(self):
        return is_positive_definite(self)

    def quadratic_form(self, x):
        return quadratic_form_real(self, x)

    def __repr__(self):
        return f"HermiteBimatrix(shape={self.shape})"


def hermite_from_real_representation(mat, tol=HERMITE_RTOL):
    """Map a symmetric real ``2n x 2n`` matrix to its Hermite bimatrix."""
    bm = Bimatrix.from_real_representation(mat)
    return HermiteBimatrix(bm.first, bm.second, tol=tol)


def is_positive_definite(p, sym_rtol=HERMITE_RTOL, eig_rtol=PD_EIG_RTOL):
    """True iff the real representation of ``p`` is symmetric positive definite.

    Accepts any square bimatrix; a pair whose representation is not symmetric
    (i.e. not Hermite) is reported as not positive definite rather than as an
    error.
    """
    if not p.is_square:
        raise DimensionError("definiteness is defined for square bimatrices")
    rep = p.real_representation()
    if np.linalg.norm(rep - rep.T) > sym_rtol * max(1.0, np.linalg.norm(rep)):
        return False
    w = np.linalg.eigvalsh((rep + rep.T) / 2.0)
    scale = max(abs(float(w[0])), abs(float(w[-1])))
    return float(w[0]) > eig_rtol * scale


def quadratic_form_real(p, x):
    """Real quadratic form ``Re(x^H (P1 x + conj(P2) conj(x)))``.

    Equals ``arrow(x)^T  rep  arrow(x)`` where ``rep`` is the real
    representation of ``p``.
    """
    x = as_cvector(x)
    if x.shape[0] != p.cols:
        raise DimensionError(
            f"vector of length {x.shape[0]} incompatible with {p.shape} bimatrix"
        )
    return float(np.real(np.vdot(x, p.apply(x))))


# ---------------------------------------------------------------------------
# Eigenvalue multisets
# ---------------------------------------------------------------------------


def _pair_tol(value, rtol):
    return rtol * max(1.0, abs(value))


def _conjugate_pairing(values, rtol):
    """Pair values with their conjugates; returns indices left unpaired."""
    order = np.argsort(-np.abs(np.imag(values)))
    unpaired = []
    used = np.zeros(len(values), dtype=bool)
    for i in order:
        if used[i]:
            continue
        v = values[i]
        used[i] = True
        if abs(v.imag) <= _pair_tol(v, rtol):
            continue
        target = np.conj(v)
        best, best_d = -1, np.inf
        for j in range(len(values)):
            if used[j]:
                continue
            d = abs(values[j] - target)
            if d < best_d:
                best, best_d = j, d
        if best >= 0 and best_d <= _pair_tol(v, rtol):
            used[best] = True
        else:
            unpaired.append(i)
    return unpaired


def conjugate_complete(values, rtol=CONJ_PAIR_RTOL):
    """Append missing conjugates so the multiset becomes conjugate-closed."""
    vals = np.asarray(values, dtype=complex).reshape(-1)
    extra = [np.conj(vals[i]) for i in _conjugate_pairing(vals, rtol)]
    return np.concatenate([vals, np.asarray(extra, dtype=complex)]) if extra else vals


class SpectrumSet:
    """Multiset of complex eigenvalues, closed under conjugation.

    Construction validates closure (within a pairing tolerance that absorbs
    eigensolver noise) and sorts the values for deterministic output.
    """

    __slots__ = ("_values",)

    def __init__(self, values, pairing_rtol=CONJ_PAIR_RTOL):
        vals = np.sort_complex(np.asarray(values, dtype=complex).reshape(-1))
        if _conjugate_pairing(vals, pairing_rtol):
            raise SpectrumError(
                "eigenvalue multiset is not closed under conjugation"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "_values", vals)

    def __setattr__(self, name, value):
        raise AttributeError("SpectrumSet is immutable")

    @property
    def values(self):
        return self._values

    def __len__(self):
        return len(self._values)

    def __iter__(self):
        return iter(self._values)

    def max_real(self):
        return float(np.max(self._values.real))

    def max_modulus(self):
        return float(np.max(np.abs(self._values)))

    def matches(self, other, rtol=1e-6):
        """Multiset equality up to ``rtol * (1 + |value|)`` per element."""
        mine = list(self._values)
        theirs = list(np.asarray(getattr(other, "values", other), dtype=complex))
        if len(mine) != len(theirs):
            return False
        for v in mine:
            best, best_d = -1, np.inf
            for j, w in enumerate(theirs):
                d = abs(v - w)
                if d < best_d:
                    best, best_d = j, d
            if best < 0 or best_d > rtol * (1.0 + abs(v)):
                return False
            theirs.pop(best)
        return True

    def __repr__(self):
        return f"SpectrumSet({np.array2string(self._values, precision=4)})"


# ---------------------------------------------------------------------------
# JSON serialization: complex scalars are always [re, im] pairs
# ---------------------------------------------------------------------------


def cmatrix_to_json(a):
    a = as_cmatrix(a)
    data = [[float(v.real), float(v.imag)] for v in a.ravel()]
    return {"rows": int(a.shape[0]), "cols": int(a.shape[1]), "data": data}


def cmatrix_from_json(obj, name="matrix"):
    if not isinstance(obj, dict):
        raise ValueError(f"{name}: expected an object with rows/cols/data")
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except KeyError as exc:
        raise ValueError(f"{name}: missing field {exc}") from exc
    if rows < 1 or cols < 1:
        raise ValueError(f"{name}: rows and cols must be positive")
    if len(data) != rows * cols:
        raise ValueError(
            f"{name}: data holds {len(data)} entries, expected {rows * cols}"
        )
    flat = np.empty(rows * cols, dtype=complex)
    for i, pair in enumerate(data):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ValueError(f"{name}: entry {i} is not an [re, im] pair")
        flat[i] = complex(float(pair[0]), float(pair[1]))
    if not np.all(np.isfinite(flat)):
        raise ValueError(f"{name}: contains non-finite entries")
    return flat.reshape(rows, cols)


def cvector_to_json(x):
    x = as_cvector(x)
    return [[float(v.real), float(v.imag)] for v in x]


def cvector_from_json(obj, name="vector"):
    if not isinstance(obj, (list, tuple)):
        raise ValueError(f"{name}: expected a list of [re, im] pairs")
    vals = np.empty(len(obj), dtype=complex)
    for i, pair in enumerate(obj):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ValueError(f"{name}: entry {i} is not an [re, im] pair")
        vals[i] = complex(float(pair[0]), float(pair[1]))
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"{name}: contains non-finite entries")
    return vals


def bimatrix_to_json(bm):
    return {"first": cmatrix_to_json(bm.first), "second": cmatrix_to_json(bm.second)}


def bimatrix_from_json(obj, name="bimatrix"):
    if not isinstance(obj, dict) or "first" not in obj or "second" not in obj:
        raise ValueError(f"{name}: expected an object with first/second matrices")
    return Bimatrix(
        cmatrix_from_json(obj["first"], f"{name}.first"),
        cmatrix_from_json(obj["second"], f"{name}.second"),
    )
