"""Bell-scenario containers: scenarios, measurements, assemblages, correlations.

Index conventions (0-based internally):

* measurement assemblage ``povms[a, x]`` is the POVM element for outcome ``a``
  of setting ``x``;
* assemblage ``rho[a, x]`` is the subnormalised conditional state;
* bipartite correlation ``table[a, b, x, y] = P(a, b | x, y)``;
* tripartite correlation ``table[a, b, c, x, y, z]``;
* tripartite assemblage ``rho[a, b, x, y]``.
"""

from dataclasses import dataclass

import numpy as np

from .. import linalg

ASSEMBLAGE_TOL = 1e-9
NOSIG_TOL = 1e-8


class ValidationError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    """Numbers of settings and outcomes per party (2 or 3 parties)."""

    settings: tuple
    outcomes: tuple

    def __post_init__(self):
        if len(self.settings) not in (2, 3) or len(self.settings) != len(self.outcomes):
            raise ValidationError("a scenario has 2 or 3 parties")
        if min(self.settings) < 1 or min(self.outcomes) < 1:
            raise ValidationError("setting and outcome counts must be positive")

    @property
    def parties(self):
        return len(self.settings)

    @classmethod
    def bipartite(cls, n_x, n_y, n_a, n_b):
        return cls((n_x, n_y), (n_a, n_b))

    @property
    def label(self):
        """Compact ``n_x n_y n_a n_b`` label such as ``"2222"``."""
        return "".join(str(s) for s in self.settings) + "".join(str(o) for o in self.outcomes)


@dataclass
class MeasurementAssemblage:
    povms: np.ndarray

    def __post_init__(self):
        self.povms = np.asarray(self.povms, dtype=complex)
        if self.povms.ndim != 4 or self.povms.shape[2] != self.povms.shape[3]:
            raise ValidationError("povms must have shape (n_outcomes, n_settings, d, d)")

    @property
    def n_outcomes(self):
        return self.povms.shape[0]

    @property
    def n_settings(self):
        return self.povms.shape[1]

    @property
    def dim(self):
        return self.povms.shape[2]

    def __getitem__(self, ax):
        return self.povms[ax]

    def validate(self, tol=ASSEMBLAGE_TOL):
        eye = np.eye(self.dim)
        for x in range(self.n_settings):
            for a in range(self.n_outcomes):
                e = self.povms[a, x]
                if not linalg.is_hermitian(e, 1e-10):
                    raise ValidationError(f"E[{a}|{x}] is not Hermitian")
                if linalg.min_eig(e) < -tol:
                    raise ValidationError(f"E[{a}|{x}] is not positive semidefinite")
            if not np.allclose(self.povms[:, x].sum(axis=0), eye, atol=tol):
                raise ValidationError(f"setting {x} does not sum to the identity")
        return self

    def is_projective(self, tol=1e-8):
        return all(
            np.allclose(e @ e, e, atol=tol)
            for e in self.povms.reshape(-1, self.dim, self.dim)
        )

    def conjugated(self, u):
        """Apply ``E -> U E U†`` to every element."""
        return MeasurementAssemblage(np.einsum("ij,axjk,lk->axil", u, self.povms, u.conj()))

    @classmethod
    def from_settings(cls, settings):
        """Build from a list (over x) of lists (over a) of matrices."""
        n_x = len(settings)
        n_a = len(settings[0])
        d = np.asarray(settings[0][0]).shape[0]
        povms = np.zeros((n_a, n_x, d, d), dtype=complex)
        for x, outs in enumerate(settings):
            if len(outs) != n_a:
                raise ValidationError("all settings must have the same number of outcomes")
            for a, e in enumerate(outs):
                povms[a, x] = e
        return cls(povms)


@dataclass
class Assemblage:
    rho: np.ndarray

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=complex)
        if self.rho.ndim != 4 or self.rho.shape[2] != self.rho.shape[3]:
            raise ValidationError("assemblage must have shape (n_outcomes, n_settings, d, d)")

    @property
    def n_outcomes(self):
        return self.rho.shape[0]

    @property
    def n_settings(self):
        return self.rho.shape[1]

    @property
    def dim(self):
        return self.rho.shape[2]

    def reduced_state(self):
        """``ρ_B = Σ_a ρ_{a|x}`` averaged over ``x`` (identical for valid input)."""
        return self.rho.sum(axis=0).mean(axis=0)

    def marginals(self):
        """``P(a|x)`` as an array indexed ``[a, x]``."""
        return np.einsum("axii->ax", self.rho).real

    @property
    def is_real(self):
        return bool(np.all(np.abs(self.rho.imag) < 1e-14))

    def validate(self, tol=ASSEMBLAGE_TOL, nosig_tol=NOSIG_TOL):
        for a in range(self.n_outcomes):
            for x in range(self.n_settings):
                r = self.rho[a, x]
                if not linalg.is_hermitian(r, 1e-10):
                    raise ValidationError(f"rho[{a}|{x}] is not Hermitian")
                if linalg.min_eig(r) < -tol:
                    raise ValidationError(f"rho[{a}|{x}] is not positive semidefinite")
        tr = self.marginals().sum(axis=0)
        if not np.allclose(tr, 1.0, atol=tol):
            raise ValidationError("Σ_a tr rho[a|x] must be 1 for every x")
        sums = self.rho.sum(axis=0)
        if np.abs(sums - sums[0]).max() > nosig_tol:
            raise ValidationError("Σ_a rho[a|x] depends on x (signalling assemblage)")
        return self

    def mix(self, other, p):
        """``(1-p) self + p other``."""
        return Assemblage((1 - p) * self.rho + p * other.rho)


@dataclass
class TripartiteAssemblage:
    rho: np.ndarray

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=complex)
        if self.rho.ndim != 6:
            raise ValidationError("tripartite assemblage must have shape (n_a, n_b, n_x, n_y, d, d)")

    @property
    def dim(self):
        return self.rho.shape[-1]

    def validate(self, tol=ASSEMBLAGE_TOL, nosig_tol=NOSIG_TOL):
        n_a, n_b, n_x, n_y = self.rho.shape[:4]
        for idx in np.ndindex(n_a, n_b, n_x, n_y):
            if linalg.min_eig(self.rho[idx]) < -tol:
                raise ValidationError(f"rho{idx} is not positive semidefinite")
        tot = np.einsum("abxyii->xy", self.rho).real
        if not np.allclose(tot, 1.0, atol=tol):
            raise ValidationError("total trace must be 1 for every (x, y)")
        sa = self.rho.sum(axis=0)  # [b, x, y]
        if np.abs(sa - sa[:, :1]).max() > nosig_tol:
            raise ValidationError("Σ_a rho[ab|xy] depends on x")
        sb = self.rho.sum(axis=1)  # [a, x, y]
        if np.abs(sb - sb[:, :, :1]).max() > nosig_tol:
            raise ValidationError("Σ_b rho[ab|xy] depends on y")
        sab = self.rho.sum(axis=(0, 1))
        if np.abs(sab - sab[:1, :1]).max() > nosig_tol:
            raise ValidationError("Σ_ab rho[ab|xy] depends on (x, y)")
        return self

    def correlation(self, charlie):
        """``P(a,b,c|x,y,z) = tr(rho[ab|xy] E_{c|z})``."""
        return Correlation(np.einsum("abxyij,czji->abcxyz", self.rho, charlie.povms).real)

    def marginal_ab(self):
        return Correlation(np.einsum("abxyii->abxy", self.rho).real)


@dataclass
class Correlation:
    table: np.ndarray

    def __post_init__(self):
        self.table = np.asarray(self.table, dtype=float)
        if self.table.ndim not in (4, 6):
            raise ValidationError("correlation table must have 4 (bipartite) or 6 (tripartite) axes")

    @property
    def parties(self):
        return self.table.ndim // 2

    @property
    def scenario(self):
        k = self.parties
        return Scenario(tuple(self.table.shape[k:]), tuple(self.table.shape[:k]))

    @property
    def shape(self):
        return self.table.shape

    def marginal_a(self):
        """``P(a|x)`` indexed ``[a, x]`` (averaged over the other settings)."""
        if self.parties == 2:
            return self.table.sum(axis=1).mean(axis=2)
        return self.table.sum(axis=(1, 2)).mean(axis=(2, 3))

    def marginal_b(self):
        """``P(b|y)`` indexed ``[b, y]``."""
        if self.parties == 2:
            return self.table.sum(axis=0).mean(axis=1)
        return self.table.sum(axis=(0, 2)).mean(axis=(1, 3))

    def swapped(self):
        """Exchange the roles of the first two parties."""
        if self.parties != 2:
            raise ValidationError("swap is defined for bipartite correlations")
        return Correlation(self.table.transpose(1, 0, 3, 2))

    def is_nonsignalling(self, tol=1e-9):
        t = self.table
        if self.parties == 2:
            pa = t.sum(axis=1)  # [a, x, y]
            pb = t.sum(axis=0)  # [b, x, y]
            return (np.abs(pa - pa[:, :, :1]).max() <= tol
                    and np.abs(pb - pb[:, :1, :]).max() <= tol)
        n = t.ndim // 2
        for party in range(n):
            marg = t.sum(axis=party)
            setting_axis = n - 1 + party
            if np.abs(marg - marg.take([0], axis=setting_axis)).max() > tol:
                return False
        return True

    def validate(self, tol=1e-9, neg_tol=1e-12):
        t = self.table
        k = self.parties
        if t.min() < -neg_tol:
            raise ValidationError("negative probability")
        norms = t.sum(axis=tuple(range(k)))
        if not np.allclose(norms, 1.0, atol=tol):
            raise ValidationError("probabilities do not sum to one for every setting")
        if not self.is_nonsignalling(tol):
            raise ValidationError("correlation is signalling")
        return self

    def mix(self, other, p):
        return Correlation((1 - p) * self.table + p * other.table)
