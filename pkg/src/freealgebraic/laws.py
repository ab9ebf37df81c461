"""
Univariate laws given by moments or free cumulants.

Moments and free cumulants are linked through the modified R-transform
``R(z) = z + sum_n kappa_n z**(1-n)``, characterised by
``(1/S) o R = z`` where ``S(z) = sum_n m_n z**(-n-1)`` is the Stieltjes
transform.  Conversions here go through that compositional identity;
:func:`ht_oracle_moments` is an independent route via powers of a
Hessenberg-Toeplitz matrix.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from .errors import InsufficientOrder, NotAState, UnknownPreset
from .series import TruncLaurent, as_scalar, comp_inverse, inv

__all__ = [
    "Law",
    "stieltjes",
    "cumulants_to_moments",
    "moments_to_cumulants",
    "ht_oracle_moments",
    "hessenberg_toeplitz",
    "preset",
    "PRESETS",
]


def _r_transform(kappa, M):
    """Modified R-transform through ``kappa_M``; exact at exponents >= 1 - M."""
    coeffs = {1: 1}
    for n in range(1, M + 1):
        c = kappa[n - 1]
        if c:
            coeffs[1 - n] = c
    return TruncLaurent(coeffs, 1 - M)


def cumulants_to_moments(kappa, M):
    """
    Moments ``m_0..m_M`` of the law with free cumulants ``kappa_1..kappa_M``.

    ``kappa`` is indexed from order 1: ``kappa[0]`` is the first cumulant.
    """
    if M < 0:
        raise ValueError("M must be nonnegative")
    kappa = [as_scalar(k) for k in kappa]
    if len(kappa) < M:
        raise InsufficientOrder(f"need {M} cumulants, got {len(kappa)}")
    if M == 0:
        return [Fraction(1)]
    recip_s = comp_inverse(_r_transform(kappa, M), 1 - M)
    s = inv(recip_s, -M - 1)
    return [s.coeff(-n - 1) for n in range(M + 1)]


def moments_to_cumulants(m, M=None):
    """Free cumulants ``kappa_1..kappa_M`` from moments ``m_0..m_M``."""
    m = [as_scalar(x) for x in m]
    if M is None:
        M = len(m) - 1
    if not m or m[0] != 1:
        raise NotAState("a state must have m_0 = 1")
    if len(m) < M + 1:
        raise InsufficientOrder(f"need moments through order {M}, got {len(m) - 1}")
    if M == 0:
        return []
    s = TruncLaurent({-n - 1: m[n] for n in range(M + 1)}, -M - 1)
    r = comp_inverse(inv(s), 1 - M)
    return [r.coeff(1 - n) for n in range(1, M + 1)]


def hessenberg_toeplitz(kappa, size):
    """
    Square truncation of the Hessenberg-Toeplitz matrix: ones on the
    subdiagonal and ``kappa_j`` along the ``(j-1)``-th superdiagonal.
    """
    kappa = [as_scalar(k) for k in kappa]
    H = [[Fraction(0)] * size for _ in range(size)]
    for i in range(size):
        if i + 1 < size:
            H[i + 1][i] = Fraction(1)
        for j in range(1, size - i + 1):
            if j - 1 < len(kappa):
                H[i][i + j - 1] = kappa[j - 1]
    return H


def ht_oracle_moments(kappa, M):
    """
    Moments as ``(H**k)[0][0]`` for ``k = 0..M``.

    The ``(M+1) x (M+1)`` truncation suffices: a length-``k`` path from 0
    back to 0 can descend by one step at a time only, so it never passes
    index ``k // 2``.
    """
    size = M + 1
    H = hessenberg_toeplitz(list(kappa)[:size] + [0] * max(0, size - len(kappa)), size)
    vec = [Fraction(0)] * size
    vec[0] = Fraction(1)
    out = [Fraction(1)]
    # row vector e_0^T H^k
    for _ in range(M):
        vec = [sum(vec[i] * H[i][j] for i in range(size) if vec[i]) for j in range(size)]
        out.append(vec[0])
    return out


class Law:
    """
    A univariate law known through moments, free cumulants, or a closed form.

    Parameters
    ----------
    moments : sequence, optional
        ``m_0, m_1, ..., m_M`` with ``m_0 = 1``.
    cumulants : sequence, optional
        ``kappa_1, ..., kappa_M``.
    cumulant_fn, moment_fn : callable, optional
        Closed forms ``n -> kappa_n`` or ``n -> m_n``; a law with one of
        these has unbounded order.
    name : str, optional
        Preset tag.

    Examples
    --------
    >>> Law(cumulants=[0, 1]).moments_upto(4)
    [Fraction(1, 1), Fraction(0, 1), Fraction(1, 1), Fraction(0, 1), Fraction(2, 1)]
    """

    def __init__(self, moments=None, cumulants=None, *, cumulant_fn=None,
                 moment_fn=None, name=None, params=None):
        sources = sum(x is not None for x in (moments, cumulants, cumulant_fn, moment_fn))
        if sources != 1:
            raise ValueError("give exactly one of moments, cumulants, cumulant_fn, moment_fn")
        self.name = name
        self.params = dict(params or {})
        self._moments = None
        self._cumulants = None
        self._cumulant_fn = cumulant_fn
        self._moment_fn = moment_fn
        if moments is not None:
            m = [as_scalar(x) for x in moments]
            if not m or m[0] != 1:
                raise NotAState("a state must have m_0 = 1")
            self._moments = m
            self.order = len(m) - 1
        elif cumulants is not None:
            self._cumulants = [as_scalar(x) for x in cumulants]
            self.order = len(self._cumulants)
        else:
            self.order = None
        self._cache_m = None
        self._cache_k = None

    @property
    def moments(self):
        """Moments through the stored order (requires a finite law)."""
        return self.moments_upto(self._finite_order())

    @property
    def cumulants(self):
        return self.cumulants_upto(self._finite_order())

    def _finite_order(self):
        if self.order is None:
            raise InsufficientOrder("closed-form law has no finite order; use moments_upto")
        return self.order

    def _need(self, M):
        if self.order is not None and M > self.order:
            raise InsufficientOrder(
                f"law{'' if self.name is None else ' ' + self.name} known through order "
                f"{self.order}, {M} requested")

    def moments_upto(self, M):
        """``[m_0, ..., m_M]``."""
        self._need(M)
        if self._cache_m is not None and len(self._cache_m) > M:
            return self._cache_m[:M + 1]
        if self._moments is not None:
            m = self._moments[:M + 1]
        elif self._moment_fn is not None:
            m = [as_scalar(self._moment_fn(n)) for n in range(M + 1)]
        else:
            m = cumulants_to_moments(self.cumulants_upto(M), M)
        self._cache_m = m
        return list(m)

    def cumulants_upto(self, M):
        """``[kappa_1, ..., kappa_M]``."""
        self._need(M)
        if self._cache_k is not None and len(self._cache_k) >= M:
            return self._cache_k[:M]
        if self._cumulants is not None:
            k = self._cumulants[:M]
        elif self._cumulant_fn is not None:
            k = [as_scalar(self._cumulant_fn(n)) for n in range(1, M + 1)]
        else:
            k = moments_to_cumulants(self.moments_upto(M), M)
        self._cache_k = k
        return list(k)

    def cumulant(self, n):
        return self.cumulants_upto(n)[n - 1]

    def cumulant_support(self, M):
        """Orders ``<= M`` with a nonzero free cumulant."""
        return [n for n, c in enumerate(self.cumulants_upto(M), start=1) if c]

    def __repr__(self):
        tag = self.name or "Law"
        return f"<{tag} order={self.order}>"


def stieltjes(law, T):
    """``S(z) = sum_n m_n z**(-n-1)`` with coefficients exact down to ``z**-T``."""
    m = law.moments_upto(T - 1) if T >= 1 else []
    return TruncLaurent({-n - 1: m[n] for n in range(len(m))}, -T)


def _semicircle(params):
    var = as_scalar(params.get("variance", params.get("sigma2", 1)))
    return Law(cumulant_fn=lambda n: var if n == 2 else 0, name="semicircle",
               params={"variance": var})


def _bernoulli(params):
    return Law(moment_fn=lambda n: 1 if n % 2 == 0 else 0, name="bernoulli_pm1")


def _free_poisson(params):
    lam = as_scalar(params.get("rate", params.get("lambda", 1)))
    return Law(cumulant_fn=lambda n: lam, name="free_poisson", params={"rate": lam})


def _point_mass(params):
    c = as_scalar(params.get("c", params.get("value", 0)))
    return Law(cumulant_fn=lambda n: c if n == 1 else 0, name="point_mass", params={"c": c})


PRESETS = {
    "semicircle": _semicircle,
    "bernoulli_pm1": _bernoulli,
    "free_poisson": _free_poisson,
    "point_mass": _point_mass,
}


def preset(name, params=None):
    """
    Named law.

    ``semicircle`` (``variance``), ``bernoulli_pm1``, ``free_poisson``
    (``rate``, cumulants all equal to it) and ``point_mass`` (``c``).
    """
    try:
        factory = PRESETS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return factory(params or {})


def central_binomial(k):
    return comb(2 * k, k)
