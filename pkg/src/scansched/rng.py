"""Portable deterministic random number generation.

Workload generation must reproduce bit-identical sequences for a given seed on
every platform, so nothing here goes through platform libm or a float
accumulator. The generator is SplitMix64 (public-domain constants below) and
every distribution is sampled in exact integer or rational arithmetic:

* uniform integers use bit-level rejection sampling,
* Poisson counts use the product method against an exact rational threshold
  for exp(-mean),
* exponential gaps evaluate -ln(u) with an integer-only series.

The only approximation anywhere is a deterministic truncation of series sums
to a fixed dyadic grid, which is itself exact integer arithmetic.
"""

from __future__ import annotations

from fractions import Fraction

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# Series sums are truncated onto this dyadic grid; plenty for double-accuracy
# comparisons while keeping downstream Fraction denominators small.
_GRID_BITS = 64
_SERIES_BITS = 96


class SplitMix64:
    """SplitMix64 sequence generator.

    The state advances by the 64-bit golden gamma and each output is the
    standard two-round xor-multiply finalizer. Output n depends only on
    (seed, n), so streams are reproducible everywhere.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def bits(self, k: int) -> int:
        """Top k bits of the next output, 1 <= k <= 64."""
        if not 1 <= k <= 64:
            raise ValueError("bit count must be in [1, 64]")
        return self.next_u64() >> (64 - k)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], unbiased via rejection sampling."""
        if lo > hi:
            raise ValueError("empty integer range")
        span = hi - lo + 1
        if span == 1:
            return lo
        k = (span - 1).bit_length()
        while True:
            v = self.bits(k)
            if v < span:
                return lo + v

    def unit_open_closed(self) -> Fraction:
        """Uniform rational in (0, 1] on the 2^-53 grid."""
        return Fraction(self.bits(53) + 1, 1 << 53)

    def uniform(self, lo: Fraction, hi: Fraction) -> Fraction:
        """Uniform rational in [lo, hi) on a 2^-53 grid of the interval."""
        if hi < lo:
            raise ValueError("empty interval")
        return lo + (hi - lo) * Fraction(self.bits(53), 1 << 53)

    def choice(self, seq):
        return seq[self.randint(0, len(seq) - 1)]


def _truncate(x: Fraction, bits: int = _GRID_BITS) -> Fraction:
    scaled = (x.numerator << bits) // x.denominator
    return Fraction(scaled, 1 << bits)


def _atanh(z: Fraction, bits: int) -> Fraction:
    # atanh(z) = z + z^3/3 + z^5/5 + ...; geometric tail bound with ratio z^2.
    term = z
    zz = z * z
    total = Fraction(0)
    k = 1
    eps = Fraction(1, 1 << bits)
    while term >= eps * k:
        total += term / k
        term *= zz
        k += 2
    return total


def _ln2(bits: int = _SERIES_BITS) -> Fraction:
    return 2 * _atanh(Fraction(1, 3), bits)


_LN2 = _ln2()


def ln_fraction(u: Fraction) -> Fraction:
    """Natural log of a positive rational, truncated to the 2^-64 grid.

    Decomposes u = m * 2^e with m in [1, 2) and evaluates ln m through the
    atanh series, so every intermediate value is an exact rational.
    """
    if u <= 0:
        raise ValueError("ln requires a positive argument")
    e = u.numerator.bit_length() - u.denominator.bit_length()
    m = u / Fraction(2) ** e
    if m < 1:
        m *= 2
        e -= 1
    z = (m - 1) / (m + 1)
    val = e * _LN2 + 2 * _atanh(z, _SERIES_BITS)
    return _truncate(val)


def exp_neg_threshold(lam: Fraction) -> Fraction:
    """Rational approximation of exp(-lam), lam >= 0, on the 2^-64 grid.

    Sums the all-positive series for exp(lam) and inverts it, avoiding the
    cancellation of the alternating series.
    """
    if lam < 0:
        raise ValueError("rate must be non-negative")
    if lam == 0:
        return Fraction(1)
    term = Fraction(1)
    total = Fraction(1)
    k = 1
    eps = Fraction(1, 1 << _SERIES_BITS)
    while term > total * eps:
        term = term * lam / k
        total += term
        k += 1
    return _truncate(1 / total)


class PoissonSampler:
    """Product-method Poisson sampler with an exact rational threshold."""

    __slots__ = ("mean", "_threshold")

    def __init__(self, mean: Fraction) -> None:
        if mean <= 0:
            raise ValueError("Poisson mean must be positive")
        self.mean = mean
        self._threshold = exp_neg_threshold(mean)

    def sample(self, rng: SplitMix64) -> int:
        k = 0
        p = Fraction(1)
        while True:
            p *= rng.unit_open_closed()
            if p <= self._threshold:
                return k
            k += 1


def exponential_gap(rng: SplitMix64, rate: Fraction) -> Fraction:
    """One exponential interarrival gap, -ln(U)/rate, as an exact rational."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    u = rng.unit_open_closed()
    return -ln_fraction(u) / rate


def derive_seed(master: int, index: int) -> int:
    """Stable per-configuration seed derived from a master seed."""
    g = SplitMix64((master ^ (index * _GAMMA)) & _MASK64)
    return g.next_u64()
