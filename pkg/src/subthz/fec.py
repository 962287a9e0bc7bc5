"""Binary narrow-sense BCH codes of length 63 with hard-decision decoding.

GF(2^6) is generated by the primitive polynomial x^6 + x + 1.  Codewords are
systematic: the k message bits come first, the n - k parity bits last.  Bit i
of a codeword is the coefficient of x^(n-1-i).
"""
from functools import lru_cache
from typing import NamedTuple

import numpy as np

__all__ = ["BchCode", "DecodeResult", "code_table", "bch_encode", "bch_decode",
           "encode_stream", "decode_stream", "GF64"]

N = 63
M_BITS = 6
PRIMITIVE_POLY = 0b1000011


class GF64:
    exp = [0] * (2 * N)
    log = [0] * (N + 1)

    @classmethod
    def _build(cls):
        x = 1
        for i in range(N):
            cls.exp[i] = x
            cls.log[x] = i
            x <<= 1
            if x & (1 << M_BITS):
                x ^= PRIMITIVE_POLY
        for i in range(N, 2 * N):
            cls.exp[i] = cls.exp[i - N]

    @classmethod
    def mul(cls, a, b):
        if a == 0 or b == 0:
            return 0
        return cls.exp[cls.log[a] + cls.log[b]]

    @classmethod
    def inv(cls, a):
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in GF(64)")
        return cls.exp[(N - cls.log[a]) % N]

    @classmethod
    def pow_alpha(cls, e):
        return cls.exp[e % N]


GF64._build()


def _poly_mul_gf2(a, b):
    """Multiply GF(2) polynomials held as int bitmasks (bit i = x^i)."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _poly_mod_gf2(a, m):
    dm = m.bit_length() - 1
    while a and a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def _minimal_polynomial(e):
    """Minimal polynomial of alpha^e over GF(2), as an int bitmask."""
    coset = []
    x = e % N
    while x not in coset:
        coset.append(x)
        x = (2 * x) % N
    # product of (X - alpha^c) with coefficients in GF(64)
    poly = [1]
    for c in coset:
        root = GF64.pow_alpha(c)
        nxt = [0] * (len(poly) + 1)
        for i, p in enumerate(poly):
            nxt[i + 1] ^= p
            nxt[i] ^= GF64.mul(p, root)
        poly = nxt
    mask = 0
    for i, p in enumerate(poly):
        if p not in (0, 1):
            raise ArithmeticError("minimal polynomial has non-binary coefficient")
        mask |= p << i
    return mask, tuple(sorted(coset))


@lru_cache(maxsize=None)
def _generator(t):
    g = 1
    seen = set()
    for e in range(1, 2 * t + 1):
        mp, coset = _minimal_polynomial(e)
        if coset in seen:
            continue
        seen.add(coset)
        g = _poly_mul_gf2(g, mp)
    return g


class BchCode:
    """Narrow-sense BCH(63, k) correcting ``t`` errors; t=0 is uncoded."""

    def __init__(self, t):
        if t < 0:
            raise ValueError("t must be >= 0")
        self.n = N
        self.t = int(t)
        self.generator = _generator(self.t) if t else 1
        self.k = N - (self.generator.bit_length() - 1)
        if self.k <= 0:
            raise ValueError(f"t={t} leaves no message bits")

    @classmethod
    def from_k(cls, k):
        for kk, t, _ in code_table():
            if kk == k:
                return cls(t)
        raise ValueError(f"no BCH(63, {k}) code in the table")

    @property
    def rate(self):
        return self.k / self.n

    def __repr__(self):
        return f"BchCode(n={self.n}, k={self.k}, t={self.t})"


@lru_cache(maxsize=None)
def code_table(max_t=7):
    """(k, t, rate) rows from rate 1 down to the t=``max_t`` code."""
    rows = [(N, 0, 1.0)]
    last_k = N
    for t in range(1, max_t + 1):
        k = N - (_generator(t).bit_length() - 1)
        if k < last_k:
            rows.append((k, t, k / N))
            last_k = k
    return tuple(rows)


def _bits_to_poly(bits):
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


def _poly_to_bits(v, width):
    return np.array([(v >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def bch_encode(code, message):
    message = np.asarray(message).reshape(-1)
    if message.size != code.k:
        raise ValueError(f"message must have {code.k} bits, got {message.size}")
    if code.t == 0:
        return message.astype(np.uint8)
    r = code.n - code.k
    m = _bits_to_poly(message)
    parity = _poly_mod_gf2(m << r, code.generator)
    return np.concatenate([message.astype(np.uint8), _poly_to_bits(parity, r)])


class DecodeResult(NamedTuple):
    message: np.ndarray
    corrected: int
    failed: bool


def _syndromes(bits, count):
    # S_j = r(alpha^j); bit i carries x^(n-1-i)
    positions = [N - 1 - i for i, b in enumerate(bits) if b]
    out = []
    for j in range(1, count + 1):
        s = 0
        for p in positions:
            s ^= GF64.pow_alpha(j * p)
        out.append(s)
    return out


def _berlekamp_massey(S):
    """Error-locator coefficients [1, L1, L2, ...] over GF(64)."""
    C = [1]
    B = [1]
    L = 0
    m = 1
    b = 1
    for n in range(len(S)):
        d = S[n]
        for i in range(1, L + 1):
            if i < len(C):
                d ^= GF64.mul(C[i], S[n - i])
        if d == 0:
            m += 1
            continue
        coef = GF64.mul(d, GF64.inv(b))
        T = list(C)
        shifted = [0] * m + [GF64.mul(coef, x) for x in B]
        if len(shifted) > len(C):
            C = C + [0] * (len(shifted) - len(C))
        for i, x in enumerate(shifted):
            C[i] ^= x
        if 2 * L <= n:
            L = n + 1 - L
            B = T
            b = d
            m = 1
        else:
            m += 1
    while len(C) > 1 and C[-1] == 0:
        C.pop()
    return C, L


def _chien(locator):
    """Exponents p with locator(alpha^-p) = 0, i.e. error at x^p."""
    roots = []
    for p in range(N):
        x = GF64.pow_alpha(-p)
        acc = 0
        xp = 1
        for c in locator:
            acc ^= GF64.mul(c, xp)
            xp = GF64.mul(xp, x)
        if acc == 0:
            roots.append(p)
    return roots


def bch_decode(code, received):
    """Correct up to ``t`` errors.

    A failure (locator degree above t or not matching its root count) is
    returned as ``failed=True`` with the received systematic bits unchanged.
    """
    r = np.asarray(received).reshape(-1).astype(np.uint8)
    if r.size != code.n:
        raise ValueError(f"received word must have {code.n} bits, got {r.size}")
    if code.t == 0:
        return DecodeResult(r.copy(), 0, False)
    S = _syndromes(r, 2 * code.t)
    if not any(S):
        return DecodeResult(r[: code.k].copy(), 0, False)
    locator, L = _berlekamp_massey(S)
    degree = len(locator) - 1
    if degree > code.t or degree != L:
        return DecodeResult(r[: code.k].copy(), 0, True)
    roots = _chien(locator)
    if len(roots) != degree:
        return DecodeResult(r[: code.k].copy(), 0, True)
    fixed = r.copy()
    for p in roots:
        fixed[N - 1 - p] ^= 1
    if any(_syndromes(fixed, 2 * code.t)):
        return DecodeResult(r[: code.k].copy(), 0, True)
    return DecodeResult(fixed[: code.k], len(roots), False)


def encode_stream(code, bits):
    """Encode a bit stream whose length is a multiple of ``k``."""
    bits = np.asarray(bits).reshape(-1)
    if code.t == 0:
        return bits.astype(np.uint8)
    if bits.size % code.k:
        raise ValueError(f"stream length {bits.size} not a multiple of k={code.k}")
    if bits.size == 0:
        return bits.astype(np.uint8)
    return np.concatenate([bch_encode(code, b) for b in bits.reshape(-1, code.k)])


def decode_stream(code, bits):
    """Decode blockwise; returns ``(message bits, failed block count)``."""
    bits = np.asarray(bits).reshape(-1)
    if code.t == 0:
        return bits.astype(np.uint8), 0
    if bits.size % code.n:
        raise ValueError(f"stream length {bits.size} not a multiple of n={code.n}")
    out, failures = [], 0
    for block in bits.reshape(-1, code.n):
        res = bch_decode(code, block)
        out.append(res.message)
        failures += res.failed
    if not out:
        return np.zeros(0, dtype=np.uint8), 0
    return np.concatenate(out), failures
