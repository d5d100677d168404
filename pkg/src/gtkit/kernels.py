"""Mellin-Barnes kernels for ranks 3 and 4 and their difference equations.

The rank-3 kernel is a closed product of gamma_c factors; the rank-4
kernel multiplies a gamma_c prefactor by the 4G4 hypergeometric value at
unity.  Every difference equation is checked in ratio form (divide by
the base kernel), with all 4G4 evaluations sharing one master grid and
one contour, and exact gamma_c recurrences supplying the prefactor
ratios.

The antiholomorphic system is not displayed in the source material; it
is derived here by transporting the antiholomorphic Mellin-side system
through the same prefactor used for the holomorphic one.  Relative to
the holomorphic equations the sign changes are: eq-1 flips the left side
and the two correction terms; eq-2/eq-3 flip the mixed-shift term and
the right side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .complexfield import (
    GVal,
    MBGrid,
    PoleError,
    QuadConfig,
    check_contiguous,
    gamma_c_log,
    gamma_c_shift_ratio,
)
from .report import ResidualReport, timed_report
from .schemes import DoubleIndex, GTScheme, ReprParams

__all__ = [
    "ExponentSet",
    "KernelValue",
    "exponents_b",
    "kernel_gl3",
    "kernel_gl4",
    "KernelGl4Family",
    "residual_kernel_system",
    "residual_c_conditions",
    "sample_scheme",
    "sample_gamma_gl3",
    "sample_gl4_pair",
    "GL4_WEIGHT_OFFSETS",
]

ONE = DoubleIndex(1, 1)
ZERO = DoubleIndex(0, 0)


@dataclass
class ExponentSet:
    """Power-function exponents of the rank recursion ansatz."""

    n: int
    b: dict  # i -> DoubleIndex, i = 3..n
    leading: DoubleIndex  # exponent of z_21


def exponents_b(gamma: GTScheme, lam: GTScheme) -> ExponentSet:
    """Exponents b_i from the level sums of the inner and outer schemes.

    ``gamma`` is the rank n-1 scheme whose free levels are the integration
    parameters; ``lam`` the rank-n scheme of the target eigenfunction.
    """
    n = lam.n
    if gamma.n != n - 1:
        raise ValueError("inner scheme must have rank n-1")
    b: dict = {}
    for i in range(3, n):
        b[i] = (
            gamma.level_sum(i - 2)
            - gamma.level_sum(i - 1)
            - lam.level_sum(i - 1)
            + lam.level_sum(i)
            - ONE
        )
    sigma1 = lam.params.sigma(1)
    b[n] = gamma.level_sum(n - 2) - lam.level_sum(n - 1) + sigma1 - ONE
    lead = sigma1 - (n - 1) - lam.value(1, 1)
    for i in range(3, n + 1):
        lead = lead - b[i]
    return ExponentSet(n, b, lead)


@dataclass
class KernelValue:
    """Kernel value in log form (gamma_c factors overflow doubles fast)."""

    log_value: complex
    provenance: str
    err_estimate: float = 0.0

    @property
    def value(self) -> complex:
        return complex(np.exp(self.log_value))


def _level_sign(s: GTScheme, l: int) -> int:
    """(-1)**(sum of integer parts at level l), from exact integers."""
    return -1 if s.int_sum(l) % 2 else 1


def kernel_gl3(gamma11: DoubleIndex, s: GTScheme) -> KernelValue:
    """Closed-form rank-3 kernel (sign)  *  gamma_c products."""
    if s.n != 3:
        raise ValueError("rank-3 scheme required")
    lam11 = s.value(1, 1)
    lam2 = s.level(2)
    arg0 = gamma11 + lam11 - lam2[0] - lam2[1] + ONE
    log = gamma_c_log(arg0)
    for l in lam2:
        log += gamma_c_log(l - gamma11)
    sign = _level_sign(s, 2)
    if sign < 0:
        log += 1j * math.pi
    return KernelValue(log, "gl3-closed-form")


def c_norm_log(s: GTScheme) -> complex:
    """log of the rank-4 normalization c: sign times prod gamma_c(lam3j - sigma1 + 1)."""
    if s.n != 4:
        raise ValueError("rank-4 scheme required")
    sigma1 = s.params.sigma(1)
    log = 0.0 + 0.0j
    for j in range(1, 4):
        log += gamma_c_log(s.value(3, j) - sigma1 + ONE)
    if (1 + s.int_sum(2)) % 2:
        log += 1j * math.pi
    return log


class KernelGl4Family:
    """Rank-4 kernel and its integer-shift family on one shared 4G4 grid.

    gamma = (g11, g21, g22); the 4G4 parameter slots are
    a = (lam21, lam22, g21, g22), b = (1-lam31, 1-lam32, 1-lam33, -g11).
    Shifts are dicts {(level, pos): (dh, da)} with level in {1, 2} of the
    inner scheme data, e.g. {(1, 1): (-1, 0)} for g11 -> g11 - 1.
    """

    def __init__(self, gamma: Sequence[DoubleIndex], s: GTScheme, cfg: QuadConfig):
        if s.n != 4:
            raise ValueError("rank-4 scheme required")
        self.s = s
        self.g11, self.g21, self.g22 = gamma
        self.cfg = cfg
        self.lam2 = s.level(2)
        self.lam3 = s.level(3)
        a_list = [self.lam2[0], self.lam2[1], self.g21, self.g22]
        b_list = [ONE - x for x in self.lam3] + [ZERO - self.g11]
        # the designed sample line; ladder poles pushed across it (by the
        # whole-unit weight offsets or by shifts) are residue-corrected
        delta = 2.0 - s.params.kappa
        self.grid = MBGrid(
            a_list,
            b_list,
            1.0,
            cfg,
            delta=delta,
            k_max=cfg.inner_k_max,
            n_nodes=cfg.inner_nodes,
        )
        self.G0 = self.grid.value()
        if abs(self.G0.value) == 0.0:
            raise PoleError("vanishing base 4G4 value")

    @staticmethod
    def _norm(shifts: Optional[dict]) -> dict:
        out = {(1, 1): (0, 0), (2, 1): (0, 0), (2, 2): (0, 0)}
        for key, d in (shifts or {}).items():
            out[key] = d
        return out

    def g_shifts(self, shifts: Optional[dict]):
        sh = self._norm(shifts)
        a_shifts = {}
        b_shifts = {}
        if sh[(2, 1)] != (0, 0):
            a_shifts[2] = sh[(2, 1)]
        if sh[(2, 2)] != (0, 0):
            a_shifts[3] = sh[(2, 2)]
        d11 = sh[(1, 1)]
        if d11 != (0, 0):
            b_shifts[3] = (-d11[0], -d11[1])
        return a_shifts, b_shifts

    def prefactor_log_ratio(self, shifts: Optional[dict]) -> complex:
        """Exact log ratio of everything except the 4G4 under the shifts."""
        sh = self._norm(shifts)
        d11, d21, d22 = sh[(1, 1)], sh[(2, 1)], sh[(2, 2)]
        log = 0.0 + 0.0j
        # sign (-1)^(sum of gamma2 windings): flips per unit shift
        flips = sum(abs(x) for x in d21) + sum(abs(x) for x in d22)
        if flips % 2:
            log += 1j * math.pi
        # Vandermonde (g21 - g22)(g21bar - g22bar)
        num = (self.g21.hol + d21[0] - self.g22.hol - d22[0]) * (
            self.g21.anti + d21[1] - self.g22.anti - d22[1]
        )
        den = (self.g21.hol - self.g22.hol) * (self.g21.anti - self.g22.anti)
        log += np.log(num / den)
        # gamma_c(A), A = g11 + lam11 - sum lam2 + 1: shifts with d11
        lam11 = self.s.value(1, 1)
        A = self.g11 + lam11 - self.lam2[0] - self.lam2[1] + ONE
        log += np.log(gamma_c_shift_ratio(A.hol, A.anti, d11[0], d11[1]))
        # gamma_c(B), B = -g11 + sum g2 + sum lam2 - sum lam3 + 1
        B = (
            ZERO
            - self.g11
            + self.g21
            + self.g22
            + self.lam2[0]
            + self.lam2[1]
            - self.lam3[0]
            - self.lam3[1]
            - self.lam3[2]
            + ONE
        )
        dB = (-d11[0] + d21[0] + d22[0], -d11[1] + d21[1] + d22[1])
        log += np.log(gamma_c_shift_ratio(B.hol, B.anti, dB[0], dB[1]))
        # prod_{l,j} gamma_c(lam3l - g2j)
        for lam3l in self.lam3:
            for g2, d in ((self.g21, d21), (self.g22, d22)):
                arg = lam3l - g2
                log += np.log(gamma_c_shift_ratio(arg.hol, arg.anti, -d[0], -d[1]))
        return log

    def ratio(self, shifts: Optional[dict]) -> complex:
        """K_(gamma + shifts) / K_gamma, shared grid and contour."""
        a_sh, b_sh = self.g_shifts(shifts)
        g = self.grid.value(a_sh, b_sh)
        return complex(np.exp(self.prefactor_log_ratio(shifts))) * (
            g.value / self.G0.value
        )

    def kernel_log(self) -> complex:
        """log K_gamma itself (includes the normalization c)."""
        log = c_norm_log(self.s)
        lam11 = self.s.value(1, 1)
        A = self.g11 + lam11 - self.lam2[0] - self.lam2[1] + ONE
        B = (
            ZERO
            - self.g11
            + self.g21
            + self.g22
            + self.lam2[0]
            + self.lam2[1]
            - self.lam3[0]
            - self.lam3[1]
            - self.lam3[2]
            + ONE
        )
        log += gamma_c_log(A) + gamma_c_log(B)
        for lam3l in self.lam3:
            for g2 in (self.g21, self.g22):
                log += gamma_c_log(lam3l - g2)
        sign = 1 if (self.g21.winding + self.g22.winding) % 2 == 0 else -1
        if sign < 0:
            log += 1j * math.pi
        num = (self.g21.hol - self.g22.hol) * (self.g21.anti - self.g22.anti)
        log += np.log(num)
        log += np.log(self.G0.value)
        return log


def kernel_gl4(gamma: Sequence[DoubleIndex], s: GTScheme, cfg: QuadConfig) -> KernelValue:
    """Rank-4 kernel value: normalization x prefactor x 4G4 at unity."""
    fam = KernelGl4Family(gamma, s, cfg)
    return KernelValue(fam.kernel_log(), "gl4-4g4", fam.G0.abs_err_estimate)


# -- samples ------------------------------------------------------------------

# Continuous-part weight offsets for rank-4 samples.  The fractional parts
# keep every pole ladder at distance >= ~0.3 from the shared 4G4 contour
# under all unit shifts of the system; the extra whole units on the level-3
# weights push the decay exponent down to ~ -5.9 so that every shifted
# evaluation converges absolutely (the ladder poles they move across the
# line are restored by the residue corrections).
GL4_WEIGHT_OFFSETS = {
    "lam2": (0.35, 0.40),
    "lam3": (1.65, 1.60, 1.55),
    "gam2": (0.35, 0.45),
    "gam11": -0.35,
}


def sample_scheme(n: int, rng, kappa: Optional[float] = None, weight_offsets: Optional[dict] = None) -> GTScheme:
    """Random nondegenerate lattice scheme; optional per-level weight offsets."""
    kappa = rng.uniform(-1.0, 1.0) if kappa is None else kappa
    s_ints = [int(x) for x in rng.integers(-3, 4, n)]
    eta = [float(x) for x in rng.uniform(-2.0, 2.0, n)]
    params = ReprParams(n, tuple(s_ints), kappa, tuple(eta))
    ints, reals = [], []
    for l in range(1, n):
        ints.append([int(x) for x in rng.integers(-3, 4, l)])
        mu = rng.uniform(-2.0, 2.0, l)
        offs = np.zeros(l)
        if weight_offsets is not None and l in weight_offsets:
            offs = -np.asarray(weight_offsets[l])  # weight shift w += x is mu -= i x
        reals.append([complex(m) + 1j * o for m, o in zip(mu, offs)])
    s = GTScheme(params, ints, reals)
    if s.is_degenerate():
        return sample_scheme(n, rng, kappa, weight_offsets)
    return s


def sample_gamma_gl3(rng, kappa: float) -> DoubleIndex:
    """gamma11 on the rank-2 orthogonal lattice for the rank-3 kernel."""
    k = int(rng.integers(-3, 4))
    v = float(rng.uniform(-2.0, 2.0))
    return DoubleIndex((k + kappa - 1 + 1j * v) / 2, (-k + kappa - 1 + 1j * v) / 2)


def sample_gl4_pair(rng, kappa: float = 0.3):
    """A rank-4 scheme plus inner-parameter triple with contour-safe offsets."""
    offs = GL4_WEIGHT_OFFSETS
    s = sample_scheme(
        4,
        rng,
        kappa=kappa,
        weight_offsets={2: offs["lam2"], 3: offs["lam3"]},
    )

    def gam(lvl, off):
        k = int(rng.integers(-2, 3))
        v = float(rng.uniform(-1.5, 1.5))
        w = kappa - 3 + lvl + off
        return DoubleIndex((k + w + 1j * v) / 2, (-k + w + 1j * v) / 2)

    g11 = gam(1, offs["gam11"])
    g21 = gam(2, offs["gam2"][0])
    g22 = gam(2, offs["gam2"][1])
    if abs(g21.hol - g22.hol) < 0.15 or abs(g21.anti - g22.anti) < 0.15:
        return sample_gl4_pair(rng, kappa)
    return s, (g11, g21, g22)


# -- residual suites ------------------------------------------------------------


def _rank3_ratio_residuals(s: GTScheme, g11: DoubleIndex):
    """Relative residuals of the two rank-3 difference equations at one sample."""
    lam11 = s.value(1, 1)
    lam2 = s.level(2)
    k0 = kernel_gl3(g11, s).log_value
    km_h = kernel_gl3(g11 - DoubleIndex(1, 0), s).log_value
    km_a = kernel_gl3(g11 - DoubleIndex(0, 1), s).log_value
    ratio_h = complex(np.exp(km_h - k0))
    want_h = ((g11.hol - lam2[0].hol) * (g11.hol - lam2[1].hol)) / (
        g11.hol + lam11.hol - lam2[0].hol - lam2[1].hol
    )
    ratio_a = complex(np.exp(km_a - k0))
    want_a = -((g11.anti - lam2[0].anti) * (g11.anti - lam2[1].anti)) / (
        g11.anti + lam11.anti - lam2[0].anti - lam2[1].anti
    )
    rh = abs(ratio_h - want_h) / max(abs(want_h), 1.0)
    ra = abs(ratio_a - want_a) / max(abs(want_a), 1.0)
    return rh, ra


def _too_close_to_pole_gl3(s: GTScheme, g11: DoubleIndex, tol: float = 1e-9) -> bool:
    """Reject samples with any gamma_c argument within tol of a pole."""
    lam11 = s.value(1, 1)
    lam2 = s.level(2)
    checks = []
    for d in ((0, 0), (-1, 0), (0, -1)):
        g = g11 + DoubleIndex(*d)
        checks += [g + lam11 - lam2[0] - lam2[1] + ONE, lam2[0] - g, lam2[1] - g]
    for a in checks:
        for w in (a.hol, 1 - a.anti):
            r = round(w.real)
            if r <= 0 and abs(w - r) < tol:
                return True
    den = g11.hol + lam11.hol - lam2[0].hol - lam2[1].hol
    dena = g11.anti + lam11.anti - lam2[0].anti - lam2[1].anti
    return min(abs(den), abs(dena)) < 1e-6


def residual_kernel_system(
    rank: int,
    samples: int = 20,
    seed: int = 7,
    cfg: Optional[QuadConfig] = None,
    scheme: Optional[GTScheme] = None,
    report: Optional[ResidualReport] = None,
) -> ResidualReport:
    """Difference-equation residuals for the rank-3 or rank-4 kernel.

    Rank 3 checks the closed-form kernel against its equation and the
    sign-flipped antiholomorphic analogue on random lattice samples; rank
    4 checks all three equations of the system and the three
    antiholomorphic ones, every term sharing one 4G4 master grid.
    """
    cfg = cfg or QuadConfig()
    rep = report or ResidualReport(suite=f"kernel-gl{rank}")
    rng = np.random.default_rng(seed)
    with timed_report(rep):
        if rank == 3:
            done = 0
            rejected = 0
            while done < samples:
                s = scheme or sample_scheme(3, rng)
                g11 = sample_gamma_gl3(rng, s.params.kappa)
                if s.is_degenerate() or _too_close_to_pole_gl3(s, g11):
                    rejected += 1
                    continue
                rh, ra = _rank3_ratio_residuals(s, g11)
                rep.add(f"sample{done:03d}/hol", rh, 1e-10)
                rep.add(f"sample{done:03d}/anti", ra, 1e-10)
                done += 1
            rep.config = {"rank": 3, "samples": samples, "seed": seed, "rejected": rejected}
        elif rank == 4:
            for i in range(samples):
                s, gamma = sample_gl4_pair(rng)
                fam = KernelGl4Family(gamma, s, cfg)
                _rank4_equations(fam, rep, f"sample{i:03d}", cfg)
            rep.config = {
                "rank": 4,
                "samples": samples,
                "seed": seed,
                "k_max": cfg.inner_k_max,
                "v_nodes": cfg.inner_nodes,
            }
        else:
            raise ValueError("rank must be 3 or 4")
    return rep


def _rank4_equations(fam: KernelGl4Family, rep: ResidualReport, tag: str, cfg: QuadConfig):
    """All six difference equations in ratio form at one sample."""
    s = fam.s
    lam11 = s.value(1, 1)
    lam2sum = fam.lam2[0] + fam.lam2[1]
    lam3sum = fam.lam3[0] + fam.lam3[1] + fam.lam3[2]
    g11, g21, g22 = fam.g11, fam.g21, fam.g22
    g2sum = g21 + g22
    tol = cfg.tail_tol

    def put(name, terms):
        total = sum(t for t in terms)
        scale = max([abs(t) for t in terms] + [1.0])
        rep.add(f"{tag}/{name}", abs(total) / scale, tol)

    e = lambda dh, da: (dh, da)

    # -- holomorphic equation 1
    r_e11 = fam.ratio({(1, 1): e(-1, 0)})
    r_e11_e21 = fam.ratio({(1, 1): e(-1, 0), (2, 1): e(-1, 0)})
    r_e11_e22 = fam.ratio({(1, 1): e(-1, 0), (2, 2): e(-1, 0)})
    lhs1 = ((g11.hol - fam.lam2[0].hol) * (g11.hol - fam.lam2[1].hol)) / (
        g11.hol + lam11.hol - lam2sum.hol
    )
    put(
        "hol-eq1",
        [
            lhs1,
            -r_e11,
            r_e11_e21 / (g21.hol - g22.hol - 1),
            r_e11_e22 / (g22.hol - g21.hol - 1),
        ],
    )

    # -- holomorphic equations 2 and 3
    def eq23_hol(ga, gb, name, r_mixed):
        r_a = fam.ratio({(2, 1) if ga is g21 else (2, 2): e(-1, 0)})
        c1 = (ga.hol - g11.hol - 1) * (
            g11.hol - g2sum.hol - lam2sum.hol + lam3sum.hol
        )
        c2 = g11.hol + lam11.hol - lam2sum.hol
        rhs = (
            -np.prod([ga.hol - l3.hol for l3 in fam.lam3])
            * (ga.hol - gb.hol - 1)
            / (ga.hol - gb.hol)
        )
        put(name, [c1 * r_a, c2 * r_mixed, -rhs])

    eq23_hol(g21, g22, "hol-eq2", r_e11_e21)
    eq23_hol(g22, g21, "hol-eq3", r_e11_e22)

    # -- antiholomorphic equation 1 (left side and corrections flip sign)
    rb_e11 = fam.ratio({(1, 1): e(0, -1)})
    rb_e11_e21 = fam.ratio({(1, 1): e(0, -1), (2, 1): e(0, -1)})
    rb_e11_e22 = fam.ratio({(1, 1): e(0, -1), (2, 2): e(0, -1)})
    lhs1a = ((g11.anti - fam.lam2[0].anti) * (g11.anti - fam.lam2[1].anti)) / (
        g11.anti + lam11.anti - lam2sum.anti
    )
    put(
        "anti-eq1",
        [
            lhs1a,
            rb_e11,
            rb_e11_e21 / (g21.anti - g22.anti - 1),
            rb_e11_e22 / (g22.anti - g21.anti - 1),
        ],
    )

    # -- antiholomorphic equations 2 and 3 (mixed term and right side flip)
    def eq23_anti(ga, gb, name, r_mixed):
        r_a = fam.ratio({(2, 1) if ga is g21 else (2, 2): e(0, -1)})
        c1 = (ga.anti - g11.anti - 1) * (
            g11.anti - g2sum.anti - lam2sum.anti + lam3sum.anti
        )
        c2 = g11.anti + lam11.anti - lam2sum.anti
        rhs = np.prod([ga.anti - l3.anti for l3 in fam.lam3]) * (
            ga.anti - gb.anti - 1
        ) / (ga.anti - gb.anti)
        put(name, [c1 * r_a, -c2 * r_mixed, -rhs])

    eq23_anti(g21, g22, "anti-eq2", rb_e11_e21)
    eq23_anti(g22, g21, "anti-eq3", rb_e11_e22)


def residual_c_conditions(
    s: GTScheme,
    cfg: Optional[QuadConfig] = None,
    gamma: Optional[Sequence[DoubleIndex]] = None,
    report: Optional[ResidualReport] = None,
    with_contiguous: bool = True,
) -> ResidualReport:
    """Shift conditions on the rank-4 normalization, plus the 4G4 identities.

    Checks c(lam + shifts) against the displayed ratios for both shift
    families and both sectors; the underlying hypergeometric identities
    are exercised through the contiguous-relation suite at the same
    sample when requested.
    """
    cfg = cfg or QuadConfig()
    rep = report or ResidualReport(suite="c-conditions")
    with timed_report(rep):
        from .schemes import SchemeShift, shift_scheme

        sigma1 = s.params.sigma(1)
        lam11 = s.value(1, 1)
        c0 = c_norm_log(s)
        tol = 1e-10
        for i in (1, 2):
            lam2i = s.value(2, i)
            # holomorphic level-2 shift: ratio -(lam2i - lam11)/M_i with M_i = lam2i - lam11
            sh = shift_scheme(s, SchemeShift(2, i, +1, "hol"))
            got = complex(np.exp(c_norm_log(sh) - c0))
            rep.add(f"shift2-{i}-hol", abs(got - (-1.0)), tol)
            sha = shift_scheme(s, SchemeShift(2, i, +1, "anti"))
            gota = complex(np.exp(c_norm_log(sha) - c0))
            rep.add(f"shift2-{i}-anti", abs(gota - (-1.0)), tol)
        for i in (1, 2, 3):
            lam3i = s.value(3, i)
            sh = shift_scheme(s, SchemeShift(3, i, +1, "hol"))
            want = lam3i.hol - sigma1.hol + 1
            got = complex(np.exp(c_norm_log(sh) - c0))
            rep.add(f"shift3-{i}-hol", abs(got - want) / max(abs(want), 1.0), tol)
            sha = shift_scheme(s, SchemeShift(3, i, +1, "anti"))
            wanta = -(lam3i.anti - sigma1.anti + 1)
            gota = complex(np.exp(c_norm_log(sha) - c0))
            rep.add(f"shift3-{i}-anti", abs(gota - wanta) / max(abs(wanta), 1.0), tol)

        if with_contiguous and gamma is not None:
            lam2 = s.level(2)
            lam3 = s.level(3)
            a = [lam2[0], lam2[1], gamma[1], gamma[2]]
            b = [ONE - x for x in lam3] + [ZERO - gamma[0]]
            sub = check_contiguous(
                a, b, 1.0, cfg, gl4_pattern={}, delta=2.0 - s.params.kappa
            )
            for c in sub.cases:
                if c.id.startswith("4g4-rel-4") or c.id.startswith("4g4-rel-5"):
                    rep.add(f"pgamma/{c.id}", c.residual, c.tol)
        rep.config = {"rank": 4}
    return rep
