"""Acceptance protocols, one function per numbered criterion.

Every protocol is deterministic given its seed and returns a
``CriterionResult`` with the measured quantities; runtime limits count
toward the verdict.
"""
import math
import time
from dataclasses import dataclass, field

import numpy as np

__all__ = ["CRITERIA", "CriterionResult", "run_criterion"]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0
    time_limit: float = math.inf

    def line(self):
        verdict = "PASS" if self.passed else "FAIL"
        return (f"criterion {self.number:2d} {verdict}  {self.title}: {self.summary} "
                f"[{self.seconds:.1f}s / {self.time_limit:.0f}s]")


def _params(d, alpha=0.0, beta=0.0):
    from .tensor import TensorJacobiParams
    return TensorJacobiParams.uniform(d, alpha, beta)


def _band(ratios):
    """Half-width ``max(max r, 1/min r)`` of a set of positive ratios."""
    r = np.asarray(ratios, dtype=float)
    return float(max(r.max(), 1.0 / r.min()))


def quadrature_exactness(seed=0):
    from .cubature import build_level
    from .tensor import JacobiExpansion, TensorJacobiParams

    rng = np.random.default_rng(seed)
    param_sets = [TensorJacobiParams.uniform(2),
                  TensorJacobiParams.from_lists([0.5, -0.5], [-0.5, 1.5]),
                  TensorJacobiParams.from_lists([2.5, 0.0], [1.0, -0.25])]
    worst = 0.0
    for params in param_sets:
        mass = math.sqrt(params.total_mass())
        for j in range(5):
            cub = build_level(j, params)
            deg = 2 ** (j + 2) - 1
            for _ in range(4):
                g = JacobiExpansion.random(params, deg, rng)
                exact = g.coeffs[0, 0] * mass  # int P~_nu w = delta_nu0 h_0^(1/2) per axis
                approx = cub.integrate(g.evaluate_grid(cub.axis_nodes))
                worst = max(worst, abs(approx - exact) / (g.l2_norm() * mass))
    ok = worst <= 1e-11
    return ok, f"max relative error {worst:.2e} (limit 1e-11)", {"max_rel_error": worst}


def kernel_reproduction(seed=0):
    from .cutoff import make_multivariate, make_univariate
    from .kernel import KernelSpec, reproduction_error
    from .tensor import TensorJacobiParams

    rng = np.random.default_rng(seed)
    alphas, betas = [0.5, -0.5, 1.5], [0.0, 1.0, -0.5]
    worst = 0.0
    for d in (1, 2, 3):
        params = TensorJacobiParams.from_lists(alphas[:d], betas[:d])
        A = make_univariate("a") if d == 1 else make_multivariate("product", d)
        for n in (1, 2, 4, 8, 16, 32):
            pts = np.cos(rng.uniform(0.0, math.pi, (4, d)))
            pts[0] = 1.0
            pts[1, 0] = -1.0
            err = reproduction_error(KernelSpec(params, A, n), pts, max_l1=n)
            worst = max(worst, err)
    ok = worst <= 1e-10
    return ok, f"max reproduction error {worst:.2e} (limit 1e-10)", {"max_error": worst}


def localization_stability(seed=1):
    from .cutoff import make_multivariate, make_radial_impostor
    from .kernel import KernelSpec, decay_profile, stratified_pairs

    params = _params(2)
    ns = (8, 16, 32, 64)
    out = {}
    for name, A in (("product_b", make_multivariate("difference", 2)),
                    ("radial", make_radial_impostor(2))):
        C = []
        for n in ns:
            sample = stratified_pairs(2, n, np.random.default_rng(seed), per_stratum=64)
            C.append(decay_profile(KernelSpec(params, A, n), 4.0, sample).C_emp)
        out[name] = C
    q = np.array(out["product_b"][1:]) / out["product_b"][0]
    growth = out["radial"][-1] / out["radial"][0]
    ok = bool(np.all((q >= 0.25) & (q <= 4.0)) and growth >= 2.0)
    summary = (f"product-b C(n)/C(8) = {', '.join(f'{v:.2f}' for v in q)}; "
               f"radial C(64)/C(8) = {growth:.1f} (needs >= 2)")
    return ok, summary, {"product_b": out["product_b"], "radial": out["radial"]}


def subexponential_regime(seed=11):
    from .cutoff import DerivativeGauge, make_multivariate, make_small_derivative_univariate
    from .kernel import KernelSpec, stratified_pairs, subexp_constant_search

    params = _params(2)
    gauge = DerivativeGauge.power(1.0)
    A = make_multivariate("sin_splice", 2,
                          base=make_small_derivative_univariate(gauge, "a"))
    ns = (8, 16, 32)
    specs = [KernelSpec(params, A, n) for n in ns]
    samples = [stratified_pairs(2, n, np.random.default_rng(seed), per_stratum=64) for n in ns]
    c, C = subexp_constant_search(specs, gauge, samples, band=4.0, c_max=4.0)
    q = C / C[0]
    ok = bool(c > 0 and np.all((q >= 0.25) & (q <= 4.0)))
    summary = (f"c~ = {c:.3g}, constants {', '.join(f'{v:.3g}' for v in C)} "
               f"over n = {', '.join(map(str, ns))}")
    return ok, summary, {"c_tilde": c, "constants": list(map(float, C))}


def tight_frame(seed=0):
    from .frame import analyze, build_frame, synthesize
    from .tensor import JacobiExpansion

    params = _params(2)
    frame = build_frame(params, "tight", 5)
    rng = np.random.default_rng(seed)
    pars = rt = 0.0
    for _ in range(20):
        f = JacobiExpansion.random(params, 2 ** 4, rng, decay=rng.uniform(0.0, 2.0))
        c = analyze(frame, f)
        g = synthesize(frame, c)
        nf = f.l2_norm()
        pars = max(pars, abs(c.energy() - nf ** 2) / nf ** 2)
        rt = max(rt, (g - f).l2_norm() / nf)
    ok = pars <= 1e-9 and rt <= 1e-9
    return ok, f"Parseval {pars:.2e}, round trip {rt:.2e} (limits 1e-9)", \
        {"parseval_rel_error": pars, "roundtrip_rel_error": rt}


def needlet_norm_law(seed=0):
    from .frame import build_frame, level_needlet_norms

    frame = build_frame(_params(2), "tight", 4)
    bands = {}
    ok = True
    for p in (1.0, 2.0, math.inf):
        lo, hi = math.inf, 0.0
        for j in range(frame.J_max + 1):
            norms, comp = level_needlet_norms(frame, j, p)
            r = norms / comp
            lo, hi = min(lo, float(r.min())), max(hi, float(r.max()))
        bands[p] = (lo, hi)
        ok = ok and lo >= 0.1 and hi <= 10.0
    summary = "; ".join(f"p={'inf' if p == math.inf else f'{p:g}'}: [{lo:.3f}, {hi:.3f}]"
                        for p, (lo, hi) in bands.items()) + " (band [0.1, 10])"
    return ok, summary, {str(p): v for p, v in bands.items()}


def _random_family(params, degree, rng, count):
    from .tensor import JacobiExpansion
    return [JacobiExpansion.random(params, degree, rng, decay=rng.uniform(0.0, 3.0))
            for _ in range(count)]


def norm_equivalence(seed=0, count=12):
    from .cubature import spectrum_level
    from .cutoff import make_multivariate
    from .frame import analyze, build_frame
    from .spaces import SpaceParams, b_norm_kernel, f_norm_kernel, seq_norm

    params = _params(2)
    A = make_multivariate("difference", 2)
    rng = np.random.default_rng(seed)
    spB = SpaceParams(1.0, 1.0, 2.0, 2.0, "B")
    spF = SpaceParams(0.0, 0.0, 2.0, 2.0, "F")
    widths = {"B": [], "F": []}
    ident = []
    for D in (32, 64):
        frame = build_frame(params, A, spectrum_level(D) + 1)
        rB, rF = [], []
        for f in _random_family(params, D, rng, count):
            c = analyze(frame, f)
            rB.append(b_norm_kernel(f, spB, A) / seq_norm(c, spB))
            kF = f_norm_kernel(f, spF, A)
            rF.append(kF / seq_norm(c, spF))
            ident.append(kF / f.l2_norm())
        widths["B"].append(_band(rB))
        widths["F"].append(_band(rF))
    stable = all(w[1] <= 1.5 * w[0] for w in widths.values())
    ident_ok = min(ident) >= 1 / 3 and max(ident) <= 3
    ok = stable and ident_ok
    summary = (f"B band {widths['B'][0]:.4f} -> {widths['B'][1]:.4f}, "
               f"F band {widths['F'][0]:.4f} -> {widths['F'][1]:.4f} (deg 32 -> 64); "
               f"F/L2 in [{min(ident):.3f}, {max(ident):.3f}]")
    return ok, summary, {"widths": widths, "ident": (min(ident), max(ident))}


def cutoff_independence(seed=0, count=8):
    from .cutoff import make_multivariate, make_univariate
    from .spaces import SpaceParams, f_norm_kernel

    params = _params(2)
    A1 = make_multivariate("difference", 2)
    A2 = make_multivariate("quasi_norm", 2, base=make_univariate("b"))
    rng = np.random.default_rng(seed)
    sps = (SpaceParams(1.0, 0.0, 3.0, 2.0, "F"), SpaceParams(0.5, 1.0, 1.5, 1.0, "F"))
    degrees = (16, 32, 64)
    bands = {sp: [] for sp in sps}
    for D in degrees:
        fam = _random_family(params, D, rng, count)
        for sp in sps:
            bands[sp].append(_band([f_norm_kernel(f, sp, A1) / f_norm_kernel(f, sp, A2)
                                    for f in fam]))
    ok = all(b[k + 1] <= 1.5 * b[k] for b in bands.values() for k in range(len(degrees) - 1))
    summary = "; ".join(f"(s,rho,p,q)=({sp.s:g},{sp.rho_weight:g},{sp.p:g},{sp.q:g}) band "
                        + " -> ".join(f"{v:.3f}" for v in b) for sp, b in bands.items())
    return ok, summary, {str((sp.s, sp.rho_weight, sp.p, sp.q)): b for sp, b in bands.items()}


def jackson_rate(seed=0):
    from scipy.stats import kendalltau

    from .approx import ApproxRun, abs_power_target, jackson_table
    from .frame import build_frame

    params = _params(2)
    frame = build_frame(params, "tight", 9)
    n_list = (16, 64, 256, 1024)
    ok = True
    cols = {}
    for shift in (0.0, 0.3, -0.6):
        f = abs_power_target(params, 256, shift=shift)
        run = ApproxRun(frame, f, 2.0, n_list)
        col = np.array([r[2] for r in jackson_table(run, 0.5)])
        tau = kendalltau(n_list, col).statistic
        ok = ok and bool(col.max() <= 10 * np.median(col)) and tau <= 0
        cols[shift] = (col.tolist(), float(tau))
    summary = "; ".join(f"shift {s:g}: " + ", ".join(f"{v:.3f}" for v in c) + f" (tau {t:.2f})"
                        for s, (c, t) in cols.items())
    return ok, summary, {str(k): v for k, v in cols.items()}


def maximal_equivalence(seed=0, count=200):
    from .cubature import maximal_indicator

    params = _params(1)
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(count):
        x, y = np.cos(rng.uniform(0.0, math.pi, 2))
        r = math.pi * 10.0 ** rng.uniform(-3.0, 0.0)
        t = rng.uniform(1.0, 4.0)
        val, comp = maximal_indicator([y], r, t, [x], params)
        ratios.append(val / comp)
    lo, hi = min(ratios), max(ratios)
    ok = lo >= 1 / 8 and hi <= 8
    return ok, f"search/comparand in [{lo:.3f}, {hi:.3f}] (band [1/8, 8])", {"min": lo, "max": hi}


def multiplier_boundedness(seed=0, count=100):
    from .cubature import lp_norm, oversampled_level
    from .cutoff import make_multivariate
    from .kernel import KernelSpec, kernel_row_expansion
    from .spaces import Multiplier, apply_multiplier
    from .tensor import JacobiExpansion

    params = _params(2)
    m = Multiplier.alternating_squares(make_multivariate("sin_splice", 2))
    Aa = make_multivariate("product", 2)
    rng = np.random.default_rng(seed)
    degrees = (8, 16, 32, 64)
    ps = (1.5, 3.0)
    maxima = {p: [] for p in ps}
    for D in degrees:
        level = oversampled_level(D)
        best = {p: 0.0 for p in ps}
        for k in range(count):
            if k % 2 == 0:
                f = JacobiExpansion.random(params, D, rng, decay=rng.uniform(0.0, 2.0))
            else:
                y = np.cos(rng.uniform(0.0, math.pi, 2))
                y[rng.uniform(size=2) < 0.3] = 1.0
                f = kernel_row_expansion(KernelSpec(params, Aa, D // 2), y).padded((D + 1,) * 2)
            g = apply_multiplier(m, f)
            for p in ps:
                best[p] = max(best[p], lp_norm(g, p, level=level) / lp_norm(f, p, level=level))
        for p in ps:
            maxima[p].append(best[p])
    jumps = {p: [v[k + 1] / v[k] for k in range(len(v) - 1)] for p, v in maxima.items()}
    ok = all(j <= 1.5 for v in jumps.values() for j in v)
    summary = "; ".join(f"p={p:g}: max ratio " + " -> ".join(f"{v:.3f}" for v in maxima[p])
                        for p in ps) + f" (degrees {', '.join(map(str, degrees))})"
    return ok, summary, {"maxima": {str(p): v for p, v in maxima.items()}}


CRITERIA = {
    1: ("quadrature exactness", quadrature_exactness, 10.0),
    2: ("kernel reproduction", kernel_reproduction, 60.0),
    3: ("localization stability", localization_stability, 300.0),
    4: ("sub-exponential regime", subexponential_regime, 600.0),
    5: ("tight frame", tight_frame, 60.0),
    6: ("needlet norm law", needlet_norm_law, 120.0),
    7: ("norm equivalence", norm_equivalence, 300.0),
    8: ("cutoff independence", cutoff_independence, 300.0),
    9: ("Jackson rate", jackson_rate, 600.0),
    10: ("maximal-operator equivalence", maximal_equivalence, 120.0),
    11: ("multiplier boundedness", multiplier_boundedness, 300.0),
}


def run_criterion(number, seed=None):
    """Run one protocol; ``seed`` overrides the protocol's default."""
    if number not in CRITERIA:
        raise KeyError(f"no criterion {number}")
    title, fn, limit = CRITERIA[number]
    start = time.perf_counter()
    ok, summary, metrics = fn() if seed is None else fn(seed=seed)
    seconds = time.perf_counter() - start
    return CriterionResult(number, title, bool(ok) and seconds <= limit, summary,
                           metrics, seconds, limit)
