"""Named verification bundles run by `verify --suite NAME`.

Each bundle returns a report dict with `passed`, the worst `metric`, the
`threshold` it is held to and a few details for the JSON summary.
"""
import itertools
import math
import time

import numpy as np

from ..core import greens, laplace, solvers, specfun, volterra
from ..core.errors import ConfigError
from ..core.fracops import TimeGrid
from ..utils.log import get_logger

logger = get_logger("verify")

SWEEPS = ("small", "full")


def _report(name, metric, threshold, started, **details):
    metric = float(metric)
    passed = bool(np.isfinite(metric) and metric <= threshold)
    logger.info("%s: metric %.3e (threshold %.1e) %s in %.1f s", name, metric, threshold,
                "pass" if passed else "FAIL", time.perf_counter() - started)
    return {"suite": name, "passed": passed, "metric": metric, "threshold": threshold,
            "details": details}


def check_specfun(sweep, rng):
    started = time.perf_counter()
    checks = {
        "E_1(1)": (specfun.mittag_leffler_array(1.0, 1.0, 1.0), math.e),
        "E_1,2(1)": (specfun.mittag_leffler_array(1.0, 2.0, 1.0), math.e - 1.0),
        "E_2(-(pi/2)^2)": (specfun.mittag_leffler_array(2.0, 1.0, -(math.pi / 2.0) ** 2), 0.0),
        "E^1_0.7,1.3(-2)": (specfun.prabhakar_array(0.7, 1.3, 1.0, -2.0),
                            specfun.mittag_leffler_array(0.7, 1.3, -2.0)),
        "E^0_0.5,2.5(3)": (specfun.prabhakar_array(0.5, 2.5, 0.0, 3.0),
                           1.0 / specfun.gamma_fn(2.5)),
    }
    errors = {key: abs(a - b) / max(1.0, abs(b)) for key, (a, b) in checks.items()}
    return _report("specfun", max(errors.values()), 1e-12, started, errors=errors)


def _lemma_tuples(sweep):
    # (alpha, beta, gamma, omega)
    tuples = list(itertools.product((0.3, 0.5, 0.8), (0.5, 1.0, 2.0), (1.0, 2.0, 3.0),
                                    (-1.0, -2.0)))
    return tuples if sweep == "full" else tuples[::9]


def _prabhakar_kernel(alpha, beta, gamma_p, omega, shift=0.0):
    def f(t):
        t = np.asarray(t, dtype=float)
        return (t ** (beta - 1.0) * specfun.prabhakar_array(alpha, beta, gamma_p, omega * t ** alpha)
                * np.exp(-shift * t))
    return f


def _laplace_sweep(name, shifts, sweep):
    started = time.perf_counter()
    worst, where = 0.0, None
    for (alpha, beta, gamma_p, omega), shift in itertools.product(_lemma_tuples(sweep), shifts):
        image = laplace.prabhakar_image(alpha, beta, gamma_p, omega, shift)
        kernel = _prabhakar_kernel(alpha, beta, gamma_p, omega, shift)
        for s in (1.0, 2.0, 5.0):
            forward = laplace.laplace_forward(kernel, s, singular_exponent=max(0.0, 1.0 - beta))
            exact = complex(image(np.array([s]))[0])
            error = abs(forward.value - exact) / abs(exact)
            if error > worst:
                worst, where = error, (alpha, beta, gamma_p, omega, shift, s)
    return _report(name, worst, 1e-6, started, worst_at=where)


def check_lemma1(sweep, rng):
    return _laplace_sweep("lemma1", (0.0,), sweep)


def check_lemma2(sweep, rng):
    return _laplace_sweep("lemma2", (0.5, 1.0) if sweep == "full" else (1.0,), sweep)


def check_lemma3(sweep, rng):
    started = time.perf_counter()
    xi = np.linspace(0.0, 12.0, 49)
    gaussian = lambda rho: np.exp(-0.5 * np.asarray(rho) ** 2)  # noqa: E731
    radii = np.linspace(0.0, 4.0, 30)
    worst = 0.0
    for n in (1, 3):
        profile = greens.RadialProfile(xi, gaussian(xi), n, evaluator=gaussian)
        result = greens.radial_inverse_fourier(profile, radii, n)
        exact = (2.0 * math.pi) ** (-0.5 * n) * np.exp(-0.5 * radii ** 2)
        worst = max(worst, float(np.max(np.abs(result.values - exact) / exact)))
    return _report("lemma3-gaussian", worst, 1e-7, started)


def random_smooth_pair(rng):
    """Quadratic kernel and trigonometric datum with small coefficients"""
    c = rng.uniform(-0.5, 0.5, size=3)
    a, b = rng.uniform(-1.0, 1.0, size=2)
    w = rng.uniform(0.5, 2.0)
    return (lambda t: c[0] + c[1] * t + c[2] * t ** 2,
            lambda t: a * np.cos(w * t) + b * np.sin(w * t))


def check_lemma4(sweep, rng):
    started = time.perf_counter()
    grid = TimeGrid(1.0, 512)
    worst = 0.0
    for _ in range(20 if sweep == "full" else 5):
        kernel, datum = random_smooth_pair(rng)
        k = volterra.kernel_from_function(kernel, grid)
        f = datum(grid.nodes)
        direct = volterra.volterra_apply(k, f)
        resolvent = volterra.resolvent_representation(volterra.resolvent_solve(k), f)
        worst = max(worst, float(np.max(np.abs(direct - resolvent))))
    return _report("lemma4", worst, 1e-8, started)


def check_theorem1(sweep, rng):
    started = time.perf_counter()
    count = 10 if sweep == "full" else 4
    worst, monotone = 0.0, True
    for alpha in (0.3, 0.5, 0.7):
        p = greens.GreenSeriesParams(alpha)
        xi2 = np.linspace(0.0, 25.0, count)
        for t in np.linspace(0.05, 2.0, count):
            values, _ = greens.green_symbol_array(xi2, t, p)
            oracle = np.array([laplace.talbot_invert(laplace.symbol_homogeneous(q, alpha), t)
                               for q in xi2])
            worst = max(worst, float(np.max(np.abs(values - oracle))))
            monotone &= bool(np.all(np.diff(values) <= 1e-12))
    metric = worst if monotone else float("inf")
    return _report("theorem1-oracle", metric, 1e-8, started, monotone=monotone)


def check_theorem2(sweep, rng):
    started = time.perf_counter()
    steps = 2048
    worst = 0.0
    for alpha in (0.3, 0.5, 0.7):
        grid = TimeGrid(1.0, steps)
        r = volterra.resolvent_solve(volterra.memory_kernel(alpha, grid))
        t = grid.nodes[10:]
        exact = t ** (-alpha) / specfun.gamma_fn(1.0 - alpha)
        worst = max(worst, float(np.max(np.abs(r.values[10:] - exact) / exact)))

    transform = 0.0
    # the tail of exp(-s u) k(u) beyond u = 10 is below 1e-8 for s >= 2
    long_grid = TimeGrid(10.0, steps)
    for alpha in (0.3, 0.5, 0.7):
        k = volterra.memory_kernel(alpha, long_grid)
        for s in (2.0, 5.0, 10.0):
            K = volterra.laplace_of_samples(k, s)
            closed = 1.0 / (s ** (1.0 - alpha) + 1.0)
            # R = K + K R  gives  R = K / (1 - K) = s**(alpha-1)
            transform = max(transform, abs(K - closed) / closed,
                            abs(K / (1.0 - K) - s ** (alpha - 1.0)) / s ** (alpha - 1.0))
    metric = worst if transform <= 1e-4 else float("inf")
    return _report("theorem2-equivalence", metric, 5e-3, started, laplace_identity=transform)


def check_mass(sweep, rng):
    started = time.perf_counter()
    steps = 256 if sweep == "small" else 1024
    ps = solvers.ProblemSpec(0.5, 1, 16.0, 64 if sweep == "small" else 256, 1.0, steps)
    report, _ = solvers.compare_solvers(ps, [0.0, 0.5, 1.0])
    drift = max(entry["mass_drift"] for entry in report["solvers"].values())
    return _report("mass", drift, 1e-6, started,
                   drift={k: v["mass_drift"] for k, v in report["solvers"].items()})


def check_forcing(sweep, rng):
    started = time.perf_counter()
    alpha, xi2 = 0.5, 1.0
    grid = TimeGrid(1.0, 1024)
    values = greens.forcing_kernel(xi2, grid, alpha, np.exp(-grid.nodes))
    image = laplace.product_image(laplace.symbol_forcing(xi2, alpha),
                                  laplace.prabhakar_image(1.0, 1.0, 1.0, -1.0))
    picks = np.linspace(grid.steps // 20, grid.steps, 20).astype(int)
    oracle, _ = laplace.talbot_invert_many(image, grid.nodes[picks])
    return _report("forcing", float(np.max(np.abs(values[picks] - oracle))), 1e-6, started)


SUITES = {
    "specfun": check_specfun,
    "lemma1": check_lemma1,
    "lemma2": check_lemma2,
    "lemma3-gaussian": check_lemma3,
    "lemma4": check_lemma4,
    "theorem1-oracle": check_theorem1,
    "theorem2-equivalence": check_theorem2,
    "mass": check_mass,
    "forcing": check_forcing,
}


def verify(suite, sweep="small", seed=0):
    """Run one bundle (or `all`); returns the list of bundle reports"""
    if sweep not in SWEEPS:
        raise ConfigError(f"unknown sweep {sweep!r}; choose from {', '.join(SWEEPS)}")
    if suite == "all":
        names = list(SUITES)
    elif suite in SUITES:
        names = [suite]
    else:
        raise ConfigError(f"unknown suite {suite!r}; choose from all, {', '.join(SUITES)}")
    rng = np.random.default_rng(seed)
    return [SUITES[name](sweep, rng) for name in names]
