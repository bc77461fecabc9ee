import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from ..core import fracops, greens, laplace, solvers, specfun, volterra
from ..core.errors import ConfigError, DomainError, EvaluationError, FracDiffError, SetupError
from ..plotting.plot_manager import PlotManager
from ..utils import data_storage
from ..utils.log import get_logger, set_verbosity
from ..utils.workers import THREADS_VARIABLE
from .verification import SWEEPS, verify

logger = get_logger("cli")

SETTINGS_FILE = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(
    os.path.abspath(__file__)))), "settings.json")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3

SUBCOMMANDS = ("mlf", "prabhakar", "invert", "resolvent", "green", "solve", "verify")

# Built-in defaults; settings.json and --config override them, flags override everything
FACTORY_DEFAULTS = {
    "output_dir": "fracdiff_run",
    "seed": 0,
    "format": "both",
    "threads": None,
    "mlf": {"beta": 1.0, "gamma": 1.0, "goal": specfun.DEFAULT_GOAL},
    "prabhakar": {"beta": 1.0, "gamma": 1.0, "omega": -1.0, "T": 1.0, "steps": 256,
                  "phi": "one", "scheme": fracops.POWERLAW},
    "invert": {"term": "homogeneous", "alpha": 0.5, "xi2": 1.0, "beta": 1.0, "gamma": 1.0,
               "omega": -1.0, "t": [1.0], "nodes": laplace.TALBOT_NODES},
    "resolvent": {"alpha": 0.5, "horizon": 1.0, "steps": 1024},
    "green": {"alpha": 0.5, "dim": 1, "t": 1.0, "rmax": 8.0, "points": 161},
    "solve": {"solver": "all", "alpha": 0.5, "dim": 1, "L": 16.0, "modes": 256, "T": 1.0,
              "steps": 1024, "g": "gaussian", "g_file": None, "f": "none", "f_file": None,
              "times": [0.0, 0.5, 1.0], "prefix": "solution"},
    "verify": {"suite": "all", "sweep": "small"},
}


@dataclass
class RunConfig:
    """Fully resolved settings of one command line run"""
    subcommand: str
    params: dict = field(default_factory=dict)
    output_dir: str = FACTORY_DEFAULTS["output_dir"]
    seed: int = 0
    format: str = "both"
    threads: int = None

    def wants(self, kind):
        return self.format in (kind, "both")


def build_parser():
    parser = argparse.ArgumentParser(prog="fracdiff",
                                     description="Fractional anomalous diffusion toolkit")
    parser.add_argument("--config", help="JSON or TOML file with settings")
    parser.add_argument("--out", dest="output_dir", help="output directory")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--format", choices=("csv", "json", "both"))
    parser.add_argument("--threads", type=int, help=f"worker cap (also {THREADS_VARIABLE})")
    parser.add_argument("--verbose", action="store_true")
    parser.add_argument("--debug", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("mlf", help="Mittag-Leffler / Prabhakar function value")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--goal", type=float)

    p = sub.add_parser("prabhakar", help="Prabhakar fractional integral on a grid")
    for name in ("alpha", "beta", "gamma", "omega", "T"):
        p.add_argument(f"--{name}", type=float, required=name == "alpha")
    p.add_argument("--steps", type=int)
    p.add_argument("--phi", choices=("one", "linear", "exp"))
    p.add_argument("--scheme", choices=(fracops.POWERLAW, fracops.EXACT))

    p = sub.add_parser("invert", help="Talbot inversion of a built-in image")
    p.add_argument("--term", "--image", dest="term",
                   choices=("homogeneous", "forcing", "prabhakar"))
    for name in ("alpha", "xi2", "beta", "gamma", "omega"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--t", type=float, nargs="+")
    p.add_argument("--nodes", type=int)

    p = sub.add_parser("resolvent", help="resolvent of the memory kernel")
    p.add_argument("--alpha", type=float)
    p.add_argument("--horizon", "--T", dest="horizon", type=float)
    p.add_argument("--steps", type=int)

    p = sub.add_parser("green", help="Green function in physical space")
    p.add_argument("--alpha", type=float)
    p.add_argument("--dim", type=int, choices=(1, 2, 3))
    p.add_argument("--t", type=float)
    p.add_argument("--rmax", type=float)
    p.add_argument("--points", type=int)

    p = sub.add_parser("solve", help="solve the diffusion problem on a periodic box")
    p.add_argument("--solver", choices=solvers.SOLVERS + ("all",))
    p.add_argument("--alpha", type=float)
    p.add_argument("--dim", type=int, choices=(1, 2, 3))
    p.add_argument("--L", type=float)
    p.add_argument("--modes", type=int)
    p.add_argument("--T", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--g", choices=tuple(solvers.INITIAL_DATA) + ("file",))
    p.add_argument("--g-file", dest="g_file")
    p.add_argument("--f", choices=("none",) + tuple(solvers.FORCING_DATA) + ("file",))
    p.add_argument("--f-file", dest="f_file")
    p.add_argument("--times", type=float, nargs="+")
    p.add_argument("--prefix")

    p = sub.add_parser("verify", help="run verification bundles")
    p.add_argument("--suite")
    p.add_argument("--sweep", choices=SWEEPS)
    return parser


class CommandManager:
    """Resolves settings and executes one subcommand"""

    def __init__(self, settings_file=SETTINGS_FILE):
        self.settings_file = settings_file
        self.defaults = json.loads(json.dumps(FACTORY_DEFAULTS))
        self.load_settings()
        self.plots = None

    def load_settings(self):
        """Merge settings.json over the factory defaults; a missing file is fine"""
        if not os.path.exists(self.settings_file):
            return
        settings, message = data_storage.read_config(self.settings_file)
        if settings is None:
            logger.warning("%s; using factory defaults", message)
            return
        self._merge(self.defaults, settings)
        logger.debug(message)

    @staticmethod
    def _merge(base, update):
        for key, value in update.items():
            if isinstance(value, dict) and isinstance(base.get(key), dict):
                base[key].update(value)
            else:
                base[key] = value

    def resolve(self, args):
        """Flags over config file over settings.json over factory defaults"""
        layered = json.loads(json.dumps(self.defaults))
        if args.config:
            settings, message = data_storage.read_config(args.config)
            if settings is None:
                raise ConfigError(message)
            self._merge(layered, settings)
        name = args.subcommand
        params = dict(layered.get(name, {}))
        for key, value in vars(args).items():
            if key in ("config", "output_dir", "seed", "format", "threads", "verbose",
                       "debug", "subcommand") or value is None:
                continue
            params[key] = value
        config = RunConfig(name, params,
                           args.output_dir or layered["output_dir"],
                           args.seed if args.seed is not None else layered["seed"],
                           args.format or layered["format"],
                           args.threads if args.threads is not None else layered["threads"])
        if config.format not in ("csv", "json", "both"):
            raise ConfigError(f"unknown format {config.format!r}")
        return config

    def run_command(self, config):
        """Execute the configured subcommand; returns the summary dict"""
        if config.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {config.subcommand!r}")
        if config.threads:
            os.environ[THREADS_VARIABLE] = str(config.threads)
        os.makedirs(config.output_dir, exist_ok=True)
        self.plots = PlotManager(config.output_dir)
        logger.info("running %s", config.subcommand)
        summary = getattr(self, f"_run_{config.subcommand}")(config, config.params)
        summary = {"command": config.subcommand, "status": "ok", **summary}
        if config.wants("json"):
            data_storage.save_json({"config": asdict(config), "summary": summary},
                                   self._path(config, f"{config.subcommand}.json"))
        return summary

    @staticmethod
    def _path(config, name):
        return os.path.join(config.output_dir, name)

    def _csv(self, config, name, columns, header):
        if config.wants("csv"):
            data_storage.save_csv(columns, header, self._path(config, name))

    def _run_mlf(self, config, p):
        params = specfun.MLParams(p["alpha"], p["beta"], p["gamma"])
        value = specfun.prabhakar(params, specfun.EvalPoint(p["z"], p["goal"]))
        return {"value": value}

    def _run_prabhakar(self, config, p):
        spec = fracops.PrabhakarKernelSpec(specfun.MLParams(p["alpha"], p["beta"], p["gamma"]),
                                           p["omega"])
        grid = fracops.TimeGrid(p["T"], p["steps"])
        t = grid.nodes
        phi = {"one": np.ones_like(t), "linear": t, "exp": np.exp(-t)}[p["phi"]]
        values = fracops.prabhakar_integral(spec, phi, grid, p["scheme"])
        self._csv(config, "prabhakar.csv", [t, values], ["t [1]", "value [1]"])
        summary = {"steps": grid.steps, "final": float(values[-1])}
        if p["phi"] == "one":
            # (E * 1)(t) = t**beta E^gamma_{alpha,beta+1}(omega t**alpha)
            exact = t ** p["beta"] * specfun.prabhakar_array(
                p["alpha"], p["beta"] + 1.0, p["gamma"], p["omega"] * t ** p["alpha"])
            summary["max_deviation"] = float(np.max(np.abs(values - exact)))
        return summary

    def _image(self, p):
        if p["term"] == "homogeneous":
            return laplace.symbol_homogeneous(p["xi2"], p["alpha"])
        if p["term"] == "forcing":
            return laplace.symbol_forcing(p["xi2"], p["alpha"])
        return laplace.prabhakar_image(p["alpha"], p["beta"], p["gamma"], p["omega"])

    def _run_invert(self, config, p):
        times = np.atleast_1d(np.asarray(p["t"], dtype=float))
        values, errors = laplace.talbot_invert_many(
            self._image(p), times, laplace.TalbotParams(p["nodes"]))
        self._csv(config, "invert.csv", [times, values, errors],
                  ["t [1]", "value [1]", "error_estimate [1]"])
        return {"values": values.tolist(), "max_error_estimate": float(np.max(errors))}

    def _run_resolvent(self, config, p):
        grid = fracops.TimeGrid(p["horizon"], p["steps"])
        k = volterra.memory_kernel(p["alpha"], grid)
        r = volterra.resolvent_solve(k)
        t = grid.nodes
        exact = np.full(t.shape, np.nan)
        exact[1:] = t[1:] ** (-p["alpha"]) / specfun.gamma_fn(1.0 - p["alpha"])
        error = np.abs(r.values - exact)
        self._csv(config, "resolvent.csv", [t, k.values, r.values, exact, error],
                  ["t [1]", "k [1/time]", "r_numeric [1/time]", "r_closed_form [1/time]",
                   "abs_error [1/time]"])
        tail = slice(10, None)
        relative = error[tail] / exact[tail]
        return {"max_relative_error": float(np.max(relative)), "R(T)": float(np.sum(r.masses))}

    def _run_green(self, config, p):
        n = p["dim"]
        start = 0.0 if n == 1 else p["rmax"] / (p["points"] - 1)
        radii = np.linspace(start, p["rmax"], p["points"])
        profile = greens.green_physical(radii, p["t"], p["alpha"], n)
        self._csv(config, "green.csv", [radii, profile.values], ["r [length]", "G [1/length^n]"])
        sidecar = {
            "mass_symbol": greens.green_symbol(0.0, p["t"], greens.GreenSeriesParams(p["alpha"])),
            "mass_quadrature": greens.radial_mass(profile),
            "series_fraction": profile.meta["series_fraction"],
            "truncated": profile.truncated,
            "xi_max": profile.meta["xi_max"],
            "msd": greens.mean_squared_displacement(p["alpha"], n, p["t"]),
        }
        data_storage.save_json({"config": asdict(config), **sidecar},
                               self._path(config, "green_meta.json"))
        return sidecar

    def _problem(self, p):
        g = solvers.INITIAL_DATA.get(p["g"])
        if p["g"] == "file":
            g = self._load_file(p["g_file"])
        f = None
        if p["f"] == "file":
            f = self._load_file(p["f_file"])
        elif p["f"] != "none":
            f = solvers.FORCING_DATA[p["f"]]
        return solvers.ProblemSpec(p["alpha"], p["dim"], p["L"], p["modes"], p["T"],
                                   p["steps"], g, f)

    @staticmethod
    def _load_file(filename):
        if not filename:
            raise ConfigError("a data file is required for 'file' inputs")
        data, message = data_storage.read_array(filename)
        if data is None:
            raise ConfigError(message)
        return data

    def _run_solve(self, config, p):
        ps = self._problem(p)
        if p["solver"] == "all":
            # the memory-kernel form covers the homogeneous equation only
            names = solvers.SOLVERS if ps.f is None else solvers.SOLVERS[:2]
        elif p["solver"] == "memory" and ps.f is not None:
            raise SetupError("the memory-kernel solver needs f = none")
        else:
            names = (p["solver"],)
        report, fields = solvers.compare_solvers(ps, p["times"], names)
        lattice = ps.lattice
        coords = [c.ravel() for c in lattice.coordinates()]
        header = [f"x{i} [length]" for i in range(lattice.n)] + ["u [1]"]
        for name, sol in fields.items():
            for i, t in enumerate(sol.times):
                self._csv(config, f"{p['prefix']}_{name}_{i:03d}.csv",
                          coords + [sol.values[i].ravel()], header)
            ok, message = self.plots.save_slice(f"{p['prefix']}_{name}", sol)
            if not ok:
                logger.warning(message)
        msd = greens.mean_squared_displacement(ps.alpha, ps.n, np.asarray(report["times"]))
        report["msd_free_space"] = np.atleast_1d(msd).tolist()
        return report

    def _run_verify(self, config, p):
        reports = verify(p["suite"], p["sweep"], config.seed)
        failed = [r["suite"] for r in reports if not r["passed"]]
        summary = {"suites": reports, "failed": failed}
        if failed:
            raise VerificationFailed(summary)
        return summary


class VerificationFailed(FracDiffError):
    def __init__(self, summary):
        super().__init__(f"verification failed: {', '.join(summary['failed'])}")
        self.summary = summary


def run(argv=None, stream=None):
    """Command line entry; prints a one-line JSON summary and returns the exit code"""
    stream = stream or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_VALIDATION
    set_verbosity(args.verbose, args.debug)
    manager = CommandManager()
    code, summary = EXIT_OK, None
    try:
        config = manager.resolve(args)
        summary = manager.run_command(config)
    except VerificationFailed as exc:
        code, summary = EXIT_NUMERICAL, {"command": "verify", "status": "failed", **exc.summary}
    except (ConfigError, DomainError, SetupError) as exc:
        code = EXIT_VALIDATION
        summary = {"command": args.subcommand, "status": "invalid", "error": str(exc)}
    except EvaluationError as exc:
        code = EXIT_NUMERICAL
        summary = {"command": args.subcommand, "status": "numerical", "error": str(exc)}
    if code:
        logger.error(summary["error"] if "error" in summary else "verification failed")
    stream.write(data_storage.to_json(summary) + "\n")
    return code
