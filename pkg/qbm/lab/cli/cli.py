"""Command-line interface: `qbm-lab {learn|experiment|stats}`.

Exit codes: 0 when every fit converged or reached the weight cap, 2 when a fit
exhausted its iteration budget, 1 on parse or validation errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from qbm.lab.experiments.models import EXPERIMENT_KINDS, ExperimentSpec, ParameterError
from qbm.lab.experiments.runner import DEFAULT_BETAS, run_experiment
from qbm.lab.learning.cache import FitCache
from qbm.lab.learning.data import DataError, data_moments, single_spin_table
from qbm.lab.learning.learning import LearnConfig, LearningError, Termination, fit_bm, fit_qbm, relative_entropy
from qbm.lab.learning.parse import read_distribution, read_moments, read_samples, write_moments
from qbm.lab.quantum.matrices import QuantumError
from qbm.lab.quantum.operators import SpecError, complete_spec
from qbm.lab.quantum.parse import ParseError, read_spec, write_spec
from qbm.lab.quantum.spin_basis import SiteError, SpinCountError

from .manifest import RunManifest

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MAX_ITERS = 2

USER_ERRORS = (
    ParseError,
    DataError,
    SpecError,
    ParameterError,
    LearningError,
    QuantumError,
    SiteError,
    SpinCountError,
    OSError,
)


def _floats(value: str) -> list[float]:
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{value}'")


def _ints(value: str) -> list[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{value}'")


def _add_learn_flags(parser: argparse.ArgumentParser):
    defaults = LearnConfig()
    group = parser.add_argument_group("learning")
    group.add_argument("--epsilon", type=float, default=defaults.epsilon, help="learning rate (default: 0.1)")
    group.add_argument("--tol", type=float, default=defaults.tol_dL, help="stop when |dL| < tol (default: 1e-15)")
    group.add_argument(
        "--tol-grad", type=float, default=defaults.tol_grad, help="stop when max |gradient| < tol-grad (0: disabled)"
    )
    group.add_argument("--max-iter", type=int, default=defaults.max_iters, help="iteration budget (default: 200000)")
    group.add_argument("--weight-cap", type=float, default=defaults.weight_cap, help="max |w| (default: 30)")
    group.add_argument("--init", choices=["zero", "normal", "spec"], default=defaults.init, help="initial weights")
    group.add_argument("--init-scale", type=float, default=defaults.init_scale, help="std of normal initial weights")
    group.add_argument("--seed", type=int, default=None, help="random seed")
    group.add_argument("--log-every", type=int, default=defaults.log_every, help="log every N iterations")
    group.add_argument("--cache-dir", type=Path, default=None, help="reuse fit results cached in this directory")


def _learn_config(args: argparse.Namespace) -> LearnConfig:
    return LearnConfig(
        epsilon=args.epsilon,
        max_iters=args.max_iter,
        tol_dL=args.tol,
        tol_grad=args.tol_grad,
        weight_cap=args.weight_cap,
        init=args.init,
        init_scale=args.init_scale,
        seed=args.seed,
        log_every=args.log_every,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbm-lab",
        description="Learn quantum and classical Boltzmann machines from spin data",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  qbm-lab learn model.txt --target targets.csv --out runs/afh
  qbm-lab learn model.txt --samples data.txt --mode bm --out runs/bm
  qbm-lab experiment parity --n 10 --out runs/parity
  qbm-lab experiment spin-glass --n 8 --beta-list 0.2,0.5,1,2,4 --seed 1 --jobs 4
  qbm-lab stats data.txt --out runs/stats
        """,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    learn = commands.add_parser("learn", help="fit a spec file to data or target moments")
    learn.add_argument("spec", type=Path, help="Hamiltonian spec file")
    data = learn.add_mutually_exclusive_group(required=True)
    data.add_argument("--samples", type=Path, help="sample file, one ±1 configuration per line")
    data.add_argument("--distribution", type=Path, help="distribution file, configurations and probabilities")
    data.add_argument("--target", type=Path, help="moment CSV kind,i,j,axis,value")
    learn.add_argument("--zero-one", action="store_true", help="samples are written with 1/0 instead of +1/-1")
    learn.add_argument("--mode", choices=["qbm", "bm"], default="qbm", help="model (default: qbm)")
    learn.add_argument("--out", type=Path, default=Path("qbm-out"), help="output directory")
    _add_learn_flags(learn)

    experiment = commands.add_parser("experiment", help="run a named experiment")
    experiment.add_argument("kind", choices=[k.replace("_", "-") for k in EXPERIMENT_KINDS])
    experiment.add_argument("--n", type=int, default=10, help="spin count (default: 10)")
    experiment.add_argument("--beta-list", type=_floats, default=list(DEFAULT_BETAS), help="spin-glass temperatures")
    experiment.add_argument("--seeds", type=_ints, default=None, help="spin-glass seeds (default: --seed or 0)")
    experiment.add_argument("--instances", type=int, default=10, help="pattern mixtures to draw (default: 10)")
    experiment.add_argument("--n-patterns", type=int, default=8, help="patterns per mixture (default: 8)")
    experiment.add_argument("--noise", type=float, default=0.1, help="per-spin flip probability (default: 0.1)")
    experiment.add_argument(
        "--couplings", type=_floats, default=None, help="xyz chain couplings wx,wy,wz (default: -0.2,-0.6,-0.4)"
    )
    experiment.add_argument("--field-scale", type=float, default=1.0, help="xyz field multiplier (default: 1)")
    experiment.add_argument("--points", type=int, default=101, help="bell grid points per axis (default: 101)")
    experiment.add_argument("--jobs", type=int, default=1, help="parallel fits (default: 1)")
    experiment.add_argument("--out", type=Path, default=None, help="output directory (default: qbm-out/<kind>)")
    _add_learn_flags(experiment)

    stats = commands.add_parser("stats", help="classical and quantum statistics of a dataset")
    stats.add_argument("data", type=Path, help="sample file (or distribution file with --distribution)")
    stats.add_argument("--distribution", action="store_true", help="read DATA as a distribution file")
    stats.add_argument("--zero-one", action="store_true", help="samples are written with 1/0 instead of +1/-1")
    stats.add_argument("--out", type=Path, default=Path("qbm-out"), help="output directory")
    return parser


def _parameters(args: argparse.Namespace) -> dict:
    return {k: (v.as_posix() if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())}


def cmd_learn(args: argparse.Namespace) -> int:
    spec = read_spec(args.spec)
    cfg = _learn_config(args)
    if args.target is not None:
        target, eta_entropy = read_moments(args.target, spec)
    else:
        if args.samples is not None:
            q = read_samples(args.samples, zero_one=args.zero_one)
        else:
            q = read_distribution(args.distribution)
        if q.n != spec.n:
            msg = f"Data has {q.n} spins, spec has {spec.n}"
            raise DataError(msg)
        target = data_moments(spec, q)
        # rank-one data density matrix
        eta_entropy = 0.0

    manifest = RunManifest(command="learn", parameters=_parameters(args), seed=args.seed)
    if args.cache_dir is not None:
        result = FitCache(args.cache_dir).fit(args.mode, spec, target, cfg)
    else:
        fit = fit_qbm if args.mode == "qbm" else fit_bm
        result = fit(spec, target, cfg)

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    s_eta_rho = relative_entropy(result.likelihood, eta_entropy) if eta_entropy is not None else float("nan")
    summary = {
        "termination": result.termination.value,
        "S_eta_rho": s_eta_rho,
        "L": result.likelihood,
        "final_moment_error": result.final_moment_error,
        "iters": result.iterations,
        "non_unique": result.non_unique,
    }
    with open(out / "summary.txt", "w", encoding="utf-8") as f:
        for key, value in summary.items():
            f.write(f"{key}={value}\n")
    result.trace.write_csv(out / "trace.csv")
    write_spec(result.spec, out / "learned_spec.txt")
    manifest.finish([out / "summary.txt", out / "trace.csv", out / "learned_spec.txt"]).write(out)

    msg = ", ".join(f"{key}={value}" for key, value in summary.items())
    log.info(msg)
    return EXIT_MAX_ITERS if result.termination == Termination.MAX_ITERS else EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    kind = args.kind.replace("-", "_")
    params = {"n_patterns": args.n_patterns, "noise": args.noise, "field_scale": args.field_scale}
    if args.couplings is not None:
        if len(args.couplings) != 3:
            msg = f"--couplings needs 3 values, got {len(args.couplings)}"
            raise ParameterError(msg)
        params["couplings"] = tuple(args.couplings)
    seed = args.seed if args.seed is not None else 0
    exp = ExperimentSpec(kind=kind, n=args.n, seed=seed, params=params).validate()
    if args.jobs < 1:
        msg = f"--jobs must be at least 1, got {args.jobs}"
        raise ParameterError(msg)
    cfg = _learn_config(args)
    out = args.out or Path("qbm-out") / args.kind

    manifest = RunManifest(command=f"experiment {args.kind}", parameters=_parameters(args), seed=seed)
    outcome = run_experiment(
        exp,
        out,
        cfg,
        jobs=args.jobs,
        cache_dir=args.cache_dir,
        betas=args.beta_list,
        seeds=args.seeds,
        instances=args.instances,
        points=args.points,
    )
    manifest.finish(outcome.outputs).write(out)
    msg = f"Wrote {len(outcome.outputs)} files to {out}"
    log.info(msg)
    return EXIT_MAX_ITERS if outcome.exhausted else EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    if args.distribution:
        q = read_distribution(args.data)
    else:
        q = read_samples(args.data, zero_one=args.zero_one)
    spec = complete_spec(q.n)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(command="stats", parameters=_parameters(args))
    write_moments(spec, data_moments(spec, q), out / "stats.csv", entropy=0.0)
    single_spin_table(q).write_csv(out / "entanglement.csv")
    manifest.finish([out / "stats.csv", out / "entanglement.csv"]).write(out)
    msg = f"Statistics of {len(q)} configurations on {q.n} spins written to {out}"
    log.info(msg)
    return EXIT_OK


COMMANDS = {"learn": cmd_learn, "experiment": cmd_experiment, "stats": cmd_stats}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except USER_ERRORS as e:
        log.error(str(e))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
