"""
SU Learning Command Line
Subcommands for data generation, SU sampling, training, evaluation, prior
estimation, repeated single training runs and the experiment sweeps
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from pydantic import ValidationError

from su_learning.classifier import SUClassifier, evaluate
from su_learning.config import get_settings
from su_learning.core.prior import estimate_prior
from su_learning.core.train import classify, load_model, predict, save_model
from su_learning.data.datasets import (
    generate_banana,
    generate_gaussian,
    load_libsvm,
    load_su,
    sample_su,
    save_libsvm,
    save_su,
)
from su_learning.errors import SULearningError
from su_learning.experiments.runner import run_experiment
from su_learning.logging_setup import setup_logging
from su_learning.models.data_models import SyntheticSpec
from su_learning.models.experiment_models import DataFamily, ExperimentConfig, ExperimentKind, PriorMode
from su_learning.models.learning_models import MPEConfig, PriorCase

logger = logging.getLogger(__name__)

EXIT_USAGE = 1
EXIT_DATA = 2


class SUArgumentParser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with status 1"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> List[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _emit_json(payload: Dict[str, Any], output: Optional[Path]) -> None:
    text = json.dumps(payload, indent=2, default=str)
    if output is None:
        print(text)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text + "\n", encoding="utf-8")
    logger.info(f"Wrote {output}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_generate(args: argparse.Namespace) -> int:
    n = args.n if args.n is not None else get_settings().test_set_size
    if args.family == DataFamily.BANANA.value:
        data = generate_banana(args.pi_plus, n, noise=args.noise, seed=args.seed)
    else:
        spec = SyntheticSpec.isotropic(args.d, args.separation, args.pi_plus, seed=args.seed)
        data = generate_gaussian(spec, n)
    save_libsvm(data, args.output)
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    data = load_libsvm(args.input)
    su = sample_su(data, args.pi_plus, args.n_s, args.n_u, seed=args.seed,
                   method=args.method, replace=not args.without_replacement)
    save_su(su, args.output, include_labels=not args.no_labels)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    su = load_su(args.data)
    clf = SUClassifier(pi_plus=args.pi_plus, prior_mode=args.prior_mode, losses=args.loss,
                       lambda_grid=args.lambda_grid, lam=args.lam, cv_folds=args.cv_folds,
                       basis=args.basis, n_centers=args.n_centers, seed=args.seed, n_jobs=args.n_jobs)
    clf.fit(su)
    save_model(clf.model_, args.output)
    report = clf.report()
    report["model_path"] = str(args.output)
    _emit_json(report, args.report)
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    data = load_libsvm(args.input, n_features=model.basis.n_inputs)
    frame = pd.DataFrame({"score": predict(model, data.features), "label": classify(model, data.features)})
    if args.output is None:
        frame.to_csv(sys.stdout, index=False)
    else:
        frame.to_csv(args.output, index=False)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    data = load_libsvm(args.test, n_features=model.basis.n_inputs)
    _emit_json(evaluate(model, data), args.output)
    return 0


def cmd_estimate_prior(args: argparse.Namespace) -> int:
    su = load_su(args.data)
    cfg = MPEConfig(bandwidth=args.bandwidth, lambda_left=args.lambda_left, method=args.method, seed=args.seed)
    estimate = estimate_prior(su, cfg, args.case)
    payload = estimate.to_dict()
    if not args.diagnostics:
        payload.pop("diagnostics", None)
    _emit_json(payload, args.output)
    return 0


_SWEEP_OVERRIDES = {
    "trials": "trials", "seed": "seed", "output": "output", "pi_plus": "pi_plus",
    "pi_plus_grid": "pi_plus_grid", "n_s": "n_s", "n_u": "n_u", "n_u_grid": "n_u_grid",
    "sizes": "sizes", "family": "family", "input": "input_path", "lam": "lam",
    "lambda_grid": "lambda_grid", "n_jobs": "n_jobs", "prior_mode": "prior_mode",
    "basis": "basis", "n_test": "n_test", "d": "d", "separation": "separation",
    "cv_folds": "cv_folds", "losses": "losses",
}


def build_experiment_config(args: argparse.Namespace,
                            kind: Optional[ExperimentKind] = None) -> ExperimentConfig:
    """Config file values overridden by every flag given on the command line; kind=None keeps the file's kind"""
    data: Dict[str, Any] = {}
    if args.config is not None:
        if not args.config.exists():
            raise FileNotFoundError(f"config file not found: {args.config}")
        data = json.loads(args.config.read_text(encoding="utf-8"))
    for flag, field in _SWEEP_OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[field] = value
    if kind is not None:
        data["kind"] = kind.value
    elif getattr(args, "kind", None) is not None:
        data["kind"] = args.kind
    return ExperimentConfig.model_validate(data)


def _run_sweep(args: argparse.Namespace, kind: Optional[ExperimentKind]) -> int:
    cfg = build_experiment_config(args, kind)
    frame, summary = run_experiment(cfg)
    if cfg.output is None:
        frame.to_csv(sys.stdout, index=False)
    if args.print_summary:
        _emit_json(summary.to_dict(), None)
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    return _run_sweep(args, None)


def cmd_sweep_nu(args: argparse.Namespace) -> int:
    return _run_sweep(args, ExperimentKind.NU_SWEEP)


def cmd_prior_curve(args: argparse.Namespace) -> int:
    return _run_sweep(args, ExperimentKind.PRIOR_CURVE)


def cmd_benchmark(args: argparse.Namespace) -> int:
    return _run_sweep(args, ExperimentKind.BENCHMARK)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_sweep_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="ExperimentConfig JSON; flags override it")
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--output", type=Path, help="CSV path; the run summary is written beside it")
    parser.add_argument("--pi-plus", dest="pi_plus", type=float)
    parser.add_argument("--pi-plus-grid", dest="pi_plus_grid", type=_float_list)
    parser.add_argument("--n-s", dest="n_s", type=int)
    parser.add_argument("--n-u", dest="n_u", type=int)
    parser.add_argument("--n-u-grid", dest="n_u_grid", type=_int_list)
    parser.add_argument("--sizes", type=_int_list)
    parser.add_argument("--family", choices=[f.value for f in DataFamily])
    parser.add_argument("--input", type=Path, help="labeled LIBSVM file instead of synthetic data")
    parser.add_argument("--d", type=int)
    parser.add_argument("--separation", type=float)
    parser.add_argument("--lambda", dest="lam", type=float)
    parser.add_argument("--lambda-grid", dest="lambda_grid", type=_float_list)
    parser.add_argument("--cv-folds", dest="cv_folds", type=int)
    parser.add_argument("--prior-mode", dest="prior_mode", choices=[m.value for m in PriorMode])
    parser.add_argument("--losses", type=_str_list, help="comma-separated trainers, e.g. squared,double-hinge")
    parser.add_argument("--basis", choices=["linear", "rbf"])
    parser.add_argument("--n-test", dest="n_test", type=int)
    parser.add_argument("--n-jobs", dest="n_jobs", type=int)
    parser.add_argument("--print-summary", action="store_true", help="print the run summary JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = SUArgumentParser(prog="su_learning",
                              description="Binary classification from similar pairs and unlabeled data")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--log-file", action="store_true", help="also log to a timestamped file")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=SUArgumentParser)

    p = sub.add_parser("generate", help="write synthetic labeled data in LIBSVM format")
    p.add_argument("--family", choices=[f.value for f in DataFamily], default=DataFamily.GAUSSIAN.value)
    p.add_argument("--n", type=int)
    p.add_argument("--pi-plus", dest="pi_plus", type=float, default=0.7)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--separation", type=float, default=3.0)
    p.add_argument("--noise", type=float, default=0.15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", type=Path, required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sample", help="draw an SU dataset from labeled LIBSVM data")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--pi-plus", dest="pi_plus", type=float, required=True)
    p.add_argument("--n-s", dest="n_s", type=int, required=True)
    p.add_argument("--n-u", dest="n_u", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=["rejection", "stratified"], default="rejection")
    p.add_argument("--without-replacement", action="store_true")
    p.add_argument("--no-labels", action="store_true", help="omit the hidden labels from the file")
    p.add_argument("--output", type=Path, required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("train", help="train a linear-in-parameter SU classifier")
    p.add_argument("--data", type=Path, required=True, help="SU dataset JSON")
    p.add_argument("--pi-plus", dest="pi_plus", type=float)
    p.add_argument("--prior-mode", dest="prior_mode", choices=[m.value for m in PriorMode],
                   default=PriorMode.GIVEN.value)
    p.add_argument("--loss", type=_str_list, default=["squared"], help="loss or comma-separated losses")
    p.add_argument("--lambda", dest="lam", type=float, help="fixed lambda; skips cross-validation")
    p.add_argument("--lambda-grid", dest="lambda_grid", type=_float_list, default=[1e-1, 1e-4, 1e-7])
    p.add_argument("--cv-folds", dest="cv_folds", type=int, default=5)
    p.add_argument("--basis", choices=["linear", "rbf"], default="linear")
    p.add_argument("--n-centers", dest="n_centers", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-jobs", dest="n_jobs", type=int)
    p.add_argument("--output", type=Path, required=True, help="model JSON")
    p.add_argument("--report", type=Path, help="training report JSON (default: stdout)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score labeled or unlabeled LIBSVM points")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="accuracy, clustering accuracy and zero-one risk")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--test", type=Path, required=True)
    p.add_argument("--output", type=Path)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("estimate-prior", help="estimate pi_plus from SU data")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--case", choices=[c.value for c in PriorCase], default=PriorCase.ASSUME_PLUS_LARGER.value)
    p.add_argument("--method", choices=["two_sided", "one_sided"], default="two_sided")
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--lambda-left", dest="lambda_left", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--diagnostics", action="store_true")
    p.add_argument("--output", type=Path)
    p.set_defaults(func=cmd_estimate_prior)

    for name, func, help_text in (
        ("sweep-nu", cmd_sweep_nu, "test error against n_U"),
        ("prior-curve", cmd_prior_curve, "prior estimation error against dataset size"),
        ("benchmark", cmd_benchmark, "SU squared and double-hinge against k-means"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_sweep_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("run", help="run the experiment kind named by --kind or the config file")
    p.add_argument("--kind", choices=[k.value for k in ExperimentKind])
    _add_sweep_flags(p)
    p.set_defaults(func=cmd_run)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    settings = get_settings()
    setup_logging(args.log_level or settings.log_level, settings.log_dir,
                  to_file=args.log_file or settings.log_to_file)

    try:
        return args.func(args)
    except SULearningError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except (ValidationError, FileNotFoundError, json.JSONDecodeError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
