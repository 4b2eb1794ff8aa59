"""Batch command-line interface.

Subcommands: simulate | fit-path | fit-classify | reproduce-table2 |
emit-curves | threshold-sweep. Every option can also be supplied through a
flat key=value config file with one [section] per subcommand (values on the
command line win). All numeric output is formatted with 17 significant
digits, so identical configs and seeds give byte-identical files. Exit
codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

import argparse
import configparser
import csv
import json
import os
import sys

import numpy as np

from .cd_solver import (
    DEFAULT_ALPHAS,
    PAPER_FAITHFUL,
    SKIPPED,
    CDConfig,
    PathGrid,
    check_local_min,
    fit_path,
    kkt_residual,
)
from .data_metrics import (
    SCENARIOS,
    CVResult,
    Dataset,
    accuracy,
    cv_select,
    load_table,
    run_study,
    simulate,
    spe,
    standardize,
    write_metadata,
)
from .errors import BernpenError, DataFormatError, NoRootError, NumericalError
from .errors import ContractViolationError, DomainError, InvalidParameterError
from .losses import HUBER, LOGISTIC, loss_value
from .palm_solver import PalmConfig, fit_palm
from .penalty import NAMED_RHO, PenaltySpec, lambda_from_eta, mcp_value, phi, phi_prime
from .thresholding import mcp_threshold, soft_threshold, threshold, ThresholdQuery


class UsageError(BernpenError):
    """Bad command line or config values; exits with code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(value):
    return format(float(value), ".17g")


# Option tables: (name, converter, default, help). Conversion happens after
# merging command line > config file > default, so every argparse default is
# the None sentinel.
def _floatlist(text):
    return [float(tok) for tok in str(text).split(",") if tok.strip() != ""]


def _bool(text):
    if isinstance(text, bool):
        return text
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise UsageError("expected a boolean, got %r" % text)


_OPTIONS = {
    "simulate": [
        ("scenario", str, "data1", "scenario name: data1, data2, or data3"),
        ("seed", int, 0, "base RNG seed"),
        ("n-test", int, 10000, "test rows to draw"),
        ("out", str, None, "existing output directory (train.csv, test.csv, meta.json)"),
    ],
    "fit-path": [
        ("train", str, None, "training table"),
        ("format", str, "csv", "table format: csv or svmlight"),
        ("penalty", str, "lfr", "log, exp, lfr, kep, mcp, or l1"),
        ("rho", float, None, "custom family shape (overrides --penalty)"),
        ("n-etas", int, 50, "regularization grid size"),
        ("eta-min-ratio", float, 1e-3, "smallest eta as a fraction of eta_max"),
        ("alphas", _floatlist, list(DEFAULT_ALPHAS), "comma-separated alpha grid (descending)"),
        ("tol", float, 1e-7, "per-sweep convergence tolerance"),
        ("max-sweeps", int, 10000, "sweep budget per cell"),
        ("skip-policy", str, PAPER_FAITHFUL, "paper_faithful skips cells beyond the convexity gate; compute_case2 solves them"),
        ("cv-folds", int, 0, "cross-validation folds (0 = no selection)"),
        ("seed", int, 0, "fold-assignment seed"),
        ("evaluate", str, None, "test table for scoring the CV-selected cell"),
        ("sigma", float, None, "noise level for the SPE metric"),
        ("meta", str, None, "metadata JSON carrying sigma (from simulate)"),
        ("out", str, None, "existing output directory"),
    ],
    "fit-classify": [
        ("train", str, None, "training table"),
        ("format", str, "csv", "table format: csv or svmlight"),
        ("loss", str, "logistic", "logistic or huber"),
        ("delta", float, 1.0, "huber knot"),
        ("penalty", str, "lfr", "log, exp, lfr, kep, mcp, or l1"),
        ("rho", float, None, "custom family shape (overrides --penalty)"),
        ("alpha", float, 1.0, "penalty scale"),
        ("lam", float, None, "penalty level lambda"),
        ("eta", float, None, "penalty level in eta units (lambda = eta/P_unit(alpha))"),
        ("tol", float, 1e-6, "per-epoch convergence tolerance"),
        ("max-epochs", int, 5000, "epoch budget"),
        ("test", str, None, "test table for accuracy / loss reporting"),
        ("out", str, None, "existing output directory"),
    ],
    "reproduce-table2": [
        ("scenario", str, "data1", "scenario name: data1, data2, or data3"),
        ("repeats", int, 25, "number of seeded repeats"),
        ("seed", int, 2026, "base seed; repeat r uses seed + r"),
        ("folds", int, 10, "cross-validation folds"),
        ("n-test", int, 10000, "test rows per repeat"),
        ("n-etas", int, 40, "regularization grid size"),
        ("out", str, None, "existing output directory (table2.csv)"),
    ],
    "emit-curves": [
        ("rho", _floatlist, [-1.0, 0.0, 0.5, 1.0], "comma-separated rho values"),
        ("s-max", float, 10.0, "grid upper end"),
        ("s-step", float, 0.01, "grid spacing"),
        ("phi2-vs-mcp", _bool, False, "also write the MCP vs quadratic-shape comparison grid"),
        ("out", str, None, "existing output directory"),
    ],
    "threshold-sweep": [
        ("penalty", str, "log", "log, exp, lfr, kep, mcp, or l1"),
        ("rho", float, None, "custom family shape (overrides --penalty)"),
        ("alpha", float, 1.0, "penalty scale"),
        ("lam", float, None, "penalty level lambda"),
        ("eta", float, None, "penalty level in eta units"),
        ("z-min", float, -5.0, "sweep start"),
        ("z-max", float, 5.0, "sweep end"),
        ("z-step", float, 0.01, "sweep spacing"),
        ("out", str, None, "output CSV path"),
    ],
}


def _build_parser():
    parser = _Parser(prog="bernpen", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", metavar="command")
    for command, options in _OPTIONS.items():
        sub = subs.add_parser(command, description=command)
        sub.add_argument("--config", default=None, help="key=value config file with a [%s] section" % command)
        for name, _, _, help_text in options:
            sub.add_argument("--%s" % name, dest=name.replace("-", "_"), default=None, help=help_text)
    return parser


def _merge_options(args):
    """Command line > config section > defaults, with typed conversion."""
    section = {}
    if args.config is not None:
        if not os.path.exists(args.config):
            raise DataFormatError("config file %s does not exist" % args.config)
        reader = configparser.ConfigParser()
        reader.read(args.config)
        if reader.has_section(args.command):
            section = dict(reader.items(args.command))
    merged = {}
    for name, convert, default, _ in _OPTIONS[args.command]:
        dest = name.replace("-", "_")
        raw = getattr(args, dest)
        if raw is None:
            raw = section.get(name, section.get(dest))
        if raw is None:
            merged[dest] = default
            continue
        try:
            merged[dest] = convert(raw)
        except (TypeError, ValueError) as exc:
            raise UsageError("bad value for --%s: %s" % (name, exc)) from None
    return merged


def _require(opts, *names):
    for name in names:
        if opts[name.replace("-", "_")] is None:
            raise UsageError("--%s is required" % name)


def _check_outdir(path):
    if path is None:
        raise UsageError("--out is required")
    if not os.path.isdir(path):
        raise DataFormatError("output directory %s does not exist" % path)
    return path


def _resolve_spec(opts, alpha=1.0):
    if opts.get("rho") is not None:
        return PenaltySpec.bernstein(opts["rho"], alpha)
    return PenaltySpec.from_name(opts["penalty"], alpha)


def _write_table(path, ds):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["y"] + ["x%d" % (j + 1) for j in range(ds.p)])
        for i in range(ds.n):
            writer.writerow([_fmt(ds.y[i])] + [_fmt(v) for v in ds.X[i]])


def _cmd_simulate(opts):
    if opts["scenario"] not in SCENARIOS:
        raise UsageError("unknown scenario %r" % opts["scenario"])
    out = _check_outdir(opts["out"])
    scenario = SCENARIOS[opts["scenario"]](seed=opts["seed"])
    train, test, sigma = simulate(scenario, n_test=opts["n_test"])
    _write_table(os.path.join(out, "train.csv"), train)
    _write_table(os.path.join(out, "test.csv"), test)
    write_metadata(os.path.join(out, "meta.json"), scenario, sigma, opts["n_test"])
    print("wrote train.csv (%d x %d), test.csv (%d x %d), meta.json" % (train.n, train.p, test.n, test.p))
    return 0


def _diagnostics_rows(sol, std, lam_of):
    for k in range(sol.grid.alphas.size):
        for l in range(sol.grid.etas.size):
            if sol.status[k, l] == SKIPPED:
                continue
            alpha = float(sol.grid.alphas[k])
            eta = float(sol.grid.etas[l])
            cell_spec = PenaltySpec(sol.spec.family, sol.spec.rho, alpha)
            lam = lam_of(cell_spec, eta)
            b_std = sol.coef_std[k, l]
            report = check_local_min(b_std, std.X, std.y, lam, cell_spec)
            yield {
                "alpha": _fmt(alpha),
                "eta": _fmt(eta),
                "kkt": _fmt(kkt_residual(b_std, std.X, std.y, lam, cell_spec)),
                "eigen_margin": _fmt(report.eigen_margin),
                "eigen_margin_scaled": _fmt(report.eigen_margin_scaled),
                "strict_dual_feasible": str(report.strict_dual_feasible).lower(),
            }


def _cmd_fit_path(opts):
    _require(opts, "train")
    out = _check_outdir(opts["out"])
    if not os.path.exists(opts["train"]):
        raise DataFormatError("training table %s does not exist" % opts["train"])
    ds = load_table(opts["train"], fmt=opts["format"])
    spec = _resolve_spec(opts)
    std, transform = standardize(ds)
    alphas = np.asarray(opts["alphas"], dtype=float)
    if spec.family == "l1":
        alphas = np.asarray([1.0])
    grid = PathGrid(
        etas=np.geomspace(
            opts["eta_min_ratio"] * float(np.max(np.abs(std.X.T @ std.y))),
            float(np.max(np.abs(std.X.T @ std.y))),
            opts["n_etas"],
        ),
        alphas=alphas,
    )
    config = CDConfig(tol=opts["tol"], max_sweeps=opts["max_sweeps"], skip_policy=opts["skip_policy"])
    sol = fit_path(std.X, std.y, spec, grid=grid, config=config, transform=transform)
    sol.to_csv(os.path.join(out, "path.csv"), coef_path=os.path.join(out, "coefs.csv"))
    with open(os.path.join(out, "diagnostics.csv"), "w", newline="") as handle:
        writer = csv.DictWriter(
            handle,
            fieldnames=["alpha", "eta", "kkt", "eigen_margin", "eigen_margin_scaled", "strict_dual_feasible"],
        )
        writer.writeheader()
        for row in _diagnostics_rows(sol, std, lambda_from_eta):
            writer.writerow(row)

    summary = {"train": opts["train"], "penalty": opts["penalty"], "family": spec.family, "rho": spec.rho}
    if opts["cv_folds"]:
        chosen = cv_select(ds, spec, grid, n_folds=opts["cv_folds"], seed=opts["seed"], config=config)
        cell = sol.cell(chosen.alpha_index, chosen.eta_index)
        summary["cv"] = {"alpha": _fmt(chosen.alpha), "eta": _fmt(chosen.eta), "nnz": int(np.count_nonzero(cell["coef"]))}
        if opts["evaluate"]:
            sigma = opts["sigma"]
            if sigma is None and opts["meta"]:
                with open(opts["meta"]) as handle:
                    sigma = json.load(handle).get("sigma")
            if sigma is None:
                raise UsageError("--evaluate needs --sigma or --meta for the SPE metric")
            test = load_table(opts["evaluate"], fmt=opts["format"])
            summary["spe"] = _fmt(spe(cell["coef"], test, float(sigma), intercept=cell["intercept"]))
    elif opts["evaluate"]:
        raise UsageError("--evaluate requires --cv-folds to select a cell")
    with open(os.path.join(out, "summary.json"), "w") as handle:
        json.dump(summary, handle, indent=1)
    print("wrote path.csv, coefs.csv, diagnostics.csv, summary.json")
    return 0


def _cmd_fit_classify(opts):
    _require(opts, "train")
    out = _check_outdir(opts["out"])
    if not os.path.exists(opts["train"]):
        raise DataFormatError("training table %s does not exist" % opts["train"])
    if opts["loss"] not in (LOGISTIC, HUBER):
        raise UsageError("--loss must be logistic or huber")
    ds = load_table(opts["train"], fmt=opts["format"])
    spec = _resolve_spec(opts, alpha=opts["alpha"])
    if opts["lam"] is not None:
        lam = opts["lam"]
    elif opts["eta"] is not None:
        lam = lambda_from_eta(spec, opts["eta"])
    else:
        raise UsageError("one of --lam or --eta is required")
    config = PalmConfig(tol=opts["tol"], max_epochs=opts["max_epochs"])
    b, trace = fit_palm(ds.X, ds.y, spec, lam, loss=opts["loss"], config=config, delta=opts["delta"])
    trace.to_csv(os.path.join(out, "trace.csv"))
    with open(os.path.join(out, "coef.csv"), "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["coordinate", "value"])
        for j, value in enumerate(b):
            writer.writerow([j, _fmt(value)])
    summary = {
        "loss": opts["loss"],
        "penalty": opts["penalty"],
        "lambda": _fmt(lam),
        "alpha": _fmt(spec.alpha),
        "converged": trace.converged,
        "epochs": trace.epochs,
        "objective": _fmt(trace.objectives[-1]) if trace.epochs else _fmt(trace.initial_objective),
        "kkt": _fmt(trace.kkt_final),
        "nnz": int(np.count_nonzero(b)),
    }
    if opts["test"]:
        test = load_table(opts["test"], fmt=opts["format"])
        if opts["loss"] == LOGISTIC:
            summary["accuracy"] = _fmt(accuracy(b, test))
        else:
            summary["test_loss"] = _fmt(loss_value(HUBER, b, test.X, test.y, opts["delta"]) / test.n)
    with open(os.path.join(out, "summary.json"), "w") as handle:
        json.dump(summary, handle, indent=1)
    print("wrote coef.csv, trace.csv, summary.json")
    return 0


def _cmd_reproduce_table2(opts):
    if opts["scenario"] not in SCENARIOS:
        raise UsageError("unknown scenario %r" % opts["scenario"])
    if opts["repeats"] < 1:
        raise UsageError("--repeats must be at least 1")
    out = _check_outdir(opts["out"])
    rows = run_study(
        SCENARIOS[opts["scenario"]],
        repeats=opts["repeats"],
        base_seed=opts["seed"],
        n_folds=opts["folds"],
        n_test=opts["n_test"],
        n_etas=opts["n_etas"],
    )
    path = os.path.join(out, "table2.csv")
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["penalty", "spe_mean", "spe_sd", "fse_mean", "fse_sd", "nnz_mean"])
        for row in rows:
            writer.writerow(
                [row.penalty, _fmt(row.spe_mean), _fmt(row.spe_sd), _fmt(row.fse_mean), _fmt(row.fse_sd), _fmt(row.nnz_mean)]
            )
    for row in rows:
        print(
            "%-6s spe %.4f (+/- %.4f)  fse %.4f (+/- %.4f)"
            % (row.penalty, row.spe_mean, row.spe_sd, row.fse_mean, row.fse_sd)
        )
    print("wrote %s" % path)
    return 0


def _cmd_emit_curves(opts):
    out = _check_outdir(opts["out"])
    if opts["s_max"] <= 0.0 or opts["s_step"] <= 0.0:
        raise UsageError("--s-max and --s-step must be positive")
    s = np.arange(0.0, opts["s_max"] + 0.5 * opts["s_step"], opts["s_step"])
    written = []
    for rho in opts["rho"]:
        spec = PenaltySpec.bernstein(rho)
        name = "curve_rho_%s.csv" % format(rho, "g").replace("-", "m").replace(".", "p")
        with open(os.path.join(out, name), "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["s", "phi", "dphi"])
            for si, vi, di in zip(s, phi(spec, s), phi_prime(spec, s)):
                writer.writerow([_fmt(si), _fmt(vi), _fmt(di)])
        written.append(name)
    if opts["phi2_vs_mcp"]:
        name = "mcp_vs_phi2.csv"
        with open(os.path.join(out, name), "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["s", "mcp", "phi2"])
            for si in s:
                writer.writerow([_fmt(si), _fmt(float(mcp_value(si))), _fmt(si - 0.5 * si * si)])
        written.append(name)
    print("wrote %s" % ", ".join(written))
    return 0


def _cmd_threshold_sweep(opts):
    if opts["out"] is None:
        raise UsageError("--out is required")
    if opts["z_step"] <= 0.0 or opts["z_max"] <= opts["z_min"]:
        raise UsageError("need z-min < z-max and positive z-step")
    spec = _resolve_spec(opts, alpha=opts["alpha"])
    if opts["lam"] is not None:
        lam = opts["lam"]
    elif opts["eta"] is not None:
        lam = lambda_from_eta(spec, opts["eta"])
    else:
        raise UsageError("one of --lam or --eta is required")
    zs = np.arange(opts["z_min"], opts["z_max"] + 0.5 * opts["z_step"], opts["z_step"])
    with open(opts["out"], "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["z", "estimate", "case"])
        for z in zs:
            if spec.family == "bernstein":
                res = threshold(ThresholdQuery(z=float(z), spec=spec, lam=float(lam)))
                estimate, case = res.estimate, res.case
            elif spec.family == "mcp":
                estimate = mcp_threshold(float(z), float(lam), spec.alpha)
                case = "I" if lam * spec.alpha**2 < 1.0 else "II"
            else:
                estimate = soft_threshold(float(z), float(lam))
                case = "I"
            writer.writerow([_fmt(z), _fmt(estimate), case])
    print("wrote %s" % opts["out"])
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "fit-path": _cmd_fit_path,
    "fit-classify": _cmd_fit_classify,
    "reproduce-table2": _cmd_reproduce_table2,
    "emit-curves": _cmd_emit_curves,
    "threshold-sweep": _cmd_threshold_sweep,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        opts = _merge_options(args)
        return _COMMANDS[args.command](opts)
    except (UsageError, InvalidParameterError, DomainError) as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return 1
    except (DataFormatError, ContractViolationError, FileNotFoundError) as exc:
        print("data error: %s" % exc, file=sys.stderr)
        return 2
    except (NoRootError, NumericalError, np.linalg.LinAlgError) as exc:
        print("numerical error: %s" % exc, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
