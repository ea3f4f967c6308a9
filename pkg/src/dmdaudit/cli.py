"""Command-line entry point: validate, sweep, fit, granger, and synth
subcommands with CSV input and JSON/CSV/PNG outputs.

Configuration precedence: command-line flags override the optional JSON
config file, which overrides built-in defaults.  Exit codes: 0 for success
or a positive verdict, 2 for a clean negative verdict, 1 for any error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .dmd import model_to_dict, spectrum_report
from .embedding import TimeSeries, build_hankel, load_csv, save_csv
from .granger import causality_matrix
from .numerics import RankPolicy
from .pipeline import analyze, split_series, sweep, validate
from .reportio import write_csv, write_json
from .synth import (
    CausalGraphSpec,
    CoherencySpec,
    fig_three_channel_graph,
    gen_coherency,
    gen_linear_system,
    gen_var,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2


@dataclass
class RunConfig:
    """Runtime options shared by the analysis subcommands."""

    input: str | None = None
    dt: float = 1.0
    lag: int | None = None
    lag_min: int | None = None
    lag_max: int | None = None
    rank: int | None = None
    energy: float = 0.999
    alpha: float = 0.05
    split: float = 2.0 / 3.0
    offset: int = 0
    p_max: int = 10
    gct_mode: str = "edge-mean"
    seed: int = 0
    out: str = "."

    def validate_fields(self):
        if not 0.0 < self.split < 1.0:
            raise ValueError(f"split must lie in (0, 1), got {self.split}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.offset < 0:
            raise ValueError("offset must be nonnegative")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    def policy(self) -> RankPolicy:
        if self.rank is not None:
            return RankPolicy.fixed(self.rank)
        return RankPolicy.from_energy(self.energy)


def _merge_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    file_values = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            file_values = json.load(fh)
    known = {f.name for f in fields(RunConfig)}
    for key, value in file_values.items():
        key = key.replace("-", "_")
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        setattr(cfg, key, value)
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            setattr(cfg, f.name, flag)
    if getattr(args, "lag_range", None):
        lo, _, hi = args.lag_range.partition(":")
        cfg.lag_min, cfg.lag_max = int(lo), int(hi)
    cfg.validate_fields()
    return cfg


def _load_series(cfg: RunConfig) -> TimeSeries:
    if not cfg.input:
        raise ValueError("--input is required")
    ts = load_csv(cfg.input, dt=cfg.dt)
    if cfg.offset:
        if cfg.offset >= ts.samples - 1:
            raise ValueError(f"offset {cfg.offset} leaves no data")
        ts = ts.window(cfg.offset, ts.samples)
    return ts


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_validate(args) -> int:
    cfg = _merge_config(args)
    if cfg.lag is None:
        raise ValueError("--lag is required")
    ts = _load_series(cfg)
    report = validate(ts, cfg.lag, alpha=cfg.alpha, p_max=cfg.p_max, gct_mode=cfg.gct_mode)
    out = _outdir(cfg)
    write_json(out / "validation_report.json", report.to_dict())
    print(f"lag {cfg.lag}: PE {'ok' if report.pe.satisfied else 'FAILED'}, "
          f"GCT {'ok' if report.gct_causal else ('not run' if not report.gct_ran else 'FAILED')}, "
          f"usable={report.usable}")
    return EXIT_OK if report.usable else EXIT_NEGATIVE


def cmd_sweep(args) -> int:
    cfg = _merge_config(args)
    if cfg.lag_min is None or cfg.lag_max is None:
        raise ValueError("--lag-range LMIN:LMAX is required")
    ts = _load_series(cfg)
    train, test = split_series(ts, cfg.split)
    report = sweep(
        train, test, cfg.lag_min, cfg.lag_max,
        policy=cfg.policy(), alpha=cfg.alpha, p_max=cfg.p_max, gct_mode=cfg.gct_mode,
    )
    out = _outdir(cfg)
    write_json(out / "sweep_report.json", report.to_dict())

    cols = report.columns()
    keys = ["lag", "pe_satisfied", "gct_ran", "gct_causal", "p_value", "statistic",
            "condition_number", "condition_finite", "usable", "max_eig_magnitude",
            "train_rmse_mean", "test_rmse_mean", "error"]
    write_csv(out / "sweep_columns.csv", keys,
              [[cols[k][i] for k in keys] for i in range(len(cols["lag"]))])
    for key, fname in (("p_value", "pvalue_vs_lag.csv"),
                       ("statistic", "statistic_vs_lag.csv"),
                       ("condition_number", "cond_vs_lag.csv")):
        write_csv(out / fname, ["lag", key],
                  [[lag, val] for lag, val in zip(cols["lag"], cols[key])])
    eig_rows = []
    spectra = {}
    for rec in report.records:
        if rec.analysis is None:
            continue
        spectra[rec.lag] = rec.analysis.spectrum
        for er in rec.analysis.spectrum.records:
            eig_rows.append([rec.lag, er.eigenvalue.real, er.eigenvalue.imag, er.magnitude])
    write_csv(out / "eigenvalues.csv", ["lag", "re", "im", "magnitude"], eig_rows)

    from .plotting import save_eigenvalue_figure, save_sweep_figures

    save_sweep_figures(report, out)
    if spectra:
        shown = {lag: spectra[lag] for lag in sorted(spectra)[:: max(1, len(spectra) // 6)]}
        save_eigenvalue_figure(shown, out / "eigenvalues.png")

    if report.l_star is None:
        print("no usable lag found in the range")
        return EXIT_NEGATIVE
    print(f"smallest usable lag: {report.l_star}")
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = _merge_config(args)
    if cfg.lag is None:
        raise ValueError("--lag is required")
    ts = _load_series(cfg)
    train, test = split_series(ts, cfg.split)
    validation, analysis = analyze(
        train, test, cfg.lag,
        policy=cfg.policy(), alpha=cfg.alpha, p_max=cfg.p_max, gct_mode=cfg.gct_mode,
    )
    out = _outdir(cfg)
    write_json(out / "model.json", model_to_dict(analysis.model))
    write_json(out / "rmse_report.json", {
        "lag": cfg.lag,
        "train_rmse": analysis.train_rmse.tolist(),
        "test_rmse": analysis.test_rmse.tolist(),
        "fit_residual": analysis.residual,
        "validation": validation.to_dict(),
        "spectrum": analysis.spectrum.to_dict(),
    })

    from .dmd import forecast, reconstruct

    pred_train = reconstruct(analysis.model, train.samples, mode="mean")
    pred_test = forecast(analysis.model, train.samples, test.samples)
    predicted = np.hstack([pred_train, pred_test])
    header = ["sample", "time"] + [f"pred_{lbl}" for lbl in ts.labels]
    rows = [[k, k * ts.dt] + [predicted[c, k] for c in range(ts.channels)]
            for k in range(predicted.shape[1])]
    write_csv(out / "prediction.csv", header, rows)

    from .plotting import save_prediction_figure

    save_prediction_figure(ts, predicted, train.samples, out / "prediction.png")
    print(f"lag {cfg.lag}: rank {analysis.model.rank}, "
          f"train RMSE {analysis.train_rmse.mean():.4g}, test RMSE {analysis.test_rmse.mean():.4g}")
    return EXIT_OK


def cmd_granger(args) -> int:
    cfg = _merge_config(args)
    ts = _load_series(cfg)
    order = cfg.lag  # for this subcommand --order maps onto the lag slot
    cm = causality_matrix(ts.data, p=order, alpha=cfg.alpha, p_max=cfg.p_max)
    out = _outdir(cfg)
    write_json(out / "causality_matrix.json", cm.to_dict())
    print(f"order {cm.order}, {int(cm.binary.sum())} causal link(s) at alpha={cm.alpha:g}")
    return EXIT_OK


def _synth_spec(args, cfg: RunConfig):
    params = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            params = json.load(fh)
    params.pop("kind", None)
    if args.kind == "coherency":
        params.setdefault("seed", cfg.seed)
        return CoherencySpec(**params)
    if args.kind == "var-graph":
        if params:
            params.setdefault("seed", cfg.seed)
            params["adjacency"] = tuple(tuple(row) for row in params["adjacency"])
            return CausalGraphSpec(**params)
        return fig_three_channel_graph(seed=cfg.seed)
    if args.kind == "linear":
        a = np.asarray(params.get("a", [[0.9]]))
        x0 = np.asarray(params.get("x0", np.ones(a.shape[0])))
        return ("linear", a, x0, params.get("dt", cfg.dt))
    raise ValueError(f"unknown synth kind {args.kind!r}")


def cmd_synth(args) -> int:
    cfg = _merge_config(args)
    spec = _synth_spec(args, cfg)
    m = args.samples
    if isinstance(spec, CoherencySpec):
        ts = gen_coherency(spec, m)
        spec_doc = spec.to_dict()
    elif isinstance(spec, CausalGraphSpec):
        ts = gen_var(spec, m)
        spec_doc = spec.to_dict()
    else:
        _, a, x0, dt = spec
        ts = gen_linear_system(a, x0, m, dt=dt)
        spec_doc = {"kind": "linear", "a": a.tolist(), "x0": x0.tolist(), "dt": dt}
    out = _outdir(cfg)
    save_csv(ts, out / "dataset.csv")
    write_json(out / "dataset_spec.json", {"samples": m, "spec": spec_doc})
    print(f"wrote {ts.channels} channels x {ts.samples} samples to {out / 'dataset.csv'}")
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser, need_input: bool = True):
    if need_input:
        p.add_argument("--input", help="input CSV (one column per channel)")
        p.add_argument("--dt", type=float, help="sampling interval in seconds")
        p.add_argument("--offset", type=int, help="drop this many leading samples first")
    p.add_argument("--alpha", type=float, help="significance level for the causality gate")
    p.add_argument("--out", help="output directory (default: current)")
    p.add_argument("--seed", type=int, help="seed recorded with generated outputs")
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--p-max", type=int, dest="p_max", help="largest VAR order for selection")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmdaudit",
        description="Gate measurement data for spectral modeling and fit/diagnose the model.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="run the excitation and causality gates at one lag")
    _add_common(p)
    p.add_argument("--lag", type=int, help="embedding order to check")
    p.add_argument("--gct-mode", dest="gct_mode", choices=["edge-mean", "per-row"])
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="validate and analyze across a lag range")
    _add_common(p)
    p.add_argument("--lag-range", dest="lag_range", help="LMIN:LMAX inclusive")
    p.add_argument("--rank", type=int, help="fixed truncation rank")
    p.add_argument("--energy", type=float, help="energy threshold in (0, 1]")
    p.add_argument("--split", type=float, help="training fraction of the record")
    p.add_argument("--gct-mode", dest="gct_mode", choices=["edge-mean", "per-row"])
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="fit at one lag, reconstruct, and forecast the held-out split")
    _add_common(p)
    p.add_argument("--lag", type=int)
    p.add_argument("--rank", type=int)
    p.add_argument("--energy", type=float)
    p.add_argument("--split", type=float)
    p.add_argument("--gct-mode", dest="gct_mode", choices=["edge-mean", "per-row"])
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("granger", help="pairwise causality matrix of the channels")
    _add_common(p)
    p.add_argument("--order", type=int, dest="lag", help="VAR order (default: BIC-selected)")
    p.set_defaults(func=cmd_granger)

    p = sub.add_parser("synth", help="generate a seeded fixture dataset")
    _add_common(p, need_input=False)
    p.add_argument("--kind", required=True, choices=["coherency", "var-graph", "linear"])
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--dt", type=float, help="sampling interval for linear systems")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return EXIT_ERROR
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
