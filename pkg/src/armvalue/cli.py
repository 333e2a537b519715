"""``armvalue`` command line: tabulate, evaluate, fit, report, simulate, pipeline."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from armvalue import catcher, outfield
from armvalue.events import (
    ParseError,
    parse_catcher_opportunities,
    parse_outfield_opportunities,
    validate_ledger,
    write_catcher_opportunities,
    write_outfield_opportunities,
)
from armvalue.ledger import RunValue, read_ledger, write_ledger
from armvalue.model import (
    HyperParams,
    SamplerConfig,
    fit_ledger,
    read_draws,
    read_index,
    write_draws,
    write_index,
    write_trace,
)
from armvalue.report import (
    export_interval_plot_data,
    rank,
    significance_count,
    summarize,
    write_ranking,
    write_summary,
)
from armvalue.runmatrix import (
    default_catcher_transitions,
    default_outfield_transitions,
    load_catcher_transitions,
    load_matrix,
    load_outfield_transitions,
    reference_matrix,
)
from armvalue.synthgen import (
    generate_catcher_ledger,
    generate_model_observations,
    generate_outfield_ledger,
    random_truth,
    write_truth,
)

log = logging.getLogger("armvalue")

ROLES = ("catcher", "outfield")


class CliError(Exception):
    pass


@dataclass
class RunConfig:
    role: str = "catcher"
    opportunities: Optional[Path] = None
    matrix: Optional[Path] = None
    transitions: Optional[Path] = None
    out_dir: Path = Path("armvalue-out")
    hyper: HyperParams = field(default_factory=HyperParams)
    sampler: SamplerConfig = field(default_factory=SamplerConfig)

    def check(self) -> None:
        if self.role not in ROLES:
            raise CliError(f"role must be one of {', '.join(ROLES)}, got {self.role!r}")
        for name in ("opportunities", "matrix", "transitions"):
            path = getattr(self, name)
            if path is not None and not path.is_file():
                raise CliError(f"{name} file not found: {path}")


def load_config(path: Path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise CliError(f"bad config {path}: {exc}") from None
    base = path.parent
    cfg = RunConfig()
    for key in ("opportunities", "matrix", "transitions", "out_dir"):
        if key in raw:
            setattr(cfg, key, base / raw[key])
    if "role" in raw:
        cfg.role = raw["role"]
    try:
        if "hyper" in raw:
            cfg.hyper = HyperParams(**raw["hyper"])
        sampler = dict(raw.get("sampler", {}))
        if "seed" in raw:
            sampler.setdefault("seed", raw["seed"])
        if sampler:
            renamed = {"burnin": "n_burnin", "draws": "n_draws"}
            sampler = {renamed.get(k, k): v for k, v in sampler.items()}
            known = {f.name for f in fields(SamplerConfig)}
            unknown = set(sampler) - known
            if unknown:
                raise CliError(f"unknown sampler settings: {', '.join(sorted(unknown))}")
            cfg.sampler = SamplerConfig(**sampler)
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad config {path}: {exc}") from None
    return cfg


def _open_text(path: Path, what: str):
    try:
        return open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {what} file {path}: {exc.strerror}") from None


def _write_text(path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline="\n")


def _read_records(role: str, path: Path):
    with _open_text(path, "opportunities") as fh:
        if role == "catcher":
            return parse_catcher_opportunities(fh)
        return parse_outfield_opportunities(fh)


def _matrix(path: Optional[Path]):
    if path is None:
        return reference_matrix()
    with _open_text(path, "matrix") as fh:
        return load_matrix(fh)


def _transitions(role: str, path: Optional[Path]):
    if path is None:
        return default_catcher_transitions() if role == "catcher" else default_outfield_transitions()
    with _open_text(path, "transitions") as fh:
        if role == "catcher":
            return load_catcher_transitions(fh)
        return load_outfield_transitions(fh)


def _config(args) -> RunConfig:
    cfg = load_config(Path(args.config)) if args.config else RunConfig()
    if args.role:
        cfg.role = args.role
    for attr, name in (("input", "opportunities"), ("matrix", "matrix"), ("transitions", "transitions")):
        value = getattr(args, attr, None)
        if value:
            setattr(cfg, name, Path(value))
    if getattr(args, "out_dir", None):
        cfg.out_dir = Path(args.out_dir)
    sampler = {}
    for attr, name in (("burnin", "n_burnin"), ("draws", "n_draws"), ("thin", "thin"), ("seed", "seed")):
        value = getattr(args, attr, None)
        if value is not None:
            sampler[name] = value
    hyper = {}
    for name in ("nu", "beta", "gamma"):
        value = getattr(args, name, None)
        if value is not None:
            hyper[name] = value
    try:
        if sampler:
            cfg.sampler = replace(cfg.sampler, **sampler)
        if hyper:
            cfg.hyper = replace(cfg.hyper, **hyper)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    cfg.check()
    return cfg


def _evaluate(cfg: RunConfig, situations_out: Optional[Path] = None) -> list[RunValue]:
    if cfg.opportunities is None:
        raise CliError("no opportunities file given (--in or config 'opportunities')")
    matrix = _matrix(cfg.matrix)
    table = _transitions(cfg.role, cfg.transitions)
    records = _read_records(cfg.role, cfg.opportunities)
    if cfg.role == "catcher":
        cells, leagues = catcher.tabulate(records)
        if situations_out is not None:
            with _write_text(situations_out) as fh:
                catcher.write_situation_values(
                    catcher.situation_values(cells, leagues, matrix, table), fh
                )
        return catcher.catcher_run_value(cells, leagues, matrix, table)
    cells, leagues = outfield.tabulate_outfield(records)
    return outfield.outfield_run_value(cells, leagues, matrix, table)


def _index_path(draws_path: Path) -> Path:
    return draws_path.with_name(draws_path.stem + ".index.csv")


def _fit(cfg: RunConfig, ledger: list[RunValue], out: Path, trace: Optional[Path] = None):
    draws = fit_ledger(ledger, cfg.hyper, cfg.sampler)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "wb") as fh:
        write_draws(draws, fh)
    with _write_text(_index_path(out)) as fh:
        write_index(draws, fh)
    if trace is not None:
        with _write_text(trace) as fh:
            write_trace(draws, fh)
    return draws


def _report(draws, ledger, out: Path, top: Optional[int], direction: str, ranking: Optional[Path], plot: Optional[Path]):
    summaries = summarize(draws, ledger)
    with _write_text(out) as fh:
        write_summary(summaries, fh)
    if plot is not None:
        with _write_text(plot) as fh:
            export_interval_plot_data(summaries, fh)
    if top is not None:
        ranked = rank(summaries, top, direction)
        path = ranking or out.with_name(out.stem + "_ranking.csv")
        with _write_text(path) as fh:
            write_ranking(ranked, fh)
        for i, s in enumerate(ranked, start=1):
            print(f"{i:3d}  {s.player_id:<16} {s.mean_individual:8.2f}  ({s.lo_individual:.2f}, {s.hi_individual:.2f})")
    print(f"{significance_count(summaries)} of {len(summaries)} players have 95% intervals excluding zero")
    return summaries


# -- subcommands -------------------------------------------------------------


def cmd_validate(args) -> int:
    cfg = _config(args)
    if cfg.opportunities is None:
        raise CliError("no opportunities file given")
    records = _read_records(cfg.role, cfg.opportunities)
    report = validate_ledger(records)
    print("\n".join(report.lines()))
    return 0 if report.ok else 1


def cmd_tabulate(args) -> int:
    records = _read_records(args.kind, Path(args.input))
    with _write_text(Path(args.out)) as fh:
        if args.kind == "catcher":
            catcher.write_cells(catcher.tabulate(records)[0], fh)
        else:
            outfield.write_cells(outfield.tabulate_outfield(records)[0], fh)
    return 0


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    ledger = _evaluate(cfg, Path(args.situations) if args.situations else None)
    with _write_text(Path(args.out)) as fh:
        write_ledger(ledger, fh)
    return 0


def cmd_fit(args) -> int:
    cfg = _config(args)
    with _open_text(Path(args.ledger), "ledger") as fh:
        ledger = read_ledger(fh)
    _fit(cfg, ledger, Path(args.out), Path(args.trace) if args.trace else None)
    return 0


def cmd_report(args) -> int:
    draws_path = Path(args.draws)
    index = Path(args.index) if args.index else _index_path(draws_path)
    with _open_text(index, "draws index") as fh:
        ids = read_index(fh)
    try:
        with open(draws_path, "rb") as fh:
            draws = read_draws(fh, ids)
    except OSError as exc:
        raise CliError(f"cannot read draws file {draws_path}: {exc.strerror}") from None
    with _open_text(Path(args.ledger), "ledger") as fh:
        ledger = read_ledger(fh)
    _report(
        draws,
        ledger,
        Path(args.out),
        args.top,
        args.direction,
        Path(args.ranking) if args.ranking else None,
        Path(args.plot_data) if args.plot_data else None,
    )
    return 0


def cmd_simulate(args) -> int:
    settings = {}
    if args.spec:
        try:
            with open(args.spec, "rb") as fh:
                settings = tomllib.load(fh)
        except OSError as exc:
            raise CliError(f"cannot read spec file {args.spec}: {exc.strerror}") from None
        except tomllib.TOMLDecodeError as exc:
            raise CliError(f"bad spec file {args.spec}: {exc}") from None
    seed = args.seed if args.seed is not None else settings.pop("seed", 0)
    settings.pop("seed", None)
    n_players = settings.pop("n_players", 30)
    seasons = settings.pop("seasons", [2002, 2003, 2004, 2005])
    try:
        spec = random_truth(
            n_players,
            seasons,
            seed,
            **{k: tuple(v) if isinstance(v, list) else v for k, v in settings.items()},
        )
    except TypeError as exc:
        raise CliError(f"bad simulation spec: {exc}") from None
    out_dir = Path(args.out_dir)
    with _write_text(out_dir / "catcher_opportunities.csv") as fh:
        write_catcher_opportunities(generate_catcher_ledger(spec), fh)
    with _write_text(out_dir / "outfield_opportunities.csv") as fh:
        write_outfield_opportunities(generate_outfield_ledger(spec), fh)
    with _write_text(out_dir / "model_runvalues.csv") as fh:
        write_ledger(generate_model_observations(spec), fh)
    with _write_text(out_dir / "truth.csv") as fh:
        write_truth(spec, fh)
    return 0


def cmd_pipeline(args) -> int:
    cfg = _config(args)
    out = cfg.out_dir
    ledger = _evaluate(cfg, out / "situations.csv" if cfg.role == "catcher" else None)
    with _write_text(out / "runvalues.csv") as fh:
        write_ledger(ledger, fh)
    draws = _fit(cfg, ledger, out / "draws.bin")
    _report(
        draws,
        ledger,
        out / "summary.csv",
        args.top,
        args.direction,
        out / "ranking.csv",
        out / "intervals.csv",
    )
    return 0


def _common(p: argparse.ArgumentParser, top: bool = False) -> None:
    # subcommands repeat the global flags; SUPPRESS keeps them from
    # clobbering values given before the subcommand name
    default = None if top else argparse.SUPPRESS
    p.add_argument("--config", default=default, help="TOML run configuration")
    p.add_argument("--seed", type=int, default=default, help="random seed")
    p.add_argument("--role", choices=ROLES, default=default, help="catcher or outfield")


def _sampler_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--burnin", type=int)
    p.add_argument("--draws", type=int)
    p.add_argument("--thin", type=int)
    p.add_argument("--nu", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)


def _report_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--top", type=int, help="also write a ranking of this many players")
    p.add_argument("--direction", choices=("best", "worst"), default="best")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="armvalue", description=__doc__)
    _common(parser, top=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an opportunities file")
    _common(p)
    p.add_argument("--in", dest="input")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("tabulate", help="count opportunities per player cell")
    p.add_argument("kind", choices=ROLES)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tabulate)

    p = sub.add_parser("evaluate", help="season run values per player")
    _common(p)
    p.add_argument("--in", dest="input")
    p.add_argument("--out", required=True)
    p.add_argument("--matrix", help="expected-runs matrix CSV (default: bundled)")
    p.add_argument("--transitions", help="transition CSV (default: bundled)")
    p.add_argument("--situations", help="catcher only: per-situation breakdown CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("fit", help="Gibbs-sample the hierarchical model")
    _common(p)
    _sampler_flags(p)
    p.add_argument("--ledger", required=True)
    p.add_argument("--out", required=True, help="binary draws file")
    p.add_argument("--trace", help="write a mu0/tau2 trace CSV")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("report", help="posterior summaries")
    _report_flags(p)
    p.add_argument("--draws", required=True)
    p.add_argument("--index", help="draws index CSV (default: <draws>.index.csv)")
    p.add_argument("--ledger", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ranking", help="ranking CSV path when --top is given")
    p.add_argument("--plot-data", help="interval plot CSV")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("simulate", help="write synthetic inputs with known truth")
    _common(p)
    p.add_argument("--spec", help="TOML simulation settings")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("pipeline", help="evaluate, fit and report in one go")
    _common(p)
    _sampler_flags(p)
    _report_flags(p)
    p.add_argument("--in", dest="input")
    p.add_argument("--matrix")
    p.add_argument("--transitions")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="armvalue: %(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ParseError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"armvalue: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
