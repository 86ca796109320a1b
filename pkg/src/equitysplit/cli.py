"""Command-line front door: solve, sweep, estimate, simulate, analyze.

Every subcommand is pure given its flags, input files and seed: no clock, no
network. Outputs are machine-readable JSON or CSV. Exit codes: 2 for invalid
flags, 3 for model-domain errors (printed by error name on stderr), 4 for
numeric failures.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import closed_form, estimation, funding, numeric, simulate
from .errors import ModelDomainError, NumericError, UnsupportedModel
from .types import (
    Arm,
    BargainingPowers,
    BeliefModel,
    Contract,
    Institution,
    MarketParams,
    ProRating,
    RiskProfile,
    Scenario,
    make_preset_scenario,
)

__all__ = ["main", "entrypoint"]


class _UsageError(Exception):
    pass


def _parse_floats(raw: str) -> list[float]:
    try:
        return [float(x) for x in raw.split(",") if x.strip() != ""]
    except ValueError as err:
        raise _UsageError(f"expected comma-separated numbers, got {raw!r}") from err


def _enum(enum_cls, raw):
    try:
        return enum_cls(raw)
    except ValueError as err:
        valid = ", ".join(m.value for m in enum_cls)
        raise _UsageError(f"{raw!r} is not one of: {valid}") from err


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--arm", choices=[a.value for a in Arm], help="parameter preset")
    p.add_argument("--institution", default="si", help="si, ti or til")
    p.add_argument("--contract", default="common", help="common or preferred")
    p.add_argument("--e", type=float, help="capital requirement")
    p.add_argument("--alpha-h", type=float, help="high-state multiplier")
    p.add_argument("--alpha-l", type=float, help="low-state multiplier")
    p.add_argument("--p", type=float, help="success probability")
    p.add_argument("--de", type=float, help="entrepreneur outside option")
    p.add_argument("--theta", help="comma list of per-investor bargaining powers")
    p.add_argument(
        "--belief", choices=[b.value for b in BeliefModel], default="standard"
    )
    p.add_argument("--risk", help="rho_e,rho_inv CRRA exponents (default 0,0)")
    p.add_argument(
        "--prorating", choices=[r.value for r in ProRating], default="linear"
    )


def _scenario_from_args(args, institution=None, contract=None, d_e=None, theta=None,
                        rho_e=None, rho_inv=None) -> Scenario:
    institution = institution or _enum(Institution, args.institution)
    contract = contract or _enum(Contract, args.contract)
    explicit = {
        "e": args.e,
        "alpha_h": args.alpha_h,
        "alpha_l": args.alpha_l,
        "p": args.p,
        "d_e": args.de,
    }
    if args.arm is not None:
        base = make_preset_scenario(Arm(args.arm), institution, contract).params
        values = {
            "e": base.e,
            "alpha_h": base.alpha_h,
            "alpha_l": base.alpha_l,
            "p": base.p,
            "d_e": base.d_e,
        }
        for k, v in explicit.items():
            if v is not None:
                values[k] = v
    else:
        missing = [k for k, v in explicit.items() if v is None]
        if missing:
            raise _UsageError(
                f"without --arm, all of --e --alpha-h --alpha-l --p --de are "
                f"required (missing: {missing})"
            )
        values = explicit
    if d_e is not None:
        values["d_e"] = d_e
    params = MarketParams(**values)

    n = institution.n_investors
    if theta is not None:
        powers = BargainingPowers(theta=(theta,) * n)
    elif args.theta:
        ts = _parse_floats(args.theta)
        if len(ts) == 1:
            ts = ts * n
        if len(ts) != n:
            raise _UsageError(f"--theta needs 1 or {n} values for {institution.value}")
        powers = BargainingPowers(theta=tuple(ts))
    else:
        powers = BargainingPowers.equal(n)

    if rho_e is not None or rho_inv is not None:
        risk = RiskProfile(rho_e=rho_e or 0.0, rho_i=(rho_inv or 0.0,) * n)
    elif args.risk:
        rs = _parse_floats(args.risk)
        if len(rs) != 2:
            raise _UsageError("--risk takes exactly two values: rho_e,rho_inv")
        risk = RiskProfile(rho_e=rs[0], rho_i=(rs[1],) * n)
    else:
        risk = RiskProfile.neutral(n)

    return Scenario(
        params=params,
        institution=institution,
        contract=contract,
        powers=powers,
        belief=BeliefModel(args.belief),
        risk=risk,
        prorating=ProRating(args.prorating),
    )


def _solve_scenario(scenario: Scenario):
    """Closed form when available, numeric otherwise.

    Returns (outcomes, continuum_or_none)."""
    if scenario.risk.is_neutral:
        try:
            result = closed_form.solve_scenario(scenario)
            return list(result.outcomes), result.continuum
        except UnsupportedModel:
            pass
    outcome = numeric.solve_risk_averse(scenario, scenario.risk)
    return [outcome], None


def _cmd_solve(args) -> int:
    scenario = _scenario_from_args(args)
    outcomes, continuum = _solve_scenario(scenario)
    if args.out == "json":
        payload = {
            "scenario": scenario.to_dict(),
            "outcomes": [o.to_dict() for o in outcomes],
            "continuum": None,
        }
        if continuum is not None:
            mid = 0.5 * (continuum.i1_lo + continuum.i1_hi)
            payload["continuum"] = {
                "i1_lo": continuum.i1_lo,
                "i1_hi": continuum.i1_hi,
                "at_midpoint": continuum.outcome_at(mid).to_dict(),
            }
        print(json.dumps(payload, indent=2))
    else:
        print(_sweep_header())
        for o in outcomes:
            print(_sweep_row(scenario, o))
    return 0


_SWEEP_COLUMNS = (
    "institution,contract,d_e,theta,rho_e,rho_inv,regime,"
    "entrepreneur_share,s_1,s_2,i_1,i_2,profit_e,profit_1,profit_2"
)


def _sweep_header() -> str:
    return _SWEEP_COLUMNS


def _sweep_row(scenario: Scenario, outcome) -> str:
    n = scenario.n_investors
    s = list(outcome.shares) + [None] * (2 - n)
    i = list(outcome.investments) + [None] * (2 - n)
    pi = list(outcome.expected_profit_i) + [None] * (2 - n)
    fmt = lambda x: "" if x is None else repr(float(x))
    cells = [
        scenario.institution.value,
        scenario.contract.value,
        repr(scenario.params.d_e),
        repr(scenario.powers.theta[0]),
        repr(scenario.risk.rho_e),
        repr(scenario.risk.rho_i[0]),
        outcome.regime,
        repr(outcome.entrepreneur_share),
        fmt(s[0]),
        fmt(s[1]),
        fmt(i[0]),
        fmt(i[1]),
        repr(outcome.expected_profit_e),
        fmt(pi[0]),
        fmt(pi[1]),
    ]
    return ",".join(cells)


def _cmd_sweep(args) -> int:
    grids = {
        "d_e": _parse_floats(args.grid_de) if args.grid_de else None,
        "theta": _parse_floats(args.grid_theta) if args.grid_theta else None,
        "rho_e": _parse_floats(args.grid_rho_e) if args.grid_rho_e else None,
        "rho_inv": _parse_floats(args.grid_rho_inv) if args.grid_rho_inv else None,
    }
    active = [k for k, v in grids.items() if v]
    if not active:
        raise _UsageError("sweep needs at least one of --grid-de --grid-theta "
                          "--grid-rho-e --grid-rho-inv")
    if len(active) > 2:
        raise _UsageError(f"sweep over at most two dimensions, got {active}")
    institutions = [_enum(Institution, x.strip()) for x in args.institution.split(",")]
    contracts = [_enum(Contract, x.strip()) for x in args.contract.split(",")]

    print(_sweep_header())
    for institution in institutions:
        for contract in contracts:
            for d_e in grids["d_e"] or [None]:
                for theta in grids["theta"] or [None]:
                    for rho_e in grids["rho_e"] or [None]:
                        for rho_inv in grids["rho_inv"] or [None]:
                            scenario = _scenario_from_args(
                                args,
                                institution=institution,
                                contract=contract,
                                d_e=d_e,
                                theta=theta,
                                rho_e=rho_e,
                                rho_inv=rho_inv,
                            )
                            if scenario.risk.is_neutral:
                                outcomes, _ = _solve_scenario(scenario)
                                outcome = outcomes[0]
                            else:
                                outcome = numeric.solve_risk_averse(
                                    scenario, scenario.risk
                                )
                            print(_sweep_row(scenario, outcome))
    return 0


def _cmd_estimate(args) -> int:
    observations = estimation.read_observations_csv(args.observations)
    if args.model == "all":
        table = estimation.compare_models(observations)
        rows = [
            (inst, tag, fit)
            for inst, fits in table.items()
            for tag, fit in fits.items()
        ]
    else:
        tag = estimation.ModelTag(args.model)
        institutions = sorted({o.institution for o in observations}, key=lambda i: i.value)
        rows = []
        for inst in institutions:
            subset = [o for o in observations if o.institution is inst]
            rows.append((inst, tag, estimation.fit_theta(subset, tag, args.common_theta)))
    if args.out == "json":
        print(
            json.dumps(
                [
                    {
                        "institution": inst.value,
                        "model": tag.value,
                        "theta_hat": list(fit.theta_hat),
                        "mse": fit.mse,
                        "n": len(fit.residuals),
                    }
                    for inst, tag, fit in rows
                ],
                indent=2,
            )
        )
    else:
        print("institution,model,theta_hat,mse,n")
        for inst, tag, fit in rows:
            theta = ";".join(repr(t) for t in fit.theta_hat)
            print(f"{inst.value},{tag.value},{theta},{fit.mse!r},{len(fit.residuals)}")
    return 0


def _cmd_simulate(args) -> int:
    scenario = _scenario_from_args(args)
    config = simulate.ProtocolConfig(scenario=scenario, tick_count=args.tick_count)
    concession = simulate.Concession(args.concession)
    explicit = [args.ent_open, args.ent_res, args.inv_open, args.inv_res]
    if any(v is not None for v in explicit):
        if any(v is None for v in explicit):
            raise _UsageError(
                "--ent-open --ent-res --inv-open --inv-res must be given together"
            )
        ent = simulate.AgentStrategy(
            simulate.Role.ENTREPRENEUR, args.ent_open, args.ent_res, concession
        )
        inv = simulate.AgentStrategy(
            simulate.Role.INVESTOR, args.inv_open, args.inv_res, concession
        )
        population = [(ent, (inv,) * scenario.n_investors)]
    else:
        if args.arm is None:
            raise _UsageError("simulate needs --arm or explicit strategy flags")
        population = simulate.make_calibrated_population(
            Arm(args.arm),
            scenario.institution,
            n_profiles=args.population_size,
            seed=args.seed,
            concession=concession,
        )
    stats, transcripts = simulate.run_batch(config, population, args.rounds, args.seed)
    if args.transcripts:
        Path(args.transcripts).write_text(simulate.transcripts_to_jsonl(transcripts) + "\n")
    print(stats.to_csv())
    return 0


def _cmd_analyze(args) -> int:
    rounds, quarantine = funding.ingest_csv(args.rounds_csv)
    for q in quarantine:
        print(f"quarantined line {q.line}: {q.reason}", file=sys.stderr)
    if args.singles:
        print("stage,single_investor_rate")
        for stage, rate in sorted(
            funding.single_investor_rates(rounds).items(), key=lambda kv: kv[0].value
        ):
            print(f"{stage.value},{rate!r}")
        return 0
    if args.pooled:
        stats = funding.decile_correlations(rounds, pooled=True)
    else:
        stats = []
        stages = (
            [funding.Stage(args.stage)]
            if args.stage != "all"
            else list(funding.Stage)
        )
        for stage in stages:
            stats.extend(funding.decile_correlations(rounds, stage))
    print(funding.stats_to_csv(stats))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="equitysplit",
        description="Bargaining equilibria for entrepreneur-investor equity negotiations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one scenario")
    _add_scenario_flags(p_solve)
    p_solve.add_argument("--out", choices=["json", "csv"], default="json")
    p_solve.add_argument("--config", help="key=value defaults file")
    p_solve.set_defaults(func=_cmd_solve)

    p_sweep = sub.add_parser("sweep", help="solve over a parameter grid (CSV)")
    _add_scenario_flags(p_sweep)
    p_sweep.add_argument("--grid-de", help="comma list of outside options")
    p_sweep.add_argument("--grid-theta", help="comma list of common powers")
    p_sweep.add_argument("--grid-rho-e", help="comma list of entrepreneur CRRA")
    p_sweep.add_argument("--grid-rho-inv", help="comma list of investor CRRA")
    p_sweep.add_argument("--out", choices=["csv"], default="csv")
    p_sweep.add_argument("--config", help="key=value defaults file")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_est = sub.add_parser("estimate", help="fit bargaining powers to observed shares")
    p_est.add_argument("--observations", required=True, help="CSV: institution,contract,arm,share")
    p_est.add_argument(
        "--model",
        choices=["all", "original", "revised_i", "revised_ii"],
        default="all",
    )
    p_est.add_argument(
        "--per-investor",
        dest="common_theta",
        action="store_false",
        help="fit each investor's power separately",
    )
    p_est.add_argument("--out", choices=["json", "csv"], default="csv")
    p_est.add_argument("--config", help="key=value defaults file")
    p_est.set_defaults(func=_cmd_estimate)

    p_sim = sub.add_parser("simulate", help="run the seeded offer protocol")
    _add_scenario_flags(p_sim)
    p_sim.add_argument("--rounds", type=int, default=100)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--tick-count", type=int, default=None)
    p_sim.add_argument("--population-size", type=int, default=40)
    p_sim.add_argument("--ent-open", type=float)
    p_sim.add_argument("--ent-res", type=float)
    p_sim.add_argument("--inv-open", type=float)
    p_sim.add_argument("--inv-res", type=float)
    p_sim.add_argument(
        "--concession", choices=[c.value for c in simulate.Concession], default="linear"
    )
    p_sim.add_argument("--transcripts", help="write offer events to this JSONL path")
    p_sim.add_argument("--config", help="key=value defaults file")
    p_sim.set_defaults(func=_cmd_simulate)

    p_an = sub.add_parser("analyze", help="decile/correlation pipeline on funding rounds")
    p_an.add_argument("--rounds-csv", required=True)
    p_an.add_argument(
        "--stage",
        choices=["all", "pre_seed", "seed", "series_ab"],
        default="all",
    )
    p_an.add_argument("--pooled", action="store_true", help="bucket all stages together")
    p_an.add_argument("--singles", action="store_true", help="report single-investor rates")
    p_an.add_argument("--config", help="key=value defaults file")
    p_an.set_defaults(func=_cmd_analyze)
    return parser


def _apply_config_file(argv: list[str]) -> list[str]:
    """Splice key=value file entries in as defaults, after the subcommand so
    explicit flags still win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return argv
    path = Path(argv[idx + 1])
    if not path.exists():
        raise _UsageError(f"config file not found: {path}")
    injected: list[str] = []
    for line_no, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise _UsageError(f"config line {line_no} is not key=value: {line!r}")
        key, value = line.split("=", 1)
        flag = "--" + key.strip().replace("_", "-")
        value = value.strip()
        if value.lower() in ("true", "false"):
            if value.lower() == "true":
                injected.append(flag)
        else:
            injected.extend([flag, value])
    return [argv[0], *injected, *argv[1:]]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and not argv[0].startswith("-"):
            argv = _apply_config_file(argv)
        parser = _build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        return args.func(args)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ModelDomainError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return 3
    except NumericError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return 4


def entrypoint() -> None:  # console-script shim
    sys.exit(main())
