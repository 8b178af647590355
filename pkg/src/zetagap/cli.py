"""Command-line client for the analysis service.

Subcommands: verify, analyze-chain, gen-data, run-experiment, report.
Compute runs through the same request/response layer the HTTP service
exposes; by default handlers are invoked in-process, and --server routes the
same payloads to a running instance instead. File reading and writing always
happen on the client side, atomically.

Exit codes: 0 success, 2 configuration/input error, 3 I/O error, 4 numeric
failure, 5 verification failure.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click

from .errors import NumericalError, ParseError, ValidationError
from .experiment import read_results_csv, write_report, write_results_csv
from .fileio import atomic_write_text, format_kv, load_chain, load_kv, save_matrix
from .service import handlers
from .service import schemas as sm

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4
EXIT_VERIFY = 5

_ENDPOINTS = {
    "analyze_chain": ("/chain/analyze", handlers.analyze_chain, sm.GapReportModel),
    "verify": ("/verify", handlers.verify, sm.VerifyResponse),
    "run_experiment": ("/experiment/run", handlers.run_experiment, sm.ExperimentResponse),
    "generate_instance": (
        "/experiment/generate-instance",
        handlers.generate_instance_endpoint,
        sm.InstanceResponse,
    ),
}


class LocalBackend:
    """Calls the service handlers in-process."""

    def call(self, op: str, request):
        _, handler, _ = _ENDPOINTS[op]
        return handler(request)


class HttpBackend:
    """Posts the same request models to a running service."""

    def __init__(self, base_url: str):
        import httpx

        self._client = httpx.Client(base_url=base_url.rstrip("/"), timeout=None)

    def call(self, op: str, request):
        import httpx

        path, _, response_model = _ENDPOINTS[op]
        try:
            resp = self._client.post(
                path,
                content=request.model_dump_json(),
                headers={"content-type": "application/json"},
            )
        except httpx.HTTPError as exc:
            raise OSError(f"service unreachable: {exc}") from exc
        if resp.status_code in (400, 422):
            raise ValidationError(resp.text)
        if resp.status_code == 413:
            raise ValidationError(resp.text)
        if resp.status_code >= 500:
            raise NumericalError(resp.text)
        return response_model.model_validate(resp.json())


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    try:
        fn()
    except ParseError as exc:
        _fail(EXIT_CONFIG, str(exc))
    except ValidationError as exc:
        _fail(EXIT_CONFIG, str(exc))
    except NumericalError as exc:
        _fail(EXIT_NUMERIC, str(exc))
    except OSError as exc:
        _fail(EXIT_IO, str(exc))


def _coerce(key: str, value: str, types: dict):
    kind = types[key]
    if kind is bool:
        if value.lower() in ("1", "true", "yes"):
            return True
        if value.lower() in ("0", "false", "no"):
            return False
        raise ParseError(f"config key {key}: expected a boolean, got {value!r}")
    try:
        return kind(value)
    except ValueError:
        raise ParseError(f"config key {key}: expected {kind.__name__}, got {value!r}") from None


def _read_config(path, types: dict) -> dict:
    raw = load_kv(path)
    unknown = sorted(set(raw) - set(types))
    if unknown:
        raise ParseError(f"unknown config keys: {', '.join(unknown)}")
    return {k: _coerce(k, v, types) for k, v in raw.items()}


_GEN_TYPES = {
    "p": int,
    "n": int,
    "s_star": int,
    "sigma2": float,
    "u": float,
    "rho": float,
    "gamma_scale": float,
    "amplitude": float,
    "seed": int,
}

_EXPERIMENT_TYPES = {
    **{k: v for k, v in _GEN_TYPES.items() if k != "seed"},
    "T": int,
    "R": int,
    "base_seed": int,
    "fixed_instance": bool,
    "strategy": str,
    "cells": str,
    "workers": int,
}


@click.group()
@click.option("--server", default=None, metavar="URL", help="Base URL of a running service; default runs in-process.")
@click.pass_context
def main(ctx, server):
    """Spectral-gap certification and spike-and-slab mixing experiments."""
    ctx.obj = HttpBackend(server) if server else LocalBackend()


@main.command("verify")
@click.option("--suite", default="all", type=click.Choice(["lemmas", "mixtures", "model", "sampler", "all"]))
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--quick", is_flag=True, help="Reduced instance counts (smoke mode).")
@click.option("--replay-dir", default=".", type=click.Path(file_okay=False), show_default=True,
              help="Where replay payloads of failing checks are written.")
@click.pass_obj
def cmd_verify(backend, suite, seed, quick, replay_dir):
    """Run the verification suites and exit nonzero on any failed check."""

    def body():
        resp = backend.call("verify", sm.VerifyRequest(suite=suite, seed=seed, quick=quick))
        failures = []
        for suite_report in resp.suites:
            click.echo(f"suite {suite_report.suite}: {'PASS' if suite_report.passed else 'FAIL'}")
            for check in suite_report.checks:
                status = "PASS" if check.passed else "FAIL"
                click.echo(f"  {status} {check.name} margin={check.margin:+.6e} | {check.detail}")
                if not check.passed:
                    failures.append((suite_report.suite, check))
        for suite_name, check in failures:
            if check.replay is not None:
                path = Path(replay_dir) / f"replay_{suite_name}_{check.name}.json"
                path.parent.mkdir(parents=True, exist_ok=True)
                atomic_write_text(path, json.dumps(check.replay, indent=2))
                click.echo(f"replay written: {path}")
        if failures:
            sys.exit(EXIT_VERIFY)

    _guarded(body)


@main.command("analyze-chain")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--zeta", default=0.1, type=float, show_default=True)
@click.option("--m", default=float("inf"), type=float, show_default=True,
              help="Star-norm exponent in (2, inf].")
@click.option("--budget", default=64, type=int, show_default=True)
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--out", default=None, type=click.Path(dir_okay=False), help="Optional JSON report path.")
@click.pass_obj
def cmd_analyze_chain(backend, path, zeta, m, budget, seed, out):
    """Gap report for a chain file: spectral gap, conductances, zeta-gap bracket."""

    def body():
        chain = load_chain(path)
        req = sm.ChainAnalyzeRequest(
            chain=sm.ChainPayload(
                transition=[[float(v) for v in row] for row in chain.P],
                stationary=[float(v) for v in chain.pi],
            ),
            zeta=zeta,
            m=None if math.isinf(m) else m,
            budget=budget,
            seed=seed,
        )
        rep = backend.call("analyze_chain", req)
        click.echo(f"spectral gap      : {rep.spec_gap:.12g}")
        click.echo(f"conductance       : {rep.conductance:.12g}")
        click.echo(f"zeta              : {rep.zeta:.12g}")
        zc = "vacuous" if rep.zeta_conductance is None else f"{rep.zeta_conductance:.12g}"
        click.echo(f"zeta-conductance  : {zc}")
        click.echo(f"zeta-gap lower    : {rep.zeta_gap_lower:.12g}")
        zu = "infeasible" if rep.zeta_gap_upper is None else f"{rep.zeta_gap_upper:.12g}"
        click.echo(f"zeta-gap upper    : {zu}")
        if rep.witness_subset is not None:
            click.echo(f"witness subset    : {rep.witness_subset}")
        if out is not None:
            atomic_write_text(out, json.dumps(rep.model_dump(), indent=2) + "\n")
            click.echo(f"report written: {out}")

    _guarded(body)


@main.command("gen-data")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.pass_obj
def cmd_gen_data(backend, config_path, out_dir):
    """Generate a regression instance (design, response, truth) plus manifest."""

    def body():
        pairs = _read_config(config_path, _GEN_TYPES)
        if "p" not in pairs:
            raise ParseError("config must set p")
        req = sm.GenerateInstanceRequest(**pairs)
        resp = backend.call("generate_instance", req)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_matrix(resp.design, out / "X.txt")
        save_matrix([[v] for v in resp.response], out / "z.txt")
        save_matrix([[v] for v in resp.theta_star], out / "theta_star.txt")
        atomic_write_text(out / "delta_star.txt", resp.delta_star_bits + "\n")
        manifest = dict(resp.manifest)
        manifest["config_echo"] = json.dumps(pairs)
        atomic_write_text(out / "manifest.txt", format_kv(manifest))
        click.echo(f"instance written to {out}")

    _guarded(body)


@main.command("run-experiment")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--threads", default=1, type=int, show_default=True, help="Replicate worker cap.")
@click.pass_obj
def cmd_run_experiment(backend, config_path, out_dir, threads):
    """Run the mixing-time study described by a key=value config file."""

    def body():
        pairs = _read_config(config_path, _EXPERIMENT_TYPES)
        if "p" not in pairs:
            raise ParseError("config must set p")
        req = sm.ExperimentRequest(workers=threads, **pairs)
        resp = backend.call("run_experiment", req)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        rows = [r.model_dump() for r in resp.rows]
        write_results_csv(rows, out / "results.csv")
        manifest = dict(resp.manifest)
        manifest["config_echo"] = json.dumps(pairs)
        manifest["threads"] = str(threads)
        atomic_write_text(out / "manifest.txt", format_kv(manifest))
        atomic_write_text(out / "table.txt", resp.table)
        click.echo(resp.table.rstrip())
        click.echo(f"results written to {out}")

    _guarded(body)


@main.command("report")
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", default=None, type=click.Path(file_okay=False),
              help="Defaults to the input directory.")
def cmd_report(in_dir, out_dir):
    """Aggregate persisted results CSVs into a mixing-time table and plot data."""

    def body():
        in_path = Path(in_dir)
        csvs = sorted(in_path.glob("*.csv"))
        if not csvs:
            raise OSError(f"no results CSV files in {in_path}")
        rows = []
        for csv_path in csvs:
            rows.extend(read_results_csv(csv_path))
        written = write_report(rows, Path(out_dir) if out_dir else in_path)
        table = written[0].read_text()
        click.echo(table.rstrip())
        for path in written:
            click.echo(f"wrote {path}")

    _guarded(body)


if __name__ == "__main__":
    main()
