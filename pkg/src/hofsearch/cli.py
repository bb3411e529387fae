"""Command-line interface.

Subcommands run in-process by default; ``--server URL`` turns eval/growth/
search into thin clients of a running service (see ``hofsearch serve``).

Exit codes: 0 success; 1 unexpected error; 2 usage error; 3 the generated
sequence died (eval); 2 anomalies present under ``search --strict``.
"""

from __future__ import annotations

import json
import sys

import click

from . import evaluator, prs
from .recurrence import Recurrence, RecurrenceSyntaxError, parse
from .search import SearchOptions, render_report, search as run_search

DEATH_EXIT = 3
STRICT_ANOMALY_EXIT = 2


def _load_recurrence(spec: str, default: int) -> Recurrence:
    text = spec
    if spec.startswith("@"):
        with open(spec[1:], "r", encoding="utf-8") as fh:
            text = fh.read().strip()
    try:
        rec = parse(text)
    except RecurrenceSyntaxError as exc:
        raise click.ClickException(f"cannot parse recurrence: {exc}")
    if default:
        rec = Recurrence(rec.name, rec.rhs, default)
    return rec


def _parse_ic(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise click.ClickException(f"bad initial condition {text!r}")


def _post(server: str, path: str, payload: dict) -> dict:
    import httpx

    response = httpx.post(server.rstrip("/") + path, json=payload, timeout=None)
    if response.status_code != 200:
        raise click.ClickException(f"server error {response.status_code}: {response.text}")
    return response.json()


@click.group()
def main() -> None:
    """Search for interleaved linear-recurrent solutions to nested recurrences."""


@main.command("eval")
@click.option("--recurrence", required=True, help="Recurrence text, or @file.")
@click.option("--ic", required=True, help="Comma-separated initial condition, e.g. 3,2,1.")
@click.option("--count", required=True, type=int, help="Number of terms to emit.")
@click.option("--default", type=int, default=0, show_default=True, help="Value at indices <= 0.")
@click.option("--bfile", is_flag=True, help="Emit OEIS b-file lines (index value).")
@click.option("--server", default=None, help="Run against a hofsearch service instead.")
def eval_cmd(recurrence: str, ic: str, count: int, default: int, bfile: bool, server: str | None) -> None:
    """Generate terms of a recurrence from an initial condition."""
    values = _parse_ic(ic)
    if count < len(values):
        raise click.ClickException("count must be at least the initial condition length")
    if server:
        data = _post(
            server,
            "/eval",
            {"recurrence": recurrence, "ic": values, "count": count, "default": default},
        )
        if data.get("dead"):
            click.echo(f"dead at index {data['dead']['index']}: {data['dead']['reason']}", err=True)
            sys.exit(DEATH_EXIT)
        terms = data["terms"]
    else:
        rec = _load_recurrence(recurrence, default)
        out = evaluator.generate(rec, values, count)
        if isinstance(out, evaluator.Dead):
            click.echo(f"dead at index {out.index}: {out.reason}", err=True)
            sys.exit(DEATH_EXIT)
        terms = out
    if bfile:
        for line in evaluator.bfile_lines(terms):
            click.echo(line)
    else:
        for term in terms:
            click.echo(str(term))


@main.command("growth")
@click.option("--system", required=True, help="Recurrence system as JSON text, or @file.")
@click.option("--server", default=None, help="Run against a hofsearch service instead.")
def growth_cmd(system: str, server: str | None) -> None:
    """Classify component growth of a positive recurrence system.

    The JSON schema is {"m": int, "inhomog": [[c0, c1, ...], ...],
    "coeffs": [[src, lag, dst, alpha], ...]} with 0-based component indices;
    a lag may be the string "symbolic" for an unresolved positive lag.
    """
    text = system
    if system.startswith("@"):
        with open(system[1:], "r", encoding="utf-8") as fh:
            text = fh.read()
    payload = json.loads(text)
    if server:
        data = _post(server, "/growth", {"system": payload})
    else:
        try:
            sysobj = prs.PRSystem.from_json(payload)
        except (KeyError, ValueError, TypeError) as exc:
            raise click.ClickException(f"bad system: {exc}")
        data = prs.growth_labels_json(sysobj, prs.compute_growth(sysobj))
    click.echo(json.dumps(data, indent=2, sort_keys=True))


@main.command("search")
@click.option("--recurrence", required=True, help="Recurrence text, or @file.")
@click.option("--period", required=True, type=int, help="Number of interleaved subsequences.")
@click.option("--bound", type=int, default=64, show_default=True, help="Box bound for the integer search.")
@click.option("--verify", "verify_terms", type=int, default=200, show_default=True, help="Terms checked per family.")
@click.option("--mod-shift", is_flag=True, help="Also group families modulo index shift.")
@click.option("--witnesses", type=int, default=1, show_default=True, help="Witnesses reported per family.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Parallel workers over behavior vectors.")
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="text", show_default=True)
@click.option("--strict", is_flag=True, help="Exit 2 when anomalies are present.")
@click.option("--default", type=int, default=0, show_default=True, help="Value at indices <= 0.")
@click.option("--trace-unpack", is_flag=True, help="Print unpacked identities for every case.")
@click.option("--dump-csp", is_flag=True, help="Print constraint systems reaching the solver.")
@click.option("--server", default=None, help="Run against a hofsearch service instead.")
def search_cmd(
    recurrence: str,
    period: int,
    bound: int,
    verify_terms: int,
    mod_shift: bool,
    witnesses: int,
    jobs: int,
    fmt: str,
    strict: bool,
    default: int,
    trace_unpack: bool,
    dump_csp: bool,
    server: str | None,
) -> None:
    """Search for period-m positive-recurrent solution families."""
    if server:
        data = _post(
            server,
            "/search",
            {
                "recurrence": recurrence,
                "period": period,
                "bound": bound,
                "verify_terms": verify_terms,
                "witnesses": witnesses,
                "mod_shift": mod_shift,
                "strict": strict,
                "default": default,
            },
        )
        click.echo(json.dumps(data, indent=2, sort_keys=True))
        if strict and data.get("anomalies"):
            sys.exit(STRICT_ANOMALY_EXIT)
        return
    rec = _load_recurrence(recurrence, default)
    opts = SearchOptions(
        bound=bound,
        verify_terms=verify_terms,
        witnesses=witnesses,
        jobs=jobs,
        strict=strict,
        trace_unpack=trace_unpack,
    )
    if trace_unpack:
        _trace_unpack(rec, period)
    result = run_search(rec, period, opts)
    if dump_csp:
        for family in result.families:
            click.echo(json.dumps(family.system.to_json(), indent=2, sort_keys=True))
    click.echo(render_report(result, fmt, mod_shift), nl=False)
    if strict and result.anomalies:
        sys.exit(STRICT_ANOMALY_EXIT)


def _trace_unpack(rec: Recurrence, period: int) -> None:
    from .unpacker import all_behavior_vectors, iter_cases

    for behavior in all_behavior_vectors(period):
        for cong, unpacked, reason in iter_cases(rec, period, behavior):
            head = ", ".join(b.value for b in behavior)
            click.echo(f"case [{head}] with {cong}:")
            if unpacked is None:
                click.echo(f"  rejected during unpacking: {reason}")
                continue
            for u in unpacked:
                click.echo("  " + u.render(rec.name, period))


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve_cmd(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("hofsearch.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
