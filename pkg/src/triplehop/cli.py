"""Command-line client for the retrieval service.

Every subcommand builds a request, sends it to the service, and formats
the response; with ``--server`` the request goes to a running instance
over HTTP, otherwise the service app is driven in-process. Stdout
carries only machine-parseable output (JSON-lines for build/partition/
query, CSV for bench/scale/verify); human-oriented tables and
diagnostics go to stderr.

Exit codes: 0 success, 1 usage error, 2 data/format error,
3 verification failure.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import click
import httpx

SEMANTICS = click.Choice(["exact", "frontier", "cumulative"])


def _post(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            return client.post(path, json=payload)
    # In-process transport: the same request/response path as a live
    # server, without a socket. App errors surface as HTTP responses.
    import asyncio

    from .service import create_app

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=create_app(), raise_app_exceptions=False)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://service", timeout=None
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _request(server: str | None, path: str, payload: dict) -> tuple[int, dict | None]:
    """POST and map errors to exit codes; returns (code, body-or-None)."""
    resp = _post(server, path, payload)
    if resp.status_code == 200:
        return 0, resp.json()
    try:
        detail = resp.json().get("detail", {})
    except ValueError:
        detail = {}
    kind = detail.get("kind", "data") if isinstance(detail, dict) else "data"
    message = detail.get("message", resp.text) if isinstance(detail, dict) else str(detail)
    click.echo(f"error ({kind}): {message}", err=True)
    return 1 if kind == "usage" else 2, None


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _floats_or_none(text: str) -> list[float] | None:
    if text.strip().lower() in ("none", "off"):
        return None
    return [float(x) for x in text.split(",") if x.strip()]


def _seed_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    return int(lo), int(hi or lo)


def _entity_labels(value: str) -> list[str]:
    """Comma-separated labels, or a file of one label per line."""
    p = Path(value)
    if p.is_file():
        lines = p.read_text(encoding="utf-8").splitlines()
        return [line.strip() for line in lines if line.strip()]
    return [s.strip() for s in value.split(",") if s.strip()]


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service; default runs in-process.")
@click.pass_context
def cli(ctx, server):
    """k-hop knowledge-graph retrieval tools."""
    ctx.obj = server


@cli.command()
@click.option("--triples", "triples_path", required=True, type=click.Path(), metavar="TSV")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_obj
def build(server, triples_path, out_dir):
    """Ingest a triple TSV and save the incidence graph + dictionaries."""
    code, body = _request(server, "/build", {"triples_path": triples_path, "out_dir": out_dir})
    if body is not None:
        click.echo(json.dumps(body, sort_keys=True))
    return code


@cli.command()
@click.option("--graph", "graph_dir", required=True, type=click.Path())
@click.option("--m", "m", required=True, type=int)
@click.option("--strategy", type=click.Choice(["lpt", "hash"]), default="lpt")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_obj
def partition(server, graph_dir, m, strategy, out_dir):
    """Plan, materialize, and save a partitioned copy of a graph."""
    code, body = _request(
        server,
        "/partition",
        {"graph_dir": graph_dir, "m": m, "strategy": strategy, "out_dir": out_dir},
    )
    if body is not None:
        click.echo(json.dumps(body, sort_keys=True))
    return code


@cli.command()
@click.option("--graph", "graph_dir", default=None, type=click.Path())
@click.option("--partitioned", "partitioned_dir", default=None, type=click.Path())
@click.option("--entities", required=True, metavar="CSV|FILE")
@click.option("--hops", required=True, type=int)
@click.option("--semantics", type=SEMANTICS, default="frontier")
@click.option("--cache", "cache_capacity", type=int, default=16)
@click.option("--paths", "include_paths", is_flag=True)
@click.option("--max-paths", type=int, default=10_000)
@click.pass_obj
def query(server, graph_dir, partitioned_dir, entities, hops, semantics,
          cache_capacity, include_paths, max_paths):
    """Run one k-hop query; prints one JSON line per hop (and per path)."""
    payload = {
        "graph_dir": graph_dir,
        "partitioned_dir": partitioned_dir,
        "entities": _entity_labels(entities),
        "hops": hops,
        "semantics": semantics,
        "cache_capacity": cache_capacity,
        "include_paths": include_paths,
        "max_paths": max_paths,
    }
    code, body = _request(server, "/query", payload)
    if body is None:
        return code
    for unknown in body["unknown"]:
        click.echo(f"unknown entity: {unknown}", err=True)
    for hop in body["hops"]:
        click.echo(json.dumps(hop, sort_keys=True))
    if body.get("paths") is not None:
        for path in body["paths"]:
            click.echo(json.dumps({"path": path}))
        click.echo(json.dumps({"paths_truncated": body["paths_truncated"]}))
    return 0


def _emit_report(body: dict) -> None:
    sys.stdout.write(body["csv"])
    click.echo(body["text"], err=True)
    click.echo(f"# fingerprint: {json.dumps(body['fingerprint'], sort_keys=True)}", err=True)


@cli.command()
@click.option("--graph", "graph_dir", default=None, type=click.Path())
@click.option("--partitioned", "partitioned_dir", default=None, type=click.Path())
@click.option("--depths", default="1,2,3,4,5", metavar="CSV")
@click.option("--queries", type=int, default=20)
@click.option("--seed", type=int, default=0)
@click.option("--semantics", type=SEMANTICS, default="frontier")
@click.option("--timeout-ms", default="2000,4000,6000,8000,10000", metavar="CSV|none")
@click.option("--seed-entities", default="1:20", metavar="LO:HI")
@click.option("--repetitions", type=int, default=1)
@click.option("--oracle", type=click.Choice(["auto", "on", "off"]), default="auto")
@click.option("--cache", "cache_capacity", type=int, default=16)
@click.option("--parallel", "parallel_workers", type=int, default=1)
@click.pass_obj
def bench(server, graph_dir, partitioned_dir, depths, queries, seed, semantics,
          timeout_ms, seed_entities, repetitions, oracle, cache_capacity,
          parallel_workers):
    """Benchmark query time / timeout rate per hop; CSV on stdout."""
    payload = {
        "graph_dir": graph_dir,
        "partitioned_dir": partitioned_dir,
        "depths": _ints(depths),
        "queries": queries,
        "seed": seed,
        "semantics": semantics,
        "timeout_ms": _floats_or_none(timeout_ms),
        "seed_entities": _seed_range(seed_entities),
        "repetitions": repetitions,
        "oracle": oracle,
        "cache_capacity": cache_capacity,
        "parallel_workers": parallel_workers,
    }
    code, body = _request(server, "/bench", payload)
    if body is not None:
        _emit_report(body)
    return code


@cli.command()
@click.option("--partitioned", "partitioned_dir", required=True, type=click.Path())
@click.option("--hops", default="1,2,3,4,5", metavar="CSV")
@click.option("--batch-sizes", default="1,10,25,50", metavar="CSV")
@click.option("--cache-sizes", default="1,2,4,8,16", metavar="CSV")
@click.option("--base-hops", type=int, default=2)
@click.option("--base-batch", type=int, default=50)
@click.option("--base-cache", type=int, default=16)
@click.option("--queries", type=int, default=50)
@click.option("--seed", type=int, default=0)
@click.option("--semantics", type=SEMANTICS, default="frontier")
@click.pass_obj
def scale(server, partitioned_dir, hops, batch_sizes, cache_sizes, base_hops,
          base_batch, base_cache, queries, seed, semantics):
    """Scaling sweeps over hops, batch size, cache size; CSV on stdout."""
    payload = {
        "partitioned_dir": partitioned_dir,
        "hops": _ints(hops),
        "batch_sizes": _ints(batch_sizes),
        "cache_sizes": _ints(cache_sizes),
        "base_hops": base_hops,
        "base_batch": base_batch,
        "base_cache": base_cache,
        "queries": queries,
        "seed": seed,
        "semantics": semantics,
    }
    code, body = _request(server, "/scale", payload)
    if body is not None:
        _emit_report(body)
    return code


@cli.command()
@click.option("--graph", "graph_dir", required=True, type=click.Path())
@click.option("--partitioned", "partitioned_dir", default=None, type=click.Path())
@click.option("--queries", type=int, default=10)
@click.option("--seed", type=int, default=0)
@click.option("--depths", default="1,2,3,4,5", metavar="CSV")
@click.option("--cache", "cache_capacity", type=int, default=16)
@click.pass_obj
def verify(server, graph_dir, partitioned_dir, queries, seed, depths, cache_capacity):
    """Fidelity grid vs the reference oracles; exits 3 on any mismatch."""
    payload = {
        "graph_dir": graph_dir,
        "partitioned_dir": partitioned_dir,
        "queries": queries,
        "seed": seed,
        "depths": _ints(depths),
        "cache_capacity": cache_capacity,
    }
    code, body = _request(server, "/verify", payload)
    if body is None:
        return code
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["mode", "depth", "query", "jaccard", "cross_jaccard"])
    for row in body["rows"]:
        writer.writerow(
            [
                row["mode"],
                row["depth"],
                row["query"],
                format(row["jaccard"], ".6f"),
                "" if row["cross_jaccard"] is None else format(row["cross_jaccard"], ".6f"),
            ]
        )
    sys.stdout.write(buf.getvalue())
    for mode in body["skipped_modes"]:
        click.echo(f"note: {mode} mode skipped (graph exceeds the walk-oracle size guard)",
                   err=True)
    if not body["ok"]:
        click.echo("verification FAILED: at least one Jaccard < 1.0", err=True)
        return 3
    click.echo("verification passed: all Jaccard = 1.0", err=True)
    return 0


@cli.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Run the retrieval service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)
    return 0


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, standalone_mode=False)
        return rv if isinstance(rv, int) else 0
    except click.exceptions.Exit as exc:
        return 0 if exc.exit_code == 0 else 1
    except click.UsageError as exc:
        click.echo(f"error (usage): {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
