"""Batch front-end: load tuples or structured data, run analyses, emit reports.

Exit codes: 0 success, 1 validation failure (structural/spectral assumptions
not met), 2 I/O or schema problems.  Every report embeds the effective
configuration and the library version so runs are reproducible from their
outputs alone.
"""

from __future__ import annotations

import json
import sys
from importlib import metadata

import click
import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import serialize
from .canonical import canonicalize, check_structure, validate_classa
from .chain import align_to_primitive, build_chain, corner_rescale
from .cpmaps import peripheral_structure, perron_data
from .errors import GappedMpsError, IoError, SchemaError
from .spinchain import (FcsTriple, assemble_hamiltonian, fcs_evaluate,
                        ground_data, interpolation_scan, ltqo_scan,
                        parent_interaction)

try:
    VERSION = metadata.version("artifact")
except metadata.PackageNotFoundError:  # pragma: no cover - source checkout
    VERSION = "0.0.0"


def _config_value(ctx, name, default):
    cfg = ctx.obj or {}
    src = ctx.get_parameter_source(name)
    if (src is not None and src.name == "DEFAULT" and name in cfg):
        return cfg[name]
    return default


def _fail(exc):
    code = 2 if isinstance(exc, (SchemaError, IoError, OSError)) else 1
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _emit(report, fmt, out, csv_spec=None):
    """Write the report; csv_spec = (columns, rows) for the csv format."""
    if fmt == "csv" and csv_spec is not None:
        columns, rows = csv_spec
        serialize.write_csv(out, columns, rows)
    else:
        serialize._write_json(out, report)
    click.echo(f"wrote {out}")


def _wrap_report(command, payload, **config):
    return {"command": command, "version": VERSION,
            "config": {k: v for k, v in config.items() if v is not None},
            "results": payload}


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="TOML file mirroring the flags (flags win).")
@click.pass_context
def main(ctx, config_path):
    """Spectral analysis and parent-Hamiltonian experiments for MPS tuples."""
    cfg = {}
    if config_path:
        try:
            with open(config_path, "rb") as fh:
                cfg = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            _fail(IoError(f"config: {exc}"))
    ctx.obj = cfg


def io_options(f):
    f = click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
                     default="json", show_default=True)(f)
    f = click.option("--out", default="report.json", show_default=True)(f)
    return f


@main.command()
@click.option("--input", "path", required=True, type=click.Path())
@click.option("--tol", default=1e-8, show_default=True)
@io_options
def analyze(path, tol, fmt, out):
    """Transfer-map spectral report: radius, peripheral structure, Perron data."""
    try:
        v = serialize.load_tuple(path)
        spec = peripheral_structure(v, tol)
        payload = spec.report()
        if spec.flags["primitive"]:
            r, t, rho = perron_data(v)
            payload["perron_radius"] = float(r)
            payload["invariant_state"] = serialize._matrix_out(rho)
        _emit(_wrap_report("analyze", payload, input=path, tol=tol),
              fmt, out)
    except GappedMpsError as exc:
        _fail(exc)


@main.command()
@click.option("--input", "path", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
@io_options
def chain(path, seed, fmt, out):
    """Adjoint-invariant chain decomposition with corner diagnostics."""
    try:
        v = serialize.load_tuple(path)
        ch = align_to_primitive(corner_rescale(build_chain(v, seed=seed)))
        _emit(_wrap_report("chain", ch.report(), input=path, seed=seed),
              fmt, out)
    except GappedMpsError as exc:
        _fail(exc)


@main.command()
@click.option("--input", "path", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default="classa.json", show_default=True)
def canonicalize_cmd(path, seed, out):
    """Recover structured two-sided data from a scrambled tuple."""
    try:
        v = serialize.load_tuple(path)
        data = canonicalize(v, seed=seed)
        serialize.save_classa(data, out)
        click.echo(f"wrote {out}")
    except GappedMpsError as exc:
        _fail(exc)


main.add_command(canonicalize_cmd, name="canonicalize")


@main.command()
@click.option("--input", "path", required=True, type=click.Path())
@io_options
def validate(path, fmt, out):
    """Check structured data invariants and the kernel-space model."""
    try:
        data = serialize.load_classa(path)
        check_structure(data)
        rep = validate_classa(data)
        _emit(_wrap_report("validate", rep, input=path), fmt, out)
    except GappedMpsError as exc:
        _fail(exc)


@main.command()
@click.option("--input", "path", required=True, type=click.Path())
@click.option("--m", "m", default=2, show_default=True,
              help="Interaction range of the parent projection.")
@click.option("--N-min", "n_min", default=None, type=int)
@click.option("--N-max", "n_max", default=None, type=int)
@click.option("--tol", default=1e-9, show_default=True)
@io_options
@click.pass_context
def hamiltonian(ctx, path, m, n_min, n_max, tol, fmt, out):
    """Parent-Hamiltonian spectra over a range of chain lengths."""
    n_min = n_min if n_min is not None else _config_value(ctx, "n_min", m)
    n_max = n_max if n_max is not None else _config_value(ctx, "n_max", m + 3)
    if n_min > n_max:
        _fail(SchemaError("--N-min must be <= --N-max"))
    try:
        v = serialize.load_tuple(path)
        h = parent_interaction(v, m)
        rows = []
        for N in range(n_min, n_max + 1):
            spec = ground_data(assemble_hamiltonian(h, N), kernel_tol=tol, N=N)
            for idx, val in enumerate(spec.eigenvalues):
                rows.append({"N": N, "index": idx, "eigenvalue": float(val)})
        _emit(_wrap_report("hamiltonian", rows, input=path, m=m,
                           N_min=n_min, N_max=n_max, tol=tol),
              fmt, out, csv_spec=(["N", "index", "eigenvalue"], rows))
    except GappedMpsError as exc:
        _fail(exc)


@main.command()
@click.option("--input", "path", required=True, type=click.Path())
@click.option("--m", "m", default=2, show_default=True,
              help="Edge-window length for the observables.")
@click.option("--N-min", "n_min", default=4, show_default=True, type=int)
@click.option("--N-max", "n_max", default=8, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True)
@io_options
def ltqo(path, m, n_min, n_max, seed, fmt, out):
    """Edge-expectation decay scan on all matrix units of the window."""
    try:
        v = serialize.load_tuple(path)
        dim = v.n ** m
        obs = [(f"E{i}{j}", np.eye(dim)[:, [i]] @ np.eye(dim)[[j], :])
               for i in range(dim) for j in range(dim) if i <= j]
        diag, rows = ltqo_scan(v, obs, m, range(n_min, n_max + 1))
        payload = {"diagnostics": {
            "d1": diag.d1, "ltqo_C1": diag.ltqo_C1, "ltqo_s1": diag.ltqo_s1,
            "support_floor": diag.support_floor,
            "chain_flags": diag.chain_flags}, "table": rows}
        _emit(_wrap_report("ltqo", payload, input=path, m=m,
                           N_min=n_min, N_max=n_max, seed=seed),
              fmt, out,
              csv_spec=(["N", "observable_id", "value", "error",
                         "fit_C1", "fit_s1"], rows))
    except GappedMpsError as exc:
        _fail(exc)


@main.command()
@click.option("--h0", "path0", required=True, type=click.Path(),
              help="Tuple JSON for the first parent interaction.")
@click.option("--h1", "path1", required=True, type=click.Path())
@click.option("--m0", default=2, show_default=True)
@click.option("--m1", default=2, show_default=True)
@click.option("--t-steps", "t_steps", default=11, show_default=True)
@click.option("--N-min", "n_min", default=4, show_default=True, type=int)
@click.option("--N-max", "n_max", default=6, show_default=True, type=int)
@io_options
def interpolate(path0, path1, m0, m1, t_steps, n_min, n_max, fmt, out):
    """Spectra along the straight-line interaction path between two tuples."""
    if t_steps < 2:
        _fail(SchemaError("--t-steps must be >= 2"))
    try:
        h0 = parent_interaction(serialize.load_tuple(path0), m0)
        h1 = parent_interaction(serialize.load_tuple(path1), m1)
        ts = np.linspace(0.0, 1.0, t_steps)
        rows, report = interpolation_scan(h0, h1, ts, range(n_min, n_max + 1))
        payload = {"window": report, "table": rows}
        _emit(_wrap_report("interpolate", payload, h0=path0, h1=path1,
                           m0=m0, m1=m1, t_steps=t_steps,
                           N_min=n_min, N_max=n_max),
              fmt, out,
              csv_spec=(["t", "N", "kernel_dim", "lambda_min_nonzero",
                         "lambda_max"], rows))
    except GappedMpsError as exc:
        _fail(exc)


@main.command()
@click.option("--input", "path", required=True, type=click.Path())
@io_options
def fcs(path, fmt, out):
    """Bulk-state values of a tuple on all one- and two-site matrix units."""
    try:
        v = serialize.load_tuple(path)
        r, t, rho = perron_data(v)
        triple = FcsTriple(tuple=v, rho=rho, direction="R")
        values = {}
        units = [np.eye(v.n)[:, [i]] @ np.eye(v.n)[[j], :]
                 for i in range(v.n) for j in range(v.n)]
        for i, A in enumerate(units):
            values[f"E{i}"] = fcs_evaluate(triple, [A])
        for i, A in enumerate(units):
            for j, B in enumerate(units):
                values[f"E{i}xE{j}"] = fcs_evaluate(triple, [A, B])
        _emit(_wrap_report("fcs", values, input=path), fmt, out)
    except GappedMpsError as exc:
        _fail(exc)


if __name__ == "__main__":  # pragma: no cover
    main()
