"""Command-line interface for diagorbit."""

from __future__ import annotations

import importlib.metadata
import json
import sys
from pathlib import Path
from typing import TYPE_CHECKING, Any

import rich_click as click
from joblib import Parallel, delayed
from rich import box
from rich.console import Console
from rich.table import Table

from . import diagorbit as dg
from .exceptions import TensorParseError
from .families import FAMILIES
from .print_versions import get_dep_versions
from .utils import SCHEMA_VERSION

if TYPE_CHECKING:
    from collections.abc import Callable

console = Console(stderr=True)
CONTEXT_SETTINGS = {"help_option_names": ["-h", "--help"]}


def _version() -> str:
    try:
        return importlib.metadata.version("diagorbit")
    except importlib.metadata.PackageNotFoundError:
        return "999"


def get_versions() -> dict[str, str]:
    """Get the versions of diagorbit, its numerical stack and Python."""
    deps = get_dep_versions()
    do_ver = deps.pop("diagorbit")
    if "dev" in do_ver:
        do_ver = ".".join(do_ver.split(".")[:3]) + "-dev"
    return {
        "diagorbit": do_ver,
        **{k: deps[k] for k in ("numpy", "scipy", "sympy", "numba")},
        "Python": ".".join(map(str, sys.version_info[:3])),
    }


def _emit(doc: dict[str, Any], pretty: bool) -> None:
    click.echo(json.dumps(doc, indent=2 if pretty else None))


def _load_config(
    config_yml: str | None,
    backend: str | None,
    tol: float | None,
    seed: int | None,
    strict: bool | None = None,
    pretty: bool | None = None,
    n_jobs: int | None = None,
) -> dg.Config:
    """Read the configuration file and apply the command-line overrides."""
    cfg = dg.read_config(config_yml) if config_yml else dg.Config()
    update: dict[str, Any] = {
        k: v
        for k, v in {
            "backend": backend,
            "seed": seed,
            "strict": strict,
            "pretty": pretty,
            "n_jobs": n_jobs,
        }.items()
        if v is not None
    }
    if tol is not None:
        thresholds = {"rank": tol, "commutation": tol, "f_nonzero": tol, "psd": tol}
        update["tolerances"] = dg.Tolerances(**{**cfg.tolerances.model_dump(), **thresholds})
    return dg.Config.model_validate({**cfg.model_dump(), **update})


def _run_file(command: str, path: Path, cfg: dg.Config) -> dict[str, Any]:
    """Run one file of a batch; unexpected failures stay confined to it."""
    try:
        request = {"command": command, "input": path, "config": cfg}
        doc, code = dg.run(dg.AnalysisRequest.model_validate(request))
    except Exception as e:  # noqa: BLE001
        doc, code = {"error": type(e).__name__, "message": str(e)}, 1
    return {"file": str(path), "exit_code": code, "report": doc}


def _run_batch(command: str, directory: str, cfg: dg.Config) -> tuple[dict[str, Any], int]:
    files = sorted(Path(directory).glob("*.json"))
    results = Parallel(n_jobs=cfg.n_jobs)(delayed(_run_file)(command, f, cfg) for f in files)
    codes = [r["exit_code"] for r in results]  # pyright: ignore[reportOptionalSubscript]
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "results": results}
    return doc, max(codes, default=0)


def _parse_error(command: str, error: TensorParseError) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "error": type(error).__name__,
        "message": str(error),
    }


def _execute(
    command: str,
    cfg: dg.Config,
    input_file: str | None,
    batch: str | None,
    **extra: Any,
) -> None:
    try:
        if batch is not None:
            doc, code = _run_batch(command, batch, cfg)
        elif command != "gen" and input_file in (None, "-"):
            try:
                tensor = dg.parse_document(sys.stdin.read(), "<stdin>")
            except TensorParseError as e:
                _emit(_parse_error(command, e), cfg.pretty)
                sys.exit(64)
            request = {"command": command, "tensor": tensor, "config": cfg, **extra}
            doc, code = dg.run(dg.AnalysisRequest.model_validate(request))
        else:
            path = None if input_file is None else Path(input_file)
            request = {"command": command, "input": path, "config": cfg, **extra}
            doc, code = dg.run(dg.AnalysisRequest.model_validate(request))
    except Exception:
        console.print_exception(extra_lines=3, show_locals=True)
        sys.exit(1)
    _emit(doc, cfg.pretty)
    sys.exit(code)


def _common_options(func: Callable[..., Any]) -> Callable[..., Any]:
    options = [
        click.option(
            "--input",
            "-i",
            "input_file",
            type=click.Path(allow_dash=True),
            default=None,
            help="Tensor document in JSON; ``-`` or no value reads stdin.",
        ),
        click.option(
            "--batch",
            type=click.Path(exists=True, file_okay=False),
            default=None,
            help="Process every ``*.json`` file of a directory concurrently.",
        ),
        click.option(
            "--backend",
            type=click.Choice(["auto", "exact", "float"]),
            default=None,
            help="Arithmetic, exact for rational tensors by default.",
        ),
        click.option(
            "--tol", type=float, default=None, help="Rank, commutation, f and PSD thresholds."
        ),
        click.option(
            "--seed", type=int, default=None, help="Seed for random choices, defaults to 42."
        ),
        click.option("--json/--pretty", "compact", default=None, help="Compact or indented JSON."),
        click.option(
            "--n-jobs",
            type=int,
            default=None,
            help="Workers for ``--batch``, defaults to one per CPU.",
        ),
        click.option(
            "--config",
            "config_yml",
            type=click.Path(exists=True),
            default=None,
            help="YAML configuration file.",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _pretty(compact: bool | None) -> bool | None:
    return None if compact is None else not compact


@click.group(context_settings=CONTEXT_SETTINGS)
@click.version_option(_version(), prog_name="diagorbit")
def cli() -> None:
    r"""Orbit membership, invariants and real classification of n x n x n tensors.

    \b
    Reports are JSON documents on stdout; logs go to stderr.

    \b
    $ diagorbit gen --family werner | diagorbit analyze
    """


@cli.command("analyze", context_settings=CONTEXT_SETTINGS)
@_common_options
def analyze(
    input_file: str | None,
    batch: str | None,
    backend: str | None,
    tol: float | None,
    seed: int | None,
    compact: bool | None,
    n_jobs: int | None,
    config_yml: str | None,
) -> None:
    """Multilinear rank, covariant status, tangles and the orbit verdict.

    Exit codes: 0 in orbit, 2 boundary, 3 outside, 4 indeterminate.
    """
    cfg = _load_config(config_yml, backend, tol, seed, pretty=_pretty(compact), n_jobs=n_jobs)
    _execute("analyze", cfg, input_file, batch)


@cli.command("decompose", context_settings=CONTEXT_SETTINGS)
@_common_options
def decompose(
    input_file: str | None,
    batch: str | None,
    backend: str | None,
    tol: float | None,
    seed: int | None,
    compact: bool | None,
    n_jobs: int | None,
    config_yml: str | None,
) -> None:
    """Write an in-orbit tensor as the image of the unit tensor."""
    cfg = _load_config(config_yml, backend, tol, seed, pretty=_pretty(compact), n_jobs=n_jobs)
    _execute("decompose", cfg, input_file, batch)


@cli.command("classify-real", context_settings=CONTEXT_SETTINGS)
@_common_options
def classify_real(
    input_file: str | None,
    batch: str | None,
    backend: str | None,
    tol: float | None,
    seed: int | None,
    compact: bool | None,
    n_jobs: int | None,
    config_yml: str | None,
) -> None:
    """Signature and path component of a real in-orbit tensor."""
    cfg = _load_config(config_yml, backend, tol, seed, pretty=_pretty(compact), n_jobs=n_jobs)
    _execute("classify-real", cfg, input_file, batch)


@cli.command("check-model", context_settings=CONTEXT_SETTINGS)
@_common_options
@click.option("--strict", is_flag=True, default=None, help="Require strictly positive parameters.")
def check_model(
    input_file: str | None,
    batch: str | None,
    backend: str | None,
    tol: float | None,
    seed: int | None,
    compact: bool | None,
    n_jobs: int | None,
    config_yml: str | None,
    strict: bool | None,
) -> None:
    r"""Test a distribution (or a ``{"counts": ...}`` table) against the latent-class model.

    \b
    Exit codes: 0 pass, 3 fail, 4 indeterminate.
    """
    pretty = _pretty(compact)
    cfg = _load_config(config_yml, backend, tol, seed, strict=strict, pretty=pretty, n_jobs=n_jobs)
    _execute("check-model", cfg, input_file, batch)


@cli.command("invariants", context_settings=CONTEXT_SETTINGS)
@_common_options
def invariants(
    input_file: str | None,
    batch: str | None,
    backend: str | None,
    tol: float | None,
    seed: int | None,
    compact: bool | None,
    n_jobs: int | None,
    config_yml: str | None,
) -> None:
    r"""The covariants h and f on every axis and the tangle of the tensor.

    \b
    The exact backend prints h and f as polynomials. The float backend
    (and float input) prints their values at ``samples`` seeded points.
    """
    cfg = _load_config(config_yml, backend, tol, seed, pretty=_pretty(compact), n_jobs=n_jobs)
    _execute("invariants", cfg, input_file, batch)


@cli.command("gen", context_settings=CONTEXT_SETTINGS)
@click.option("--family", type=click.Choice(list(FAMILIES)), required=True, help="Tensor family.")
@click.option("--n", "n", type=int, default=None, help="Dimension of the kn families.")
@click.option("--eps", type=str, default=None, help="Perturbation p/q, defaults to 1.")
@click.option("--json/--pretty", "compact", default=None, help="Compact or indented JSON output.")
def gen(family: str, n: int | None, eps: str | None, compact: bool | None) -> None:
    r"""Generate a boundary tensor or one of its perturbations.

    \b
    $ diagorbit gen --family kn --n 3
    """
    cfg = _load_config(None, None, None, None, pretty=_pretty(compact))
    _execute("gen", cfg, None, None, family=family, n=n, eps=eps)


@cli.command("versions", context_settings=CONTEXT_SETTINGS)
def versions() -> None:
    """Print the versions of diagorbit and its dependencies."""
    table = Table(box=box.ROUNDED)
    table.add_column("Package", style="bold")
    table.add_column("Version", style="magenta", justify="center")
    for p, v in get_versions().items():
        table.add_row(p, v)
    Console().print(table)
