"""Configuration, analysis requests and the command dispatcher of diagorbit."""

from __future__ import annotations

import functools
import json
from fractions import Fraction
from pathlib import Path
from typing import TYPE_CHECKING, Any, Literal

import numpy as np
import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator
from typing_extensions import Self

from . import exceptions as ex
from .families import generate
from .invariants import MAX_SYMBOLIC_F, cayley_delta, f, f_eval, h, h_eval, tangle3, tangle4
from .latent_class import check_membership, counts_to_frequencies
from .membership import classify, decompose, resolve_backend
from .real_classification import signature
from .tensor_core import AXES, Tensor3, multilinear_rank
from .utils import SCHEMA_VERSION, get_rng

if TYPE_CHECKING:
    from collections.abc import Callable

    from numpy.typing import NDArray
    from yaml.nodes import Node

__all__ = [
    "AnalysisRequest",
    "Config",
    "Tolerances",
    "encode_scalar",
    "parse_document",
    "read_config",
    "run",
    "write_config",
]

yaml_load = functools.partial(yaml.load, Loader=getattr(yaml, "CSafeLoader", yaml.SafeLoader))
SafeDumper = getattr(yaml, "CSafeDumper", yaml.SafeDumper)

Command = Literal["analyze", "decompose", "classify-real", "check-model", "gen", "invariants"]


class _PathDumper(SafeDumper):  # pyright: ignore[reportGeneralTypeIssues,reportUntypedBaseClass]
    """A dumper that can represent pathlib.Path objects as strings."""

    def represent_data(self, data: Any) -> Node:
        """Represent Path objects as strings."""
        if isinstance(data, Path):
            return self.represent_scalar("tag:yaml.org,2002:str", str(data))
        return super().represent_data(data)


def _yaml_dump(o: Any, **kwargs: Any) -> str:
    """Dump YAML."""
    return yaml.dump(
        o,
        Dumper=_PathDumper,
        stream=None,
        default_flow_style=False,
        indent=2,
        sort_keys=False,
        **kwargs,
    )


class Tolerances(BaseModel):
    """Decision thresholds of the float backend.

    Parameters
    ----------
    rank : float, optional
        Relative singular-value and determinant threshold, by default ``1e-9``.
    commutation : float, optional
        Largest commutation residual of the max-normalized tensor that still
        passes, by default ``1e-9``.
    f_nonzero : float, optional
        Smallest ratio ``sigma_min / sigma_max`` of the singular values of the
        Hessian of ``h_i`` that counts as ``f_i != 0``, by default ``1e-9``.
    band : float, optional
        Multiplicative half-width of the indeterminate zone around every
        threshold, by default ``10``.
    pairing : float, optional
        Relative distance under which decomposition rows are complex
        conjugates, by default ``1e-7``.
    sign_sample : float, optional
        Samples of ``h_i`` below ``sign_sample * max|P|^n`` carry no sign,
        by default ``1e-9``.
    reconstruction : float, optional
        Largest relative residual of a decomposition, by default ``1e-8``.
    psd : float, optional
        Threshold for minors and eigenvalues of the normalized model
        matrices, by default ``1e-9``.
    """

    rank: float = 1e-9
    commutation: float = 1e-9
    f_nonzero: float = 1e-9
    band: float = 10.0
    pairing: float = 1e-7
    sign_sample: float = 1e-9
    reconstruction: float = 1e-8
    psd: float = 1e-9

    @model_validator(mode="after")
    def _check_positive(self) -> Self:
        """Check that every threshold is positive."""
        bad = [name for name, value in self.model_dump().items() if value <= 0]
        if bad:
            raise ValueError(f"Tolerances must be positive: {', '.join(bad)}.")
        if self.band < 1:
            raise ValueError("The indeterminate band must be at least 1.")
        return self


class Config(BaseModel):
    """Configuration for diagorbit.

    Parameters
    ----------
    backend : {"auto", "exact", "float"}, optional
        Arithmetic; ``auto`` is exact for rational tensors, by default ``auto``.
    seed : int, optional
        Seed for every random choice, by default 42.
    samples : int, optional
        Sample points per float check, by default 5.
    tolerances : Tolerances, optional
        Decision thresholds.
    strict : bool, optional
        Strictly positive mode of ``check-model``, by default ``False``.
    pretty : bool, optional
        Indent the JSON output, by default ``False``.
    n_jobs : int, optional
        Number of concurrent workers in batch mode, by default -1 (one per CPU).
    """

    backend: Literal["auto", "exact", "float"] = "auto"
    seed: int = 42
    samples: int = Field(default=5, ge=1)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    strict: bool = False
    pretty: bool = False
    n_jobs: int = -1


def read_config(file_path: str | Path) -> Config:
    """Read a configuration file and return a Config object.

    Parameters
    ----------
    file_path : str or pathlib.Path
        Path to the configuration file.

    Returns
    -------
    Config
        A Config object.
    """
    config_data = yaml_load(Path(file_path).read_text()) or {}
    try:
        return Config(**config_data)
    except ValidationError as e:
        raise ValueError(e) from e


def write_config(config: Config, file_path: str | Path) -> None:
    """Write a Config object to a file.

    Parameters
    ----------
    config : Config
        A Config object.
    file_path : str or pathlib.Path
        Path to the configuration file.
    """
    Path(file_path).write_text(_yaml_dump(config.model_dump()))


def parse_document(text: str, source: str | None = None) -> dict[str, Any]:
    """Parse the JSON text of a tensor or counts document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ex.TensorParseError(str(e), source) from e
    if not isinstance(doc, dict):
        raise ex.TensorParseError("expected a JSON object", source)
    return doc


class AnalysisRequest(BaseModel):
    """One analysis to run.

    Parameters
    ----------
    command : str
        One of ``analyze``, ``decompose``, ``classify-real``,
        ``check-model``, ``gen`` and ``invariants``.
    input : pathlib.Path, optional
        JSON file holding a tensor document (or a counts table for
        ``check-model``).
    tensor : dict, optional
        Inline tensor document, used instead of ``input``.
    config : Config, optional
        Backend, seed and tolerances.
    family : str, optional
        Family generated by ``gen``.
    n : int, optional
        Dimension for ``gen``.
    eps : str, optional
        Perturbation ``"p/q"`` for ``gen``.
    """

    command: Command
    input: Path | None = None
    tensor: dict[str, Any] | None = None
    config: Config = Field(default_factory=Config)
    family: str | None = None
    n: int | None = None
    eps: str | None = None

    @model_validator(mode="after")
    def _check_source(self) -> Self:
        """Check that exactly one tensor source is given when one is needed."""
        if self.command == "gen":
            if self.family is None:
                raise ValueError("`gen` requires a family.")
            return self
        if (self.input is None) == (self.tensor is None):
            raise ValueError("Exactly one of `input` or `tensor` must be provided.")
        return self

    def load_document(self) -> dict[str, Any]:
        """Return the tensor (or counts) document."""
        if self.tensor is not None:
            return self.tensor
        path = Path(self.input)  # pyright: ignore[reportArgumentType]
        try:
            text = path.read_text()
        except OSError as e:
            raise ex.TensorParseError(f"cannot read the file ({e.strerror})", str(path)) from e
        return parse_document(text, str(path))

    def load_tensor(self) -> Tensor3:
        """Parse the tensor, normalizing a counts table to frequencies."""
        doc = self.load_document()
        source = str(self.input) if self.input is not None else None
        if "counts" in doc:
            return counts_to_frequencies(doc["counts"], source)
        return Tensor3.from_json(doc, source)


def encode_scalar(value: Any) -> Any:
    """JSON form of a scalar: ``"p/q"`` strings, floats or ``[re, im]`` pairs."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (complex, np.complexfloating)):
        if value.imag == 0:
            return float(value.real)
        return [float(value.real), float(value.imag)]
    if isinstance(value, (float, np.floating, int, np.integer)):
        return float(value) if isinstance(value, (float, np.floating)) else int(value)
    return str(value)


def _tangles(p: Tensor3) -> dict[str, Any]:
    funcs = {2: ("delta", cayley_delta), 3: ("tau3", tangle3), 4: ("tau4", tangle4)}
    if p.n not in funcs:
        return {}
    name, func = funcs[p.n]
    return {name: encode_scalar(func(p))}


def _options(cfg: Config) -> dict[str, Any]:
    return {
        "tol": cfg.tolerances,
        "backend": cfg.backend,
        "seed": cfg.seed,
        "samples": cfg.samples,
    }


def _analyze(request: AnalysisRequest) -> tuple[dict[str, Any], int]:
    cfg = request.config
    p = request.load_tensor()
    report = classify(p, **_options(cfg))
    mrank = multilinear_rank(p, 0.0 if report.backend == "exact" else cfg.tolerances.rank)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "analyze",
        "n": p.n,
        "field": p.field,
        "multilinear_rank": list(mrank),
        **_tangles(p),
        "membership": report.model_dump(mode="json"),
        "verdict": report.verdict,
    }
    return doc, report.exit_code


def _decompose(request: AnalysisRequest) -> tuple[dict[str, Any], int]:
    cfg = request.config
    p = request.load_tensor()
    dec = decompose(p, **_options(cfg))
    doc = {"schema_version": SCHEMA_VERSION, "command": "decompose", "n": p.n, **dec.to_json_dict()}
    return doc, 0


def _classify_real(request: AnalysisRequest) -> tuple[dict[str, Any], int]:
    cfg = request.config
    p = request.load_tensor()
    report = signature(p, **_options(cfg))
    return {"command": "classify-real", **report.model_dump(mode="json")}, 0


def _check_model(request: AnalysisRequest) -> tuple[dict[str, Any], int]:
    cfg = request.config
    p = request.load_tensor()
    report = check_membership(p, strict=cfg.strict, **_options(cfg))
    return {"command": "check-model", **report.model_dump(mode="json")}, report.exit_code


def _gen(request: AnalysisRequest) -> tuple[dict[str, Any], int]:
    p = generate(request.family, request.n, request.eps)  # pyright: ignore[reportArgumentType]
    return {"schema_version": SCHEMA_VERSION, **p.to_json()}, 0


def _sampled_covariants(q: Tensor3, cfg: Config) -> dict[str, Any]:
    rng = get_rng(cfg.seed)
    points = [rng.standard_normal(q.n) for _ in range(cfg.samples)]

    def at(func: Callable[..., Any], i: int, x: NDArray[np.float64]) -> Any:
        try:
            return encode_scalar(func(q, i, x))
        except ex.SingularEvaluationError:
            return None

    return {
        "points": [x.tolist() for x in points],
        "h_values": [[at(h_eval, i, x) for x in points] for i in AXES],
        "f_values": [[at(f_eval, i, x) for x in points] for i in AXES],
    }


def _invariants(request: AnalysisRequest) -> tuple[dict[str, Any], int]:
    cfg = request.config
    p = request.load_tensor()
    doc: dict[str, Any] = {"schema_version": SCHEMA_VERSION, "command": "invariants", "n": p.n}
    if p.field == "symbolic":
        doc.update(_tangles(p))
        return doc, 0
    mode = resolve_backend(p, cfg.backend)
    doc["backend"] = mode
    if mode == "exact":
        doc["h"] = [h(p, i).to_text() for i in AXES]
        if p.n <= MAX_SYMBOLIC_F:
            doc["f"] = [f(p, i).to_text() for i in AXES]
        doc.update(_tangles(p))
        return doc, 0
    q = p.to_float() if p.is_exact else p
    doc.update(_sampled_covariants(q, cfg))
    doc.update(_tangles(q))
    return doc, 0


MISMATCH_ERRORS = (ex.DimensionMismatchError, ex.FieldMismatchError, ex.UnsupportedDimensionError)


def _exit_code(error: Exception) -> int:
    if isinstance(error, ex.TensorParseError):
        return 64
    if isinstance(error, MISMATCH_ERRORS):
        return 65
    if isinstance(error, ex.IndeterminateError):
        return 4
    if isinstance(error, ex.NotInOrbitError):
        return {"boundary": 2, "outside": 3}.get(error.report.verdict, 4)
    return 1


HANDLED_ERRORS = (
    ex.TensorParseError,
    ex.DimensionMismatchError,
    ex.FieldMismatchError,
    ex.UnsupportedDimensionError,
    ex.IndeterminateError,
    ex.NotInOrbitError,
    ex.InputValueError,
    ex.InputRangeError,
    ex.InputTypeError,
    ex.InvalidParametersError,
    ex.InconsistentModelError,
    ex.SliceSingularError,
    ex.SingularEvaluationError,
)


def run(request: AnalysisRequest) -> tuple[dict[str, Any], int]:
    """Run one analysis.

    Parameters
    ----------
    request : AnalysisRequest
        The command, its input and configuration.

    Returns
    -------
    dict
        The JSON report, always carrying ``schema_version``. Failures of the
        package's own checks become an ``error`` document.
    int
        Exit code: 0 for success or an in-orbit verdict, 2 boundary,
        3 outside (or a failed model check), 4 indeterminate, 64 parse errors,
        65 dimension or field mismatches and 1 for other rejected inputs.
    """
    commands = {
        "analyze": _analyze,
        "decompose": _decompose,
        "classify-real": _classify_real,
        "check-model": _check_model,
        "gen": _gen,
        "invariants": _invariants,
    }
    try:
        return commands[request.command](request)
    except HANDLED_ERRORS as e:
        doc: dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "command": request.command,
            "error": type(e).__name__,
            "message": str(e),
        }
        if isinstance(e, ex.NotInOrbitError):
            doc["membership"] = e.report.model_dump(mode="json")
        if isinstance(e, ex.IndeterminateError):
            doc["residual"] = e.residual
        return doc, _exit_code(e)
