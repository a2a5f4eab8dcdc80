"""Channel spec files.

A spec file is a YAML mapping with a ``builder`` key:

.. code-block:: yaml

    builder: mub          # or symmetric, custom-cq
    d: 2

    builder: symmetric
    d: 2
    k: 2                  # optional block size

    builder: custom-cq
    name: two-states
    states:               # one density matrix per input symbol
      - [[1, 0], [0, 0]]
      - [[0.5, 0.5], [0.5, 0.5]]

Matrix entries are numbers or ``[re, im]`` pairs.  Errors carry the line
number of the offending node.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from .channels import (
    CqChannelSpec,
    SymmetricChannelSpec,
    WiretapChannel,
    build_mub_example,
    build_schur_multiplier,
    build_symmetric_channel,
)
from .config import DEFAULT_TOL, Tolerances, ValidationError
from .qlinalg import check_density

BUILDERS = ("mub", "symmetric", "custom-cq")


class SpecParseError(ValidationError):
    """The spec file is not well formed."""


def _where(node: yaml.Node, source: str) -> str:
    return f"{source}:{node.start_mark.line + 1}"


def _scalar(node: yaml.Node, source: str):
    if not isinstance(node, yaml.ScalarNode):
        raise SpecParseError(f"{_where(node, source)}: expected a scalar")
    return yaml.safe_load(node.value) if node.value else None


def _number(node: yaml.Node, source: str) -> complex:
    if isinstance(node, yaml.SequenceNode):
        if len(node.value) != 2:
            raise SpecParseError(f"{_where(node, source)}: complex entries are [re, im] pairs")
        re, im = (_number(n, source) for n in node.value)
        if re.imag or im.imag:
            raise SpecParseError(f"{_where(node, source)}: nested complex entry")
        return complex(re.real, im.real)
    value = _scalar(node, source)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecParseError(f"{_where(node, source)}: not a number: {node.value!r}")
    return complex(value)


def _matrix(node: yaml.Node, source: str) -> np.ndarray:
    if not isinstance(node, yaml.SequenceNode) or not node.value:
        raise SpecParseError(f"{_where(node, source)}: expected a list of matrix rows")
    rows = []
    for row in node.value:
        if not isinstance(row, yaml.SequenceNode):
            raise SpecParseError(f"{_where(row, source)}: expected a matrix row")
        rows.append([_number(x, source) for x in row.value])
    if len({len(r) for r in rows}) != 1:
        raise SpecParseError(f"{_where(node, source)}: ragged matrix rows")
    return np.array(rows, dtype=complex)


def _positive_int(node: yaml.Node, source: str, key: str, minimum: int = 1) -> int:
    value = _scalar(node, source)
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise SpecParseError(f"{_where(node, source)}: {key} must be an integer >= {minimum}")
    return value


@dataclass
class ChannelSpecFile:
    builder: str
    name: str
    d: int = 0
    k: int = 1
    cq: CqChannelSpec | None = None
    symmetric: SymmetricChannelSpec | None = None
    lines: dict = field(default_factory=dict)

    def channel(self, tol: Tolerances = DEFAULT_TOL) -> WiretapChannel:
        if self.builder == "symmetric":
            return build_symmetric_channel(self.symmetric)
        return build_schur_multiplier(self.cq, tol)


def parse_spec(text: str, source: str = "<spec>") -> ChannelSpecFile:
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f":{mark.line + 1}" if mark is not None else ""
        raise SpecParseError(f"{source}{line}: {getattr(exc, 'problem', exc)}") from exc
    if not isinstance(root, yaml.MappingNode):
        raise SpecParseError(f"{source}: top level must be a mapping")
    entries = {}
    for key_node, value_node in root.value:
        key = _scalar(key_node, source)
        if key in entries:
            raise SpecParseError(f"{_where(key_node, source)}: duplicate key {key!r}")
        entries[key] = value_node
    if "builder" not in entries:
        raise SpecParseError(f"{source}: missing 'builder' (one of {', '.join(BUILDERS)})")
    builder = _scalar(entries["builder"], source)
    if builder not in BUILDERS:
        raise SpecParseError(f"{_where(entries['builder'], source)}: unknown builder {builder!r}")
    allowed = {"mub": {"builder", "d", "name"}, "symmetric": {"builder", "d", "k", "name"},
               "custom-cq": {"builder", "states", "name"}}[builder]
    for key, node in entries.items():
        if key not in allowed:
            raise SpecParseError(f"{_where(node, source)}: unexpected key {key!r} for builder {builder}")
    name = str(_scalar(entries["name"], source)) if "name" in entries else None
    lines = {key: node.start_mark.line + 1 for key, node in entries.items()}

    if builder in ("mub", "symmetric"):
        if "d" not in entries:
            raise SpecParseError(f"{source}: builder {builder} needs 'd'")
        d = _positive_int(entries["d"], source, "d", minimum=2)
        if builder == "mub":
            cq = build_mub_example(d)
            return ChannelSpecFile(builder, name or cq.name, d=d, cq=cq, lines=lines)
        k = _positive_int(entries["k"], source, "k") if "k" in entries else 1
        return ChannelSpecFile(builder, name or f"symmetric d={d}", d=d, k=k,
                               symmetric=SymmetricChannelSpec(d), lines=lines)

    if "states" not in entries or not isinstance(entries["states"], yaml.SequenceNode):
        raise SpecParseError(f"{source}: custom-cq needs a 'states' list")
    state_nodes = entries["states"].value
    if not state_nodes:
        raise SpecParseError(f"{_where(entries['states'], source)}: 'states' is empty")
    states = [_matrix(n, source) for n in state_nodes]
    dim = states[0].shape[0]
    for i, (s, node) in enumerate(zip(states, state_nodes)):
        if s.shape != (dim, dim):
            raise ValidationError(f"{_where(node, source)}: state {i} has shape {s.shape}, expected {(dim, dim)}")
    cq = CqChannelSpec(tuple(states), name=name or "custom-cq")
    for i, node in enumerate(state_nodes):
        try:
            check_density(states[i], name=f"state {i}")
        except ValidationError as exc:
            raise ValidationError(f"{_where(node, source)}: {exc}") from exc
    return ChannelSpecFile(builder, cq.name, d=dim, cq=cq, lines=lines)


def load_spec(path: str) -> ChannelSpecFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecParseError(f"{path}: {exc.strerror}") from exc
    return parse_spec(text, path)


__all__ = ["BUILDERS", "ChannelSpecFile", "SpecParseError", "load_spec", "parse_spec"]
