"""Fusion parameters, seeded initialisation and the IBMT v1 tensor archive.

Seeded weights come from numpy's Philox 4x64 counter-based generator keyed
by the seed, drawn in the fixed order of ``parameter_shapes``. Linear
weights are normal with standard deviation ``1/sqrt(fan_in)``, biases are
zero, LayerNorm gains one. Queries and motif matrices are normal with
standard deviation 0.02.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Tuple, Union

import numpy as np

from ..errors import DimensionMismatch
from .featurize import FEATURE_DIMS, KINDS

ARCHIVE_MAGIC = "IBMT v1"


class ArchiveError(ValueError):
    pass


class NonFiniteWeights(ValueError):
    pass


@dataclass(frozen=True)
class FusionConfig:
    d: int = 16
    n_heads: int = 4
    n_layers: int = 2
    ffn_dim: int = 64
    mlp_hidden: int = 32
    n_q: int = 8
    n_mol_motifs: int = 1024
    n_prot_motifs: int = 7
    feature_dims: Mapping[str, int] = field(default_factory=lambda: dict(FEATURE_DIMS))

    def __post_init__(self):
        for name in ("d", "n_heads", "n_layers", "ffn_dim", "mlp_hidden", "n_q", "n_mol_motifs", "n_prot_motifs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.d % self.n_heads:
            raise ValueError(f"d={self.d} is not divisible by n_heads={self.n_heads}")


def _ln(prefix: str, dim: int) -> List[Tuple[str, Tuple[int, ...], str]]:
    return [(f"{prefix}.gain", (dim,), "one"), (f"{prefix}.bias", (dim,), "zero")]


def _linear(prefix: str, fan_in: int, fan_out: int) -> List[Tuple[str, Tuple[int, ...], str]]:
    return [(f"{prefix}.w", (fan_in, fan_out), "linear"), (f"{prefix}.b", (fan_out,), "zero")]


def _attn(prefix: str, d: int) -> List[Tuple[str, Tuple[int, ...], str]]:
    out = []
    for p in ("q", "k", "v", "o"):
        out += _linear(f"{prefix}.{p}", d, d)
    return out


def parameter_shapes(cfg: FusionConfig) -> List[Tuple[str, Tuple[int, ...], str]]:
    """(name, shape, init) for every tensor, in draw order."""
    d = cfg.d
    spec: List[Tuple[str, Tuple[int, ...], str]] = []
    for kind in KINDS:
        fin = cfg.feature_dims[kind]
        spec += _ln(f"fusion.proj.{kind}.ln", fin)
        spec += _linear(f"fusion.proj.{kind}.fc1", fin, cfg.mlp_hidden)
        spec += _linear(f"fusion.proj.{kind}.fc2", cfg.mlp_hidden, d)
    for layer in range(cfg.n_layers):
        p = f"fusion.enc.layer{layer}"
        spec += _ln(f"{p}.ln1", d) + _attn(f"{p}.attn", d)
        spec += _ln(f"{p}.ln2", d) + _linear(f"{p}.ffn1", d, cfg.ffn_dim) + _linear(f"{p}.ffn2", cfg.ffn_dim, d)
    spec += _ln("fusion.enc.ln_f", d)
    for layer in range(cfg.n_layers):
        p = f"fusion.dec.layer{layer}"
        spec += _ln(f"{p}.ln1", d) + _attn(f"{p}.self_attn", d)
        spec += _ln(f"{p}.ln2", d) + _attn(f"{p}.cross_attn", d)
        spec += _ln(f"{p}.ln3", d) + _linear(f"{p}.ffn1", d, cfg.ffn_dim) + _linear(f"{p}.ffn2", cfg.ffn_dim, d)
    spec += _ln("fusion.dec.ln_f", d)
    spec.append(("fusion.queries", (cfg.n_q, d), "small"))
    spec.append(("motif.M_m", (cfg.n_mol_motifs, d), "small"))
    spec.append(("motif.M_p", (cfg.n_prot_motifs, d), "small"))
    return spec


class FusionWeights:
    """Named tensors plus the config they were built for."""

    def __init__(self, config: FusionConfig, tensors: Mapping[str, np.ndarray]):
        self.config = config
        self.tensors: "OrderedDict[str, np.ndarray]" = OrderedDict()
        expected = parameter_shapes(config)
        missing = [n for n, _, _ in expected if n not in tensors]
        if missing:
            raise DimensionMismatch(f"missing tensors: {missing[:5]}")
        for name, shape, _ in expected:
            t = np.array(tensors[name], dtype=np.float64)
            if t.shape != shape:
                raise DimensionMismatch(f"{name}: shape {t.shape}, expected {shape}")
            if not np.isfinite(t).all():
                raise NonFiniteWeights(f"{name} has non-finite entries")
            t.setflags(write=False)
            self.tensors[name] = t

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    @classmethod
    def seeded(cls, seed: int, config: FusionConfig = FusionConfig()) -> "FusionWeights":
        rng = np.random.Generator(np.random.Philox(key=seed))
        tensors = {}
        for name, shape, init in parameter_shapes(config):
            if init == "one":
                tensors[name] = np.ones(shape)
            elif init == "zero":
                tensors[name] = np.zeros(shape)
            elif init == "linear":
                tensors[name] = rng.standard_normal(shape) / np.sqrt(shape[0])
            else:
                tensors[name] = rng.standard_normal(shape) * 0.02
        return cls(config, tensors)

    def replace(self, **updates: np.ndarray) -> "FusionWeights":
        """Copy with some tensors swapped; keys use ``__`` for ``.``."""
        t = dict(self.tensors)
        for k, v in updates.items():
            t[k.replace("__", ".")] = v
        return FusionWeights(self.config, t)

    def save(self, path: Union[str, Path]) -> None:
        cfg = self.config
        meta = {
            "d": cfg.d, "n_heads": cfg.n_heads, "n_layers": cfg.n_layers, "ffn_dim": cfg.ffn_dim,
            "mlp_hidden": cfg.mlp_hidden, "n_q": cfg.n_q,
            "n_mol_motifs": cfg.n_mol_motifs, "n_prot_motifs": cfg.n_prot_motifs,
        }
        meta.update({f"feature_dim.{k}": v for k, v in cfg.feature_dims.items()})
        write_archive(path, self.tensors, meta)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "FusionWeights":
        tensors, meta = read_archive(path)
        dims = {k.split(".", 1)[1]: v for k, v in meta.items() if k.startswith("feature_dim.")}
        plain = {k: v for k, v in meta.items() if not k.startswith("feature_dim.")}
        cfg = FusionConfig(**plain, feature_dims=dims or dict(FEATURE_DIMS))
        return cls(cfg, tensors)


def write_archive(path: Union[str, Path], tensors: Mapping[str, np.ndarray],
                  meta: Mapping[str, int] = ()) -> None:
    """Write tensors as ``IBMT v1`` text.

    Line 1 is the magic; optional ``meta <key> <int>`` lines follow. Each
    tensor is a ``tensor <name> <rank> <dims...>`` header then one line of
    whitespace-separated floats in row-major order.
    """
    lines = [ARCHIVE_MAGIC]
    for k, v in dict(meta).items():
        lines.append(f"meta {k} {int(v)}")
    for name, t in tensors.items():
        a = np.asarray(t, dtype=np.float64)
        if any(c.isspace() for c in name) or not name:
            raise ArchiveError(f"bad tensor name {name!r}")
        lines.append(" ".join(["tensor", name, str(a.ndim), *map(str, a.shape)]))
        lines.append(" ".join(repr(float(x)) for x in a.ravel()))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_archive(path: Union[str, Path]) -> Tuple["OrderedDict[str, np.ndarray]", Dict[str, int]]:
    lines = Path(path).read_text(encoding="utf-8").split("\n")
    if not lines or lines[0].strip() != ARCHIVE_MAGIC:
        raise ArchiveError(f"{path}: not an {ARCHIVE_MAGIC} archive")
    tensors: "OrderedDict[str, np.ndarray]" = OrderedDict()
    meta: Dict[str, int] = {}
    i = 1
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if not line:
            continue
        parts = line.split()
        if parts[0] == "meta" and len(parts) == 3:
            meta[parts[1]] = int(parts[2])
            continue
        if parts[0] != "tensor" or len(parts) < 3:
            raise ArchiveError(f"line {i}: expected a tensor header")
        name, rank = parts[1], int(parts[2])
        shape = tuple(int(x) for x in parts[3:])
        if len(shape) != rank:
            raise ArchiveError(f"line {i}: rank {rank} but {len(shape)} dims")
        if i >= len(lines):
            raise ArchiveError(f"tensor {name}: missing data line")
        data = lines[i].split()
        i += 1
        size = int(np.prod(shape)) if shape else 1
        if len(data) != size:
            raise ArchiveError(f"tensor {name}: {len(data)} values for shape {shape}")
        tensors[name] = np.array([float(x) for x in data], dtype=np.float64).reshape(shape)
    return tensors, meta
