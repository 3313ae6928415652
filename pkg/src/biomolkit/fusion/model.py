"""Forward pass: per-modality projection, then a pre-LN Transformer
encoder-decoder that turns the token set into ``1 + n_q`` fused vectors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Union

import numpy as np
from scipy.special import erf

from ..errors import DimensionMismatch
from ..molgraph.graph import MolecularGraph
from ..motif import MotifDictionary, fcfp, motif_prompt, protein_motif_vector
from ..protseq import ProteinStructure
from .featurize import MOL2D, MOL3D, PROT1D, PROT3D, ModalityEmbedding, featurize
from .weights import FusionWeights, NonFiniteWeights

LN_EPS = 1e-5

_PAIRS = {(MOL2D, MOL3D), (PROT1D, PROT3D)}


@dataclass(frozen=True)
class MultimodalFeatures:
    z: np.ndarray
    attention: Optional[Dict[str, np.ndarray]] = field(default=None, compare=False)

    @property
    def shape(self):
        return self.z.shape


def layer_norm(x: np.ndarray, gain: np.ndarray, bias: np.ndarray, eps: float = LN_EPS) -> np.ndarray:
    mu = x.mean(axis=-1, keepdims=True)
    var = ((x - mu) ** 2).mean(axis=-1, keepdims=True)
    return (x - mu) / np.sqrt(var + eps) * gain + bias


def gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x / np.sqrt(2.0)))


def softmax(x: np.ndarray) -> np.ndarray:
    e = np.exp(x - x.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def _linear(w: FusionWeights, prefix: str, x: np.ndarray) -> np.ndarray:
    return x @ w[f"{prefix}.w"] + w[f"{prefix}.b"]


def _mlp(w: FusionWeights, prefix: str, x: np.ndarray) -> np.ndarray:
    return _linear(w, f"{prefix}.fc2", gelu(_linear(w, f"{prefix}.fc1", x)))


def _attention(w: FusionWeights, prefix: str, xq: np.ndarray, xkv: np.ndarray,
               n_heads: int, store: Optional[Dict[str, np.ndarray]]) -> np.ndarray:
    q = _linear(w, f"{prefix}.q", xq)
    k = _linear(w, f"{prefix}.k", xkv)
    v = _linear(w, f"{prefix}.v", xkv)
    dh = q.shape[1] // n_heads
    heads = []
    probs = []
    for h in range(n_heads):
        sl = slice(h * dh, (h + 1) * dh)
        p = softmax(q[:, sl] @ k[:, sl].T / np.sqrt(dh))
        probs.append(p)
        heads.append(p @ v[:, sl])
    if store is not None:
        store[prefix] = np.stack(probs)
    return _linear(w, f"{prefix}.o", np.concatenate(heads, axis=1))


def _ffn(w: FusionWeights, prefix: str, x: np.ndarray) -> np.ndarray:
    return _linear(w, f"{prefix}.ffn2", gelu(_linear(w, f"{prefix}.ffn1", x)))


def project_concat(a: ModalityEmbedding, b: ModalityEmbedding, w: FusionWeights) -> np.ndarray:
    """``[MLP(LN(a)); MLP(LN(b))]``: both modalities projected to ``d``, rows stacked."""
    if (a.kind, b.kind) not in _PAIRS:
        raise DimensionMismatch(f"modalities {a.kind}/{b.kind} do not form a pair")
    if a.n_tokens != b.n_tokens:
        raise DimensionMismatch(f"{a.kind} has {a.n_tokens} rows but {b.kind} has {b.n_tokens}")
    out = []
    for emb in (a, b):
        need = w.config.feature_dims[emb.kind]
        if emb.matrix.shape[1] != need:
            raise DimensionMismatch(f"{emb.kind}: {emb.matrix.shape[1]} features, weights expect {need}")
        p = f"fusion.proj.{emb.kind}"
        out.append(_mlp(w, p, layer_norm(emb.matrix, w[f"{p}.ln.gain"], w[f"{p}.ln.bias"])))
    return np.vstack(out)


def encode(h: np.ndarray, w: FusionWeights, store: Optional[Dict[str, np.ndarray]] = None) -> np.ndarray:
    cfg = w.config
    x = h
    for layer in range(cfg.n_layers):
        p = f"fusion.enc.layer{layer}"
        y = layer_norm(x, w[f"{p}.ln1.gain"], w[f"{p}.ln1.bias"])
        x = x + _attention(w, f"{p}.attn", y, y, cfg.n_heads, store)
        x = x + _ffn(w, p, layer_norm(x, w[f"{p}.ln2.gain"], w[f"{p}.ln2.bias"]))
    return layer_norm(x, w["fusion.enc.ln_f.gain"], w["fusion.enc.ln_f.bias"])


def decode(prompt: np.ndarray, memory: np.ndarray, w: FusionWeights,
           store: Optional[Dict[str, np.ndarray]] = None) -> np.ndarray:
    cfg = w.config
    x = np.vstack([prompt[None, :], w["fusion.queries"]])
    for layer in range(cfg.n_layers):
        p = f"fusion.dec.layer{layer}"
        y = layer_norm(x, w[f"{p}.ln1.gain"], w[f"{p}.ln1.bias"])
        x = x + _attention(w, f"{p}.self_attn", y, y, cfg.n_heads, store)
        y = layer_norm(x, w[f"{p}.ln2.gain"], w[f"{p}.ln2.bias"])
        x = x + _attention(w, f"{p}.cross_attn", y, memory, cfg.n_heads, store)
        x = x + _ffn(w, p, layer_norm(x, w[f"{p}.ln3.gain"], w[f"{p}.ln3.bias"]))
    return layer_norm(x, w["fusion.dec.ln_f.gain"], w["fusion.dec.ln_f.bias"])


def fuse(h: np.ndarray, prompt: np.ndarray, w: FusionWeights,
         return_attention: bool = False) -> MultimodalFeatures:
    """Fused features ``Z`` with rows [prompt position, q_1, ..., q_{n_q}].

    The encoder sees ``h`` as an unordered token set (no positional
    encoding); the decoder input is the motif prompt followed by the
    learned queries.
    """
    h = np.asarray(h, dtype=np.float64)
    prompt = np.asarray(prompt, dtype=np.float64)
    d = w.config.d
    if h.ndim != 2 or h.shape[1] != d or h.shape[0] == 0:
        raise DimensionMismatch(f"token matrix shape {h.shape}, expected (n, {d})")
    if prompt.shape != (d,):
        raise DimensionMismatch(f"prompt shape {prompt.shape}, expected ({d},)")
    if not (np.isfinite(h).all() and np.isfinite(prompt).all()):
        raise NonFiniteWeights("non-finite values in fusion inputs")
    store: Optional[Dict[str, np.ndarray]] = {} if return_attention else None
    memory = encode(h, w, store)
    z = decode(prompt, memory, w, store)
    z.setflags(write=False)
    return MultimodalFeatures(z, store)


def extract_features(entity: Union[MolecularGraph, ProteinStructure], w: FusionWeights,
                     dictionary: Optional[MotifDictionary] = None,
                     return_attention: bool = False) -> MultimodalFeatures:
    """Featurize both modalities, build the motif prompt and fuse.

    Molecules need coordinates (2D graph plus 3D); proteins need a
    structure (sequence plus backbone) and a motif dictionary whose length
    matches ``motif.M_p``.
    """
    if isinstance(entity, MolecularGraph):
        a, b = featurize(entity, MOL2D), featurize(entity, MOL3D)
        prompt = motif_prompt(fcfp(entity, 2, w.config.n_mol_motifs), w["motif.M_m"])
    elif isinstance(entity, ProteinStructure):
        if dictionary is None:
            raise ValueError("protein features need a motif dictionary")
        a, b = featurize(entity, PROT1D), featurize(entity, PROT3D)
        prompt = motif_prompt(protein_motif_vector(entity.sequence, dictionary), w["motif.M_p"])
    else:
        raise TypeError(f"cannot extract features from {type(entity).__name__}")
    return fuse(project_concat(a, b, w), prompt, w, return_attention)
