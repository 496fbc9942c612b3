"""A tiny deterministic text classifier and its on-disk bundle format.

A model bundle is a directory holding ``config.json`` and ``weights.pt``.
The network is intentionally simple: a hashed-whitespace tokenizer, an
embedding table, a stack of per-token feed-forward blocks, masked mean
pooling, and a linear classification head. Because no operation mixes
tokens across examples, per-example outputs do not depend on how a batch
is composed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
from torch import nn

from .errors import ModelLoadError

BUNDLE_FORMAT = "tiny-text-classifier"
CONFIG_FILE = "config.json"
WEIGHTS_FILE = "weights.pt"

# Reserved rows appended after the hashed vocabulary.
BOS_OFFSET = 0
EOS_OFFSET = 1
NUM_SPECIALS = 2


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters stored in the bundle."""

    vocab_size: int = 512
    hidden_size: int = 16
    num_layers: int = 2
    num_labels: int = 3
    use_specials: bool = False

    def __post_init__(self) -> None:
        for field in ("vocab_size", "hidden_size", "num_layers", "num_labels"):
            value = getattr(self, field)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ModelLoadError(f"{field} must be a positive integer")

    @property
    def depth(self) -> int:
        """Highest valid embedding-layer index (0 is the embedding table)."""
        return self.num_layers


def token_id(token: str, vocab_size: int) -> int:
    """Stable hash of a whitespace token into the vocabulary."""
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % vocab_size


class TinyTextClassifier(nn.Module):
    """Per-token MLP encoder with masked mean pooling and a linear head."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        table_size = config.vocab_size + (NUM_SPECIALS if config.use_specials else 0)
        self.embed = nn.Embedding(table_size, config.hidden_size)
        self.blocks = nn.ModuleList(
            _Block(config.hidden_size) for _ in range(config.num_layers)
        )
        self.head = nn.Linear(config.hidden_size, config.num_labels)

    def encode(self, text: str) -> tuple[list[int], list[bool]]:
        """Token ids for ``text`` plus a per-position word/special flag."""
        ids = [token_id(tok, self.config.vocab_size) for tok in text.split()]
        is_word = [True] * len(ids)
        if self.config.use_specials:
            bos = self.config.vocab_size + BOS_OFFSET
            eos = self.config.vocab_size + EOS_OFFSET
            ids = [bos, *ids, eos]
            is_word = [False, *is_word, False]
        return ids, is_word

    def hidden_states(
        self, input_ids: torch.Tensor
    ) -> list[torch.Tensor]:
        """All per-layer token vectors; index 0 is the embedding output."""
        states = [self.embed(input_ids)]
        for block in self.blocks:
            states.append(block(states[-1]))
        return states

    def forward(
        self, input_ids: torch.Tensor, pool_mask: torch.Tensor
    ) -> torch.Tensor:
        """Class logits per example, shape (batch, num_labels)."""
        final = self.hidden_states(input_ids)[-1]
        return self.head(masked_mean(final, pool_mask))


class _Block(nn.Module):
    def __init__(self, hidden_size: int):
        super().__init__()
        self.linear = nn.Linear(hidden_size, hidden_size)
        self.norm = nn.LayerNorm(hidden_size)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.norm(torch.tanh(self.linear(x)))


def masked_mean(states: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Mean of ``states`` over positions where ``mask`` is true.

    ``states`` is (batch, tokens, hidden); ``mask`` is (batch, tokens) and
    must select at least one position per example.
    """
    weights = mask.to(states.dtype).unsqueeze(-1)
    totals = (states * weights).sum(dim=1)
    counts = weights.sum(dim=1)
    return totals / counts


def new_model(config: ModelConfig, init_seed: int) -> TinyTextClassifier:
    """Freshly initialized model; weights depend only on ``init_seed``."""
    with torch.random.fork_rng():
        torch.manual_seed(init_seed)
        model = TinyTextClassifier(config)
    model.eval()
    return model


def save_bundle(model: TinyTextClassifier, bundle_dir: str | Path) -> Path:
    bundle_dir = Path(bundle_dir)
    bundle_dir.mkdir(parents=True, exist_ok=True)
    config = {"format": BUNDLE_FORMAT, **asdict(model.config)}
    (bundle_dir / CONFIG_FILE).write_text(
        json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    torch.save(model.state_dict(), bundle_dir / WEIGHTS_FILE)
    return bundle_dir


def load_bundle(bundle_dir: str | Path) -> TinyTextClassifier:
    bundle_dir = Path(bundle_dir)
    config_path = bundle_dir / CONFIG_FILE
    weights_path = bundle_dir / WEIGHTS_FILE
    if not config_path.is_file():
        raise ModelLoadError(f"no model config at {config_path}")
    if not weights_path.is_file():
        raise ModelLoadError(f"no model weights at {weights_path}")
    try:
        raw = json.loads(config_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelLoadError(f"{config_path}: invalid JSON ({exc.msg})")
    if not isinstance(raw, dict) or raw.get("format") != BUNDLE_FORMAT:
        raise ModelLoadError(
            f"{config_path}: expected a {BUNDLE_FORMAT!r} bundle"
        )
    fields = {k: v for k, v in raw.items() if k != "format"}
    try:
        config = ModelConfig(**fields)
    except TypeError as exc:
        raise ModelLoadError(f"{config_path}: {exc}")
    model = TinyTextClassifier(config)
    try:
        state = torch.load(weights_path, map_location="cpu", weights_only=True)
        model.load_state_dict(state)
    except (RuntimeError, ValueError) as exc:
        raise ModelLoadError(f"{weights_path}: {exc}")
    model.eval()
    return model
