"""
Label message passing network.

Input nodes are the feature positions (value token embedding plus position
embedding); label nodes start from learned label embeddings. Each round
passes messages feature -> label, then label -> label over the label mask,
and updates every label state with U(h, M): a residual add with layer norm
followed by a residual position-wise feedforward. Messages are multi-head
scaled dot-product attention, so the weighted sum over senders is the
aggregate M_i. A per-label readout vector gives one logit per label.
"""

from typing import List, Optional, Tuple

import numpy as np
import torch
from torch import nn

from ..utils.config import LampConfig


class UpdateFunction(nn.Module):
    """U(h, M) = FFN-residual(LayerNorm(h + M))."""

    def __init__(self, d_model: int, d_hidden: int, dropout: float):
        super().__init__()
        self.message_norm = nn.LayerNorm(d_model)
        self.feedforward = nn.Sequential(
            nn.Linear(d_model, d_hidden),
            nn.ReLU(),
            nn.Dropout(dropout),
            nn.Linear(d_hidden, d_model),
        )
        self.output_norm = nn.LayerNorm(d_model)
        self.dropout = nn.Dropout(dropout)

    def forward(self, state: torch.Tensor, message: torch.Tensor) -> torch.Tensor:
        state = self.message_norm(state + self.dropout(message))
        return self.output_norm(state + self.dropout(self.feedforward(state)))


class MessageRound(nn.Module):
    """One feature->label round followed by one label->label round."""

    def __init__(self, d_model: int, d_hidden: int, heads: int, dropout: float):
        super().__init__()
        self.feature_attention = nn.MultiheadAttention(d_model, heads, dropout=dropout, batch_first=True)
        self.feature_update = UpdateFunction(d_model, d_hidden, dropout)
        self.label_attention = nn.MultiheadAttention(d_model, heads, dropout=dropout, batch_first=True)
        self.label_update = UpdateFunction(d_model, d_hidden, dropout)


def label_mask_matrix(adjacency: np.ndarray, mode: str) -> np.ndarray:
    """Label->label message mask (True = edge) including self edges."""
    n_labels = adjacency.shape[0]
    if mode == "full":
        return np.ones((n_labels, n_labels), dtype=bool)
    if mode == "none":
        return np.eye(n_labels, dtype=bool)
    return np.asarray(adjacency, dtype=bool) | np.eye(n_labels, dtype=bool)


class LabelMessagePassing(nn.Module):
    def __init__(
        self,
        n_features: int,
        n_tokens: int,
        label_mask: np.ndarray,
        config: LampConfig,
    ):
        super().__init__()
        mask = torch.as_tensor(np.asarray(label_mask, dtype=bool))
        if mask.ndim != 2 or mask.shape[0] != mask.shape[1]:
            raise ValueError("label mask must be square")
        if not torch.equal(mask, mask.T) or not bool(mask.diagonal().all()):
            raise ValueError("label mask must be symmetric with a true diagonal")

        self.n_features = n_features
        self.n_tokens = n_tokens
        self.n_labels = mask.shape[0]
        d_model = config.d_model

        self.token_embedding = nn.Embedding(n_tokens, d_model, padding_idx=0)
        self.position_embedding = nn.Embedding(n_features, d_model)
        self.label_embedding = nn.Embedding(self.n_labels, d_model)
        self.rounds = nn.ModuleList(
            MessageRound(d_model, config.d_hidden, config.attention_heads, config.dropout)
            for _ in range(config.message_rounds)
        )
        self.readout_weight = nn.Parameter(torch.empty(self.n_labels, d_model))
        self.readout_bias = nn.Parameter(torch.zeros(self.n_labels))
        nn.init.xavier_uniform_(self.readout_weight)

        self.register_buffer("label_mask", mask, persistent=False)
        self.register_buffer("positions", torch.arange(n_features), persistent=False)
        self.register_buffer("label_ids", torch.arange(self.n_labels), persistent=False)

    def embed_inputs(self, tokens: torch.Tensor) -> torch.Tensor:
        """Input node states Z, shape (B, F, d_model)."""
        if tokens.ndim != 2 or tokens.shape[1] != self.n_features:
            raise ValueError(f"expected tokens of shape (B, {self.n_features}), got {tuple(tokens.shape)}")
        return self.token_embedding(tokens) + self.position_embedding(self.positions)

    def initial_label_states(self, batch_size: int) -> torch.Tensor:
        return self.label_embedding(self.label_ids).unsqueeze(0).expand(batch_size, -1, -1)

    def feature_round(
        self, t: int, labels: torch.Tensor, inputs: torch.Tensor, need_weights: bool = False
    ) -> Tuple[torch.Tensor, Optional[torch.Tensor]]:
        layer = self.rounds[t]
        message, weights = layer.feature_attention(
            labels, inputs, inputs, need_weights=need_weights, average_attn_weights=False
        )
        return layer.feature_update(labels, message), weights

    def label_round(
        self, t: int, labels: torch.Tensor, need_weights: bool = False
    ) -> Tuple[torch.Tensor, Optional[torch.Tensor]]:
        """Messages among label nodes; senders outside the mask get -inf logits."""
        layer = self.rounds[t]
        message, weights = layer.label_attention(
            labels,
            labels,
            labels,
            attn_mask=~self.label_mask,
            need_weights=need_weights,
            average_attn_weights=False,
        )
        return layer.label_update(labels, message), weights

    def logits(self, tokens: torch.Tensor, return_attention: bool = False):
        inputs = self.embed_inputs(tokens)
        labels = self.initial_label_states(tokens.shape[0])
        attention: List[Tuple[torch.Tensor, torch.Tensor]] = []
        for t in range(len(self.rounds)):
            labels, feature_weights = self.feature_round(t, labels, inputs, return_attention)
            labels, label_weights = self.label_round(t, labels, return_attention)
            if return_attention:
                attention.append((feature_weights, label_weights))
        out = (labels * self.readout_weight).sum(dim=-1) + self.readout_bias
        if return_attention:
            return out, attention
        return out

    def forward(self, tokens: torch.Tensor, return_attention: bool = False):
        """Per-label probabilities (B, n_labels); optionally per-round attention weights."""
        if return_attention:
            out, attention = self.logits(tokens, return_attention=True)
            return torch.sigmoid(out), attention
        return torch.sigmoid(self.logits(tokens))


def build_network(n_features: int, n_tokens: int, label_mask: np.ndarray, config: LampConfig) -> LabelMessagePassing:
    """Construct the network with parameters initialised from ``config.seed``."""
    torch.manual_seed(config.seed)
    return LabelMessagePassing(n_features, n_tokens, label_mask, config)
