"""Token encoder: trainable lookup embeddings, a bidirectional recurrent
pass over each section chunk, then a second bidirectional pass over the
chunk-concatenated sequence so every token sees cross-section context.

Citance chunks are encoded (they provide context) even though no task
ever predicts inside them. All modules run in float64.
"""

from __future__ import annotations

import torch
from torch import nn

from ..errors import ValidationError
from .config import ModelConfig
from .data import Chunk


class TokenEncoder(nn.Module):
    def __init__(self, vocab_size: int, config: ModelConfig):
        super().__init__()
        if config.d_ctx % 2:
            raise ValidationError("d_ctx must be even (bidirectional)")
        self.config = config
        self.embedding = nn.Embedding(vocab_size, config.d_tok)
        self.section_rnn = nn.GRU(config.d_tok, config.d_ctx // 2,
                                  bidirectional=True, batch_first=True)
        self.cross_rnn = nn.GRU(config.d_ctx, config.d_ctx // 2,
                                bidirectional=True, batch_first=True)
        self.double()

    def forward(self, chunks: list[Chunk]) -> torch.Tensor:
        """Encode one document's chunks into a (n_tokens, d_ctx) tensor in
        global token order."""
        nonempty = [c for c in chunks if c.token_ids]
        if not nonempty:
            raise ValidationError("cannot encode an empty document")
        per_chunk = []
        for chunk in nonempty:
            ids = torch.as_tensor(chunk.token_ids, dtype=torch.long)
            emb = self.embedding(ids).unsqueeze(0)
            out, _ = self.section_rnn(emb)
            per_chunk.append(out.squeeze(0))
        flat = torch.cat(per_chunk, dim=0).unsqueeze(0)
        ctx, _ = self.cross_rnn(flat)
        return ctx.squeeze(0)
