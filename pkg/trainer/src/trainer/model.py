"""NoPE transformer tagger with strictly causal attention.

No positional information enters the model: token embeddings only, and each
attention layer masks out all positions j > i. Padding positions are also
masked out of attention so batch padding cannot leak into real positions.
"""

import torch
from torch import nn


class CausalSelfAttention(nn.Module):
    def __init__(self, d, heads):
        super().__init__()
        if d % heads != 0:
            raise ValueError("width must be divisible by the head count")
        self.heads = heads
        self.qkv = nn.Linear(d, 3 * d)
        self.out = nn.Linear(d, d)

    def forward(self, x, pad_mask):
        b, n, d = x.shape
        q, k, v = self.qkv(x).chunk(3, dim=-1)

        def shape(t):
            return t.view(b, n, self.heads, d // self.heads).transpose(1, 2)

        q, k, v = shape(q), shape(k), shape(v)
        scores = q @ k.transpose(-2, -1) / (d // self.heads) ** 0.5
        causal = torch.ones(n, n, dtype=torch.bool, device=x.device).tril()
        allowed = causal[None, None] & pad_mask[:, None, None, :]
        scores = scores.masked_fill(~allowed, float("-inf"))
        attn = scores.softmax(dim=-1)
        out = (attn @ v).transpose(1, 2).reshape(b, n, d)
        return self.out(out)


class Block(nn.Module):
    def __init__(self, d, heads):
        super().__init__()
        self.attn = CausalSelfAttention(d, heads)
        self.norm1 = nn.LayerNorm(d)
        self.norm2 = nn.LayerNorm(d)
        self.ff = nn.Sequential(nn.Linear(d, 4 * d), nn.ReLU(),
                                nn.Linear(4 * d, d))

    def forward(self, x, pad_mask):
        x = x + self.attn(self.norm1(x), pad_mask)
        x = x + self.ff(self.norm2(x))
        return x


class SequenceTagger(nn.Module):
    """Per-position binary classifier over ^/a/b sequences."""

    def __init__(self, vocab_size=3, d=64, depth=1, heads=2, classes=2):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, d)
        self.blocks = nn.ModuleList(Block(d, heads) for _ in range(depth))
        self.norm = nn.LayerNorm(d)
        self.head = nn.Linear(d, classes)

    def forward(self, tokens, pad_mask=None):
        if pad_mask is None:
            pad_mask = torch.ones_like(tokens, dtype=torch.bool)
        x = self.embed(tokens)
        for block in self.blocks:
            x = block(x, pad_mask)
        return self.head(self.norm(x))
