"""The non-intrusive intelligibility predictor: 12 convolutional layers
(four blocks, each ending in a stride-3 frequency downsample), a
bidirectional LSTM, and a fully connected frame scorer with sigmoid
output; the utterance score is the global average of the frame scores.
This is the attention-free variant of the published assessment model;
load the converted pretrained checkpoint as a state dict.
"""
from __future__ import annotations

import numpy as np
import torch
from torch import nn

NUM_BINS = 257
_BLOCK_CHANNELS = (16, 32, 64, 128)


class FrameIntelligibilityModel(nn.Module):
    def __init__(self, num_bins: int = NUM_BINS):
        super().__init__()
        layers = []
        in_ch = 1
        for ch in _BLOCK_CHANNELS:
            layers += [
                nn.Conv2d(in_ch, ch, kernel_size=3, padding=1), nn.ReLU(),
                nn.Conv2d(ch, ch, kernel_size=3, padding=1), nn.ReLU(),
                nn.Conv2d(ch, ch, kernel_size=3, stride=(1, 3), padding=1), nn.ReLU(),
            ]
            in_ch = ch
        self.conv = nn.Sequential(*layers)
        freq_out = num_bins
        for _ in _BLOCK_CHANNELS:
            freq_out = (freq_out + 2 - 3) // 3 + 1  # stride-3 'same' shrink
        self.blstm = nn.LSTM(
            input_size=_BLOCK_CHANNELS[-1] * freq_out,
            hidden_size=128,
            bidirectional=True,
            batch_first=True,
        )
        self.fc = nn.Linear(256, 128)
        self.dropout = nn.Dropout(0.3)
        self.frame_score = nn.Linear(128, 1)

    def forward(self, spec: torch.Tensor) -> torch.Tensor:
        """(batch, frames, bins) magnitudes -> (batch, frames) scores."""
        x = spec.unsqueeze(1)  # (B, 1, T, F)
        x = self.conv(x)  # (B, C, T, F')
        x = x.permute(0, 2, 1, 3).flatten(2)  # (B, T, C*F')
        x, _ = self.blstm(x)
        x = self.dropout(torch.relu(self.fc(x)))
        return torch.sigmoid(self.frame_score(x)).squeeze(-1)


class ModelScorer:
    """Inference wrapper: feature matrix in, clipped utterance score out."""

    def __init__(self, checkpoint_path: str):
        self.model = FrameIntelligibilityModel()
        state = torch.load(checkpoint_path, map_location="cpu", weights_only=True)
        self.model.load_state_dict(state)
        self.model.eval()

    def score_features(self, features: np.ndarray) -> float:
        with torch.no_grad():
            spec = torch.from_numpy(np.ascontiguousarray(features)).float().unsqueeze(0)
            frame_scores = self.model(spec)[0]
            value = float(frame_scores.mean().item())
        if not np.isfinite(value):
            raise ValueError("model produced a non-finite score")
        return float(np.clip(value, 0.0, 1.0))
