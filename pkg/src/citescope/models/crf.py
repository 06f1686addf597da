"""Linear-chain CRF over the 17-tag IOBES alphabet with a hard legality
mask: illegal transitions (and illegal start/end tags) carry a large
negative potential, so decoded paths are always legal and the partition
function effectively sums over legal paths only.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from ..errors import ValidationError
from ..iobes import (TAGS, is_legal_end, is_legal_sequence, is_legal_start,
                     is_legal_transition)

# large but finite so masked gradients stay defined; contributions of
# masked paths underflow to zero in double precision
NEG_INF = -1e4


def legality_masks() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = len(TAGS)
    trans = np.zeros((n, n))
    for i, a in enumerate(TAGS):
        for j, b in enumerate(TAGS):
            if not is_legal_transition(a, b):
                trans[i, j] = NEG_INF
    start = np.array([0.0 if is_legal_start(t) else NEG_INF for t in TAGS])
    end = np.array([0.0 if is_legal_end(t) else NEG_INF for t in TAGS])
    return trans, start, end


class LinearChainCRF(nn.Module):
    def __init__(self):
        super().__init__()
        n = len(TAGS)
        self.transitions = nn.Parameter(torch.zeros(n, n, dtype=torch.float64))
        self.start_scores = nn.Parameter(torch.zeros(n, dtype=torch.float64))
        self.end_scores = nn.Parameter(torch.zeros(n, dtype=torch.float64))
        trans_mask, start_mask, end_mask = legality_masks()
        self.register_buffer("trans_mask", torch.from_numpy(trans_mask))
        self.register_buffer("start_mask", torch.from_numpy(start_mask))
        self.register_buffer("end_mask", torch.from_numpy(end_mask))

    def _potentials(self):
        return (self.transitions + self.trans_mask,
                self.start_scores + self.start_mask,
                self.end_scores + self.end_mask)

    def sequence_score(self, emissions: torch.Tensor,
                       tags: torch.Tensor) -> torch.Tensor:
        trans, start, end = self._potentials()
        score = start[tags[0]] + emissions[0, tags[0]]
        for t in range(1, len(tags)):
            score = score + trans[tags[t - 1], tags[t]] + \
                emissions[t, tags[t]]
        return score + end[tags[-1]]

    def log_partition(self, emissions: torch.Tensor) -> torch.Tensor:
        trans, start, end = self._potentials()
        alpha = start + emissions[0]
        for t in range(1, emissions.shape[0]):
            alpha = torch.logsumexp(alpha.unsqueeze(1) + trans, dim=0) + \
                emissions[t]
        return torch.logsumexp(alpha + end, dim=0)

    def log_likelihood(self, emissions: torch.Tensor,
                       tags: list[int]) -> torch.Tensor:
        """log p(tags | emissions); requires a legal gold sequence."""
        if len(tags) != emissions.shape[0]:
            raise ValidationError("tag/emission length mismatch")
        if not is_legal_sequence([TAGS[t] for t in tags]):
            raise ValidationError(f"illegal gold IOBES sequence: "
                                  f"{[TAGS[t] for t in tags]}")
        tags_t = torch.as_tensor(tags, dtype=torch.long)
        return self.sequence_score(emissions, tags_t) - \
            self.log_partition(emissions)

    @torch.no_grad()
    def viterbi(self, emissions: torch.Tensor) -> list[int]:
        """Best legal tag path; ties break toward the lowest tag index."""
        trans, start, end = self._potentials()
        em = emissions.detach().cpu().numpy()
        trans = trans.cpu().numpy()
        score = start.cpu().numpy() + em[0]
        back = []
        for t in range(1, em.shape[0]):
            cand = score[:, None] + trans  # prev x cur
            best_prev = np.argmax(cand, axis=0)  # first max: lowest index
            score = cand[best_prev, np.arange(cand.shape[1])] + em[t]
            back.append(best_prev)
        score = score + end.cpu().numpy()
        last = int(np.argmax(score))
        path = [last]
        for best_prev in reversed(back):
            path.append(int(best_prev[path[-1]]))
        return path[::-1]
