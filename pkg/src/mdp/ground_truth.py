"""
Ground-truth low-rank factorization of a Block MDP.
"""
from __future__ import annotations

import numpy as np

from src.errors import InvalidParameter
from src.mdp.block_mdp import BlockMdp


class GroundTruthFeatures:
    """The true embeddings ``phi*`` and ``mu*`` of a Block MDP.

    ``phi*_h(s, a)`` is the one-hot vector of ``(decoded latent, action)`` and
    ``mu*_h(s')[(z, a)] = sum_z' T_h(z' | z, a) o_{h+1}(s' | z')``.
    """

    def __init__(self, env: BlockMdp) -> None:
        self.env = env

    def dimension(self, h: int) -> int:
        return self.env.latent_counts[h] * self.env.num_actions

    def phi(self, h: int, obs: int, action: int) -> np.ndarray:
        vector = np.zeros(self.dimension(h))
        vector[self.env.layout.decode(h, obs) * self.env.num_actions + action] = 1.0
        return vector

    def phi_matrix(self, h: int) -> np.ndarray:
        """All features at step ``h`` as an ``(O_h, A, d_h)`` tensor."""
        latent = self.env.layout.latent_of_obs(h)
        A = self.env.num_actions
        tensor = np.zeros((latent.size, A, self.dimension(h)))
        for a in range(A):
            tensor[np.arange(latent.size), a, latent * A + a] = 1.0
        return tensor

    def mu_matrix(self, h: int) -> np.ndarray:
        """All next-state embeddings of step ``h`` as an ``(O_{h+1}, d_h)`` matrix."""
        if h < 0 or h >= self.env.horizon - 1:
            raise InvalidParameter(f"no transition leaves step {h}")
        T = self.env.transitions[h]
        per_pair = T.reshape(-1, T.shape[2]) @ self.env.emissions[h + 1]
        return per_pair.T

    def mu(self, h: int, next_obs: int) -> np.ndarray:
        return self.mu_matrix(h)[next_obs]

    def kernel(self, h: int) -> np.ndarray:
        """``phi*^T mu*`` as an ``(O_h, A, O_{h+1})`` tensor."""
        return self.phi_matrix(h) @ self.mu_matrix(h).T
