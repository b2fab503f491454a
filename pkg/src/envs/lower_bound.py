"""
The two-source construction where online source access cannot identify
the target's representation.

Both sources share latent dynamics; source 0 emits into R-blocks, source 1
into B-blocks, and the target emits every latent into either block with
probability 1/2. Two decoders that agree on R-blocks and swap the latents
of the B-blocks explain each source equally well.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.envs.comblock import block_emission
from src.envs.suites import TransferSuite, build_mixture_target
from src.mdp.block_mdp import BlockMdp
from src.mdp.layout import ObservationLayout, uniform_layout

HORIZON = 2
NUM_ACTIONS = 2
R_BLOCK = 0
B_BLOCK = 1


@dataclass(eq=False)
class LowerBoundFamily:
    """Sources, target and the two indistinguishable decoders."""
    suite: TransferSuite
    correct_labels: list[np.ndarray]
    permuted_labels: list[np.ndarray]

    @property
    def sources(self) -> list[BlockMdp]:
        return self.suite.sources

    @property
    def target(self) -> BlockMdp:
        return self.suite.target

    @property
    def layout(self) -> ObservationLayout:
        return self.target.layout

    def candidate_labels(self) -> list[list[np.ndarray]]:
        """Group labelings of both decoders, correct one first."""
        return [self.correct_labels, self.permuted_labels]


def build_lower_bound_family() -> LowerBoundFamily:
    """Build the fixed H=2, two-action construction.

    Step 0 has latents z1, z2 and step 1 has z3, z4. Action a1 sends z1 to z3
    and z2 to z4; action a2 does the opposite. Reaching z3 pays 1.
    """
    layout = uniform_layout(HORIZON, [0, 1, 0, 1], [R_BLOCK, R_BLOCK, B_BLOCK, B_BLOCK], 1)
    T = np.zeros((2, NUM_ACTIONS, 2))
    T[0, 0, 0] = 1.0
    T[0, 1, 1] = 1.0
    T[1, 1, 0] = 1.0
    T[1, 0, 1] = 1.0
    reward_values = (np.zeros((2, NUM_ACTIONS)), np.array([[1.0, 1.0], [0.0, 0.0]]))
    reward_probs = (np.zeros((2, NUM_ACTIONS)), np.array([[1.0, 1.0], [0.0, 0.0]]))

    sources = []
    for block in (R_BLOCK, B_BLOCK):
        emissions = tuple(block_emission(layout.step(h), np.array([block, block])) for h in range(HORIZON))
        sources.append(BlockMdp(
            horizon=HORIZON,
            num_actions=NUM_ACTIONS,
            layout=layout,
            transitions=(T,),
            emissions=emissions,
            reward_values=reward_values,
            reward_probs=reward_probs,
            initial=np.array([0.5, 0.5]),
            name=f"source-{'R' if block == R_BLOCK else 'B'}",
        ))
    suite = build_mixture_target(sources, [0.5, 0.5], name="target")
    suite.name = "lower-bound"
    correct = [np.array([0, 1, 0, 1]), np.array([0, 1, 0, 1])]
    permuted = [np.array([0, 1, 1, 0]), np.array([0, 1, 0, 1])]
    return LowerBoundFamily(suite=suite, correct_labels=correct, permuted_labels=permuted)
