"""
Block MDP simulation, policies and exact dynamic-programming oracles.
"""
from src.mdp.access import AccessCounter, EnvHandle, World
from src.mdp.block_mdp import BlockMdp
from src.mdp.dynamic_programming import (
    coverage_lambda_min,
    dp_optimal_value,
    dp_policy_value,
    latent_occupancy,
    observation_occupancy,
    occupancy_table,
    reachable_latents,
)
from src.mdp.episodes import (
    Trajectory,
    TrajectoryStep,
    generative_step,
    monte_carlo_return,
    roll_in,
    sample_episode,
)
from src.mdp.ground_truth import GroundTruthFeatures
from src.mdp.layout import ObservationLayout, StepLayout, uniform_layout
from src.mdp.policies import (
    DeterministicPolicy,
    GreedyPolicy,
    LatentPolicy,
    MarkovPolicy,
    MixturePolicy,
    Policy,
    RollInPolicy,
    TabularPolicy,
    UniformPolicy,
    roll_in_uniform,
)

__all__ = [
    "AccessCounter",
    "BlockMdp",
    "DeterministicPolicy",
    "EnvHandle",
    "GreedyPolicy",
    "GroundTruthFeatures",
    "LatentPolicy",
    "MarkovPolicy",
    "MixturePolicy",
    "ObservationLayout",
    "Policy",
    "RollInPolicy",
    "StepLayout",
    "TabularPolicy",
    "Trajectory",
    "TrajectoryStep",
    "UniformPolicy",
    "World",
    "coverage_lambda_min",
    "dp_optimal_value",
    "dp_policy_value",
    "generative_step",
    "latent_occupancy",
    "monte_carlo_return",
    "observation_occupancy",
    "occupancy_table",
    "reachable_latents",
    "roll_in",
    "roll_in_uniform",
    "sample_episode",
    "uniform_layout",
]
