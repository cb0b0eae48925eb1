"""Python access to the curriculum PPO core."""

from ._core import (
    ConfigError,
    InvariantViolation,
    RunConfig,
    RuntimeFault,
    Trainer,
    VecEnv,
    compute_gae,
    default_reward_weights,
    evaluate_checkpoint,
    ppo_objective,
)

__all__ = [
    "ConfigError",
    "InvariantViolation",
    "RunConfig",
    "RuntimeFault",
    "Trainer",
    "VecEnv",
    "compute_gae",
    "default_reward_weights",
    "evaluate_checkpoint",
    "ppo_objective",
]
