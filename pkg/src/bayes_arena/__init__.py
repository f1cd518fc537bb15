"""Bayesian target and skill selection for an autonomous MMORPG druid.

Exact discrete inference over two factored models picks who to act on and
what to cast; a tick-based combat simulator, a counting learner, a CLI, and
an HTTP session service wrap it into something you can play against.
"""

from .domains import BattleSnapshot, CharacterState
from .infer import (
    RankedActions,
    brute_force_skill_posterior,
    brute_force_target_posterior,
    joint_posterior,
    select_action,
    skill_given_target,
    skill_posterior,
    target_posterior,
)
from .learning import DecisionRecord, FitReport, evaluate, extract_records, fit, model_divergence, sample_generative
from .model import (
    ModelParams,
    SkillModel,
    TargetModel,
    build_skill_model,
    build_target_model,
    load_models,
    models_from_json,
    models_to_json,
    save_models,
)
from .perception import (
    History,
    PerceptionConfig,
    RawCharacter,
    build_snapshot,
    delta_hp,
    discretize_hp,
    distance_zone,
    imminent_death,
)
from .prob import (
    ConditionalTable,
    Distribution,
    Domain,
    argmax,
    kl_divergence,
    log_score,
    normalize,
    uniform,
)
from .sim import (
    BotPolicy,
    EpisodeLog,
    ScriptedRandomPolicy,
    World,
    builtin_setup,
    read_log,
    replay,
    run_episode,
    write_log,
)

__version__ = "0.1.0"
