from . import geometry
from .arm import (AGENT_STYLE, EXPERT_STYLE, ArmModel, ReachabilityError,
                  agent_arm, arm_for_role, expert_arm, fk_2link, ik_2link,
                  reachable)
from .episode import Episode, episode_path, load_episode, save_episode
from .render import locate_color, render, render_at_ee
from .rollout import (RolloutResult, Waypoint, check_success,
                      execute_waypoints, ik_clamped, scripted_agent,
                      scripted_episode, scripted_expert, scripted_rollout,
                      scripted_waypoints)
from .scene import SceneConfig, sample_scene, scene_from_dict, scene_to_dict
from .tasks import (BACKWARD, BENCHMARKS, FORWARD, TaskSpec, benchmark_family,
                    benchmark_tasks, push_direction_vector, task_by_id)
