"""Plan search over scene graphs with an evaluator-guided tree of generated steps."""

from .dsl import Plan, parse_plan, render_plan
from .evaluator import Verdict, evaluate_candidate
from .interpreter import execute_plan, format_answer
from .scene import SceneGraph, load_scene, scene_from_document
from .search import SearchConfig, SearchResult, solve

__all__ = [
    "Plan",
    "SceneGraph",
    "SearchConfig",
    "SearchResult",
    "Verdict",
    "evaluate_candidate",
    "execute_plan",
    "format_answer",
    "load_scene",
    "parse_plan",
    "render_plan",
    "scene_from_document",
    "solve",
]
