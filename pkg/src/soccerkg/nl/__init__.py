"""Natural-language questions over the soccer knowledge graphs."""

from .pipeline import AskConfig, AskOutcome, Engine, ask
from .repair import Repair, SurfaceIndex, repair_entities
from .schema_card import SchemaCard
from .synthesize import synthesize_answer
from .templates import CATEGORIES, NoTemplateError, RuleBackend, translate_rule

__all__ = [
    "CATEGORIES",
    "AskConfig",
    "AskOutcome",
    "Engine",
    "NoTemplateError",
    "Repair",
    "RuleBackend",
    "SchemaCard",
    "SurfaceIndex",
    "ask",
    "repair_entities",
    "synthesize_answer",
    "translate_rule",
]
