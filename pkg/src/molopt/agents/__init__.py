"""Analyst, scientist, verifier and reviewer agents over pluggable text backends."""

from molopt.agents.backends import Backend, BackendError, create_backend
from molopt.agents.messages import (
    ROLES,
    SCHEMA_IDS,
    AnalystReport,
    BackendRequest,
    BackendResponse,
    ConversationState,
    NoJsonError,
    ReviewerFeedback,
    SchemaError,
    ScientistProposal,
    TaskPrompt,
    UnknownRoleError,
    VerifierVerdict,
    extract_json,
    parse_structured_response,
)
from molopt.agents.prompts import (
    CATEGORIES,
    CATEGORY_NAMES,
    MissingPlaceholderError,
    load_template,
    render_prompt,
    template_hashes,
)
from molopt.agents.protocol import (
    Campaign,
    CampaignAborted,
    CampaignConfig,
    RoundAborted,
    analyst_phase,
    describe_molecule,
    run_campaign,
    task_description,
)

__all__ = [
    "AnalystReport",
    "Backend",
    "BackendError",
    "BackendRequest",
    "BackendResponse",
    "CATEGORIES",
    "CATEGORY_NAMES",
    "Campaign",
    "CampaignAborted",
    "CampaignConfig",
    "ConversationState",
    "MissingPlaceholderError",
    "NoJsonError",
    "ROLES",
    "ReviewerFeedback",
    "RoundAborted",
    "SCHEMA_IDS",
    "SchemaError",
    "ScientistProposal",
    "TaskPrompt",
    "UnknownRoleError",
    "VerifierVerdict",
    "analyst_phase",
    "create_backend",
    "describe_molecule",
    "extract_json",
    "load_template",
    "parse_structured_response",
    "render_prompt",
    "run_campaign",
    "task_description",
    "template_hashes",
]
