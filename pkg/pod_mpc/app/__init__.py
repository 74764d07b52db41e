"""App exports"""

from .models import (
    AgentSelection,
    DescriptionEntry,
    JobReport,
    ResourceDescription,
    RiskEstimate,
    RiskParams,
    SelectionPolicy,
)
from .orchestrator import App, KeyringTaskSigner, TaskSigner
from .risk import monte_carlo_risk, risk_probability
from .selection import select_agents

__all__ = [
    "AgentSelection",
    "DescriptionEntry",
    "JobReport",
    "ResourceDescription",
    "RiskEstimate",
    "RiskParams",
    "SelectionPolicy",
    "App",
    "KeyringTaskSigner",
    "TaskSigner",
    "monte_carlo_risk",
    "risk_probability",
    "select_agents",
]
