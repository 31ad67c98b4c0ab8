# symbench/campaign/__init__.py

"""Config-driven benchmarking campaigns."""

from symbench.campaign.models import CampaignConfig, load_campaign_config, parse_campaign_config
from symbench.campaign.runner import CampaignResult, CampaignRunner

__all__ = [
    "CampaignConfig",
    "CampaignResult",
    "CampaignRunner",
    "load_campaign_config",
    "parse_campaign_config",
]
