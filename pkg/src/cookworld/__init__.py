"""Cooking text-games with KG observations and a hierarchical DQN agent."""

__version__ = "0.1.0"
