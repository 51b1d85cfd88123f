"""Translation runner: prompts a causal LM and dumps per-step attention."""

__version__ = "0.1.0"
