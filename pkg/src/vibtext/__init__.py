"""Turn bearing vibration recordings into LLM fault-diagnosis corpora and score served models on them."""

__version__ = "0.1.0"
