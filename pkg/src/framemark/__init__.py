"""framemark: number-overlay prompting and evaluation tools for video temporal grounding."""

__version__ = "0.1.0"
