"""Over-the-air controller analysis: stability regions, control-signal MSE
and closed-loop simulation for wireless feedback loops."""

__version__ = "0.1.0"
