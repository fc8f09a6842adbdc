"""Payment system built from quantum lightning bolts and a stateful-contract ledger."""

__version__ = "0.1.0"
