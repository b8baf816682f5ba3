from . import data, evaluate, export, sweep, train

COMMANDS = (train, evaluate, sweep, data, export)

__all__ = ["COMMANDS"]
