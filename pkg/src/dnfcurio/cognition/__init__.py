"""The curiosity architecture built from field-core primitives."""
from .architecture import Architecture, Command, Event, GoalPoint, GoalRecord, Phase
from .hebbian import DmpNeurons, hebbian_update

__all__ = ["Architecture", "Command", "DmpNeurons", "Event", "GoalPoint", "GoalRecord", "Phase", "hebbian_update"]
