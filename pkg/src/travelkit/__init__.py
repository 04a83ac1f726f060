"""travelkit: travel QA dataset pipeline, MCQ benchmark harness,
constraint-checked itinerary planning, and a tool-using planning agent."""

__version__ = "0.1.0"
DATA_FORMAT_VERSION = "1"
