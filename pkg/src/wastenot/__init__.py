"""wastenot: campus food-waste dashboards plus a gamified food-saving campaign."""

__version__ = "0.1.0"
