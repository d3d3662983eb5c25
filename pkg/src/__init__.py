# Ride-Sharing Network Planner
__version__ = "1.0.0"
