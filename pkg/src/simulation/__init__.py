# Simulation Module