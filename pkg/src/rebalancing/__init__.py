# Rebalancing Module