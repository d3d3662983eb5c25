# Queuing Network Module