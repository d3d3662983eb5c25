# Scenario Module