# Geometry Module