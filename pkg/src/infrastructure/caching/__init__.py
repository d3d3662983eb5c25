# Caching Infrastructure Module