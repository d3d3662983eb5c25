# Infrastructure Module