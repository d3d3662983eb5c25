# Data Models Module