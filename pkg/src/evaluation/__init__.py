# Evaluation Module