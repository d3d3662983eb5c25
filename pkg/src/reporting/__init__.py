# Reporting Module