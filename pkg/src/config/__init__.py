# Configuration Module