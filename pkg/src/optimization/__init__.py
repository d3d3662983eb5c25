# Design Optimization Module
