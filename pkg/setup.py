#!/usr/bin/env python3
"""
Setup script for the Ride-Sharing Network Planner
"""
from setuptools import setup, find_packages
import os

# Read README file
def read_readme():
    readme_path = os.path.join(os.path.dirname(__file__), 'README.md')
    if os.path.exists(readme_path):
        with open(readme_path, 'r', encoding='utf-8') as f:
            return f.read()
    return "Steady-state planning and simulation of multi-zone shared-ride fleets"

# Read requirements
def read_requirements():
    requirements_path = os.path.join(os.path.dirname(__file__), 'requirements.txt')
    if os.path.exists(requirements_path):
        with open(requirements_path, 'r') as f:
            return [
                line.strip() for line in f
                if line.strip() and not line.startswith('#') and not line.startswith('pytest')
            ]
    return []

setup(
    name="rideshare-planner",
    version="1.0.0",
    description="Steady-state planning and simulation of multi-zone shared-ride fleets",
    long_description=read_readme(),
    long_description_content_type="text/markdown",

    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    py_modules=["rideshare_planner"],
    include_package_data=True,

    install_requires=read_requirements(),
    extras_require={
        "test": ["pytest>=7.1.0", "pytest-mock>=3.8.0"],
    },

    entry_points={
        'console_scripts': [
            'rideshare-plan=rideshare_planner:main',
        ],
    },

    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],

    python_requires=">=3.9",

    keywords="ride-sharing queuing-network fleet-sizing rebalancing simulation transportation",
)
