#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
downclosed

Online selection under downward-closed constraints: a secretary algorithm
for XOS objectives, the layered hardness constructions for prophet
inequalities and stochastic probing, and exact oracles for tiny instances.

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import inspect
import os
from setuptools import setup, find_packages


def get_package_data():
    """
    Returns a list of all files needed for the installation relative to the
    "downclosed" subfolder.
    """
    filenames = []
    # The downclosed root dir.
    root_dir = os.path.join(os.path.dirname(os.path.abspath(
        inspect.getfile(inspect.currentframe()))), "downclosed")
    # Recursively include all files in these folders:
    folders = [os.path.join(root_dir, "tests", "data")]
    for folder in folders:
        for directory, _, files in os.walk(folder):
            for filename in files:
                # Exclude hidden files.
                if filename.startswith("."):
                    continue
                filenames.append(os.path.relpath(
                    os.path.join(directory, filename),
                    root_dir))
    return filenames


setup_config = dict(
    name="downclosed",
    version="0.1.0",
    description="Online selection under downward-closed constraints",
    packages=find_packages(exclude=["examples", "examples.*"]),
    license="GNU General Public License, version 3 (GPLv3)",
    platforms="OS Independent",
    python_requires=">=3.9",
    install_requires=[
        "progressbar",
        "numpy",
        "scipy",
        "colorama",
        "matplotlib",
        "joblib",
        "lxml",
        "prettytable",
        "pytest",
        "mock",
        "hypothesis"],
    package_data={
        "downclosed": get_package_data()},
    entry_points={
        # Register the console scripts.
        "console_scripts": [
            "downclosed = downclosed.scripts.downclosed_cli:main"
        ]
    }
)


if __name__ == "__main__":
    setup(**setup_config)
