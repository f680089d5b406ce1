# -*- coding: utf-8 -*-
import setuptools

version = "1.0.0dev1"
short_description = "Forensic examiner for OpenClaw agent artifact stores"
with open("README.md") as readme:
    long_description = readme.read()

requires = [
    "PyYAML>=5.1",
]

setuptools.setup(
    name="clawex",
    version=version,
    description=short_description,
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=["clawex", "clawex.artifacts"],
    install_requires=requires,
    python_requires=">=3.8",
    entry_points={"console_scripts": ["clawex = clawex.cli:main"]},
    classifiers=[
        "Development Status :: 2 - Pre-Alpha",
        "Environment :: Console",
        "Intended Audience :: Information Technology",
        "Intended Audience :: Legal Industry",
        "License :: OSI Approved :: The Unlicense (Unlicense)",
        "Operating System :: OS Independent",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Security",
        "Topic :: System :: Recovery Tools",
    ],
    platforms=["OS Independent"],
    license="Unlicense",
    include_package_data=True,
    zip_safe=False,
)
