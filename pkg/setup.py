from setuptools import setup, find_packages

LONG_DESCRIPTION = open("README.md", "r").read()

REQUIREMENTS = [
    "numpy>=1.22.0",
    "scipy>=1.8.0",
    "pytest>=7.2.2",
    "pytest-mock>=3.0.0",
    "hypothesis>=6.0.0",
    "setuptools>=50.3.2",
    "tox==3.25.0",
]

setup(
    name="cloneflip",
    version="0.1.0",
    packages=find_packages(),
    description="Simulator for optimal quantum cloning, flipping and LOCC restoring of a qubit",
    long_description=LONG_DESCRIPTION,
    long_description_content_type="text/markdown",
    license="Apache 2.0",
    install_requires=REQUIREMENTS,
    entry_points={
        "console_scripts": [
            "cloneflip=cloneflip.cli:main",
        ],
    },
    keywords="quantum cloning universal not bell measurement tomography simulation",
    classifiers=[
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python",
        "Topic :: Scientific/Engineering :: Physics",
    ],
)
