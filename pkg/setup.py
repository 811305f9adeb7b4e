"""Setup script for qtl."""

from setuptools import setup, find_packages

setup(
    name="qtl",
    version="0.1.0",
    description="Quantum thermalization lab: exact numerics for equilibrium in small closed quantum systems",
    python_requires=">=3.10",
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    package_data={"qtl.presets": ["*.json"]},
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "pydantic>=2.6.0",
        "pydantic-settings>=2.1.0",
        "click>=8.1.0",
        "rich>=13.7.0",
        "python-dotenv>=1.0.0",
        "tenacity>=8.2.0",
        "structlog>=24.1.0",
    ],
    extras_require={
        "dev": ["pytest>=7.4.0"],
    },
    entry_points={
        "console_scripts": [
            "qtl=qtl.cli.commands:cli",
        ],
    },
)
