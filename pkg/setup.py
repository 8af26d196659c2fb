from setuptools import find_packages, setup

setup(
    name="fluofloq",
    version="0.1.0",
    install_requires=("numpy>=1.26", "scipy>=1.11"),
    extras_require={
        "test": ("pytest",),
        "docs": ("sphinx", "sphinx_rtd_theme", "myst_parser"),
    },
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    package_data={"fluofloq.recipes": ["*.json"]},
    entry_points={"console_scripts": ["fluofloq = fluofloq.cli:main"]},
    python_requires=">=3.12",
)
