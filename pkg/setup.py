from setuptools import find_packages, setup

setup(
    name="unfold",
    version="0.0.1",
    description="Footprint-weighted spring layouts of nearly planar graphs",
    packages=find_packages(exclude=["tests"]),
    license="AGPL-3.0-only",
    install_requires=[
        "attrs",
        "Jinja2",
        "toml",
        "logbook",
        "msgpack",
        "valideer",
        "humanize",
        "numpy",
        "scipy",
        "pandas",
        "joblib",
    ],
    extras_require={
        "test": [
            "pytest",
        ]
    },
    include_package_data=True,
    package_data={
        "unfold": ["templates/*.j2"],
    },
    entry_points={
        "console_scripts": [
            "unfold = unfold.cli:main",
        ]
    }
)
