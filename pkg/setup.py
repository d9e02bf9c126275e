from setuptools import setup, find_packages

setup(
    name="phasekit",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "examples*"]),
    install_requires=[
        "numpy",
        "scipy",
        "pandas",
        "pydantic>=2",
        "python-dotenv",
    ],
    extras_require={"test": ["pytest", "pytest-cov"]},
    entry_points={"console_scripts": ["phasekit=phasekit.main:main"]},
)
