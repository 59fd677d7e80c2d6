from pathlib import Path

from setuptools import find_packages, setup

cwd = Path(__file__).parent
description_file = cwd / "doc" / "pypi-description.md"
if description_file.is_file():
    long_description = description_file.read_text()
else:
    long_description = ""

setup(
    name="frnet",
    version="0.1.0",
    description="FFT residual blocks with trainable frequency-domain masks for gaze estimation",
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="MIT",
    packages=find_packages(exclude=["tests"]),
    python_requires=">=3.8",
    install_requires=["numpy", "scipy", "matplotlib", "numdifftools"],
    entry_points={"console_scripts": ["frnet=frnet.cli.main:main"]},
)
