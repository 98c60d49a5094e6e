import os

from setuptools import find_packages, setup

try:
    with open(os.path.join(os.path.dirname(__file__), 'README.md'), encoding='utf-8') as f:
        long_description = f.read()
except OSError:
    long_description = ''


setup(
    name='singular-monge-ampere',
    version='1.0.0',
    description='Explicit barriers and a wide-stencil solver for singular Monge-Ampere equations',
    long_description=long_description,
    long_description_content_type='text/markdown',
    license='Apache Software License',

    python_requires='>=3.8',
    install_requires=[
        'Django>=3.2',
        'numpy>=1.20',
        'scipy>=1.7',
    ],
    extras_require={
        'test': ['pytest', 'hypothesis'],
    },
    packages=find_packages(exclude=['tests', 'tests.*']),
    include_package_data=True,
    entry_points="""
[console_scripts]
singular-ma=singular_monge_ampere.cli:main
""",
)
