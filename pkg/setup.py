from setuptools import find_packages, setup
from typing import List

HYPHEN_E_DOT = '-e .'

def get_requirements(file_path: str) -> List[str]:
    """Read requirements from file and return as list."""
    requirements = []
    with open(file_path) as file_obj:
        requirements = file_obj.readlines()
        requirements = [req.replace("\n", "").strip() for req in requirements]
        requirements = [req for req in requirements if req and not req.startswith('#')]
        if HYPHEN_E_DOT in requirements:
            requirements.remove(HYPHEN_E_DOT)
    return requirements


setup(
    name='lorentz_interpolation_audit',
    version='0.1.0',
    description='Lorentz-scale function space norms, exact theorem predicates and interpolation audits',
    packages=find_packages(exclude=['tests', 'examples', 'examples.*']),
    install_requires=get_requirements('requirements.txt'),
    python_requires='>=3.9',
    entry_points={
        'console_scripts': ['lpq-audit=src.pipeline.cli:main'],
    },
)
