from setuptools import setup, find_packages

setup(
    name='specstream',
    version='0.1.0',
    packages=find_packages(exclude=('tests', 'tests.*')),
    url='',
    license='',
    description='Streaming detection of transmission events in power spectral density measurements',
    python_requires='>=3.8',
    install_requires=[
        'numpy>=1.22',
        'scipy>=1.7',
        'matplotlib>=3.5',
        'pydantic>=2.0',
        'pandas>=1.4',
        'psutil>=5.9',
    ],
    entry_points={
        'console_scripts': ['specstream=src.specstream.main:entry_point'],
    },
)
