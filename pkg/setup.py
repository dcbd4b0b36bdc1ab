"""Installation script."""

from setuptools import find_packages
from setuptools import setup
import os

this_directory = os.path.abspath(os.path.dirname(__file__))
with open(os.path.join(this_directory, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

setup(
    name='flowaug-lab',
    version='0.1.0',
    description=(
        'Subgroup discrepancy metrics and flow-based augmentation for image '
        'classifiers.'),
    license='MIT license',
    long_description=long_description,
    long_description_content_type='text/markdown',
    keywords=[
        'ai',
        'machine learning',
        'normalizing flows',
        'data augmentation',
        'spurious correlation',
        'fairness',
        'python',
    ],
    packages=(
        ['flowaug_demos', 'flowaug'] +
        ['flowaug_demos.' + x for x in find_packages('flowaug_demos')] +
        ['flowaug.' + x for x in find_packages('flowaug')]
    ),
    install_requires=[
        'numpy',
        'scipy',
        'pandas',
        'torch',
        'Pillow',
        'matplotlib',
        'imageio',
        'absl-py',
        'dm-env',
    ],
    tests_require=[
        'pytest',
    ],
    entry_points={
        'console_scripts': ['flowaug=flowaug_demos.main:run_main'],
    },
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Operating System :: POSIX :: Linux',
        'Operating System :: MacOS :: MacOS X',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Topic :: Scientific/Engineering',
    ],
)
