# -*- coding: utf-8 -*-
from setuptools import find_packages, setup

setup(
    name='bdhsic',
    version='0.1.0',
    author='bdhsic developers',
    packages=find_packages(),
    license='Apache License 2.0',
    description='Backdoor-adjusted HSIC tests of causal effects',
    long_description=open('README.rst').read(),
    install_requires=[
        'numpy>=1.17',
        'pandas>=1.0',
        'scipy>=1.10',
        'scikit-learn>=1.0',
    ],
    extras_require={
        'test': ['hypothesis>=6.0'],
    },
    tests_require=['hypothesis>=6.0'],
    test_suite='bdhsic',
    entry_points={
        'console_scripts': ['bdhsic=bdhsic.harness.cli:main'],
    },
    keywords=['causal inference', 'hsic', 'kernel tests', 'statistics'],
    classifiers=[
          'Development Status :: 4 - Beta',
          'Environment :: Console',
          'Intended Audience :: Developers',
          'Intended Audience :: Science/Research',
          'License :: OSI Approved :: Apache Software License',
          'Operating System :: MacOS :: MacOS X',
          'Operating System :: Microsoft :: Windows',
          'Operating System :: POSIX',
          'Programming Language :: Python',
          'Topic :: Scientific/Engineering :: Mathematics',
          'Topic :: Software Development :: Libraries'
          ],
)
