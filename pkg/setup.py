import pathlib

from setuptools import setup

here = pathlib.Path(__file__).parent.resolve()


long_description = (here / 'README.md').read_text(encoding='utf-8')


setup(
    name='lpqlab',
    version='0.1.0',
    description='Criteria, verdicts and norm estimates for weighted Laplace-type operators',
    long_description=long_description,
    long_description_content_type='text/markdown',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3 :: Only',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    keywords='Laplace transform, Stieltjes transform, Hardy operator, weighted inequalities',
    packages=['lpqlab'],
    python_requires='>=3.8, <4',
    install_requires=[
        'numpy',
        'scipy',
        'click>=8.0,<8.2',
        'wcwidth',
    ],
    extras_require={
        'dev': [
            'pytest',
            'pytest-cov',
        ],
    },
    entry_points={
        'console_scripts': [
            'lpqlab=lpqlab:main',
        ],
    },
)
