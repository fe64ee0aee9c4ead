# Copyright (C) 2017 Marco Barisione
# Copyright (C) 2020 The objtrace authors
#
# Released under the terms of the GNU LGPL license version 2.1 or later.

# pylint: skip-file

from setuptools import setup

from objtrace import __version__

long_description = '''
objtrace mines the features shared by a corpus of correct solutions to a
block-based programming exercise, turns them into objective feedback and replays
the snapshots of student attempts to measure how accurate and how timely that
feedback is.

Given expert annotations of the same attempts, objtrace computes confusion
metrics, classifies the first detection of every objective, relates faulty
feedback to its impact on students, draws the state transition graphs of the
attempts and splits them into phases of active and idle time.
'''.strip()

# https://pypi.python.org/pypi?%3Aaction=list_classifiers
classifiers = [
    'Development Status :: 3 - Alpha',
    'Environment :: Console',
    'Intended Audience :: Education',
    'Intended Audience :: Science/Research',
    'License :: OSI Approved :: GNU Lesser General Public License v2 or later (LGPLv2+)',
    'Natural Language :: English',
    'Operating System :: OS Independent',
    'Programming Language :: Python :: 3',
    'Topic :: Education',
    'Topic :: Scientific/Engineering :: Information Analysis',
]

config = {
    # Info about the package:
    'name': 'objtrace',
    'description': 'Mine objective features from correct solutions and evaluate the '
                   'feedback they give on student traces',
    'long_description': long_description,
    'version': __version__,
    'author': 'The objtrace authors',
    'license': 'LPGL 2.1 or later',
    'platforms': ['Linux', 'macOS'],
    'classifiers': classifiers,

    # Installation stuff:
    'packages': ['objtrace'],
    'scripts': ['scripts/objtrace'],
    'package_data': {
        'objtrace': [
            'data/*.json',
            ],
        },
    'python_requires': '>=3.6',
    'install_requires': [
        'networkx>=2.1',
        ],
    'extras_require': {
        'dot': [
            'pydot>=1.2',
            ],
        },
}

setup(**config)
